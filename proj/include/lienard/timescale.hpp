#pragma once

// Periodic time scales, their discretization, and Δ-calculus on sampled
// periodic functions.
//
// A time scale is stored as the canonical list of cells covering one period
// [0, T). Cells are closed intervals [lo, hi] (lo < hi <= T) or isolated
// points {t}. An interval with hi == T continues into the next period, which
// is how the real line is represented: TimeScale::real_line(T) == {[0, T]}.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lienard {

struct Cell {
  double lo = 0.0;
  double hi = 0.0;

  bool is_point() const { return lo == hi; }
  bool operator==(const Cell&) const = default;
};

std::string to_string(const Cell& cell);

class TimeScale {
 public:
  /// Normalizes the cell list: sorts, merges overlapping or touching cells,
  /// and drops points already covered by an interval. Throws ConfigError if
  /// the result is empty, leaves [0, T), or does not contain 0.
  TimeScale(double period, std::vector<Cell> cells);

  static TimeScale real_line(double period);
  /// Purely discrete scale with the given points in [0, T); must include 0.
  static TimeScale discrete(std::vector<double> points, double period);

  double period() const { return period_; }
  std::span<const Cell> cells() const { return cells_; }
  bool is_discrete() const;

  /// Index of the cell containing t (reduced mod T), snapping to the nearest
  /// cell when within `tol`. Empty if t is in a gap.
  std::optional<std::size_t> locate(double t, double tol = 0.0) const;
  /// Nearest cell to t mod T, for diagnostics.
  std::size_t nearest_cell(double t) const;
  /// Default membership tolerance for user supplied times: 1e-9 * T.
  double membership_tolerance() const { return 1e-9 * period_; }

  std::string describe() const;

  bool operator==(const TimeScale&) const = default;

 private:
  double period_;
  std::vector<Cell> cells_;
};

/// Forward jump σ(t) = inf{s ∈ 𝕋 : s > t}, with σ(t) = t at right-dense t.
/// Throws DomainError when t is not in the time scale.
double sigma(const TimeScale& ts, double t);
/// Graininess μ(t) = σ(t) - t.
double graininess(const TimeScale& ts, double t);

/// Sample nodes of one period. Every isolated point and interval endpoint
/// in [0, T) is a node; interval interiors are split uniformly with spacing
/// at most dt_max. Node i is followed by node i+1, and the last node by
/// node 0 of the next period.
class Mesh {
 public:
  static std::shared_ptr<const Mesh> build(const TimeScale& ts, double dt_max);
  /// Mesh with spacing period / 256 in every interval cell.
  static std::shared_ptr<const Mesh> build(const TimeScale& ts);

  const TimeScale& timescale() const { return timescale_; }
  double period() const { return timescale_.period(); }
  std::size_t size() const { return times_.size(); }
  double dt_max() const { return dt_max_; }

  double time(std::size_t i) const { return times_[i]; }
  std::span<const double> times() const { return times_; }
  /// Distance to the following node, wrapping to t_0 + T after the last.
  double step(std::size_t i) const { return steps_[i]; }
  std::span<const double> steps() const { return steps_; }
  /// True when the node is right-scattered in 𝕋 (isolated point, or the
  /// top of an interval followed by a gap).
  bool right_scattered(std::size_t i) const { return scattered_[i] != 0; }
  double graininess(std::size_t i) const { return right_scattered(i) ? steps_[i] : 0.0; }
  std::size_t next(std::size_t i) const { return i + 1 == size() ? 0 : i + 1; }
  std::size_t cell_of(std::size_t i) const { return cell_[i]; }

  /// Node at time t (mod T) within tol, if any.
  std::optional<std::size_t> find_node(double t, double tol) const;

  /// Node index map i -> index of t_i - r. Throws ConfigError when the delay
  /// does not map the node set into itself.
  std::vector<std::size_t> delay_map(double delay) const;

  bool operator==(const Mesh& other) const;

 private:
  Mesh(TimeScale ts, double dt_max);

  TimeScale timescale_;
  double dt_max_;
  std::vector<double> times_;
  std::vector<double> steps_;
  std::vector<char> scattered_;
  std::vector<std::size_t> cell_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// T-periodic function sampled at the nodes of a mesh. Between two nodes of
/// one interval cell the function is the linear interpolant.
class GridFunction {
 public:
  GridFunction(MeshPtr mesh, std::vector<double> values);

  static GridFunction constant(MeshPtr mesh, double c);
  static GridFunction sample(MeshPtr mesh, const std::function<double(double)>& f);

  const MeshPtr& mesh_ptr() const { return mesh_; }
  const Mesh& mesh() const { return *mesh_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& data() { return values_; }

  /// Value at any s ∈ 𝕋 (reduced mod T).
  double operator()(double s) const;

  double min() const;
  double max() const;
  double sup_norm() const;

  GridFunction map(const std::function<double(double)>& f) const;
  bool compatible(const GridFunction& other) const;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double k);
  GridFunction& operator+=(double k);

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
/// Pointwise product.
GridFunction operator*(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double k, GridFunction a);
GridFunction operator+(GridFunction a, double k);

/// Quadrature used on interval cells. Isolated points always contribute
/// μ(t) f(t).
///
/// trapezoid:   exact for the piecewise-linear interpolant of f.
/// forward_sum: Σ step_i f_i, the exact Δ-integral of the node set viewed
///              as a discrete time scale. It is the inverse of
///              delta_derivative (telescoping is exact), so the fixed-point
///              operators use it.
enum class Quadrature { trapezoid, forward_sum };

/// x^Δ at every node: (x(next) - x(t_i)) / step_i. At right-scattered nodes
/// this is the exact quotient (x(σ(t)) - x(t)) / μ(t); at right-dense nodes
/// a forward difference inside the cell.
GridFunction delta_derivative(const GridFunction& x);

/// ∫_from^to f(s) Δs for from <= to, both in 𝕋 (times are reduced mod T and
/// whole periods are counted). Throws DomainError for endpoints outside 𝕋.
double delta_integral(const GridFunction& f, double from, double to,
                      Quadrature rule = Quadrature::trapezoid);
/// ∫_0^T f(s) Δs.
double period_integral(const GridFunction& f, Quadrature rule = Quadrature::trapezoid);
/// Cumulative integral s -> ∫_0^{t_i} f at every node (value 0 at node 0).
std::vector<double> cumulative_integral(const GridFunction& f, Quadrature rule);

/// (shift x)(t) = x(t - r) with periodic wraparound.
GridFunction shift(const GridFunction& x, double delay);

}  // namespace lienard
