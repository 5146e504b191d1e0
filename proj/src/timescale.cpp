#include "lienard/timescale.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "lienard/errors.hpp"

namespace lienard {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

// Splits t into k*T + r with r in [0, T). Values of r within tol of T are
// folded onto the start of the next period.
std::pair<double, double> reduce(double t, double period, double tol) {
  double k = std::floor(t / period);
  double r = t - k * period;
  if (r < 0.0) {
    r += period;
    k -= 1.0;
  }
  if (r >= period - tol) {
    r = 0.0;
    k += 1.0;
  }
  return {k, r};
}

}  // namespace

std::string to_string(const Cell& cell) {
  if (cell.is_point()) return "{" + fmt(cell.lo) + "}";
  return "[" + fmt(cell.lo) + ", " + fmt(cell.hi) + "]";
}

// ---------------------------------------------------------------------------
// TimeScale

TimeScale::TimeScale(double period, std::vector<Cell> cells) : period_(period) {
  if (!(period > 0.0) || !std::isfinite(period))
    throw ConfigError("time scale period must be positive and finite, got " + fmt(period));
  for (const Cell& c : cells) {
    if (!std::isfinite(c.lo) || !std::isfinite(c.hi) || c.lo > c.hi)
      throw ConfigError("malformed cell " + to_string(c));
    if (c.lo < 0.0) throw ConfigError("cell " + to_string(c) + " starts before 0");
    if (c.is_point() ? c.lo >= period : c.hi > period)
      throw ConfigError("cell " + to_string(c) + " does not fit in one period [0, " +
                        fmt(period) + ")");
  }
  if (cells.empty()) throw ConfigError("time scale has no cells");

  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  for (const Cell& c : cells) {
    if (!cells_.empty() && c.lo <= cells_.back().hi) {
      cells_.back().hi = std::max(cells_.back().hi, c.hi);
    } else {
      cells_.push_back(c);
    }
  }
  // [lo, T] already contains T, hence 0 of the next period.
  if (!cells_.back().is_point() && cells_.back().hi == period && cells_.front().lo > 0.0)
    cells_.insert(cells_.begin(), Cell{0.0, 0.0});
  if (cells_.front().lo != 0.0)
    throw ConfigError("time scale must contain 0; first cell is " + to_string(cells_.front()));
}

TimeScale TimeScale::real_line(double period) { return TimeScale(period, {Cell{0.0, period}}); }

TimeScale TimeScale::discrete(std::vector<double> points, double period) {
  std::vector<Cell> cells;
  cells.reserve(points.size());
  for (double t : points) cells.push_back(Cell{t, t});
  return TimeScale(period, std::move(cells));
}

bool TimeScale::is_discrete() const {
  return std::all_of(cells_.begin(), cells_.end(), [](const Cell& c) { return c.is_point(); });
}

std::optional<std::size_t> TimeScale::locate(double t, double tol) const {
  if (!std::isfinite(t)) return std::nullopt;
  const double r = reduce(t, period_, tol).second;
  auto it = std::upper_bound(cells_.begin(), cells_.end(), r + tol,
                             [](double v, const Cell& c) { return v < c.lo; });
  if (it != cells_.begin()) {
    const auto idx = static_cast<std::size_t>(std::prev(it) - cells_.begin());
    if (r <= cells_[idx].hi + tol) return idx;
  }
  return std::nullopt;
}

std::size_t TimeScale::nearest_cell(double t) const {
  const double r = reduce(t, period_, 0.0).second;
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    double d = r < c.lo ? c.lo - r : (r > c.hi ? r - c.hi : 0.0);
    if (i == 0) d = std::min(d, period_ - r);  // wraparound to 0
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

std::string TimeScale::describe() const {
  std::string out = "period=" + fmt(period_) + " cells=";
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (i) out += " U ";
    out += to_string(cells_[i]);
  }
  return out;
}

namespace {

[[noreturn]] void throw_not_member(const TimeScale& ts, double t) {
  throw DomainError("time " + fmt(t) + " is not in the time scale; nearest cell is " +
                    to_string(ts.cells()[ts.nearest_cell(t)]));
}

struct JumpInfo {
  bool right_dense;
  double base;  // snapped position of t within its period
  double next;  // start of the following cell, T for the last one
  double period_index;
};

JumpInfo classify(const TimeScale& ts, double t) {
  const double tol = ts.membership_tolerance();
  const auto cell = ts.locate(t, tol);
  if (!cell) throw_not_member(ts, t);
  const double period = ts.period();
  const auto [k, r] = reduce(t, period, tol);
  const Cell& c = ts.cells()[*cell];
  const bool at_top = c.is_point() || std::abs(r - c.hi) <= tol;
  const auto following = *cell + 1;
  const double next = following < ts.cells().size() ? ts.cells()[following].lo : period;
  if (!c.is_point() && (!at_top || c.hi == period)) return {true, r, r, k};
  return {false, c.hi, next, k};
}

}  // namespace

double sigma(const TimeScale& ts, double t) {
  const JumpInfo j = classify(ts, t);
  if (j.right_dense) return t;
  return j.period_index * ts.period() + j.next;
}

double graininess(const TimeScale& ts, double t) {
  const JumpInfo j = classify(ts, t);
  return j.right_dense ? 0.0 : j.next - j.base;
}

// ---------------------------------------------------------------------------
// Mesh

Mesh::Mesh(TimeScale ts, double dt_max) : timescale_(std::move(ts)), dt_max_(dt_max) {}

std::shared_ptr<const Mesh> Mesh::build(const TimeScale& ts) {
  return build(ts, ts.period() / 256.0);
}

std::shared_ptr<const Mesh> Mesh::build(const TimeScale& ts, double dt_max) {
  if (!(dt_max > 0.0) || !std::isfinite(dt_max))
    throw ConfigError("mesh spacing must be positive, got " + fmt(dt_max));
  std::shared_ptr<Mesh> mesh(new Mesh(ts, dt_max));
  const double period = ts.period();
  const auto cells = ts.cells();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    if (cell.is_point()) {
      mesh->times_.push_back(cell.lo);
      mesh->scattered_.push_back(1);
      mesh->cell_.push_back(c);
      continue;
    }
    const double len = cell.hi - cell.lo;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(len / dt_max - 1e-9)));
    for (std::size_t k = 0; k < n; ++k) {
      mesh->times_.push_back(cell.lo + static_cast<double>(k) * len / static_cast<double>(n));
      mesh->scattered_.push_back(0);
      mesh->cell_.push_back(c);
    }
    if (cell.hi < period) {
      mesh->times_.push_back(cell.hi);
      mesh->scattered_.push_back(1);
      mesh->cell_.push_back(c);
    }
  }
  const std::size_t count = mesh->times_.size();
  mesh->steps_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double succ = i + 1 < count ? mesh->times_[i + 1] : period + mesh->times_[0];
    mesh->steps_[i] = succ - mesh->times_[i];
  }
  return mesh;
}

std::optional<std::size_t> Mesh::find_node(double t, double tol) const {
  const double period = this->period();
  const double r = reduce(t, period, tol).second;
  auto it = std::lower_bound(times_.begin(), times_.end(), r);
  std::optional<std::size_t> best;
  double best_dist = std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t i, double d) {
    if (d <= tol && d < best_dist) {
      best = i;
      best_dist = d;
    }
  };
  if (it != times_.end()) {
    const auto i = static_cast<std::size_t>(it - times_.begin());
    consider(i, times_[i] - r);
  }
  if (it != times_.begin()) {
    const auto i = static_cast<std::size_t>(std::prev(it) - times_.begin());
    consider(i, r - times_[i]);
  }
  consider(0, period - r);
  return best;
}

std::vector<std::size_t> Mesh::delay_map(double delay) const {
  if (!(delay >= 0.0) || !std::isfinite(delay))
    throw ConfigError("delay must be a finite nonnegative number, got " + fmt(delay));
  const double period = this->period();
  const double r = std::fmod(delay, period);
  const double tol = timescale_.membership_tolerance();
  std::vector<std::size_t> map(size());
  for (std::size_t i = 0; i < size(); ++i) {
    double s = times_[i] - r;
    if (s < 0.0) s += period;
    const auto j = find_node(s, tol);
    if (!j)
      throw ConfigError("delay r=" + fmt(delay) + " maps node t=" + fmt(times_[i]) + " to " +
                        fmt(s) +
                        ", which is not a mesh node; t - r must stay in the time scale, so r "
                        "has to be commensurable with T and aligned with the mesh");
    map[i] = *j;
  }
  return map;
}

bool Mesh::operator==(const Mesh& other) const {
  return timescale_ == other.timescale_ && times_ == other.times_ && steps_ == other.steps_;
}

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(MeshPtr mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw PreconditionError("grid function needs a mesh");
  if (values_.size() != mesh_->size())
    throw PreconditionError("grid function has " + std::to_string(values_.size()) +
                            " values for a mesh of " + std::to_string(mesh_->size()) + " nodes");
}

GridFunction GridFunction::constant(MeshPtr mesh, double c) {
  const auto n = mesh->size();
  return GridFunction(std::move(mesh), std::vector<double>(n, c));
}

GridFunction GridFunction::sample(MeshPtr mesh, const std::function<double(double)>& f) {
  std::vector<double> v(mesh->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(mesh->time(i));
  return GridFunction(std::move(mesh), std::move(v));
}

double GridFunction::operator()(double s) const {
  const Mesh& m = *mesh_;
  const double tol = m.timescale().membership_tolerance();
  const double r = reduce(s, m.period(), tol).second;
  if (auto node = m.find_node(r, tol)) return values_[*node];
  const auto times = m.times();
  auto it = std::upper_bound(times.begin(), times.end(), r);
  if (it != times.begin()) {
    const auto i = static_cast<std::size_t>(std::prev(it) - times.begin());
    if (!m.right_scattered(i) && r < times[i] + m.step(i)) {
      const double theta = (r - times[i]) / m.step(i);
      return values_[i] + theta * (values_[m.next(i)] - values_[i]);
    }
  }
  throw_not_member(m.timescale(), s);
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

double GridFunction::sup_norm() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

GridFunction GridFunction::map(const std::function<double(double)>& f) const {
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(), f);
  return GridFunction(mesh_, std::move(out));
}

bool GridFunction::compatible(const GridFunction& other) const {
  return mesh_ == other.mesh_ || *mesh_ == *other.mesh_;
}

namespace {

void require_compatible(const GridFunction& a, const GridFunction& b) {
  if (!a.compatible(b)) throw PreconditionError("grid functions live on different meshes");
}

}  // namespace

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  require_compatible(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  require_compatible(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double k) {
  for (double& v : values_) v *= k;
  return *this;
}

GridFunction& GridFunction::operator+=(double k) {
  for (double& v : values_) v += k;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double k, GridFunction a) { return a *= k; }
GridFunction operator+(GridFunction a, double k) { return a += k; }

GridFunction operator*(const GridFunction& a, const GridFunction& b) {
  require_compatible(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return GridFunction(a.mesh_ptr(), std::move(out));
}

// ---------------------------------------------------------------------------
// Δ-calculus

GridFunction delta_derivative(const GridFunction& x) {
  const Mesh& m = x.mesh();
  std::vector<double> d(m.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (x[m.next(i)] - x[i]) / m.step(i);
  return GridFunction(x.mesh_ptr(), std::move(d));
}

namespace {

double contribution(const GridFunction& f, std::size_t i, Quadrature rule) {
  const Mesh& m = f.mesh();
  if (rule == Quadrature::forward_sum || m.right_scattered(i)) return m.step(i) * f[i];
  return 0.5 * m.step(i) * (f[i] + f[m.next(i)]);
}

// ∫_0^t f Δs for t in 𝕋 (any real t, reduced mod T).
double primitive(const GridFunction& f, const std::vector<double>& cumulative, double total,
                 double t, Quadrature rule) {
  const Mesh& m = f.mesh();
  const double tol = m.timescale().membership_tolerance();
  const auto [k, r] = reduce(t, m.period(), tol);
  const double whole = k * total;
  if (auto node = m.find_node(r, tol)) {
    // find_node may return node 0 for r just below T; reduce() already folded that case.
    return whole + cumulative[*node];
  }
  const auto times = m.times();
  auto it = std::upper_bound(times.begin(), times.end(), r);
  if (it != times.begin()) {
    const auto i = static_cast<std::size_t>(std::prev(it) - times.begin());
    if (!m.right_scattered(i) && r < times[i] + m.step(i)) {
      const double len = r - times[i];
      double part = len * f[i];
      if (rule == Quadrature::trapezoid) {
        const double ft = f[i] + (len / m.step(i)) * (f[m.next(i)] - f[i]);
        part = 0.5 * len * (f[i] + ft);
      }
      return whole + cumulative[i] + part;
    }
  }
  throw_not_member(m.timescale(), t);
}

}  // namespace

std::vector<double> cumulative_integral(const GridFunction& f, Quadrature rule) {
  std::vector<double> c(f.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = acc;
    acc += contribution(f, i, rule);
  }
  return c;
}

double period_integral(const GridFunction& f, Quadrature rule) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += contribution(f, i, rule);
  return acc;
}

double delta_integral(const GridFunction& f, double from, double to, Quadrature rule) {
  if (!(from <= to))
    throw PreconditionError("delta_integral needs from <= to, got [" + fmt(from) + ", " +
                            fmt(to) + "]");
  const auto cumulative = cumulative_integral(f, rule);
  const double total = cumulative.back() + contribution(f, f.size() - 1, rule);
  return primitive(f, cumulative, total, to, rule) - primitive(f, cumulative, total, from, rule);
}

GridFunction shift(const GridFunction& x, double delay) {
  const auto map = x.mesh().delay_map(delay);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[map[i]];
  return GridFunction(x.mesh_ptr(), std::move(out));
}

}  // namespace lienard
