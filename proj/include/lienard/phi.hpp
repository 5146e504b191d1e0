#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "lienard/timescale.hpp"

namespace lienard {

/// Singular increasing homeomorphism φ: (-a, a) -> ℝ with φ(0) = 0, carried
/// together with its closed-form inverse.
class PhiHomeomorphism {
 public:
  enum class Kind { relativistic, cubic_bounded, arctan_scaled, user_defined };

  /// φ(v) = v / sqrt(1 - v²/c²), a = c.
  static PhiHomeomorphism relativistic(double c);
  /// φ(v) = v / cbrt(1 - |v/a|³); the p = 3 analogue of the relativistic map.
  static PhiHomeomorphism cubic_bounded(double a);
  /// φ(v) = tan(π v / (2a)).
  static PhiHomeomorphism arctan_scaled(double a);
  static PhiHomeomorphism user_defined(std::function<double(double)> forward,
                                       std::function<double(double)> inverse, double a,
                                       std::string name = "user");

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  /// Half-width of the domain of φ.
  double a() const { return a_; }

  /// φ(v). Inputs are clamped to (-a(1-1e-12), a(1-1e-12)); every clamp is
  /// counted in clamp_count().
  double forward(double v) const;
  /// φ⁻¹(y), total on ℝ with range in (-a, a).
  double inverse(double y) const { return inverse_(y); }

  std::size_t clamp_count() const { return clamps_->load(std::memory_order_relaxed); }

 private:
  PhiHomeomorphism(Kind kind, std::string name, double a, std::function<double(double)> forward,
                   std::function<double(double)> inverse);

  Kind kind_;
  std::string name_;
  double a_;
  std::function<double(double)> forward_;
  std::function<double(double)> inverse_;
  std::shared_ptr<std::atomic<std::size_t>> clamps_;
};

/// c·y / sqrt(c² + y²).
double phi_inverse_relativistic(double y, double c);

struct QPhiResult {
  double value = 0.0;                  ///< s* with ∫ φ⁻¹(x - s*) Δt ≈ 0
  std::pair<double, double> bracket;   ///< [x_m, x_M]
  int iterations = 0;
  double residual = 0.0;               ///< |G_x(s*)|
};

/// G_x(s) = ∫_0^T φ⁻¹(x(t) - s) Δt.
double q_phi_objective(const GridFunction& x, const PhiHomeomorphism& phi, double s,
                       Quadrature rule = Quadrature::forward_sum);

/// The unique s ∈ [x_m, x_M] with G_x(s) = 0, found by bisection. G_x is
/// continuous and strictly decreasing, G_x(x_m) >= 0 >= G_x(x_M). Stops when
/// the bracket is narrower than tol; tol = 0 runs to machine precision.
QPhiResult q_phi(const GridFunction& x, const PhiHomeomorphism& phi, double tol = 1e-12,
                 Quadrature rule = Quadrature::forward_sum);

/// (Q_φ(x + k), Q_φ(x) + k).
std::pair<double, double> q_phi_shift_check(const GridFunction& x, double k,
                                            const PhiHomeomorphism& phi, double tol = 1e-12,
                                            Quadrature rule = Quadrature::forward_sum);

}  // namespace lienard
