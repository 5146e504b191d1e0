#include "lienard/phi.hpp"

#include <cmath>
#include <numbers>

#include "lienard/errors.hpp"

namespace lienard {

PhiHomeomorphism::PhiHomeomorphism(Kind kind, std::string name, double a,
                                   std::function<double(double)> forward,
                                   std::function<double(double)> inverse)
    : kind_(kind),
      name_(std::move(name)),
      a_(a),
      forward_(std::move(forward)),
      inverse_(std::move(inverse)),
      clamps_(std::make_shared<std::atomic<std::size_t>>(0)) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw ConfigError("phi needs a finite half-width a > 0, got " + std::to_string(a));
}

PhiHomeomorphism PhiHomeomorphism::relativistic(double c) {
  return PhiHomeomorphism(
      Kind::relativistic, "relativistic", c,
      [c](double v) { return v / std::sqrt(1.0 - (v / c) * (v / c)); },
      [c](double y) { return phi_inverse_relativistic(y, c); });
}

PhiHomeomorphism PhiHomeomorphism::cubic_bounded(double a) {
  return PhiHomeomorphism(
      Kind::cubic_bounded, "cubic-bounded", a,
      [a](double v) {
        const double u = std::abs(v / a);
        return v / std::cbrt(1.0 - u * u * u);
      },
      [a](double y) {
        const double u = std::abs(y / a);
        return y / std::cbrt(1.0 + u * u * u);
      });
}

PhiHomeomorphism PhiHomeomorphism::arctan_scaled(double a) {
  using std::numbers::pi;
  return PhiHomeomorphism(
      Kind::arctan_scaled, "arctan-scaled", a,
      [a](double v) { return std::tan(0.5 * pi * v / a); },
      [a](double y) { return 2.0 * a / pi * std::atan(y); });
}

PhiHomeomorphism PhiHomeomorphism::user_defined(std::function<double(double)> forward,
                                                std::function<double(double)> inverse, double a,
                                                std::string name) {
  if (!forward || !inverse) throw ConfigError("user-defined phi needs forward and inverse");
  return PhiHomeomorphism(Kind::user_defined, std::move(name), a, std::move(forward),
                          std::move(inverse));
}

double PhiHomeomorphism::forward(double v) const {
  const double limit = a_ * (1.0 - 1e-12);
  if (std::abs(v) > limit || std::isnan(v)) {
    clamps_->fetch_add(1, std::memory_order_relaxed);
    v = std::isnan(v) ? 0.0 : std::copysign(limit, v);
  }
  return forward_(v);
}

double phi_inverse_relativistic(double y, double c) {
  if (std::isinf(y)) return std::copysign(c, y);
  // c·y/sqrt(c² + y²) without overflow of y².
  const double ay = std::abs(y);
  if (ay > c) {
    const double q = c / ay;
    return std::copysign(c / std::sqrt(q * q + 1.0), y);
  }
  const double q = y / c;
  return y / std::sqrt(1.0 + q * q);
}

// ---------------------------------------------------------------------------

double q_phi_objective(const GridFunction& x, const PhiHomeomorphism& phi, double s,
                       Quadrature rule) {
  return period_integral(x.map([&](double v) { return phi.inverse(v - s); }), rule);
}

QPhiResult q_phi(const GridFunction& x, const PhiHomeomorphism& phi, double tol,
                 Quadrature rule) {
  if (x.size() == 0) throw PreconditionError("q_phi needs a nonempty function");
  if (!(tol >= 0.0)) throw PreconditionError("q_phi tolerance must be nonnegative");
  QPhiResult out;
  const double lo0 = x.min();
  const double hi0 = x.max();
  out.bracket = {lo0, hi0};
  if (lo0 == hi0) {
    out.value = lo0;
    return out;
  }

  const Mesh& m = x.mesh();
  const auto steps = m.steps();
  const auto vals = x.values();
  const bool trapezoid = rule == Quadrature::trapezoid;
  auto objective = [&](double s) {
    if (!trapezoid) {
      double acc = 0.0;
      for (std::size_t i = 0; i < vals.size(); ++i) acc += steps[i] * phi.inverse(vals[i] - s);
      return acc;
    }
    return q_phi_objective(x, phi, s, rule);
  };

  double lo = lo0;
  double hi = hi0;
  double mid = lo + 0.5 * (hi - lo);
  double g_mid = 0.0;
  while (true) {
    mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    g_mid = objective(mid);
    ++out.iterations;
    if (g_mid == 0.0) break;
    if (g_mid > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < tol) {
      mid = lo + 0.5 * (hi - lo);
      break;
    }
  }
  out.value = mid;
  out.residual = std::abs(objective(mid));
  return out;
}

std::pair<double, double> q_phi_shift_check(const GridFunction& x, double k,
                                            const PhiHomeomorphism& phi, double tol,
                                            Quadrature rule) {
  return {q_phi(x + k, phi, tol, rule).value, q_phi(x, phi, tol, rule).value + k};
}

}  // namespace lienard
