#include "lienard/operators.hpp"

#include <cmath>
#include <sstream>

#include "lienard/errors.hpp"

namespace lienard {

Problem::Problem(MeshPtr mesh, PhiHomeomorphism phi, ScalarFunction h, ScalarFunction g,
                 const GridFunction& p, double delay)
    : mesh_(std::move(mesh)),
      phi_(std::move(phi)),
      h_(std::move(h)),
      g_(std::move(g)),
      p_(p),
      delay_(std::fmod(delay, mesh_->period())) {
  if (!h_ || !g_) throw ConfigError("problem needs both h and g");
  if (p_.mesh_ptr() != mesh_ && !(p_.mesh() == *mesh_))
    throw ConfigError("forcing p is sampled on a different mesh");
  for (double v : p_.values())
    if (!std::isfinite(v)) throw ConfigError("forcing p has non-finite samples");
  delay_map_ = mesh_->delay_map(delay);
  forcing_offset_ = projector_Q(p_);
  p_ += -forcing_offset_;
}

GridFunction nemytskii(const Problem& pb, const GridFunction& x, const GridFunction& xd) {
  const auto& map = pb.delay_map();
  const auto& h = pb.h();
  const auto& g = pb.g();
  const GridFunction& p = pb.p();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = -h(x[i]) * xd[i] - g(x[map[i]]) + p[i];
  return GridFunction(x.mesh_ptr(), std::move(out));
}

double projector_Q(const GridFunction& z, Quadrature rule) {
  return period_integral(z, rule) / z.mesh().period();
}

double projector_P(const GridFunction& x) { return x[0]; }

GridFunction integrator_H(const GridFunction& z, Quadrature rule, double mean_tol) {
  const double mean = projector_Q(z, rule);
  if (std::abs(mean) > mean_tol * std::max(1.0, z.sup_norm())) {
    std::ostringstream os;
    os << "integrator H needs a mean-zero argument, got Q(z) = " << mean;
    throw PreconditionError(os.str());
  }
  return GridFunction(z.mesh_ptr(), cumulative_integral(z, rule));
}

MResult apply_m(const Problem& pb, double lambda, const GridFunction& x, const GridFunction& xd,
                ApplyMStats* stats) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw PreconditionError("homotopy parameter must lie in [0, 1]");
  const PhiHomeomorphism& phi = pb.phi();

  GridFunction n = nemytskii(pb, x, xd);
  const double qnf = projector_Q(n);
  n += -qnf;
  GridFunction u = integrator_H(n);
  u *= lambda;
  const double qphi = q_phi(u, phi, 0.0).value;
  GridFunction v = u.map([&](double s) { return phi.inverse(s - qphi); });
  GridFunction y = integrator_H(v, Quadrature::forward_sum, 1e-8);
  y += projector_P(x) + qnf;

  if (stats) {
    ++stats->evaluations;
    const double ratio = v.sup_norm() / phi.a();
    if (ratio >= 1.0) ++stats->bound_violations;
    stats->max_derivative_ratio = std::max(stats->max_derivative_ratio, ratio);
  }
  return {std::move(y), std::move(v), qnf, qphi};
}

MResult apply_m(const Problem& pb, double lambda, const GridFunction& x, ApplyMStats* stats) {
  return apply_m(pb, lambda, x, delta_derivative(x), stats);
}

double c1_norm(const GridFunction& x) { return x.sup_norm() + delta_derivative(x).sup_norm(); }

double equation_residual(const Problem& pb, const GridFunction& x) {
  const GridFunction xd = delta_derivative(x);
  const double a = pb.phi().a();
  for (std::size_t i = 0; i < xd.size(); ++i) {
    if (!(std::abs(xd[i]) < a)) {
      std::ostringstream os;
      os << "x^Δ = " << xd[i] << " at node " << i << " (t = " << x.mesh().time(i)
         << ") is outside the domain (-" << a << ", " << a << ") of phi";
      throw DomainError(os.str());
    }
  }
  const GridFunction z = xd.map([&](double v) { return pb.phi().forward(v); });
  const GridFunction lhs = delta_derivative(z);
  const GridFunction rhs = nemytskii(pb, x, xd);
  double sup = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) sup = std::max(sup, std::abs(lhs[i] - rhs[i]));
  return sup;
}

}  // namespace lienard
