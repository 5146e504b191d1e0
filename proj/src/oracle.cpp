#include "lienard/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "lienard/errors.hpp"

namespace lienard {

namespace {

double sup(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s = std::max(s, std::abs(e));
  return s;
}

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

NewtonOutcome newton(const Problem& pb, double lambda, std::vector<double>& x,
                     const OracleOptions& opt) {
  const std::size_t n = x.size();
  NewtonOutcome out;
  auto e = oracle_equations(pb, lambda, x);
  if (!e) return out;
  out.residual = sup(*e);
  Eigen::MatrixXd jac(n, n);
  Eigen::VectorXd rhs(n);
  for (int it = 0; it < opt.max_newton; ++it) {
    if (out.residual <= opt.tol) {
      out.converged = true;
      return out;
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
      std::vector<double> xp = x;
      xp[j] += h;
      auto ep = oracle_equations(pb, lambda, xp);
      double sign = 1.0;
      if (!ep) {
        xp[j] = x[j] - h;
        ep = oracle_equations(pb, lambda, xp);
        sign = -1.0;
        if (!ep) return out;
      }
      for (std::size_t i = 0; i < n; ++i) jac(i, j) = sign * ((*ep)[i] - (*e)[i]) / h;
    }
    for (std::size_t i = 0; i < n; ++i) rhs(i) = -(*e)[i];
    const Eigen::VectorXd delta = jac.partialPivLu().solve(rhs);
    if (!delta.allFinite()) return out;

    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40 && !accepted; ++k, t *= 0.5) {
      std::vector<double> trial = x;
      for (std::size_t i = 0; i < n; ++i) trial[i] += t * delta(i);
      auto et = oracle_equations(pb, lambda, trial);
      if (et && sup(*et) < out.residual) {
        x = std::move(trial);
        e = std::move(et);
        out.residual = sup(*e);
        accepted = true;
      }
    }
    ++out.iterations;
    if (!accepted) {
      // Stalled at rounding level.
      out.converged = out.residual <= 1e3 * opt.tol;
      return out;
    }
  }
  out.converged = out.residual <= opt.tol;
  return out;
}

}  // namespace

std::optional<std::vector<double>> oracle_equations(const Problem& pb, double lambda,
                                                    const std::vector<double>& x) {
  const Mesh& mesh = pb.mesh();
  const std::size_t n = mesh.size();
  const double a = pb.phi().a();
  const auto& map = pb.delay_map();
  std::vector<double> d(n), z(n), nf(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = (x[mesh.next(i)] - x[i]) / mesh.step(i);
    if (!(std::abs(d[i]) < a)) return std::nullopt;
    z[i] = pb.phi().forward(d[i]);
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    nf[i] = -pb.h()(x[i]) * d[i] - pb.g()(x[map[i]]) + pb.p()[i];
    mean += mesh.step(i) * nf[i];
  }
  mean /= mesh.period();
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i)
    e[i] = (z[mesh.next(i)] - z[i]) / mesh.step(i) - lambda * nf[i] - (1.0 - lambda) * mean;
  return e;
}

OracleResult oracle_solve(const Problem& pb, double seed, const OracleOptions& opt) {
  const std::size_t n = pb.mesh().size();
  if (n > opt.max_nodes) {
    std::ostringstream os;
    os << "oracle is limited to " << opt.max_nodes << " nodes, mesh has " << n;
    throw PreconditionError(os.str());
  }
  std::vector<double> x(n, seed);
  int iterations = 0;
  auto finish = [&](bool converged, double residual, std::string message) {
    return OracleResult{converged, GridFunction(pb.mesh_ptr(), x), residual, iterations,
                        std::move(message)};
  };

  NewtonOutcome first = newton(pb, 0.0, x, opt);
  iterations += first.iterations;
  if (!first.converged) return finish(false, first.residual, "Newton failed at lambda = 0");

  const double nominal = 1.0 / std::max(1, opt.lambda_steps);
  const double min_step = 1.0 / 4096.0;
  double lambda = 0.0;
  double step = nominal;
  while (lambda < 1.0) {
    const double target = std::min(1.0, lambda + step);
    std::vector<double> trial = x;
    const NewtonOutcome o = newton(pb, target, trial, opt);
    iterations += o.iterations;
    if (o.converged) {
      x = std::move(trial);
      lambda = target;
      step = std::min(2.0 * step, nominal);
      continue;
    }
    step *= 0.5;
    if (step < min_step) {
      std::ostringstream os;
      os << "continuation stalled at lambda = " << lambda;
      return finish(false, o.residual, os.str());
    }
  }
  const auto e = oracle_equations(pb, 1.0, x);
  return finish(true, e ? sup(*e) : INFINITY, "");
}

}  // namespace lienard
