#include "lienard/solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include "lienard/errors.hpp"

namespace lienard {

std::optional<double> find_seed_root(const ScalarFunction& g, double lo, double hi, int samples) {
  if (!(lo < hi) || samples < 2) return std::nullopt;
  const auto n = static_cast<std::size_t>(samples);
  std::vector<double> s(n + 1), v(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    s[k] = k == n ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n);
    v[k] = g(s[k]);
  }
  const double mid = 0.5 * (lo + hi);
  std::optional<std::pair<double, double>> best;
  double best_dist = std::numeric_limits<double>::infinity();
  auto consider = [&](double a, double b) {
    const double d = std::abs(0.5 * (a + b) - mid);
    if (d < best_dist) {
      best_dist = d;
      best = std::make_pair(a, b);
    }
  };
  for (std::size_t k = 1; k < n; ++k)
    if (v[k] == 0.0) consider(s[k], s[k]);
  for (std::size_t k = 0; k < n; ++k) {
    if (v[k] == 0.0 || v[k + 1] == 0.0) continue;
    if ((v[k] < 0.0) != (v[k + 1] < 0.0)) consider(s[k], s[k + 1]);
  }
  if (!best) return std::nullopt;
  auto [a, b] = *best;
  if (a == b) return a;
  double ga = g(a);
  while (true) {
    const double m = a + 0.5 * (b - a);
    if (m <= a || m >= b) break;
    const double gm = g(m);
    if (gm == 0.0) return m;
    if ((gm < 0.0) == (ga < 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return std::abs(g(a)) <= std::abs(g(b)) ? a : b;
}

double fixed_point_defect(const GridFunction& x, const GridFunction& y) {
  return c1_norm(x - y);
}

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

// Restarted GMRES for A x = b from x = 0, A given as a matrix-free operator.
template <class Op>
Vec gmres(const Op& apply, const Vec& b, double rtol, int restart, int max_iterations,
          int& iterations) {
  const std::size_t n = b.size();
  Vec x(n, 0.0);
  const double bnorm = norm2(b);
  iterations = 0;
  if (bnorm == 0.0) return x;
  const auto m = static_cast<std::size_t>(std::max(1, restart));
  while (iterations < max_iterations) {
    Vec r = b;
    if (iterations > 0) {
      const Vec ax = apply(x);
      for (std::size_t i = 0; i < n; ++i) r[i] -= ax[i];
    }
    const double beta = norm2(r);
    if (beta <= rtol * bnorm) break;
    std::vector<Vec> basis;
    basis.reserve(m + 1);
    for (double& ri : r) ri /= beta;
    basis.push_back(std::move(r));
    std::vector<Vec> hess(m + 1, Vec(m, 0.0));
    Vec cs(m, 0.0), sn(m, 0.0), rhs(m + 1, 0.0);
    rhs[0] = beta;
    std::size_t k = 0;
    for (; k < m && iterations < max_iterations; ++k) {
      ++iterations;
      Vec w = apply(basis[k]);
      for (std::size_t j = 0; j <= k; ++j) {
        hess[j][k] = dot(w, basis[j]);
        for (std::size_t i = 0; i < n; ++i) w[i] -= hess[j][k] * basis[j][i];
      }
      hess[k + 1][k] = norm2(w);
      for (std::size_t j = 0; j < k; ++j) {
        const double t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
        hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
        hess[j][k] = t;
      }
      const double denom = std::hypot(hess[k][k], hess[k + 1][k]);
      cs[k] = denom == 0.0 ? 1.0 : hess[k][k] / denom;
      sn[k] = denom == 0.0 ? 0.0 : hess[k + 1][k] / denom;
      const double next_norm = hess[k + 1][k];
      hess[k][k] = denom;
      hess[k + 1][k] = 0.0;
      rhs[k + 1] = -sn[k] * rhs[k];
      rhs[k] = cs[k] * rhs[k];
      if (std::abs(rhs[k + 1]) <= rtol * bnorm || next_norm == 0.0) {
        ++k;
        break;
      }
      for (double& wi : w) wi /= next_norm;
      basis.push_back(std::move(w));
    }
    // Back substitution on the k x k triangular system.
    Vec coef(k, 0.0);
    for (std::size_t ii = k; ii-- > 0;) {
      double s = rhs[ii];
      for (std::size_t j = ii + 1; j < k; ++j) s -= hess[ii][j] * coef[j];
      coef[ii] = hess[ii][ii] == 0.0 ? 0.0 : s / hess[ii][ii];
    }
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) x[i] += coef[j] * basis[j][i];
    if (std::abs(rhs[k]) <= rtol * bnorm) break;
  }
  return x;
}

struct Evaluation {
  GridFunction y;
  double defect;
  double qnf;
};

class WindowSolver {
 public:
  WindowSolver(const Problem& pb, std::pair<double, double> window, const SolverOptions& options)
      : pb_(pb), window_(window), options_(options) {}

  Evaluation evaluate(double lambda, const GridFunction& x) {
    MResult r = apply_m(pb_, lambda, x, &stats_);
    const double defect = fixed_point_defect(x, r.y);
    return {std::move(r.y), defect, r.qnf};
  }

  bool inside(const GridFunction& x) const {
    return x[0] > window_.first && x[0] < window_.second;
  }

  // Fixed point of M(lambda, .) starting from x.
  std::optional<GridFunction> solve_at(double lambda, GridFunction x, LambdaStep& step) {
    Evaluation e = evaluate(lambda, x);
    step.defect = e.defect;
    if (e.defect < options_.tol_fp) return x;

    double theta = 1.0;
    for (int it = 0; it < options_.max_picard; ++it) {
      GridFunction trial = x + theta * (e.y - x);
      Evaluation et = evaluate(lambda, trial);
      ++step.picard_iterations;
      if (std::isfinite(et.defect) && et.defect < e.defect && inside(trial)) {
        const double ratio = et.defect / e.defect;
        x = std::move(trial);
        e = std::move(et);
        step.defect = e.defect;
        if (e.defect < options_.tol_fp) return x;
        if (ratio > 0.5 && options_.newton) break;
        theta = std::min(1.0, 2.0 * theta);
      } else {
        theta *= 0.5;
        if (theta < options_.theta_min) break;
      }
    }
    if (!options_.newton) return std::nullopt;

    const std::size_t n = x.size();
    for (int it = 0; it < options_.max_newton; ++it) {
      ++step.newton_iterations;
      Vec residual(n);
      for (std::size_t i = 0; i < n; ++i) residual[i] = x[i] - e.y[i];
      const double fnorm = norm2(residual);
      const double xscale = std::max(1.0, x.sup_norm());
      auto jacobian = [&](const Vec& v) {
        double vmax = 0.0;
        for (double vi : v) vmax = std::max(vmax, std::abs(vi));
        Vec out(n, 0.0);
        if (vmax == 0.0) return out;
        const double eps = 1e-7 * xscale / vmax;
        GridFunction xp = x;
        for (std::size_t i = 0; i < n; ++i) xp[i] += eps * v[i];
        const MResult mp = apply_m(pb_, lambda, xp, &stats_);
        for (std::size_t i = 0; i < n; ++i) out[i] = v[i] - (mp.y[i] - e.y[i]) / eps;
        return out;
      };
      Vec rhs(n);
      for (std::size_t i = 0; i < n; ++i) rhs[i] = -residual[i];
      int gmres_its = 0;
      const Vec delta = gmres(jacobian, rhs, 1e-10, options_.gmres_restart,
                              options_.gmres_max_iterations, gmres_its);

      bool accepted = false;
      for (double s = 1.0; s >= 1.0 / 256.0; s *= 0.5) {
        GridFunction trial = x;
        for (std::size_t i = 0; i < n; ++i) trial[i] += s * delta[i];
        Evaluation et = evaluate(lambda, trial);
        double tnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) tnorm += (trial[i] - et.y[i]) * (trial[i] - et.y[i]);
        tnorm = std::sqrt(tnorm);
        if (std::isfinite(tnorm) && inside(trial) &&
            (tnorm <= (1.0 - 1e-4 * s) * fnorm || et.defect < options_.tol_fp)) {
          x = std::move(trial);
          e = std::move(et);
          accepted = true;
          break;
        }
      }
      step.defect = e.defect;
      if (!accepted) return std::nullopt;
      if (e.defect < options_.tol_fp) return x;
    }
    return std::nullopt;
  }

  ApplyMStats& stats() { return stats_; }

 private:
  const Problem& pb_;
  std::pair<double, double> window_;
  SolverOptions options_;
  ApplyMStats stats_;
};

std::string describe(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

SolveOutcome homotopy_solve(const Problem& pb, std::pair<double, double> window,
                            const SolverOptions& options, std::size_t window_index) {
  FailureReport failure;
  failure.window = window_index;
  failure.bounds = window;
  if (!(window.first < window.second)) {
    failure.reason = "empty window";
    return failure;
  }
  const auto seed = find_seed_root(pb.g(), window.first, window.second, options.seed_samples);
  if (!seed) {
    failure.reason = "g has no sign change in the window (" + describe(window.first) + ", " +
                     describe(window.second) + ")";
    return failure;
  }

  WindowSolver solver(pb, window, options);
  std::vector<LambdaStep> trace;
  GridFunction x = GridFunction::constant(pb.mesh_ptr(), *seed);
  double lambda = 0.0;
  auto fail = [&](std::string reason) -> SolveOutcome {
    failure.reason = std::move(reason);
    failure.trace = trace;
    failure.stats = solver.stats();
    try {
      Evaluation e = solver.evaluate(lambda, x);
      failure.last = HomotopyState{lambda, x, e.defect, e.qnf};
    } catch (const std::exception&) {
      failure.last = HomotopyState{lambda, x, std::numeric_limits<double>::quiet_NaN(),
                                   std::numeric_limits<double>::quiet_NaN()};
    }
    return failure;
  };

  try {
    {
      LambdaStep start{0.0, 0, 0, 0.0};
      auto x0 = solver.solve_at(0.0, x, start);
      if (!x0) return fail("no constant fixed point at lambda = 0 near the seed");
      x = std::move(*x0);
      trace.push_back(start);
    }
    const double nominal = 1.0 / std::max(1, options.lambda_steps);
    double step = nominal;
    while (lambda < 1.0) {
      double target = lambda + step;
      if (target > 1.0 - 1e-12) target = 1.0;
      LambdaStep ls{target, 0, 0, 0.0};
      auto next = solver.solve_at(target, x, ls);
      if (next) {
        x = std::move(*next);
        lambda = target;
        trace.push_back(ls);
        step = std::min(nominal, 2.0 * step);
      } else {
        step *= 0.5;
        if (step < options.min_lambda_step)
          return fail("continuation stalled at lambda = " + describe(lambda) +
                      " (last defect " + describe(ls.defect) + ")");
      }
    }

    Evaluation e = solver.evaluate(1.0, x);
    SolutionRecord rec{.x = x, .x_delta = delta_derivative(x)};
    rec.window = window_index;
    rec.bounds = window;
    rec.seed = *seed;
    rec.residual_fp = e.defect;
    rec.qnf = e.qnf;
    rec.trace = trace;
    rec.lambda_steps = static_cast<int>(trace.size()) - 1;
    for (const auto& s : trace) rec.iterations += s.picard_iterations + s.newton_iterations;

    if (!(e.defect < options.tol_fp))
      return fail("fixed-point defect " + describe(e.defect) + " above tolerance");
    if (!(std::abs(e.qnf) < options.tol_fp))
      return fail("Q(N_f(x)) = " + describe(e.qnf) + " is not zero at the fixed point");
    if (!solver.inside(x)) return fail("solution left the window: x(0) = " + describe(x[0]));
    if (!(rec.x_delta.sup_norm() < pb.phi().a()))
      return fail("derivative bound violated: |x^Δ| = " + describe(rec.x_delta.sup_norm()));
    rec.residual_eq = equation_residual(pb, x);
    if (!(rec.residual_eq < options.tol_eq))
      return fail("equation residual " + describe(rec.residual_eq) + " above tolerance");
    rec.stats = solver.stats();
    return rec;
  } catch (const std::exception& ex) {
    return fail(std::string("solver error: ") + ex.what());
  }
}

std::vector<SolveOutcome> multi_solve(const Problem& pb, const std::vector<double>& alphas,
                                      const SolverOptions& options) {
  if (alphas.size() < 2) throw PreconditionError("multi_solve needs at least two alphas");
  for (std::size_t j = 1; j < alphas.size(); ++j)
    if (!(alphas[j - 1] < alphas[j]))
      throw PreconditionError("alphas must be strictly increasing");
  std::vector<std::future<SolveOutcome>> jobs;
  for (std::size_t j = 0; j + 1 < alphas.size(); ++j) {
    jobs.push_back(std::async(std::launch::async, [&pb, &options, &alphas, j] {
      return homotopy_solve(pb, {alphas[j], alphas[j + 1]}, options, j);
    }));
  }
  std::vector<SolveOutcome> out;
  out.reserve(jobs.size());
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

}  // namespace lienard
