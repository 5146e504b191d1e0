#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lienard/operators.hpp"

namespace lienard {

struct SolverOptions {
  double tol_fp = 1e-9;   ///< C¹ defect ‖x - M(λ,x)‖₁ accepted as converged
  double tol_eq = 1e-6;   ///< equation residual required of a returned solution
  int lambda_steps = 32;
  double min_lambda_step = 1.0 / 1024.0;
  int max_picard = 40;
  double theta_min = 1.0 / 32.0;
  bool newton = true;
  int max_newton = 25;
  int gmres_restart = 60;
  int gmres_max_iterations = 400;
  /// Grid size used to locate sign changes of g when seeding.
  int seed_samples = 1024;
};

/// One accepted continuation step.
struct LambdaStep {
  double lambda = 0.0;
  int picard_iterations = 0;
  int newton_iterations = 0;
  double defect = 0.0;
};

struct HomotopyState {
  double lambda = 0.0;
  GridFunction x;
  double defect = 0.0;  ///< ‖x - M(λ,x)‖₁
  double qnf = 0.0;     ///< Q(N_f(x))
};

struct SolutionRecord {
  GridFunction x;
  GridFunction x_delta;
  std::size_t window = 0;
  std::pair<double, double> bounds{};  ///< (α_j, α_{j+1})
  double seed = 0.0;                 ///< root of g used at λ = 0
  double residual_eq = 0.0;
  double residual_fp = 0.0;
  double qnf = 0.0;
  int iterations = 0;
  int lambda_steps = 0;
  std::vector<LambdaStep> trace{};
  ApplyMStats stats{};
};

struct FailureReport {
  std::size_t window = 0;
  std::pair<double, double> bounds{};
  std::string reason;
  std::optional<HomotopyState> last;
  std::vector<LambdaStep> trace{};
  ApplyMStats stats{};
};

using SolveOutcome = std::variant<SolutionRecord, FailureReport>;

inline bool succeeded(const SolveOutcome& o) { return std::holds_alternative<SolutionRecord>(o); }

/// Root of g in (lo, hi) by bisection on a sign change. With several sign
/// changes, the one nearest the midpoint is taken. Empty if g has no sign
/// change on the sampled grid.
std::optional<double> find_seed_root(const ScalarFunction& g, double lo, double hi,
                                     int samples = 1024);

/// ‖x - M(λ,x)‖₁ given y = M(λ,x).
double fixed_point_defect(const GridFunction& x, const GridFunction& y);

/// Continuation from the constant x ≡ b (g(b) = 0, b in the window) at λ = 0
/// to a fixed point of M(1, ·) with x(0) in the window. Each λ step runs
/// damped Picard iteration and falls back to a Jacobian-free Newton-GMRES
/// corrector when the iteration stops contracting. Failure is reported, not
/// thrown.
SolveOutcome homotopy_solve(const Problem& pb, std::pair<double, double> window,
                            const SolverOptions& options = {}, std::size_t window_index = 0);

/// Solves every window (α_j, α_{j+1}); windows run concurrently. Outcomes
/// are ordered by window index.
std::vector<SolveOutcome> multi_solve(const Problem& pb, const std::vector<double>& alphas,
                                      const SolverOptions& options = {});

}  // namespace lienard
