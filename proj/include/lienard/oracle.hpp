#pragma once

// Brute-force reference solver for small meshes.
//
// Writes the periodic problem directly as K nonlinear equations in the K
// nodal values,
//
//   (φ(d_{i+1}) - φ(d_i)) / s_i = N_f(x)_i,   d_i = (x_{i+1} - x_i) / s_i,
//
// with indices mod K, and solves them by dense Newton with a finite-difference
// Jacobian. It shares the problem data with the main solver but none of its
// operators (no H, no Q_φ, no M), so agreement between the two is a
// meaningful cross-check.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lienard/operators.hpp"

namespace lienard {

struct OracleOptions {
  int lambda_steps = 32;
  int max_newton = 60;
  double tol = 1e-13;
  /// Dense LU is cubic in the node count.
  std::size_t max_nodes = 2048;
};

struct OracleResult {
  bool converged = false;
  GridFunction x;
  double residual = 0.0;  ///< sup |E_i| at λ = 1
  int newton_iterations = 0;
  std::string message;
};

/// Residual of the nodal equations at homotopy level λ:
/// E_i = (φ(d_{i+1}) - φ(d_i)) / s_i - λ N_i - (1 - λ) Q(N). Empty if some
/// |d_i| >= a.
std::optional<std::vector<double>> oracle_equations(const Problem& pb, double lambda,
                                                    const std::vector<double>& x);

/// Continuation in λ from the constant `seed` (a root of g) to λ = 1.
OracleResult oracle_solve(const Problem& pb, double seed, const OracleOptions& options = {});

}  // namespace lienard
