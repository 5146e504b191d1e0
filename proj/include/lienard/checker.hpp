#pragma once

// Sampled certification of the sufficient conditions for multiplicity.
//
// For a strictly increasing sequence α_0 < ... < α_n, each α_j gets a strip
// (α_j - aT/2, α_j + aT/2). Any admissible x with x(0) = α_j stays in that
// strip, so sign and monotonicity statements about g and h on the strips
// give the integral sign condition at α_j, and with it one periodic solution
// per window (α_j, α_{j+1}).
//
// Checks are done on a finite sample of each strip. A pass certifies the
// sampled inequality system only; reports carry sample counts and margins.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lienard/operators.hpp"

namespace lienard {

enum class Condition { monotone_h, near_constant_h, user_asserted, none };

std::string to_string(Condition c);

/// Sign pattern of g across the strips. standard: (-1)^j g > 0 on strip j.
/// reversed: (-1)^j g < 0 on strip j (and the monotonicity of h flips).
enum class Orientation { standard, reversed };

struct WindowCertificate {
  std::size_t j = 0;
  double alpha = 0.0;
  std::pair<double, double> strip;
  Condition condition = Condition::none;
  std::optional<double> gamma;  ///< γ_j, near-constant condition only
  int g_sign = 0;               ///< sign of (-1)^j g observed on the strip
  /// Brouwer degree of g on (α_j, α_{j+1}) from the endpoint signs; 0 for
  /// the last α or when g vanishes at an endpoint.
  int degree_sign = 0;
  int samples = 0;
  double min_margin = 0.0;
  bool passed = false;
  std::optional<double> witness;  ///< sample point where the check failed
  std::string note;
};

struct SpacingCheck {
  bool passed = true;
  std::vector<double> slack;  ///< α_{j+1} - α_j - aT
};

struct CheckReport {
  std::vector<WindowCertificate> certificates;
  SpacingCheck spacing;
  Orientation orientation = Orientation::standard;
  bool passed = false;
  std::vector<std::string> counterexamples;
};

struct CheckOptions {
  int samples = 256;
  /// Strict inequalities must hold by this much (times the scale of g).
  double margin = 1e-9;
  /// Equality tolerance for the monotonicity comparison.
  double monotone_tol = 1e-12;
};

SpacingCheck check_window_spacing(const std::vector<double>& alphas, double a, double period);

/// (-1)^j g > 0 and (-1)^j h nonincreasing over every strip (or the reversed
/// pattern, detected from the sign of g at α_0).
CheckReport check_monotone_condition(const Problem& pb, const std::vector<double>& alphas,
                                     const CheckOptions& options = {});

/// a |h(x) - γ_j| < (-1)^j g(x) over every strip. Without gammas, γ_j is the
/// midrange of h on the strip samples.
CheckReport check_near_constant_condition(const Problem& pb, const std::vector<double>& alphas,
                                          const std::optional<std::vector<double>>& gammas = {},
                                          const CheckOptions& options = {});

/// Per strip, the monotone condition if it holds, else the near-constant
/// one with auto-fitted γ_j, plus the spacing check.
CheckReport check_conditions(const Problem& pb, const std::vector<double>& alphas,
                             const CheckOptions& options = {});

enum class Monotonicity { nondecreasing, nonincreasing };

struct LemmaTrial {
  double value = 0.0;
  double scale = 0.0;
  bool passed = true;
};

struct LemmaReport {
  Monotonicity monotonicity = Monotonicity::nondecreasing;
  std::vector<LemmaTrial> trials;
  bool passed = true;
  std::optional<std::size_t> offending_trial;
};

/// ∫_0^T h(x(t)) x^Δ(t) Δt for one periodic x (forward-sum Δ-integral).
double lienard_integral(const ScalarFunction& h, const GridFunction& x);

/// Evaluates the integral on `trials` random periodic functions (random
/// nodal values in [-amplitude, amplitude]) and checks it is <= 0 for
/// nondecreasing h, >= 0 for nonincreasing h, up to 1e-10 * scale.
LemmaReport check_monotone_integral_lemma(const ScalarFunction& h, Monotonicity monotonicity,
                                          int trials, const MeshPtr& mesh, std::uint64_t seed,
                                          double amplitude = 2.0);

struct FalsifierReport {
  int trials = 0;
  int violations = 0;
  std::vector<std::string> counterexamples;
  std::string label = "Monte-Carlo search, not a proof";
};

/// Draws random admissible x (x(0) = α_j, |x^Δ| < a) and looks for a sign
/// violation of σ (-1)^j ∫ [h(x) x^Δ + g(x)] Δt > 0, σ from the orientation.
FalsifierReport falsify_integral_condition(const Problem& pb, const std::vector<double>& alphas,
                                           Orientation orientation, int trials_per_alpha,
                                           std::uint64_t seed);

}  // namespace lienard
