#pragma once

// Named function families used by scenario files for h, g, p and φ.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lienard/operators.hpp"

namespace lienard {

/// One catalog entry with its numeric parameters. `sum` combines `terms`,
/// `table` interpolates `points` linearly with constant extension.
struct FunctionSpec {
  std::string kind;
  std::map<std::string, double> params;
  std::vector<std::pair<double, double>> points;
  std::vector<FunctionSpec> terms;
};

/// Kinds understood by make_function, with their parameters and defaults.
const std::map<std::string, std::map<std::string, double>>& function_catalog();

/// Throws ConfigError for unknown kinds or parameters.
ScalarFunction make_function(const FunctionSpec& spec);

/// One-line text form, e.g. "sin(amplitude=1, frequency=1, phase=0)".
std::string describe(const FunctionSpec& spec);

struct PhiSpec {
  std::string kind = "relativistic";
  /// Half-width of the domain: c for relativistic, a otherwise.
  double a = 1.0;
};

/// relativistic (a = c), cubic-bounded, arctan-scaled. Throws ConfigError.
PhiHomeomorphism make_phi(const PhiSpec& spec);

}  // namespace lienard
