#pragma once

// Scenario files: YAML documents describing one periodic problem together
// with windows, solver settings and output location.
//
//   name: pendulum
//   period: 0.9pi
//   timescale: real            # or: cells: [[0, 1], 2]  (intervals and points)
//   phi: {kind: relativistic, c: 1}
//   h: {kind: constant, value: 0.1}
//   g: {kind: sin}
//   p: {kind: cos, amplitude: 0.2, frequency: 20/9}
//   delay: 0
//   alphas: [-pi/2, pi/2, 3pi/2]
//   mesh: {divisions: 512}     # or {dt: 0.01}
//
// Every number may be written as  [value][pi][/divisor],  e.g. 3pi/2, 20/9.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lienard/catalog.hpp"
#include "lienard/checker.hpp"
#include "lienard/solver.hpp"
#include "lienard/timescale.hpp"

namespace lienard {

/// Parses "3pi/2", "-0.5", "pi", "20/9", "1e-3". Throws ConfigError.
double parse_real(const std::string& text);

enum class ConditionChoice { automatic, monotone, near_constant };

struct CheckSettings {
  ConditionChoice condition = ConditionChoice::automatic;
  std::optional<std::vector<double>> gammas;
  int samples = 256;
  int falsifier_trials = 64;
};

struct LemmaSettings {
  FunctionSpec h;
  Monotonicity monotonicity = Monotonicity::nondecreasing;
  int trials = 100;
  double amplitude = 2.0;
  /// Optional fixed function of t whose integral is reported as well.
  std::optional<FunctionSpec> x;
};

struct Scenario {
  std::string name;
  std::string source;  ///< file path or "<string>"
  std::string text;    ///< raw file contents, hashed into run manifests

  double period = 1.0;
  std::vector<Cell> cells;
  PhiSpec phi;
  FunctionSpec h{"constant", {}, {}, {}};
  std::optional<FunctionSpec> g;
  FunctionSpec p{"constant", {}, {}, {}};
  double delay = 0.0;
  std::vector<double> alphas;

  /// Stretches time: cells, period, delay and mesh spacing are multiplied by
  /// the factor and the forcing becomes p(t / factor).
  double time_scale = 1.0;
  /// Multiplies the forcing.
  double forcing_scale = 1.0;

  std::optional<double> mesh_dt;
  std::optional<int> mesh_divisions;
  SolverOptions solver;
  std::uint64_t seed = 1;
  CheckSettings check;
  std::optional<LemmaSettings> lemma;
  std::string out_dir = "out";
};

Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& source = "<string>");

/// Problem data ready for the solver and checker.
struct Model {
  TimeScale timescale;
  MeshPtr mesh;
  Problem problem;
};

/// Builds the time scale, mesh and problem. p is re-centered by the
/// Problem constructor; see Problem::forcing_offset. Throws ConfigError.
Model build_model(const Scenario& sc);

/// Mesh spacing in use: dt, T / divisions, or T / 256.
double effective_mesh_dt(const Scenario& sc);

}  // namespace lienard
