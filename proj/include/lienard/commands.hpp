#pragma once

// Subcommands of the command-line tool, callable in-process.
//
// Exit codes: 0 success, 1 solver failure, 2 hypothesis check failed,
// 3 configuration or input error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lienard/checker.hpp"
#include "lienard/scenario.hpp"
#include "lienard/solver.hpp"

namespace lienard {

enum ExitCode : int { exit_ok = 0, exit_solver = 1, exit_hypothesis = 2, exit_config = 3 };

/// Command-line overrides of scenario settings.
struct RunOptions {
  std::optional<double> mesh_dt;
  std::optional<double> tol_fp;
  std::optional<double> tol_eq;
  std::optional<int> lambda_steps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool force = false;
  std::ostream* out = nullptr;  ///< defaults to std::cout
  std::ostream* err = nullptr;  ///< defaults to std::cerr
};

void apply_overrides(Scenario& sc, const RunOptions& opt);

/// Everything the check stage produces for one scenario.
struct CheckOutcome {
  std::optional<CheckReport> report;  ///< absent without alphas
  std::optional<FalsifierReport> falsifier;
  std::optional<LemmaReport> lemma;
  /// Integral of h(x) x^Δ for lemma.x, forward-sum and trapezoid rules.
  std::optional<double> lemma_fixed_value;
  std::optional<double> lemma_fixed_trapezoid;
  std::vector<std::string> notes;
  bool passed = false;
};

CheckOutcome run_check(const Scenario& sc, const Model& model);

enum class SweepParameter { c, time_scale, delay, forcing_amplitude };

/// Accepts c, T-scale, delay, forcing-amplitude (and r, amplitude).
SweepParameter parse_sweep_parameter(const std::string& name);
std::string to_string(SweepParameter p);

struct SweepRange {
  double from = 0.0;
  double to = 0.0;
  int count = 1;
};

/// Writes header t,x,x_delta and one row per node, 17 significant digits.
void write_solution_csv(const std::string& path, const GridFunction& x, const GridFunction& xd);

std::string sha256_hex(const std::string& data);

int cmd_check(const std::string& scenario_path, const RunOptions& opt);
int cmd_solve(const std::string& scenario_path, const RunOptions& opt);
int cmd_sweep(const std::string& scenario_path, SweepParameter param, const SweepRange& range,
              const RunOptions& opt);
int cmd_oracle(const std::string& scenario_path, const RunOptions& opt);

}  // namespace lienard
