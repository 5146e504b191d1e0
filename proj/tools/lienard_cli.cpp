// Command-line front end: lienard {check,solve,sweep,oracle} SCENARIO [options]
//
// Options may also come from the environment: LIENARD_MESH_DT,
// LIENARD_TOL_FP, LIENARD_TOL_EQ, LIENARD_LAMBDA_STEPS, LIENARD_SEED,
// LIENARD_OUT_DIR, LIENARD_FORCE. Flags on the command line win.

#include <CLI11.hpp>
#include <iostream>

#include "lienard/commands.hpp"
#include "lienard/scenario.hpp"

namespace {

struct CommonFlags {
  std::string scenario;
  std::optional<double> mesh_dt;
  std::optional<double> tol_fp;
  std::optional<double> tol_eq;
  std::optional<int> lambda_steps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool force = false;

  lienard::RunOptions options() const {
    lienard::RunOptions o;
    o.mesh_dt = mesh_dt;
    o.tol_fp = tol_fp;
    o.tol_eq = tol_eq;
    o.lambda_steps = lambda_steps;
    o.seed = seed;
    o.out_dir = out_dir;
    o.force = force;
    return o;
  }
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("scenario", f.scenario, "Scenario file")->required();
  cmd->add_option("--mesh-dt", f.mesh_dt, "Largest node spacing inside interval cells")
      ->envname("LIENARD_MESH_DT");
  cmd->add_option("--tol-fp", f.tol_fp, "Fixed-point defect tolerance (C1 norm)")
      ->envname("LIENARD_TOL_FP");
  cmd->add_option("--tol-eq", f.tol_eq, "Equation residual tolerance")->envname("LIENARD_TOL_EQ");
  cmd->add_option("--lambda-steps", f.lambda_steps, "Uniform homotopy steps")
      ->envname("LIENARD_LAMBDA_STEPS");
  cmd->add_option("--seed", f.seed, "Seed for randomized checks")->envname("LIENARD_SEED");
  cmd->add_option("--out-dir", f.out_dir, "Output directory")->envname("LIENARD_OUT_DIR");
  cmd->add_flag("--force", f.force, "Solve even if the hypothesis check fails")
      ->envname("LIENARD_FORCE");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic solutions of singular phi-Laplacian Lienard equations on time scales"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LIENARD_VERSION);

  CommonFlags flags;
  CLI::App* check = app.add_subcommand("check", "Certify the window conditions");
  CLI::App* solve = app.add_subcommand("solve", "Check, then solve every window");
  CLI::App* sweep = app.add_subcommand("sweep", "Re-solve over a range of one parameter");
  CLI::App* oracle =
      app.add_subcommand("oracle", "Brute-force nodal Newton solve for regression baselines");
  for (CLI::App* cmd : {check, solve, sweep, oracle}) add_common(cmd, flags);

  std::string param;
  std::string from_text, to_text;
  int count = 11;
  sweep->add_option("--param", param, "c, T-scale, delay or forcing-amplitude")->required();
  sweep->add_option("--from", from_text, "First value")->required();
  sweep->add_option("--to", to_text, "Last value")->required();
  sweep->add_option("--count", count, "Number of values")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lienard::exit_config;
  }

  const lienard::RunOptions opt = flags.options();
  if (check->parsed()) return lienard::cmd_check(flags.scenario, opt);
  if (solve->parsed()) return lienard::cmd_solve(flags.scenario, opt);
  if (oracle->parsed()) return lienard::cmd_oracle(flags.scenario, opt);
  try {
    const lienard::SweepRange range{lienard::parse_real(from_text), lienard::parse_real(to_text),
                                    count};
    return lienard::cmd_sweep(flags.scenario, lienard::parse_sweep_parameter(param), range, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lienard::exit_config;
  }
}
