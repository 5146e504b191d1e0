#include <doctest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "lienard/commands.hpp"

using namespace lienard;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

const std::string dir = LIENARD_SCENARIO_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path fresh(const std::string& name) {
  const fs::path p = fs::current_path() / "cmd_out" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Quiet {
  std::ostringstream out, err;
  RunOptions opts(const fs::path& out_dir) {
    RunOptions o;
    o.out = &out;
    o.err = &err;
    o.out_dir = out_dir.string();
    return o;
  }
};

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  REQUIRE(line == "t,x,x_delta");
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    REQUIRE(row.size() == 3);
    rows.push_back(row);
  }
  return rows;
}

fs::path write_scenario(const fs::path& where, const std::string& text) {
  const fs::path p = where / "scenario.scn";
  std::ofstream(p) << text;
  return p;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(LIENARD_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kNoRootScenario =
    "period: 1\ntimescale: real\nh: 0.2\ng: 1\nalphas: [-1, 1]\n";

}  // namespace

TEST_CASE("SHA-256 digest") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("check writes a report and exits 0 or 2") {
  Quiet q;
  const fs::path out = fresh("check_ok");
  CHECK(cmd_check(dir + "/pendulum_relativistic.scn", q.opts(out)) == exit_ok);
  const auto report = nlohmann::json::parse(slurp(out / "check_report.json"));
  CHECK(report["passed"] == true);
  CHECK(report["certificates"].size() == 5);
  CHECK(report["falsifier"]["label"] == "Monte-Carlo search, not a proof");
  CHECK(q.out.str().find("check: PASS") != std::string::npos);

  // cT > pi: spacing fails.
  std::string text = slurp(dir + "/pendulum_unforced.scn");
  text.replace(text.find("period: 0.9pi"), 13, "period: 1.1pi");
  const fs::path bad = fresh("check_wide");
  CHECK(cmd_check(write_scenario(bad, text).string(), q.opts(bad)) == exit_hypothesis);
  const auto r2 = nlohmann::json::parse(slurp(bad / "check_report.json"));
  CHECK(r2["spacing"]["passed"] == false);

  const fs::path lemma = fresh("lemma");
  CHECK(cmd_check(dir + "/example_lemma.scn", q.opts(lemma)) == exit_ok);
  const auto r3 = nlohmann::json::parse(slurp(lemma / "check_report.json"));
  CHECK(r3["lemma"]["fixed_function_integral_trapezoid"].get<double>() ==
        doctest::Approx(-2.5).epsilon(1e-12));
}

TEST_CASE("configuration errors exit 3") {
  Quiet q;
  const fs::path out = fresh("config");
  CHECK(cmd_check(dir + "/does_not_exist.scn", q.opts(out)) == exit_config);
  CHECK(cmd_solve(write_scenario(out, "period: [1\n").string(), q.opts(out)) == exit_config);
  CHECK(cmd_solve(dir + "/example_lemma.scn", q.opts(out)) == exit_config);
  CHECK(q.err.str().find("error:") != std::string::npos);
  RunOptions o = q.opts(out);
  o.mesh_dt = -1.0;
  CHECK(cmd_solve(dir + "/pendulum_unforced.scn", o) == exit_config);
}

TEST_CASE("solver failure exits 1, hypothesis failure 2") {
  Quiet q;
  const fs::path out = fresh("no_root");
  const std::string path = write_scenario(out, kNoRootScenario).string();
  CHECK(cmd_solve(path, q.opts(out)) == exit_hypothesis);
  CHECK_FALSE(fs::exists(out / "window_0_failure.json"));
  RunOptions forced = q.opts(out);
  forced.force = true;
  CHECK(cmd_solve(path, forced) == exit_solver);
  const auto failure = nlohmann::json::parse(slurp(out / "window_0_failure.json"));
  CHECK(failure["reason"].get<std::string>().find("sign") != std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["windows"][0]["status"] == "failed");
}

TEST_CASE("unforced pendulum: two constant solutions") {
  Quiet q;
  const fs::path out = fresh("unforced");
  CHECK(cmd_solve(dir + "/pendulum_unforced.scn", q.opts(out)) == exit_ok);
  const auto w0 = read_csv(out / "window_0.csv");
  const auto w1 = read_csv(out / "window_1.csv");
  REQUIRE(w0.size() == 256);
  for (const auto& row : w0) CHECK(std::abs(row[1]) < 1e-12);
  for (const auto& row : w1) {
    CHECK(std::abs(row[1] - pi) < 1e-12);
    CHECK(std::abs(row[2]) < 1.0);
  }
  const auto side = nlohmann::json::parse(slurp(out / "window_1.json"));
  CHECK(side["window"] == 1);
  CHECK(side["residual_eq"].get<double>() < 1e-6);
  CHECK(side["lambda_trace"].size() > 1);

  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["scenario_sha256"] == sha256_hex(slurp(dir + "/pendulum_unforced.scn")));
  CHECK(manifest["files"].size() == 5);
  CHECK(manifest["windows"].size() == 2);
}

TEST_CASE("solve output is deterministic") {
  Quiet q;
  const fs::path a = fresh("det_a"), b = fresh("det_b");
  CHECK(cmd_solve(dir + "/hybrid_arctan.scn", q.opts(a)) == exit_ok);
  CHECK(cmd_solve(dir + "/hybrid_arctan.scn", q.opts(b)) == exit_ok);
  CHECK(slurp(a / "window_0.csv") == slurp(b / "window_0.csv"));
  CHECK(slurp(a / "window_0.json") == slurp(b / "window_0.json"));
  CHECK(slurp(a / "check_report.json") == slurp(b / "check_report.json"));
}

TEST_CASE("every CSV row respects the derivative bound") {
  Quiet q;
  const fs::path out = fresh("bound");
  CHECK(cmd_solve(dir + "/delay_cubic.scn", q.opts(out)) == exit_ok);
  for (const auto& row : read_csv(out / "window_0.csv")) CHECK(std::abs(row[2]) < 1.0);
}

TEST_CASE("sweeping c flips the certificate at c = pi / T") {
  Quiet q;
  const fs::path out = fresh("sweep_c");
  const double T = 0.9 * pi;
  const SweepRange range{0.5 * pi / T, 1.5 * pi / T, 11};
  CHECK(cmd_sweep(dir + "/pendulum_unforced.scn", SweepParameter::c, range, q.opts(out)) ==
        exit_ok);
  std::ifstream f(out / "sweep_c.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line.rfind("value,check_passed", 0) == 0);
  int k = 0;
  while (std::getline(f, line)) {
    const bool passed = line.find(",1,") != std::string::npos;
    CHECK(passed == (k <= 5));
    ++k;
  }
  CHECK(k == 11);
}

TEST_CASE("sweep edge cases") {
  Quiet q;
  const fs::path single = fresh("sweep_single");
  CHECK(cmd_sweep(dir + "/pendulum_unforced.scn", SweepParameter::delay, {0.0, 0.0, 7},
                  q.opts(single)) == exit_ok);
  const std::string csv = slurp(single / "sweep_delay.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

  // The sweep at amplitude 1 writes exactly what solve writes.
  const fs::path sweep = fresh("sweep_amp"), solve = fresh("solve_amp");
  CHECK(cmd_sweep(dir + "/pendulum_relativistic.scn", SweepParameter::forcing_amplitude,
                  {1.0, 1.0, 1}, q.opts(sweep)) == exit_ok);
  CHECK(cmd_solve(dir + "/pendulum_relativistic.scn", q.opts(solve)) == exit_ok);
  for (int j = 0; j < 4; ++j) {
    const std::string name = "window_" + std::to_string(j) + ".csv";
    CHECK(slurp(sweep / "point_0" / name) == slurp(solve / name));
  }

  // Incompatible delays are recorded per point without stopping the sweep.
  const fs::path delays = fresh("sweep_bad_delay");
  CHECK(cmd_sweep(dir + "/discrete_regression.scn", SweepParameter::delay, {0.0, 0.25, 2},
                  q.opts(delays)) == exit_ok);
  const std::string dcsv = slurp(delays / "sweep_delay.csv");
  CHECK(dcsv.find("config-error") != std::string::npos);
  CHECK(dcsv.find("solved") != std::string::npos);
}

TEST_CASE("discrete regression matches the oracle") {
  Quiet q;
  const fs::path out = fresh("regression");
  CHECK(cmd_solve(dir + "/discrete_regression.scn", q.opts(out)) == exit_ok);
  CHECK(cmd_oracle(dir + "/discrete_regression.scn", q.opts(out)) == exit_ok);
  const auto s = read_csv(out / "window_0.csv");
  const auto o = read_csv(out / "oracle_window_0.csv");
  REQUIRE(s.size() == o.size());
  REQUIRE(s.size() == 7);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i][0] == o[i][0]);
    CHECK(std::abs(s[i][1] - o[i][1]) < 1e-8);
  }
}

TEST_CASE("command-line binary") {
  const fs::path out = fresh("cli");
  const std::string scn = dir + "/pendulum_unforced.scn";
  CHECK(run_cli("check " + scn + " --out-dir " + out.string()) == 0);
  CHECK(run_cli("solve " + scn + " --out-dir " + out.string() + " --mesh-dt 0.05") == 0);
  CHECK(read_csv(out / "window_1.csv").size() == 57);
  CHECK(run_cli("check " + scn + " --tol-fp abc") == 3);
  CHECK(run_cli("frobnicate " + scn) == 3);
  CHECK(run_cli("check /nonexistent.scn") == 3);
  const std::string nr = write_scenario(out, kNoRootScenario).string();
  CHECK(run_cli("solve " + nr + " --out-dir " + out.string()) == 2);
  CHECK(run_cli("solve " + nr + " --force --out-dir " + out.string()) == 1);
  CHECK(run_cli("sweep " + scn + " --param c --from 1 --to 1 --out-dir " + out.string()) == 0);
  CHECK(run_cli("sweep " + scn + " --param k --from 1 --to 1") == 3);

  const fs::path env_out = fresh("cli_env");
  const std::string env_cmd =
      "env LIENARD_OUT_DIR=" + env_out.string() + " " + LIENARD_CLI + " check " + scn +
      " >/dev/null 2>&1";
  CHECK(std::system(env_cmd.c_str()) == 0);
  CHECK(fs::exists(env_out / "check_report.json"));
}
