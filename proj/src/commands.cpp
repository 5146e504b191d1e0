#include "lienard/commands.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/exceptions.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "lienard/errors.hpp"
#include "lienard/oracle.hpp"

namespace lienard {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ostream& out_of(const RunOptions& o) { return o.out ? *o.out : std::cout; }
std::ostream& err_of(const RunOptions& o) { return o.err ? *o.err : std::cerr; }

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string orientation_name(Orientation o) {
  return o == Orientation::standard ? "standard" : "reversed";
}

json to_json(const WindowCertificate& c) {
  json j = {{"j", c.j},
            {"alpha", c.alpha},
            {"strip", {c.strip.first, c.strip.second}},
            {"condition", to_string(c.condition)},
            {"g_sign", c.g_sign},
            {"degree_sign", c.degree_sign},
            {"samples", c.samples},
            {"min_margin", c.min_margin},
            {"passed", c.passed}};
  if (c.gamma) j["gamma"] = *c.gamma;
  if (c.witness) j["witness"] = *c.witness;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

json to_json(const CheckOutcome& co, const Scenario& sc) {
  json j = {{"scenario", sc.name}, {"passed", co.passed}, {"notes", co.notes}};
  if (co.report) {
    const CheckReport& r = *co.report;
    json certs = json::array();
    for (const auto& c : r.certificates) certs.push_back(to_json(c));
    j["orientation"] = orientation_name(r.orientation);
    j["certificates"] = certs;
    j["spacing"] = {{"passed", r.spacing.passed}, {"slack", r.spacing.slack}};
    j["conditions_passed"] = r.passed;
    j["counterexamples"] = r.counterexamples;
  }
  if (co.falsifier) {
    j["falsifier"] = {{"label", co.falsifier->label},
                      {"trials", co.falsifier->trials},
                      {"violations", co.falsifier->violations},
                      {"counterexamples", co.falsifier->counterexamples}};
  }
  if (co.lemma) {
    json trials = json::array();
    for (const auto& t : co.lemma->trials) trials.push_back({t.value, t.scale});
    j["lemma"] = {{"monotonicity", co.lemma->monotonicity == Monotonicity::nondecreasing
                                       ? "nondecreasing"
                                       : "nonincreasing"},
                  {"trials", co.lemma->trials.size()},
                  {"passed", co.lemma->passed},
                  {"values", trials}};
    if (co.lemma->offending_trial) j["lemma"]["offending_trial"] = *co.lemma->offending_trial;
    if (co.lemma_fixed_value) {
      j["lemma"]["fixed_function_integral"] = *co.lemma_fixed_value;
      j["lemma"]["fixed_function_integral_trapezoid"] = *co.lemma_fixed_trapezoid;
    }
  }
  return j;
}

void print_check_summary(std::ostream& os, const CheckOutcome& co) {
  if (co.report) {
    const CheckReport& r = *co.report;
    os << "orientation: " << orientation_name(r.orientation) << "\n";
    os << std::left << std::setw(8) << "window" << std::setw(16) << "alpha" << std::setw(18)
       << "condition" << std::setw(8) << "g_sign" << std::setw(8) << "degree" << std::setw(16)
       << "min_margin"
       << "result\n";
    for (const auto& c : r.certificates) {
      os << std::setw(8) << c.j << std::setw(16) << num(c.alpha).substr(0, 14) << std::setw(18)
         << to_string(c.condition) << std::setw(8) << c.g_sign << std::setw(8) << c.degree_sign
         << std::setw(16) << num(c.min_margin).substr(0, 14) << (c.passed ? "pass" : "FAIL")
         << "\n";
    }
    double min_slack = INFINITY;
    for (double s : r.spacing.slack) min_slack = std::min(min_slack, s);
    os << "spacing: " << (r.spacing.passed ? "pass" : "FAIL");
    if (!r.spacing.slack.empty()) os << " (min slack " << num(min_slack) << ")";
    os << "\n";
    for (const auto& c : r.counterexamples) os << "  counterexample: " << c << "\n";
  }
  if (co.falsifier) {
    os << "falsifier (" << co.falsifier->label << "): " << co.falsifier->violations
       << " violations in " << co.falsifier->trials << " trials\n";
    for (const auto& c : co.falsifier->counterexamples) os << "  " << c << "\n";
  }
  if (co.lemma) {
    os << "lemma: " << (co.lemma->passed ? "pass" : "FAIL") << " over "
       << co.lemma->trials.size() << " random trials\n";
    if (co.lemma_fixed_value)
      os << "lemma: fixed function integral " << num(*co.lemma_fixed_value) << " (trapezoid "
         << num(*co.lemma_fixed_trapezoid) << ")\n";
  }
  for (const auto& n : co.notes) os << "note: " << n << "\n";
  os << "check: " << (co.passed ? "PASS" : "FAIL") << "\n";
}

json solution_sidecar(const SolutionRecord& r, const Model& model) {
  json trace = json::array();
  for (const auto& s : r.trace)
    trace.push_back({{"lambda", s.lambda},
                     {"picard", s.picard_iterations},
                     {"newton", s.newton_iterations},
                     {"defect", s.defect}});
  return {{"window", r.window},
          {"bounds", {r.bounds.first, r.bounds.second}},
          {"seed_root", r.seed},
          {"x0", r.x[0]},
          {"residual_eq", r.residual_eq},
          {"residual_fp", r.residual_fp},
          {"qnf", r.qnf},
          {"iterations", r.iterations},
          {"lambda_steps", r.lambda_steps},
          {"lambda_trace", trace},
          {"evaluations", r.stats.evaluations},
          {"bound_violations", r.stats.bound_violations},
          {"max_derivative_ratio", r.stats.max_derivative_ratio},
          {"timescale", model.timescale.describe()},
          {"mesh_nodes", model.mesh->size()},
          {"mesh_dt", model.mesh->dt_max()}};
}

json failure_sidecar(const FailureReport& f) {
  json trace = json::array();
  for (const auto& s : f.trace)
    trace.push_back({{"lambda", s.lambda}, {"defect", s.defect}});
  json j = {{"window", f.window},
            {"bounds", {f.bounds.first, f.bounds.second}},
            {"reason", f.reason},
            {"lambda_trace", trace},
            {"evaluations", f.stats.evaluations},
            {"bound_violations", f.stats.bound_violations}};
  if (f.last) {
    const auto& st = *f.last;
    j["last_state"] = {{"lambda", st.lambda},
                       {"defect", st.defect},
                       {"qnf", st.qnf},
                       {"x", std::vector<double>(st.x.values().begin(), st.x.values().end())}};
  }
  return j;
}

struct SolveSummary {
  std::size_t windows = 0;
  std::size_t solved = 0;
  double max_residual = 0.0;
  json outcomes = json::array();
  std::vector<std::string> files;
};

// Solves every window and writes its files into dir.
SolveSummary solve_and_write(const Scenario& sc, const Model& model, const fs::path& dir,
                             std::ostream& os) {
  SolveSummary sum;
  const auto outcomes = multi_solve(model.problem, sc.alphas, sc.solver);
  sum.windows = outcomes.size();
  os << std::left << std::setw(8) << "window" << std::setw(24) << "x(0)" << std::setw(14)
     << "residual_eq" << std::setw(14) << "residual_fp"
     << "status\n";
  for (const auto& o : outcomes) {
    if (const auto* r = std::get_if<SolutionRecord>(&o)) {
      const std::string base = "window_" + std::to_string(r->window);
      write_solution_csv((dir / (base + ".csv")).string(), r->x, r->x_delta);
      write_json(dir / (base + ".json"), solution_sidecar(*r, model));
      sum.files.push_back(base + ".csv");
      sum.files.push_back(base + ".json");
      ++sum.solved;
      sum.max_residual = std::max(sum.max_residual, r->residual_eq);
      sum.outcomes.push_back({{"window", r->window},
                              {"status", "solved"},
                              {"x0", r->x[0]},
                              {"residual_eq", r->residual_eq},
                              {"residual_fp", r->residual_fp}});
      char line[160];
      std::snprintf(line, sizeof line, "%-8zu%-24.17g%-14.3e%-14.3esolved\n", r->window, r->x[0],
                    r->residual_eq, r->residual_fp);
      os << line;
    } else {
      const auto& f = std::get<FailureReport>(o);
      const std::string name = "window_" + std::to_string(f.window) + "_failure.json";
      write_json(dir / name, failure_sidecar(f));
      sum.files.push_back(name);
      sum.outcomes.push_back({{"window", f.window}, {"status", "failed"}, {"reason", f.reason}});
      os << std::setw(8) << f.window << "failed: " << f.reason << "\n";
    }
  }
  return sum;
}

fs::path prepare_dir(const Scenario& sc) {
  fs::path dir(sc.out_dir);
  fs::create_directories(dir);
  return dir;
}

json manifest_base(const Scenario& sc, const std::string& command, const std::string& started) {
  return {{"tool", "lienard"},
          {"version", LIENARD_VERSION},
          {"command", command},
          {"scenario", sc.source},
          {"scenario_name", sc.name},
          {"scenario_sha256", sha256_hex(sc.text)},
          {"seed", sc.seed},
          {"started", started}};
}

void log_offset(const Model& model, std::ostream& err) {
  const double off = model.problem.forcing_offset();
  if (off != 0.0 && std::abs(off) > 1e-14 * std::max(1.0, model.problem.p().sup_norm()))
    err << "note: forcing p had mean " << num(off) << "; subtracted to make it mean-zero\n";
}

template <typename F>
int guarded(const RunOptions& opt, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err_of(opt) << "error: " << e.what() << "\n";
  } catch (const PreconditionError& e) {
    err_of(opt) << "error: " << e.what() << "\n";
  } catch (const DomainError& e) {
    err_of(opt) << "error: " << e.what() << "\n";
  } catch (const YAML::Exception& e) {
    err_of(opt) << "error: " << e.what() << "\n";
  } catch (const fs::filesystem_error& e) {
    err_of(opt) << "error: " << e.what() << "\n";
  }
  return exit_config;
}

Scenario load(const std::string& path, const RunOptions& opt) {
  Scenario sc = parse_scenario(path);
  apply_overrides(sc, opt);
  return sc;
}

}  // namespace

void apply_overrides(Scenario& sc, const RunOptions& opt) {
  if (opt.mesh_dt) {
    if (!(*opt.mesh_dt > 0.0)) throw ConfigError("--mesh-dt must be positive");
    sc.mesh_dt = *opt.mesh_dt;
    sc.mesh_divisions.reset();
  }
  if (opt.tol_fp) {
    if (!(*opt.tol_fp > 0.0)) throw ConfigError("--tol-fp must be positive");
    sc.solver.tol_fp = *opt.tol_fp;
  }
  if (opt.tol_eq) {
    if (!(*opt.tol_eq > 0.0)) throw ConfigError("--tol-eq must be positive");
    sc.solver.tol_eq = *opt.tol_eq;
  }
  if (opt.lambda_steps) {
    if (*opt.lambda_steps < 1) throw ConfigError("--lambda-steps must be at least 1");
    sc.solver.lambda_steps = *opt.lambda_steps;
  }
  if (opt.seed) sc.seed = *opt.seed;
  if (opt.out_dir) sc.out_dir = *opt.out_dir;
}

CheckOutcome run_check(const Scenario& sc, const Model& model) {
  CheckOutcome co;
  co.passed = true;
  const Problem& pb = model.problem;
  if (!sc.alphas.empty()) {
    CheckOptions opt;
    opt.samples = sc.check.samples;
    switch (sc.check.condition) {
      case ConditionChoice::automatic:
        co.report = check_conditions(pb, sc.alphas, opt);
        break;
      case ConditionChoice::monotone:
        co.report = check_monotone_condition(pb, sc.alphas, opt);
        break;
      case ConditionChoice::near_constant:
        co.report = check_near_constant_condition(pb, sc.alphas, sc.check.gammas, opt);
        break;
    }
    co.passed = co.report->passed;
    if (sc.check.falsifier_trials > 0) {
      co.falsifier = falsify_integral_condition(pb, sc.alphas, co.report->orientation,
                                                sc.check.falsifier_trials, sc.seed);
      if (co.falsifier->violations > 0) co.passed = false;
    }
    if (pb.delay() != 0.0)
      co.notes.push_back(
          "delay r > 0: the strip conditions are applied to g(x(t)); the integral of "
          "g(x(t - r)) equals that of g(x(t)) over a period");
    co.notes.push_back("certificates hold on " + std::to_string(opt.samples) +
                       " samples per strip; they are not interval-arithmetic proofs");
  }
  if (sc.lemma) {
    const ScalarFunction h = make_function(sc.lemma->h);
    co.lemma = check_monotone_integral_lemma(h, sc.lemma->monotonicity, sc.lemma->trials,
                                             model.mesh, sc.seed, sc.lemma->amplitude);
    if (sc.lemma->x) {
      const GridFunction x = GridFunction::sample(model.mesh, make_function(*sc.lemma->x));
      co.lemma_fixed_value = lienard_integral(h, x);
      const GridFunction xd = delta_derivative(x);
      co.lemma_fixed_trapezoid =
          period_integral(x.map(h) * xd, Quadrature::trapezoid);
      const double v = *co.lemma_fixed_value;
      const bool sign_ok =
          sc.lemma->monotonicity == Monotonicity::nondecreasing ? v <= 1e-12 : v >= -1e-12;
      if (!sign_ok) co.lemma->passed = false;
    }
    if (!co.lemma->passed) co.passed = false;
  }
  if (sc.alphas.empty() && !sc.lemma)
    throw ConfigError(sc.source + ": nothing to check (no alphas and no lemma section)");
  return co;
}

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "c") return SweepParameter::c;
  if (name == "T-scale" || name == "time-scale") return SweepParameter::time_scale;
  if (name == "delay" || name == "r") return SweepParameter::delay;
  if (name == "forcing-amplitude" || name == "amplitude") return SweepParameter::forcing_amplitude;
  throw ConfigError("unknown sweep parameter '" + name +
                    "' (expected c, T-scale, delay or forcing-amplitude)");
}

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::c: return "c";
    case SweepParameter::time_scale: return "T-scale";
    case SweepParameter::delay: return "delay";
    case SweepParameter::forcing_amplitude: return "forcing-amplitude";
  }
  return "c";
}

void write_solution_csv(const std::string& path, const GridFunction& x, const GridFunction& xd) {
  std::string text = "t,x,x_delta\n";
  char line[96];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", x.mesh().time(i), x[i], xd[i]);
    text += line;
  }
  write_text(path, text);
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

int cmd_check(const std::string& path, const RunOptions& opt) {
  return guarded(opt, [&] {
    const Scenario sc = load(path, opt);
    const Model model = build_model(sc);
    log_offset(model, err_of(opt));
    const CheckOutcome co = run_check(sc, model);
    const fs::path dir = prepare_dir(sc);
    write_json(dir / "check_report.json", to_json(co, sc));
    print_check_summary(out_of(opt), co);
    return co.passed ? exit_ok : exit_hypothesis;
  });
}

int cmd_solve(const std::string& path, const RunOptions& opt) {
  return guarded(opt, [&] {
    const std::string started = utc_now();
    const Scenario sc = load(path, opt);
    if (sc.alphas.empty()) throw ConfigError(sc.source + ": solve needs 'alphas'");
    const Model model = build_model(sc);
    log_offset(model, err_of(opt));
    std::ostream& os = out_of(opt);
    const CheckOutcome co = run_check(sc, model);
    const fs::path dir = prepare_dir(sc);
    write_json(dir / "check_report.json", to_json(co, sc));
    print_check_summary(os, co);
    json manifest = manifest_base(sc, "solve", started);
    manifest["check_passed"] = co.passed;
    manifest["forced"] = opt.force;
    manifest["forcing_offset"] = model.problem.forcing_offset();
    if (!co.passed && !opt.force) {
      err_of(opt) << "hypothesis check failed; rerun with --force to solve anyway\n";
      manifest["finished"] = utc_now();
      manifest["windows"] = json::array();
      manifest["files"] = {"check_report.json"};
      write_json(dir / "manifest.json", manifest);
      return exit_hypothesis;
    }
    SolveSummary sum = solve_and_write(sc, model, dir, os);
    sum.files.insert(sum.files.begin(), "check_report.json");
    manifest["finished"] = utc_now();
    manifest["windows"] = sum.outcomes;
    manifest["files"] = sum.files;
    write_json(dir / "manifest.json", manifest);
    os << sum.solved << " of " << sum.windows << " windows solved\n";
    return sum.solved == sum.windows ? exit_ok : exit_solver;
  });
}

int cmd_sweep(const std::string& path, SweepParameter param, const SweepRange& range,
              const RunOptions& opt) {
  return guarded(opt, [&] {
    const std::string started = utc_now();
    const Scenario base = load(path, opt);
    if (base.alphas.empty()) throw ConfigError(base.source + ": sweep needs 'alphas'");
    if (range.count < 1) throw ConfigError("sweep count must be at least 1");
    if (!std::isfinite(range.from) || !std::isfinite(range.to))
      throw ConfigError("sweep range must be finite");
    const int count = range.from == range.to ? 1 : range.count;
    const fs::path dir = prepare_dir(base);
    std::ostream& os = out_of(opt);

    std::string summary =
        "value,check_passed,min_spacing_slack,min_margin,windows,solved,max_residual_eq,status\n";
    json points = json::array();
    bool any_solver_failure = false;
    for (int k = 0; k < count; ++k) {
      const double value =
          count == 1 ? range.from : range.from + (range.to - range.from) * k / (count - 1);
      Scenario sc = base;
      switch (param) {
        case SweepParameter::c: sc.phi.a = value; break;
        case SweepParameter::time_scale: sc.time_scale = value; break;
        case SweepParameter::delay: sc.delay = value; break;
        case SweepParameter::forcing_amplitude: sc.forcing_scale = value; break;
      }
      const fs::path sub = dir / ("point_" + std::to_string(k));
      os << "== " << to_string(param) << " = " << num(value) << "\n";
      std::string row;
      try {
        const Model model = build_model(sc);
        const CheckOutcome co = run_check(sc, model);
        fs::create_directories(sub);
        write_json(sub / "check_report.json", to_json(co, sc));
        double min_slack = INFINITY, min_margin = INFINITY;
        for (double s : co.report->spacing.slack) min_slack = std::min(min_slack, s);
        for (const auto& c : co.report->certificates) min_margin = std::min(min_margin, c.min_margin);
        std::size_t windows = sc.alphas.size() - 1, solved = 0;
        double max_res = 0.0;
        std::string status = "not-certified";
        if (co.passed || opt.force) {
          const SolveSummary sum = solve_and_write(sc, model, sub, os);
          solved = sum.solved;
          max_res = sum.max_residual;
          status = solved == windows ? "solved" : "solver-failure";
          if (solved != windows) any_solver_failure = true;
        } else {
          os << "check failed; not solved\n";
        }
        row = num(value) + "," + (co.passed ? "1" : "0") + "," + num(min_slack) + "," +
              num(min_margin) + "," + std::to_string(windows) + "," + std::to_string(solved) +
              "," + num(max_res) + "," + status + "\n";
        points.push_back({{"value", value}, {"status", status}, {"check_passed", co.passed}});
      } catch (const ConfigError& e) {
        os << "error: " << e.what() << "\n";
        row = num(value) + ",0,nan,nan,0,0,nan,config-error\n";
        points.push_back({{"value", value}, {"status", "config-error"}, {"error", e.what()}});
      }
      summary += row;
    }
    const std::string name = "sweep_" + to_string(param) + ".csv";
    write_text(dir / name, summary);
    json manifest = manifest_base(base, "sweep", started);
    manifest["parameter"] = to_string(param);
    manifest["range"] = {{"from", range.from}, {"to", range.to}, {"count", count}};
    manifest["points"] = points;
    manifest["files"] = {name};
    manifest["finished"] = utc_now();
    write_json(dir / "manifest.json", manifest);
    os << "summary written to " << (dir / name).string() << "\n";
    return any_solver_failure ? exit_solver : exit_ok;
  });
}

int cmd_oracle(const std::string& path, const RunOptions& opt) {
  return guarded(opt, [&] {
    const Scenario sc = load(path, opt);
    if (sc.alphas.empty()) throw ConfigError(sc.source + ": oracle needs 'alphas'");
    const Model model = build_model(sc);
    log_offset(model, err_of(opt));
    const fs::path dir = prepare_dir(sc);
    std::ostream& os = out_of(opt);
    bool all_ok = true;
    for (std::size_t j = 0; j + 1 < sc.alphas.size(); ++j) {
      const double lo = sc.alphas[j], hi = sc.alphas[j + 1];
      const auto seed = find_seed_root(model.problem.g(), lo, hi, sc.solver.seed_samples);
      if (!seed) {
        os << "window " << j << ": g has no sign change\n";
        all_ok = false;
        continue;
      }
      const OracleResult r = oracle_solve(model.problem, *seed);
      const bool inside = r.x[0] > lo && r.x[0] < hi;
      if (!r.converged || !inside) {
        os << "window " << j << ": oracle failed: "
           << (r.converged ? "solution left the window" : r.message) << "\n";
        all_ok = false;
        continue;
      }
      write_solution_csv((dir / ("oracle_window_" + std::to_string(j) + ".csv")).string(), r.x,
                         delta_derivative(r.x));
      os << "window " << j << ": x(0) = " << num(r.x[0]) << ", residual " << num(r.residual)
         << ", " << r.newton_iterations << " Newton steps\n";
    }
    return all_ok ? exit_ok : exit_solver;
  });
}

}  // namespace lienard
