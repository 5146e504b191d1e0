#include "lienard/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

#include "lienard/errors.hpp"

namespace lienard {

double parse_real(const std::string& text) {
  static const std::regex grammar(
      R"(^\s*([+-])?\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*(pi)?\s*(?:/\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?))?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, grammar) || (!m[2].matched && !m[3].matched))
    throw ConfigError("cannot read '" + text + "' as a number (expected e.g. 1.5, 3pi/2, 20/9)");
  auto number = [](const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc()) throw ConfigError("number '" + s + "' is out of range");
    return v;
  };
  double v = m[2].matched ? number(m[2].str()) : 1.0;
  if (m[3].matched) v *= std::numbers::pi;
  if (m[4].matched) {
    const double d = number(m[4].str());
    if (d == 0.0) throw ConfigError("division by zero in '" + text + "'");
    v /= d;
  }
  if (m[1].matched && m[1].str() == "-") v = -v;
  return v;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (node.IsDefined() && node.Mark().line >= 0) os << ":" << node.Mark().line + 1;
    os << ": " << msg;
    throw ConfigError(os.str());
  }

  double real(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a number");
    try {
      return parse_real(node.Scalar());
    } catch (const ConfigError& e) {
      fail(node, what + ": " + e.what());
    }
  }

  int integer(const YAML::Node& node, const std::string& what) const {
    const double v = real(node, what);
    if (v != std::floor(v) || std::abs(v) > 1e9) fail(node, what + " must be an integer");
    return static_cast<int>(v);
  }

  bool boolean(const YAML::Node& node, const std::string& what) const {
    try {
      return node.as<bool>();
    } catch (const YAML::Exception&) {
      fail(node, what + " must be true or false");
    }
  }

  std::string text(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a string");
    return node.Scalar();
  }

  std::vector<double> reals(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence()) fail(node, what + " must be a list");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(real(item, what + " entry"));
    return out;
  }

  void only_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                 const std::string& what) const {
    if (!node.IsMap()) fail(node, what + " must be a mapping");
    for (const auto& kv : node) {
      const std::string key = kv.first.Scalar();
      if (!allowed.count(key)) {
        std::string list;
        for (const auto& k : allowed) list += (list.empty() ? "" : ", ") + k;
        fail(kv.first, "unknown key '" + key + "' in " + what + " (allowed: " + list + ")");
      }
    }
  }

  FunctionSpec function(const YAML::Node& node, const std::string& what) const {
    FunctionSpec spec;
    if (node.IsScalar()) {
      spec.kind = "constant";
      spec.params["value"] = real(node, what);
      return spec;
    }
    if (!node.IsMap()) fail(node, what + " must be a number or a mapping with 'kind'");
    if (!node["kind"]) fail(node, what + " needs a 'kind'");
    spec.kind = text(node["kind"], what + ".kind");
    for (const auto& kv : node) {
      const std::string key = kv.first.Scalar();
      if (key == "kind") continue;
      if (key == "points" && spec.kind == "table") {
        if (!kv.second.IsSequence()) fail(kv.second, what + ".points must be a list of [x, y]");
        for (const auto& pt : kv.second) {
          if (!pt.IsSequence() || pt.size() != 2) fail(pt, what + ".points entries are [x, y]");
          spec.points.emplace_back(real(pt[0], "table x"), real(pt[1], "table y"));
        }
      } else if (key == "terms" && spec.kind == "sum") {
        if (!kv.second.IsSequence()) fail(kv.second, what + ".terms must be a list");
        for (const auto& t : kv.second) spec.terms.push_back(function(t, what + " term"));
      } else {
        spec.params[key] = real(kv.second, what + "." + key);
      }
    }
    try {
      (void)make_function(spec);
    } catch (const ConfigError& e) {
      fail(node, what + ": " + e.what());
    }
    return spec;
  }

 private:
  std::string source_;
};

void read_cells(const Reader& rd, const YAML::Node& node, Scenario& sc) {
  if (node.IsScalar()) {
    if (node.Scalar() != "real") rd.fail(node, "timescale must be 'real' or a mapping with cells");
    sc.cells = {Cell{0.0, sc.period}};
    return;
  }
  rd.only_keys(node, {"cells"}, "timescale");
  const YAML::Node cells = node["cells"];
  if (!cells || !cells.IsSequence()) rd.fail(node, "timescale needs a list 'cells'");
  if (cells.size() == 0) rd.fail(cells, "timescale cells list is empty");
  const double tol = 1e-9 * sc.period;
  auto snap = [&](double t) {
    if (std::abs(t) <= tol) return 0.0;
    if (std::abs(t - sc.period) <= tol) return sc.period;
    return t;
  };
  for (const auto& c : cells) {
    if (c.IsScalar()) {
      const double t = snap(rd.real(c, "point cell"));
      sc.cells.push_back(Cell{t, t});
    } else if (c.IsSequence() && c.size() == 2) {
      const double lo = snap(rd.real(c[0], "interval start"));
      const double hi = snap(rd.real(c[1], "interval end"));
      if (!(lo < hi)) rd.fail(c, "interval cells need lo < hi");
      sc.cells.push_back(Cell{lo, hi});
    } else {
      rd.fail(c, "a cell is either a point t or an interval [lo, hi]");
    }
  }
  try {
    (void)TimeScale(sc.period, sc.cells);
  } catch (const ConfigError& e) {
    rd.fail(cells, e.what());
  }
}

void read_solver(const Reader& rd, const YAML::Node& node, SolverOptions& opt) {
  rd.only_keys(node,
               {"tol_fp", "tol_eq", "lambda_steps", "min_lambda_step", "max_picard", "newton",
                "max_newton"},
               "solver");
  auto positive = [&](const char* key, double& out) {
    if (!node[key]) return;
    out = rd.real(node[key], key);
    if (!(out > 0.0)) rd.fail(node[key], std::string(key) + " must be positive");
  };
  positive("tol_fp", opt.tol_fp);
  positive("tol_eq", opt.tol_eq);
  positive("min_lambda_step", opt.min_lambda_step);
  auto count = [&](const char* key, int& out) {
    if (!node[key]) return;
    out = rd.integer(node[key], key);
    if (out < 1) rd.fail(node[key], std::string(key) + " must be at least 1");
  };
  count("lambda_steps", opt.lambda_steps);
  count("max_picard", opt.max_picard);
  count("max_newton", opt.max_newton);
  if (node["newton"]) opt.newton = rd.boolean(node["newton"], "newton");
}

void read_check(const Reader& rd, const YAML::Node& node, CheckSettings& cs) {
  rd.only_keys(node, {"condition", "gammas", "samples", "falsifier_trials"}, "check");
  if (node["condition"]) {
    const std::string c = rd.text(node["condition"], "condition");
    if (c == "auto") cs.condition = ConditionChoice::automatic;
    else if (c == "monotone") cs.condition = ConditionChoice::monotone;
    else if (c == "near-constant") cs.condition = ConditionChoice::near_constant;
    else rd.fail(node["condition"], "condition must be auto, monotone or near-constant");
  }
  if (node["gammas"]) cs.gammas = rd.reals(node["gammas"], "gammas");
  if (node["samples"]) {
    cs.samples = rd.integer(node["samples"], "samples");
    if (cs.samples < 64) rd.fail(node["samples"], "samples must be at least 64");
  }
  if (node["falsifier_trials"]) {
    cs.falsifier_trials = rd.integer(node["falsifier_trials"], "falsifier_trials");
    if (cs.falsifier_trials < 0) rd.fail(node["falsifier_trials"], "must be nonnegative");
  }
}

LemmaSettings read_lemma(const Reader& rd, const YAML::Node& node) {
  rd.only_keys(node, {"h", "monotonicity", "trials", "amplitude", "x"}, "lemma");
  LemmaSettings ls;
  if (!node["h"]) rd.fail(node, "lemma needs h");
  ls.h = rd.function(node["h"], "lemma.h");
  if (node["monotonicity"]) {
    const std::string m = rd.text(node["monotonicity"], "monotonicity");
    if (m == "nondecreasing") ls.monotonicity = Monotonicity::nondecreasing;
    else if (m == "nonincreasing") ls.monotonicity = Monotonicity::nonincreasing;
    else rd.fail(node["monotonicity"], "monotonicity must be nondecreasing or nonincreasing");
  }
  if (node["trials"]) {
    ls.trials = rd.integer(node["trials"], "trials");
    if (ls.trials < 1) rd.fail(node["trials"], "trials must be positive");
  }
  if (node["amplitude"]) ls.amplitude = rd.real(node["amplitude"], "amplitude");
  if (node["x"]) ls.x = rd.function(node["x"], "lemma.x");
  return ls;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& source) {
  const Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << source << ":" << e.mark.line + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }
  if (!root.IsMap()) throw ConfigError(source + ": scenario must be a YAML mapping");
  rd.only_keys(root,
               {"name", "period", "timescale", "phi", "h", "g", "p", "delay", "alphas", "mesh",
                "solver", "check", "lemma", "seed", "output", "time_scale", "forcing_scale"},
               "scenario");

  Scenario sc;
  sc.source = source;
  sc.text = text;
  sc.name = root["name"] ? rd.text(root["name"], "name") : "scenario";
  if (!root["period"]) rd.fail(root, "missing 'period'");
  sc.period = rd.real(root["period"], "period");
  if (!(sc.period > 0.0)) rd.fail(root["period"], "period must be positive");
  if (!root["timescale"]) rd.fail(root, "missing 'timescale'");
  read_cells(rd, root["timescale"], sc);

  if (const YAML::Node phi = root["phi"]) {
    rd.only_keys(phi, {"kind", "c", "a"}, "phi");
    sc.phi.kind = phi["kind"] ? rd.text(phi["kind"], "phi.kind") : "relativistic";
    const char* width = sc.phi.kind == "relativistic" ? "c" : "a";
    if (phi[sc.phi.kind == "relativistic" ? "a" : "c"])
      rd.fail(phi, "phi '" + sc.phi.kind + "' takes parameter '" + width + "'");
    if (phi[width]) sc.phi.a = rd.real(phi[width], std::string("phi.") + width);
    try {
      (void)make_phi(sc.phi);
    } catch (const ConfigError& e) {
      rd.fail(phi, e.what());
    }
  }
  if (root["h"]) sc.h = rd.function(root["h"], "h");
  if (root["g"]) sc.g = rd.function(root["g"], "g");
  if (root["p"]) sc.p = rd.function(root["p"], "p");
  if (root["delay"]) {
    sc.delay = rd.real(root["delay"], "delay");
    if (sc.delay < 0.0) rd.fail(root["delay"], "delay must be nonnegative");
  }
  if (root["alphas"]) {
    sc.alphas = rd.reals(root["alphas"], "alphas");
    if (sc.alphas.size() < 2) rd.fail(root["alphas"], "alphas needs at least two values");
    for (std::size_t j = 1; j < sc.alphas.size(); ++j)
      if (!(sc.alphas[j - 1] < sc.alphas[j]))
        rd.fail(root["alphas"], "alphas must be strictly increasing");
    if (!sc.g) rd.fail(root["alphas"], "alphas given but g is missing");
  }
  if (const YAML::Node mesh = root["mesh"]) {
    rd.only_keys(mesh, {"dt", "divisions"}, "mesh");
    if (mesh["dt"] && mesh["divisions"]) rd.fail(mesh, "give either mesh.dt or mesh.divisions");
    if (mesh["dt"]) {
      sc.mesh_dt = rd.real(mesh["dt"], "mesh.dt");
      if (!(*sc.mesh_dt > 0.0)) rd.fail(mesh["dt"], "mesh.dt must be positive");
    }
    if (mesh["divisions"]) {
      sc.mesh_divisions = rd.integer(mesh["divisions"], "mesh.divisions");
      if (*sc.mesh_divisions < 1) rd.fail(mesh["divisions"], "mesh.divisions must be positive");
    }
  }
  if (root["solver"]) read_solver(rd, root["solver"], sc.solver);
  if (root["check"]) read_check(rd, root["check"], sc.check);
  if (sc.check.gammas && sc.check.gammas->size() != sc.alphas.size())
    rd.fail(root["check"]["gammas"], "need one gamma per alpha");
  if (root["lemma"]) sc.lemma = read_lemma(rd, root["lemma"]);
  if (root["seed"]) {
    const int s = rd.integer(root["seed"], "seed");
    if (s < 0) rd.fail(root["seed"], "seed must be nonnegative");
    sc.seed = static_cast<std::uint64_t>(s);
  }
  if (const YAML::Node out = root["output"]) {
    rd.only_keys(out, {"dir"}, "output");
    if (out["dir"]) sc.out_dir = rd.text(out["dir"], "output.dir");
  }
  if (root["time_scale"]) {
    sc.time_scale = rd.real(root["time_scale"], "time_scale");
    if (!(sc.time_scale > 0.0)) rd.fail(root["time_scale"], "time_scale must be positive");
  }
  if (root["forcing_scale"]) sc.forcing_scale = rd.real(root["forcing_scale"], "forcing_scale");
  return sc;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

double effective_mesh_dt(const Scenario& sc) {
  const double period = sc.period * sc.time_scale;
  if (sc.mesh_dt) return *sc.mesh_dt * sc.time_scale;
  if (sc.mesh_divisions) return period / *sc.mesh_divisions;
  return period / 256.0;
}

Model build_model(const Scenario& sc) {
  const double s = sc.time_scale;
  std::vector<Cell> cells = sc.cells;
  for (Cell& c : cells) {
    c.lo *= s;
    c.hi *= s;
  }
  TimeScale ts(sc.period * s, cells);
  MeshPtr mesh = Mesh::build(ts, effective_mesh_dt(sc));

  const ScalarFunction pf = make_function(sc.p);
  const double amp = sc.forcing_scale;
  GridFunction p = GridFunction::sample(mesh, [&](double t) { return amp * pf(t / s); });

  ScalarFunction h = make_function(sc.h);
  ScalarFunction g = sc.g ? make_function(*sc.g) : ScalarFunction([](double) { return 0.0; });
  PhiHomeomorphism phi = make_phi(sc.phi);

  if (!sc.alphas.empty()) {
    // h and g are evaluated on the strips around the alphas and in between.
    const double reach = phi.a() * ts.period();
    const double lo = sc.alphas.front() - reach, hi = sc.alphas.back() + reach;
    for (int k = 0; k <= 1024; ++k) {
      const double x = lo + (hi - lo) * k / 1024.0;
      if (!std::isfinite(h(x)) || !std::isfinite(g(x))) {
        std::ostringstream os;
        os << sc.source << ": h or g is not finite at x = " << x;
        throw ConfigError(os.str());
      }
    }
  }
  try {
    Problem pb(mesh, std::move(phi), std::move(h), std::move(g), p, sc.delay * s);
    return Model{std::move(ts), std::move(mesh), std::move(pb)};
  } catch (const ConfigError& e) {
    throw ConfigError(sc.source + ": " + e.what());
  }
}

}  // namespace lienard
