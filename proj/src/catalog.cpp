#include "lienard/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lienard/errors.hpp"

namespace lienard {

const std::map<std::string, std::map<std::string, double>>& function_catalog() {
  static const std::map<std::string, std::map<std::string, double>> catalog = {
      {"constant", {{"value", 0.0}}},
      {"linear", {{"slope", 1.0}, {"intercept", 0.0}}},
      {"sin", {{"amplitude", 1.0}, {"frequency", 1.0}, {"phase", 0.0}}},
      {"cos", {{"amplitude", 1.0}, {"frequency", 1.0}, {"phase", 0.0}}},
      {"arctan", {{"amplitude", 1.0}, {"rate", 1.0}}},
      {"tanh", {{"amplitude", 1.0}, {"rate", 1.0}}},
      {"cubic", {{"c3", 1.0}, {"c2", 0.0}, {"c1", 0.0}, {"c0", 0.0}}},
      {"gaussian", {{"amplitude", 1.0}, {"center", 0.0}, {"width", 1.0}}},
      {"table", {}},
      {"sum", {}},
  };
  return catalog;
}

namespace {

std::map<std::string, double> resolve_params(const FunctionSpec& spec) {
  const auto& catalog = function_catalog();
  const auto it = catalog.find(spec.kind);
  if (it == catalog.end()) {
    std::string known;
    for (const auto& [name, unused] : catalog) known += (known.empty() ? "" : ", ") + name;
    throw ConfigError("unknown function kind '" + spec.kind + "' (known: " + known + ")");
  }
  std::map<std::string, double> out = it->second;
  for (const auto& [key, value] : spec.params) {
    if (!out.count(key))
      throw ConfigError("function '" + spec.kind + "' has no parameter '" + key + "'");
    if (!std::isfinite(value))
      throw ConfigError("parameter '" + key + "' of '" + spec.kind + "' is not finite");
    out[key] = value;
  }
  return out;
}

ScalarFunction make_table(const FunctionSpec& spec) {
  auto pts = spec.points;
  if (pts.size() < 2) throw ConfigError("table needs at least two points");
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (!(pts[i].first > pts[i - 1].first))
      throw ConfigError("table abscissae must be distinct");
  return [pts](double x) {
    if (x <= pts.front().first) return pts.front().second;
    if (x >= pts.back().first) return pts.back().second;
    const auto hi = std::upper_bound(pts.begin(), pts.end(), x,
                                     [](double v, const auto& p) { return v < p.first; });
    const auto lo = std::prev(hi);
    const double w = (x - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
  };
}

}  // namespace

ScalarFunction make_function(const FunctionSpec& spec) {
  const auto p = resolve_params(spec);
  const std::string& k = spec.kind;
  if (k == "constant") {
    const double v = p.at("value");
    return [v](double) { return v; };
  }
  if (k == "linear") {
    const double m = p.at("slope"), b = p.at("intercept");
    return [m, b](double x) { return m * x + b; };
  }
  if (k == "sin" || k == "cos") {
    const double amp = p.at("amplitude"), w = p.at("frequency"), ph = p.at("phase");
    if (k == "sin") return [amp, w, ph](double x) { return amp * std::sin(w * x + ph); };
    return [amp, w, ph](double x) { return amp * std::cos(w * x + ph); };
  }
  if (k == "arctan") {
    const double amp = p.at("amplitude"), r = p.at("rate");
    return [amp, r](double x) { return amp * std::atan(r * x); };
  }
  if (k == "tanh") {
    const double amp = p.at("amplitude"), r = p.at("rate");
    return [amp, r](double x) { return amp * std::tanh(r * x); };
  }
  if (k == "cubic") {
    const double c3 = p.at("c3"), c2 = p.at("c2"), c1 = p.at("c1"), c0 = p.at("c0");
    return [=](double x) { return ((c3 * x + c2) * x + c1) * x + c0; };
  }
  if (k == "gaussian") {
    const double amp = p.at("amplitude"), c = p.at("center"), w = p.at("width");
    if (!(w > 0.0)) throw ConfigError("gaussian width must be positive");
    return [=](double x) {
      const double u = (x - c) / w;
      return amp * std::exp(-u * u);
    };
  }
  if (k == "table") return make_table(spec);
  // sum
  if (spec.terms.empty()) throw ConfigError("sum needs at least one term");
  std::vector<ScalarFunction> fs;
  for (const auto& t : spec.terms) fs.push_back(make_function(t));
  return [fs](double x) {
    double acc = 0.0;
    for (const auto& f : fs) acc += f(x);
    return acc;
  };
}

std::string describe(const FunctionSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  if (spec.kind == "sum") {
    for (std::size_t i = 0; i < spec.terms.size(); ++i)
      os << (i ? " + " : "") << describe(spec.terms[i]);
    return os.str();
  }
  os << spec.kind << "(";
  if (spec.kind == "table") {
    for (std::size_t i = 0; i < spec.points.size(); ++i)
      os << (i ? ", " : "") << "(" << spec.points[i].first << ", " << spec.points[i].second
         << ")";
  } else {
    bool first = true;
    for (const auto& [key, value] : resolve_params(spec)) {
      os << (first ? "" : ", ") << key << "=" << value;
      first = false;
    }
  }
  os << ")";
  return os.str();
}

PhiHomeomorphism make_phi(const PhiSpec& spec) {
  if (spec.kind == "relativistic") return PhiHomeomorphism::relativistic(spec.a);
  if (spec.kind == "cubic-bounded") return PhiHomeomorphism::cubic_bounded(spec.a);
  if (spec.kind == "arctan-scaled") return PhiHomeomorphism::arctan_scaled(spec.a);
  throw ConfigError("unknown phi kind '" + spec.kind +
                    "' (known: relativistic, cubic-bounded, arctan-scaled)");
}

}  // namespace lienard
