#include "lienard/checker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "lienard/errors.hpp"

namespace lienard {

std::string to_string(Condition c) {
  switch (c) {
    case Condition::monotone_h: return "monotone-h";
    case Condition::near_constant_h: return "near-constant-h";
    case Condition::user_asserted: return "user-asserted";
    case Condition::none: return "none";
  }
  return "none";
}

namespace {

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

int parity(std::size_t j) { return j % 2 == 0 ? 1 : -1; }

void require_alphas(const std::vector<double>& alphas) {
  if (alphas.empty()) throw PreconditionError("need at least one alpha");
  for (std::size_t j = 1; j < alphas.size(); ++j)
    if (!(alphas[j - 1] < alphas[j]))
      throw PreconditionError("alphas must be strictly increasing");
}

// Interior sample points of the open strip centred at alpha with width w.
std::vector<double> strip_samples(double alpha, double w, int samples) {
  std::vector<double> s(static_cast<std::size_t>(samples));
  const double lo = alpha - 0.5 * w;
  for (int k = 0; k < samples; ++k) s[static_cast<std::size_t>(k)] = lo + w * (k + 1) / (samples + 1);
  return s;
}

Orientation detect_orientation(const Problem& pb, const std::vector<double>& alphas) {
  return pb.g()(alphas.front()) < 0.0 ? Orientation::reversed : Orientation::standard;
}

int orientation_sign(Orientation o) { return o == Orientation::standard ? 1 : -1; }

WindowCertificate base_certificate(const Problem& pb, const std::vector<double>& alphas,
                                   std::size_t j, int samples) {
  const double w = pb.phi().a() * pb.period();
  WindowCertificate cert;
  cert.j = j;
  cert.alpha = alphas[j];
  cert.strip = {alphas[j] - 0.5 * w, alphas[j] + 0.5 * w};
  cert.samples = samples;
  if (j + 1 < alphas.size()) {
    const int lo = sign_of(pb.g()(alphas[j]));
    const int hi = sign_of(pb.g()(alphas[j + 1]));
    cert.degree_sign = (lo != 0 && hi != 0) ? (hi - lo) / 2 : 0;
  }
  return cert;
}

std::string witness_text(const WindowCertificate& c, const std::string& what) {
  std::ostringstream os;
  os << "alpha_" << c.j << " = " << c.alpha << ": " << what << " at x = " << *c.witness;
  return os.str();
}

WindowCertificate certify_monotone(const Problem& pb, const std::vector<double>& alphas,
                                   std::size_t j, Orientation orientation,
                                   const CheckOptions& opt) {
  WindowCertificate cert = base_certificate(pb, alphas, j, opt.samples);
  cert.condition = Condition::monotone_h;
  const int s = orientation_sign(orientation) * parity(j);
  const auto xs = strip_samples(cert.alpha, pb.phi().a() * pb.period(), opt.samples);
  std::vector<double> gv(xs.size()), hv(xs.size());
  double scale = 1.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    gv[k] = pb.g()(xs[k]);
    hv[k] = pb.h()(xs[k]);
    scale = std::max(scale, std::abs(gv[k]));
  }
  cert.min_margin = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double slack = parity(j) * gv[k] * orientation_sign(orientation);
    if (slack < cert.min_margin) cert.min_margin = slack;
    if (ok && !(slack > opt.margin * scale)) {
      ok = false;
      cert.witness = xs[k];
      cert.note = "sign condition on g fails";
    }
  }
  for (std::size_t k = 0; ok && k + 1 < xs.size(); ++k) {
    if (s * (hv[k + 1] - hv[k]) > opt.monotone_tol) {
      ok = false;
      cert.witness = xs[k + 1];
      cert.note = "h has the wrong monotonicity";
    }
  }
  cert.g_sign = orientation_sign(orientation);
  cert.passed = ok;
  return cert;
}

WindowCertificate certify_near_constant(const Problem& pb, const std::vector<double>& alphas,
                                        std::size_t j, Orientation orientation,
                                        std::optional<double> gamma, const CheckOptions& opt) {
  WindowCertificate cert = base_certificate(pb, alphas, j, opt.samples);
  cert.condition = Condition::near_constant_h;
  const double a = pb.phi().a();
  const auto xs = strip_samples(cert.alpha, a * pb.period(), opt.samples);
  std::vector<double> gv(xs.size()), hv(xs.size());
  double scale = 1.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    gv[k] = pb.g()(xs[k]);
    hv[k] = pb.h()(xs[k]);
    scale = std::max(scale, std::abs(gv[k]));
  }
  if (!gamma) {
    const auto [mn, mx] = std::minmax_element(hv.begin(), hv.end());
    gamma = 0.5 * (*mn + *mx);
  }
  cert.gamma = gamma;
  cert.min_margin = std::numeric_limits<double>::infinity();
  double worst_at = xs.front();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double slack =
        orientation_sign(orientation) * parity(j) * gv[k] - a * std::abs(hv[k] - *gamma);
    if (slack < cert.min_margin) {
      cert.min_margin = slack;
      worst_at = xs[k];
    }
  }
  cert.g_sign = orientation_sign(orientation);
  cert.passed = cert.min_margin > opt.margin * scale;
  if (!cert.passed) {
    cert.witness = worst_at;
    cert.note = "a|h - gamma| exceeds the signed g";
  }
  return cert;
}

CheckReport assemble(const Problem& pb, const std::vector<double>& alphas, Orientation o,
                     std::vector<WindowCertificate> certs) {
  CheckReport report;
  report.orientation = o;
  report.certificates = std::move(certs);
  report.spacing = check_window_spacing(alphas, pb.phi().a(), pb.period());
  report.passed = report.spacing.passed;
  for (const auto& c : report.certificates) {
    if (!c.passed) {
      report.passed = false;
      if (c.witness) report.counterexamples.push_back(witness_text(c, c.note));
    }
  }
  for (std::size_t j = 0; j < report.spacing.slack.size(); ++j) {
    if (report.spacing.slack[j] < 0.0 && !report.spacing.passed) {
      std::ostringstream os;
      os << "gap alpha_" << j + 1 << " - alpha_" << j << " is shorter than aT by "
         << -report.spacing.slack[j];
      report.counterexamples.push_back(os.str());
    }
  }
  return report;
}

void require_samples(const CheckOptions& opt) {
  if (opt.samples < 64) throw PreconditionError("at least 64 samples per strip are required");
}

}  // namespace

SpacingCheck check_window_spacing(const std::vector<double>& alphas, double a, double period) {
  require_alphas(alphas);
  SpacingCheck out;
  const double width = a * period;
  for (std::size_t j = 1; j < alphas.size(); ++j) {
    const double gap = alphas[j] - alphas[j - 1];
    const double slack = gap - width;
    out.slack.push_back(slack);
    // Relative tolerance so that gap == aT holds with zero slack.
    if (slack < -1e-12 * std::max(std::abs(gap), std::abs(width))) out.passed = false;
  }
  return out;
}

CheckReport check_monotone_condition(const Problem& pb, const std::vector<double>& alphas,
                                     const CheckOptions& options) {
  require_alphas(alphas);
  require_samples(options);
  const Orientation o = detect_orientation(pb, alphas);
  std::vector<WindowCertificate> certs;
  for (std::size_t j = 0; j < alphas.size(); ++j)
    certs.push_back(certify_monotone(pb, alphas, j, o, options));
  return assemble(pb, alphas, o, std::move(certs));
}

CheckReport check_near_constant_condition(const Problem& pb, const std::vector<double>& alphas,
                                          const std::optional<std::vector<double>>& gammas,
                                          const CheckOptions& options) {
  require_alphas(alphas);
  require_samples(options);
  if (gammas && gammas->size() != alphas.size())
    throw PreconditionError("need one gamma per alpha");
  const Orientation o = detect_orientation(pb, alphas);
  std::vector<WindowCertificate> certs;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    std::optional<double> gamma;
    if (gammas) gamma = (*gammas)[j];
    certs.push_back(certify_near_constant(pb, alphas, j, o, gamma, options));
  }
  return assemble(pb, alphas, o, std::move(certs));
}

CheckReport check_conditions(const Problem& pb, const std::vector<double>& alphas,
                             const CheckOptions& options) {
  require_alphas(alphas);
  require_samples(options);
  const Orientation o = detect_orientation(pb, alphas);
  std::vector<WindowCertificate> certs;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    WindowCertificate mono = certify_monotone(pb, alphas, j, o, options);
    if (mono.passed) {
      certs.push_back(std::move(mono));
      continue;
    }
    certs.push_back(certify_near_constant(pb, alphas, j, o, std::nullopt, options));
  }
  return assemble(pb, alphas, o, std::move(certs));
}

// ---------------------------------------------------------------------------

double lienard_integral(const ScalarFunction& h, const GridFunction& x) {
  const GridFunction xd = delta_derivative(x);
  const auto steps = x.mesh().steps();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += steps[i] * h(x[i]) * xd[i];
  return acc;
}

LemmaReport check_monotone_integral_lemma(const ScalarFunction& h, Monotonicity monotonicity,
                                          int trials, const MeshPtr& mesh, std::uint64_t seed,
                                          double amplitude) {
  if (trials < 1) throw PreconditionError("need at least one trial");
  LemmaReport report;
  report.monotonicity = monotonicity;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  const auto steps = mesh->steps();
  for (int t = 0; t < trials; ++t) {
    std::vector<double> v(mesh->size());
    for (double& vi : v) vi = dist(rng);
    const GridFunction x(mesh, std::move(v));
    const GridFunction xd = delta_derivative(x);
    LemmaTrial trial;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double term = steps[i] * h(x[i]) * xd[i];
      trial.value += term;
      trial.scale += std::abs(term);
    }
    const double tol = 1e-10 * std::max(trial.scale, std::numeric_limits<double>::min());
    trial.passed = monotonicity == Monotonicity::nondecreasing ? trial.value <= tol
                                                                : trial.value >= -tol;
    if (!trial.passed && !report.offending_trial)
      report.offending_trial = static_cast<std::size_t>(t);
    report.passed = report.passed && trial.passed;
    report.trials.push_back(trial);
  }
  return report;
}

FalsifierReport falsify_integral_condition(const Problem& pb, const std::vector<double>& alphas,
                                           Orientation orientation, int trials_per_alpha,
                                           std::uint64_t seed) {
  require_alphas(alphas);
  FalsifierReport report;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Mesh& mesh = pb.mesh();
  const auto steps = mesh.steps();
  const double a = pb.phi().a();
  const double period = pb.period();
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    const double s = orientation_sign(orientation) * parity(j);
    for (int t = 0; t < trials_per_alpha; ++t) {
      // Random derivative with zero mean and |v| < a; the first trial is x ≡ α_j.
      std::vector<double> v(mesh.size(), 0.0);
      if (t > 0) {
        const double level = std::abs(unit(rng));
        double mean = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
          v[i] = unit(rng);
          mean += steps[i] * v[i];
        }
        mean /= period;
        double vmax = 0.0;
        for (double& vi : v) {
          vi -= mean;
          vmax = std::max(vmax, std::abs(vi));
        }
        if (vmax > 0.0)
          for (double& vi : v) vi *= 0.999 * a * level / vmax;
      }
      double xi = alphas[j];
      double integral = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        integral += steps[i] * (pb.h()(xi) * v[i] + pb.g()(xi));
        xi += steps[i] * v[i];
      }
      ++report.trials;
      if (!(s * integral > 0.0)) {
        ++report.violations;
        if (report.counterexamples.size() < 8) {
          std::ostringstream os;
          os << "alpha_" << j << " = " << alphas[j] << ": trial " << t
             << " gives signed integral " << s * integral;
          report.counterexamples.push_back(os.str());
        }
      }
    }
  }
  return report;
}

}  // namespace lienard
