#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "lienard/checker.hpp"
#include "lienard/errors.hpp"

using namespace lienard;
using namespace testing;

namespace {

Problem make(const MeshPtr& mesh, double c, ScalarFunction h, ScalarFunction g,
             double delay = 0.0) {
  return Problem(mesh, PhiHomeomorphism::relativistic(c), std::move(h), std::move(g),
                 GridFunction::constant(mesh, 0.0), delay);
}

MeshPtr real_mesh(double T) { return Mesh::build(TimeScale::real_line(T), T / 64); }

std::vector<double> pendulum_alphas(int from, int to) {
  std::vector<double> a;
  for (int j = from; j <= to; ++j) a.push_back((2 * j + 1) * pi / 2);
  return a;
}

double sin_fn(double x) { return std::sin(x); }

}  // namespace

TEST_CASE("monotone condition on the hybrid arctan example") {
  const TimeScale ts(0.5, {{0.0, 0.125}, {0.1875, 0.1875}, {0.25, 0.25}, {0.3125, 0.375},
                           {0.4375, 0.5}});
  const Problem pb = make(Mesh::build(ts), 1.0, [](double x) { return std::exp(-x * x); },
                          [](double x) { return std::atan(x); });
  const CheckReport r = check_monotone_condition(pb, {-10.0, 10.0});
  CHECK(r.passed);
  REQUIRE(r.certificates.size() == 2);
  CHECK(r.orientation == Orientation::reversed);
  for (const auto& c : r.certificates) {
    CHECK(c.condition == Condition::monotone_h);
    CHECK(c.strip.second - c.strip.first == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c.min_margin > 0.0);
  }
  CHECK(r.certificates[0].degree_sign == 1);
}

TEST_CASE("constant h is monotone in both orientations") {
  const MeshPtr mesh = real_mesh(0.9 * pi);
  const auto alphas = pendulum_alphas(-1, 3);
  const Problem pb = make(mesh, 1.0, [](double) { return 0.4; }, sin_fn);
  const CheckReport r = check_monotone_condition(pb, alphas);
  CHECK(r.passed);
  // Starting one window later flips the orientation.
  const Problem shifted = make(mesh, 1.0, [](double) { return 0.4; }, sin_fn);
  const CheckReport s = check_monotone_condition(shifted, pendulum_alphas(0, 3));
  CHECK(s.passed);
  CHECK(s.orientation != r.orientation);
}

TEST_CASE("pendulum strips: margin shrinks to zero at cT = pi") {
  const auto alphas = pendulum_alphas(0, 3);
  // Closed form: the smallest |sin| on (pi/2 +- cT/2) is cos(cT/2).
  for (double cT : {0.5 * pi, 0.9 * pi, pi}) {
    const double T = cT;  // c = 1
    const Problem pb = make(real_mesh(T), 1.0, [](double) { return 0.0; }, sin_fn);
    CheckOptions opt;
    opt.samples = 1024;
    const CheckReport r = check_monotone_condition(pb, alphas, opt);
    CHECK(r.passed);
    // Samples stay strictly inside the strip, so the sampled margin sits
    // just above the closed-form infimum.
    const double inf = std::cos(cT / 2);
    const double w = cT;
    for (const auto& c : r.certificates) {
      CHECK(c.min_margin >= inf - 1e-12);
      CHECK(c.min_margin <= std::sin(pi / 2 - cT / 2 + w / (opt.samples + 1)) + 1e-12);
    }
  }
  const double T = pi + 0.1;
  const Problem wide = make(real_mesh(T), 1.0, [](double) { return 0.0; }, sin_fn);
  const CheckReport r = check_monotone_condition(wide, alphas);
  CHECK_FALSE(r.passed);
  CHECK_FALSE(r.spacing.passed);
  for (const auto& c : r.certificates) {
    CHECK_FALSE(c.passed);
    REQUIRE(c.witness);
    CHECK(std::pow(-1.0, static_cast<double>(c.j)) * std::sin(*c.witness) <= 0.0);
  }
}

TEST_CASE("near-constant condition") {
  const MeshPtr mesh = real_mesh(0.9 * pi);
  const auto alphas = pendulum_alphas(-1, 3);
  const Problem pb = make(mesh, 1.0, [](double) { return 0.1; }, sin_fn);
  const CheckReport r = check_near_constant_condition(pb, alphas, std::vector<double>(5, 0.1));
  CHECK(r.passed);
  for (const auto& c : r.certificates) {
    CHECK(*c.gamma == 0.1);
    // Slack is min (-1)^j g over the samples since |h - gamma| = 0.
    CHECK(c.min_margin == doctest::Approx(std::cos(0.45 * pi - 0.9 * pi / 257)).epsilon(1e-12));
  }
  // Auto-fitted gamma of a constant h is that constant.
  const CheckReport a = check_near_constant_condition(pb, alphas);
  for (const auto& c : a.certificates) CHECK(*c.gamma == 0.1);
}

TEST_CASE("near-constant with cubic g and quadratic h away from the origin") {
  const MeshPtr mesh = real_mesh(2 * pi);
  const Problem pb = make(mesh, 1.0, [](double x) { return 0.5 * x * x; },
                          [](double x) { return x * x * x; }, pi / 2);
  const CheckReport r = check_near_constant_condition(pb, {-10.0, 10.0}, std::vector<double>{0.0, 0.0});
  CHECK(r.passed);
  // Too close to the origin the strip contains a root of g.
  const CheckReport near = check_near_constant_condition(pb, {-3.0, 3.0}, std::vector<double>{0.0, 0.0});
  CHECK_FALSE(near.passed);
}

TEST_CASE("oscillating h violates the near-constant condition") {
  const MeshPtr mesh = real_mesh(1.0);
  // g = 1 + x^2/100 on the strip around 0, a = 1: h = 2 sup g sin x oscillates too much.
  auto g = [](double x) { return 1.0 + x * x / 100.0; };
  const double gmax = g(0.5);
  const Problem pb = make(mesh, 1.0, [gmax](double x) { return 2.0 * gmax * std::sin(8 * x); }, g);
  const CheckReport r = check_near_constant_condition(pb, {0.0, 5.0});
  CHECK_FALSE(r.passed);
  const auto& c = r.certificates[0];
  REQUIRE(c.witness);
  const double x = *c.witness;
  CHECK(g(x) - std::abs(2.0 * gmax * std::sin(8 * x) - *c.gamma) <= 0.0);
  CHECK_FALSE(r.counterexamples.empty());
}

TEST_CASE("failures persist when sampling is refined") {
  const MeshPtr mesh = real_mesh(1.0);
  const Problem pb = make(mesh, 1.0, [](double x) { return 3.0 * std::sin(20 * x); },
                          [](double x) { return x; });
  for (int n : {64, 128, 256}) {
    CheckOptions opt;
    opt.samples = n;
    const CheckReport coarse = check_near_constant_condition(pb, {-3.0, 3.0}, {}, opt);
    opt.samples = 2 * n;
    const CheckReport fine = check_near_constant_condition(pb, {-3.0, 3.0}, {}, opt);
    for (std::size_t j = 0; j < coarse.certificates.size(); ++j)
      if (!coarse.certificates[j].passed) CHECK_FALSE(fine.certificates[j].passed);
  }
}

TEST_CASE("reversing the sign pattern flips g_sign and keeps the verdict") {
  const MeshPtr mesh = real_mesh(0.9 * pi);
  const auto alphas = pendulum_alphas(0, 3);
  auto h = [](double x) { return 0.05 * std::cos(x); };
  const Problem pb = make(mesh, 1.0, h, sin_fn);
  const Problem neg = make(mesh, 1.0, [h](double x) { return -h(x); },
                           [](double x) { return -std::sin(x); });
  for (int which = 0; which < 2; ++which) {
    const CheckReport a = which ? check_near_constant_condition(pb, alphas)
                                : check_monotone_condition(pb, alphas);
    const CheckReport b = which ? check_near_constant_condition(neg, alphas)
                                : check_monotone_condition(neg, alphas);
    CHECK(a.passed == b.passed);
    for (std::size_t j = 0; j < a.certificates.size(); ++j) {
      CHECK(a.certificates[j].g_sign == -b.certificates[j].g_sign);
      CHECK(a.certificates[j].passed == b.certificates[j].passed);
    }
  }
}

TEST_CASE("degree signs alternate on a passing report") {
  const Problem pb = make(real_mesh(0.9 * pi), 1.0, [](double) { return 0.1; }, sin_fn);
  const auto alphas = pendulum_alphas(-1, 3);
  const CheckReport r = check_conditions(pb, alphas);
  REQUIRE(r.passed);
  CHECK(r.certificates.size() == alphas.size());
  for (std::size_t j = 0; j + 1 < alphas.size(); ++j)
    CHECK(r.certificates[j].degree_sign == (j % 2 == 0 ? 1 : -1));
}

TEST_CASE("window spacing") {
  const auto alphas = pendulum_alphas(0, 4);
  const SpacingCheck at = check_window_spacing(alphas, 1.0, pi);
  CHECK(at.passed);
  for (double s : at.slack) CHECK(std::abs(s) < 1e-14);
  CHECK_FALSE(check_window_spacing(alphas, 1.0, pi + 0.1).passed);
  const SpacingCheck one = check_window_spacing({0.0, 1.0}, 1.0, 0.5);
  CHECK(one.passed);
  CHECK(one.slack.size() == 1);
  CHECK(check_window_spacing({0.0}, 1.0, 100.0).passed);
  CHECK_THROWS_AS(check_window_spacing({1.0, 0.0}, 1.0, 1.0), PreconditionError);
}

TEST_CASE("too few samples is a precondition error") {
  const Problem pb = make(real_mesh(1.0), 1.0, [](double) { return 0.0; }, sin_fn);
  CheckOptions opt;
  opt.samples = 32;
  CHECK_THROWS_AS(check_monotone_condition(pb, {-1.0, 1.0}, opt), PreconditionError);
}

TEST_CASE("monotone integral lemma on [0,1] u {2}") {
  const MeshPtr mesh = Mesh::build(example_scale(), 0.25);
  const GridFunction x = example_function(mesh);
  auto id = [](double v) { return v; };
  // Exact value -5/2 under the trapezoid rule; the forward-sum value
  // has the same sign.
  const GridFunction f = x.map(id) * delta_derivative(x);
  CHECK(period_integral(f, Quadrature::trapezoid) == doctest::Approx(-2.5).epsilon(1e-14));
  CHECK(lienard_integral(id, x) <= 0.0);

  const LemmaReport up = check_monotone_integral_lemma(id, Monotonicity::nondecreasing, 100, mesh, 1);
  CHECK(up.passed);
  CHECK(up.trials.size() == 100);
  const LemmaReport down = check_monotone_integral_lemma(
      [](double v) { return -std::atan(v); }, Monotonicity::nonincreasing, 100, mesh, 2);
  CHECK(down.passed);
  // A non-monotone h is caught.
  const LemmaReport bad = check_monotone_integral_lemma(
      [](double v) { return std::sin(5 * v); }, Monotonicity::nondecreasing, 100, mesh, 3);
  CHECK_FALSE(bad.passed);
  CHECK(bad.offending_trial);
}

TEST_CASE("lemma with constant h gives zero") {
  std::mt19937_64 rng(8);
  const MeshPtr mesh = Mesh::build(discrete_scale(8, 3.0));
  for (int t = 0; t < 20; ++t) {
    const GridFunction x = random_function(mesh, rng, -2.0, 2.0);
    CHECK(std::abs(lienard_integral([](double) { return 1.5; }, x)) < 1e-14);
  }
}

TEST_CASE("lemma on the real line follows the chain rule") {
  // For smooth periodic x, sum h(x_i)(x_{i+1} - x_i) differs from the
  // closed-loop integral of h dx = 0 by at most (L/2) sum (x_{i+1} - x_i)^2,
  // which is first order in the mesh size.
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const double T = 2.0;
  auto h = [](double v) { return v + 0.3 * std::tanh(v); };
  const double lipschitz = 1.3;
  for (int t = 0; t < 20; ++t) {
    const double a1 = coef(rng), b1 = coef(rng), a2 = coef(rng), b3 = coef(rng);
    auto smooth = [&](double s) {
      const double w = 2 * pi * s / T;
      return a1 * std::cos(w) + b1 * std::sin(w) + a2 * std::cos(2 * w) + b3 * std::sin(3 * w);
    };
    double prev = INFINITY;
    for (int n : {500, 1000, 2000, 4000}) {
      const MeshPtr mesh = Mesh::build(TimeScale::real_line(T), T / n);
      const GridFunction x = GridFunction::sample(mesh, smooth);
      double bound = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[mesh->next(i)] - x[i];
        bound += 0.5 * lipschitz * dx * dx;
      }
      const double v = lienard_integral(h, x);
      CHECK(v <= 0.0);
      CHECK(std::abs(v) <= bound + 1e-14);
      CHECK(std::abs(v) < 0.6 * prev);
      prev = std::abs(v);
    }
  }
}

TEST_CASE("Monte-Carlo falsifier") {
  const MeshPtr mesh = real_mesh(0.9 * pi);
  const Problem ok = make(mesh, 1.0, [](double) { return 0.1; }, sin_fn);
  const FalsifierReport clean =
      falsify_integral_condition(ok, pendulum_alphas(-1, 3), Orientation::reversed, 50, 4);
  CHECK(clean.violations == 0);
  CHECK(clean.trials == 250);
  CHECK(clean.label.find("not a proof") != std::string::npos);
  // With alpha_0 at a root of g the constant trial already violates.
  const FalsifierReport bad =
      falsify_integral_condition(ok, {0.0, pi}, Orientation::standard, 10, 4);
  CHECK(bad.violations > 0);
  CHECK_FALSE(bad.counterexamples.empty());
}
