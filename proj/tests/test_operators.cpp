#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "lienard/errors.hpp"
#include "lienard/operators.hpp"

using namespace lienard;
using namespace testing;

namespace {

double zero(double) { return 0.0; }

Problem pendulum(const MeshPtr& mesh, double k, double amplitude, double c = 1.0) {
  const double T = mesh->period();
  const GridFunction p = GridFunction::sample(
      mesh, [&](double t) { return amplitude * std::cos(2 * pi * t / T); });
  return Problem(mesh, PhiHomeomorphism::relativistic(c), [k](double) { return k; },
                 [](double x) { return std::sin(x); }, p);
}

}  // namespace

TEST_CASE("Nemytskii operator") {
  const MeshPtr mesh = Mesh::build(TimeScale::real_line(2 * pi), 2 * pi / 256);
  const GridFunction z = GridFunction::constant(mesh, 0.0);
  const Problem trivial(mesh, PhiHomeomorphism::relativistic(1.0), zero, zero, z);
  std::mt19937_64 rng(1);
  const GridFunction x = random_function(mesh, rng);
  CHECK(nemytskii(trivial, x, delta_derivative(x)).sup_norm() == 0.0);

  // Cubic restoring force, cos t forcing: at x = 1 the operator is -1 + cos t.
  const GridFunction p = GridFunction::sample(mesh, [](double t) { return std::cos(t); });
  const Problem cubic(mesh, PhiHomeomorphism::relativistic(1.0),
                      [](double u) { return 0.5 * u * u; }, [](double u) { return u * u * u; }, p);
  const GridFunction one = GridFunction::constant(mesh, 1.0);
  const GridFunction n = nemytskii(cubic, one, delta_derivative(one));
  for (std::size_t i = 0; i < n.size(); ++i)
    CHECK(std::abs(n[i] - (-1.0 + std::cos(mesh->time(i)))) < 1e-14);

  // At a constant b the mean of N_f is -g(b).
  const Problem pend = pendulum(mesh, 0.3, 0.2);
  const GridFunction b = GridFunction::constant(mesh, 0.8);
  CHECK(projector_Q(nemytskii(pend, b, delta_derivative(b))) ==
        doctest::Approx(-std::sin(0.8)).epsilon(1e-13));
}

TEST_CASE("projectors") {
  const MeshPtr mesh = Mesh::build(example_scale(), 0.25);
  CHECK(projector_Q(GridFunction::constant(mesh, 4.0)) == doctest::Approx(4.0).epsilon(1e-15));
  const GridFunction x = example_function(mesh);
  const GridFunction xd = delta_derivative(x);
  CHECK(std::abs(projector_Q(xd)) < 1e-15);
  CHECK(projector_Q(x * xd, Quadrature::trapezoid) == doctest::Approx(-2.5 / 3.0).epsilon(1e-14));
  CHECK(projector_P(x) == 0.0);
  CHECK(projector_P(GridFunction::constant(mesh, 1.25)) == 1.25);
  const MeshPtr real = Mesh::build(TimeScale::real_line(1.0), 1.0 / 64);
  CHECK(projector_P(GridFunction::sample(real, [](double t) { return std::sin(2 * pi * t); })) ==
        0.0);
}

TEST_CASE("integrator H") {
  const double T = 3.0;
  const MeshPtr mesh = Mesh::build(TimeScale::real_line(T), T / 512);
  CHECK(integrator_H(GridFunction::constant(mesh, 0.0)).sup_norm() == 0.0);
  const GridFunction z =
      GridFunction::sample(mesh, [&](double t) { return std::cos(2 * pi * t / T); });
  const GridFunction h = integrator_H(z, Quadrature::trapezoid);
  const double dt = T / 512;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double exact = T / (2 * pi) * std::sin(2 * pi * mesh->time(i) / T);
    CHECK(std::abs(h[i] - exact) < dt * dt);
  }
  CHECK(h[0] == 0.0);

  const MeshPtr em = Mesh::build(example_scale(), 0.125);
  const GridFunction x = example_function(em);
  const GridFunction back = integrator_H(delta_derivative(x));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back[i] - x[i]) < 1e-14);

  CHECK_THROWS_AS(integrator_H(GridFunction::constant(mesh, 1.0)), PreconditionError);
  try {
    (void)integrator_H(GridFunction::constant(mesh, 1.0));
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("Q(z)") != std::string::npos);
  }
}

TEST_CASE("homotopy operator at lambda = 0") {
  const MeshPtr mesh = Mesh::build(TimeScale::real_line(0.9 * pi), 0.9 * pi / 128);
  const Problem pb = pendulum(mesh, 0.1, 0.2);
  std::mt19937_64 rng(2);
  GridFunction x = random_function(mesh, rng, 0.5, 1.0);
  const MResult m = apply_m(pb, 0.0, x);
  const double expected = x[0] + projector_Q(nemytskii(pb, x, delta_derivative(x)));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(m.y[i] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(m.y_delta.sup_norm() == 0.0);

  // Constant at a root of g is a fixed point; a non-constant x is not.
  const GridFunction b = GridFunction::constant(mesh, 0.0);
  const MResult mb = apply_m(pb, 0.0, b);
  CHECK(mb.y.sup_norm() < 1e-15);
  const GridFunction c = GridFunction::constant(mesh, 0.5);
  CHECK(std::abs(apply_m(pb, 0.0, c).y[0] - 0.5) > 0.1);
  CHECK(c1_norm(x - m.y) > 1e-3);
}

TEST_CASE("every image of M respects the derivative bound") {
  const MeshPtr mesh = Mesh::build(TimeScale(2.0, {{0.0, 0.7}, {1.0, 1.0}, {1.3, 1.9}}), 0.02);
  std::mt19937_64 rng(4);
  for (double c : {0.3, 1.0}) {
    const Problem pb = pendulum(mesh, 2.0, 5.0, c);
    ApplyMStats stats;
    for (int trial = 0; trial < 30; ++trial) {
      const GridFunction x = random_function(mesh, rng, -4.0, 4.0);
      const MResult m = apply_m(pb, 1.0, x, &stats);
      CHECK(m.y_delta.sup_norm() < c);
      // y_delta is the derivative of y.
      const GridFunction yd = delta_derivative(m.y);
      for (std::size_t i = 0; i < yd.size(); ++i) CHECK(std::abs(yd[i] - m.y_delta[i]) < 1e-9);
    }
    CHECK(stats.evaluations == 30);
    CHECK(stats.bound_violations == 0);
    CHECK(stats.max_derivative_ratio < 1.0);
  }
  CHECK_THROWS_AS(apply_m(pendulum(mesh, 0.0, 0.0), 1.5, GridFunction::constant(mesh, 0.0)),
                  PreconditionError);
}

TEST_CASE("forcing is re-centered") {
  const MeshPtr mesh = Mesh::build(TimeScale::real_line(2.0), 2.0 / 64);
  const GridFunction p =
      GridFunction::sample(mesh, [](double t) { return 0.3 + std::sin(pi * t); });
  const Problem pb(mesh, PhiHomeomorphism::relativistic(1.0), zero, zero, p);
  CHECK(pb.forcing_offset() == doctest::Approx(0.3).epsilon(1e-13));
  CHECK(std::abs(projector_Q(pb.p())) <= 1e-10 * pb.p().sup_norm());
}

TEST_CASE("delay handling in the problem") {
  const MeshPtr mesh = Mesh::build(TimeScale::real_line(2.0), 2.0 / 64);
  const GridFunction p = GridFunction::constant(mesh, 0.0);
  const Problem full(mesh, PhiHomeomorphism::relativistic(1.0), zero, zero, p, 2.5);
  CHECK(full.delay() == doctest::Approx(0.5));
  CHECK_THROWS_AS(Problem(mesh, PhiHomeomorphism::relativistic(1.0), zero, zero, p, 0.01),
                  ConfigError);
  // N_f reads g at x(t - r).
  const Problem pb(mesh, PhiHomeomorphism::relativistic(1.0), zero, [](double u) { return u; }, p,
                   0.5);
  const GridFunction x = GridFunction::sample(mesh, [](double t) { return t * (2.0 - t); });
  const GridFunction n = nemytskii(pb, x, delta_derivative(x));
  const GridFunction sx = shift(x, 0.5);
  for (std::size_t i = 0; i < n.size(); ++i) CHECK(n[i] == -sx[i]);
}

TEST_CASE("equation residual") {
  const MeshPtr mesh = Mesh::build(TimeScale::real_line(0.9 * pi), 0.9 * pi / 256);
  const Problem pb = pendulum(mesh, 0.1, 0.0);
  CHECK(equation_residual(pb, GridFunction::constant(mesh, pi)) < 1e-15);
  const GridFunction steep =
      GridFunction::sample(mesh, [](double t) { return 3.0 * std::sin(4 * t / 0.9); });
  CHECK_THROWS_AS(equation_residual(pb, steep), DomainError);
  try {
    (void)equation_residual(pb, steep);
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("node") != std::string::npos);
  }
  const GridFunction wiggle =
      GridFunction::sample(mesh, [](double t) { return 1.0 + 0.1 * std::sin(2 * t / 0.9); });
  CHECK(equation_residual(pb, wiggle) > 1e-3);
}
