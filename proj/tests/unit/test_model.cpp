#include <doctest.h>

#include <cmath>

#include "qv/model.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace qv;

TEST_CASE("psi_true on constant and polynomial coefficients") {
  const auto unit = fixtures::constant_system(1.0, 1.0, 1.0, 1.0, 1.0, 0.1);
  CHECK(model::psi_true(unit, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

  const auto degenerate = fixtures::constant_system(1.0, 0.0, 1.0, 1.0, 1.0, 0.1);
  CHECK(model::psi_true(degenerate, 0.7) == doctest::Approx(0.0));

  // f(t) = t, b = 1: Psi_1 = 1/3 against a 1e4-node trapezoid oracle
  const SystemSpec ramp(ScalarField::constant(1.0), ScalarField::constant(1.0),
                        ScalarField::linear(0.0, 1.0), ScalarField::constant(1.0), 1.0, 0.1);
  const double psi = model::psi_true(ramp, 1.0);
  CHECK(psi == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  const double brute =
      oracle::trapezoid([](double t) { return t * t; }, 0.0, 1.0, 10000);
  CHECK(psi == doctest::Approx(brute).epsilon(1e-7));

  CHECK_THROWS_AS(model::psi_true(unit, 0.0), DomainError);
  CHECK_THROWS_AS(model::psi_true(unit, 1.5), DomainError);
}

TEST_CASE("psi_of_theta and derivative on the worked families") {
  // Example 1: f = theta * 1, b = 1, tau = 1, theta = 2 -> Psi = 4, dPsi = 4
  const auto ex1 =
      fixtures::example1(1.0, 1.0, 1.0, ScalarField::constant(1.0), 1.0, 0.5, 4.0, 1.0, 0.1);
  CHECK(model::psi_of_theta(ex1, 2.0, 1.0) == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(model::dpsi_dtheta(ex1, 2.0, 1.0) == doctest::Approx(4.0).epsilon(1e-10));

  // Example 2: f = 1, h = g = 1, tau = 1, theta = 0.5 -> Psi = 1.5, dPsi = 1
  const auto ex2 = fixtures::example2(1.0, 1.0, 1.0, ScalarField::constant(1.0),
                                      ScalarField::constant(1.0), 0.5, 0.1, 2.0, 1.0, 0.1);
  CHECK(model::psi_of_theta(ex2, 0.5, 1.0) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(model::dpsi_dtheta(ex2, 0.5, 1.0) == doctest::Approx(1.0).epsilon(1e-10));

  // vanishing interval
  CHECK(model::psi_of_theta(ex1, 2.0, 1e-12) == doctest::Approx(0.0).epsilon(1e-11));

  // non-parametric spec refuses
  const auto plain = fixtures::constant_system(1.0, 1.0, 1.0, 1.0, 1.0, 0.1);
  CHECK_THROWS_AS(model::psi_of_theta(plain, 1.0, 0.5), PreconditionError);
  CHECK_THROWS_AS(model::dpsi_dtheta(plain, 1.0, 0.5), PreconditionError);
}

TEST_CASE("dpsi_dtheta agrees with central finite differences") {
  const auto ex2 = fixtures::example2(0.5, 1.3, 1.0, ScalarField::linear(1.0, 0.2),
                                      ScalarField::constant(2.0), 0.8, 0.1, 2.0, 1.0, 0.1);
  const double tau = 0.8, theta = 0.9, step = 1e-5;
  const double fd = (model::psi_of_theta(ex2, theta + step, tau) -
                     model::psi_of_theta(ex2, theta - step, tau)) /
                    (2.0 * step);
  CHECK(model::dpsi_dtheta(ex2, theta, tau) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("psi is nondecreasing in tau and monotone in theta") {
  const auto ex1 =
      fixtures::example1(1.0, 1.0, 1.0, ScalarField::constant(1.0), 1.0, 0.5, 4.0, 1.0, 0.1);
  double prev = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double tau = i / 20.0;
    const double psi = model::psi_true(ex1, tau);
    CHECK(psi >= prev - 1e-12);
    prev = psi;
  }
  // strict monotonicity over 100 theta samples (condition on the inverse map)
  prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double theta = 0.5 + 3.5 * i / 100.0;
    const double psi = model::psi_of_theta(ex1, theta, 0.5);
    CHECK(psi > prev);
    prev = psi;
  }
}

TEST_CASE("var_y: degenerate, Brownian and OU closed forms") {
  const auto none = fixtures::constant_system(1.0, 0.0, 1.0, 1.0, 1.0, 0.1);
  CHECK(model::var_y(none, 1.0) == doctest::Approx(0.0));

  const auto brownian = fixtures::constant_system(0.0, 1.0, 1.0, 1.0, 1.0, 0.1);
  CHECK(model::var_y(brownian, 1.0) == doctest::Approx(1.0).epsilon(1e-10));

  const auto ou = fixtures::constant_system(1.0, 1.0, 1.0, 1.0, 1.0, 0.1);
  const double expected = 0.5 * (1.0 - std::exp(-2.0));
  CHECK(model::var_y(ou, 1.0) == doctest::Approx(expected).epsilon(1e-8));

  // fine-grid explicit Euler oracle
  double v = 0.0;
  const std::size_t n = 2000000;
  for (std::size_t k = 0; k < n; ++k) v += (1.0 / n) * (-2.0 * v + 1.0);
  CHECK(model::var_y(ou, 1.0) == doctest::Approx(v).epsilon(1e-5));

  CHECK(model::var_y(ou, 0.0) == 0.0);
  CHECK_THROWS_AS(model::var_y(ou, 2.0), DomainError);
}

TEST_CASE("var_z: degenerate case and composed value") {
  auto [k_star, k] = default_kernel_pair(true);
  const auto kc = constants(k_star, k);

  const auto none = fixtures::constant_system(1.0, 0.0, 1.0, 1.0, 1.0, 0.1);
  CHECK(model::var_z(none, 0.5, kc) == doctest::Approx(0.0));

  // composed from var_y + the kernel constants (all terms checked separately)
  const auto unit = fixtures::constant_system(1.0, 1.0, 1.0, 1.0, 1.0, 0.1);
  const double vy = model::var_y(unit, 0.5);
  const double expected = 4.0 * vy * (kc.dd_star_sq + kc.d_star_sq) + 4.0 * kc.dd_sq * 0.5 +
                          4.0 * kc.dd_sq * 0.5;
  CHECK(model::var_z(unit, 0.5, kc) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("var_z scaling identity when f doubles") {
  auto [k_star, k] = default_kernel_pair(true);
  const auto kc = constants(k_star, k);
  const double tau = 0.5;

  const auto base = fixtures::constant_system(1.0, 1.0, 1.0, 1.0, 1.0, 0.1);
  const auto doubled = fixtures::constant_system(1.0, 1.0, 2.0, 1.0, 1.0, 0.1);

  const double vy = model::var_y(base, tau);  // unchanged by f
  // term-by-term: Y W term x4, Y V term x16, Q term x16, R term x4
  const double yw = 4.0 * vy * kc.d_star_sq;
  const double yv = 4.0 * vy * kc.dd_star_sq;
  const double q = 4.0 * kc.dd_sq * tau;
  const double r = 4.0 * kc.dd_sq * tau;
  CHECK(model::var_z(base, tau, kc) == doctest::Approx(yw + yv + q + r).epsilon(1e-9));
  CHECK(model::var_z(doubled, tau, kc) ==
        doctest::Approx(4.0 * yw + 16.0 * yv + 16.0 * q + 4.0 * r).epsilon(1e-9));
}

TEST_CASE("weighted-target oracles int_b2 / int_f2") {
  const SystemSpec spec(ScalarField::constant(1.0), ScalarField::linear(1.0, 1.0),
                        ScalarField::linear(0.0, 1.0), ScalarField::constant(1.0), 1.0, 0.1);
  CHECK(model::int_b2(spec, 1.0) == doctest::Approx(7.0 / 3.0).epsilon(1e-10));
  CHECK(model::int_f2(spec, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}
