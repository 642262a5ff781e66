#include <doctest.h>

#include <cmath>

#include "qv/fields.hpp"
#include "qv/system.hpp"

using qv::ParamField;
using qv::ScalarField;

TEST_CASE("closed-form families evaluate exactly") {
  const auto c = ScalarField::constant(2.5);
  CHECK(c(0.0) == 2.5);
  CHECK(c(17.0) == 2.5);
  CHECK(c.deriv(3.0) == 0.0);

  const auto lin = ScalarField::linear(1.0, -0.5);
  CHECK(lin(2.0) == doctest::Approx(0.0));
  CHECK(lin.deriv(2.0) == -0.5);

  const auto poly = ScalarField::polynomial({1.0, 0.0, 3.0});  // 1 + 3t^2
  CHECK(poly(2.0) == doctest::Approx(13.0));
  CHECK(poly.deriv(2.0) == doctest::Approx(12.0));

  const auto sin = ScalarField::sinusoid(1.0, 0.5, 2.0, 0.0);
  CHECK(sin(0.0) == doctest::Approx(1.0));
  CHECK(sin.deriv(0.0) == doctest::Approx(0.5 * 2.0 * 2.0 * std::acos(-1.0)));
}

TEST_CASE("tabulated field interpolates its knots cubically") {
  // samples of t^3 on [0, 2]
  std::vector<double> knots, values;
  for (int i = 0; i <= 40; ++i) {
    const double t = 2.0 * i / 40.0;
    knots.push_back(t);
    values.push_back(t * t * t);
  }
  const auto tab = ScalarField::tabulated(knots, values);
  CHECK(tab(1.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tab(0.775) == doctest::Approx(0.775 * 0.775 * 0.775).epsilon(1e-4));
  // knots are reproduced exactly
  CHECK(tab(knots[7]) == doctest::Approx(values[7]).epsilon(1e-12));
  // clamped outside the table
  CHECK(tab(-1.0) == values.front());
  CHECK(tab(3.0) == values.back());
}

TEST_CASE("tabulated construction rejects malformed tables") {
  CHECK_THROWS_AS(ScalarField::tabulated({0.0, 1.0}, {1.0}), qv::ConfigError);
  CHECK_THROWS_AS(ScalarField::tabulated({1.0, 0.0}, {1.0, 2.0}), qv::ConfigError);
  CHECK_THROWS_AS(ScalarField::tabulated({0.0}, {1.0}), qv::ConfigError);
}

TEST_CASE("declared C1 smoothness is truthful under finite differences") {
  // first-order convergence of the FD derivative toward the exact derivative
  const auto f = ScalarField::sinusoid(0.0, 1.0, 1.0, 0.3);
  const double t = 0.4;
  double prev_err = 1e300;
  for (double step : {1e-2, 1e-3, 1e-4}) {
    const double fd = (f(t + step) - f(t - step)) / (2.0 * step);
    const double err = std::abs(fd - f.deriv(t));
    CHECK(err < prev_err + 1e-14);
    prev_err = err;
  }
  CHECK(prev_err < 1e-6);
}

TEST_CASE("scale family: value and derivatives") {
  const auto pf = ParamField::scale(ScalarField::linear(1.0, 1.0));  // theta (1+t)
  CHECK(pf.value(2.0, 1.0) == doctest::Approx(4.0));
  CHECK(pf.dtheta(2.0, 1.0) == doctest::Approx(2.0));
  CHECK(pf.d2theta(2.0, 1.0) == 0.0);
}

TEST_CASE("shift-root family: value, derivatives, domain guard") {
  const auto pf =
      ParamField::shift_root(ScalarField::constant(1.0), ScalarField::constant(1.0));
  const double theta = 0.5;
  CHECK(pf.value(theta, 0.3) == doctest::Approx(std::sqrt(1.5)));
  CHECK(pf.dtheta(theta, 0.3) == doctest::Approx(0.5 / std::sqrt(1.5)));
  CHECK(pf.d2theta(theta, 0.3) == doctest::Approx(-0.25 * std::pow(1.5, -1.5)));
  CHECK_THROWS_AS(pf.value(-2.0, 0.3), qv::DomainError);
}

TEST_CASE("theta_poly family matches hand-expanded polynomial") {
  // 1 + 2 theta + t theta^2
  const auto pf = ParamField::theta_poly(
      {ScalarField::constant(1.0), ScalarField::constant(2.0), ScalarField::linear(0.0, 1.0)});
  CHECK(pf.value(3.0, 2.0) == doctest::Approx(1.0 + 6.0 + 2.0 * 9.0));
  CHECK(pf.dtheta(3.0, 2.0) == doctest::Approx(2.0 + 2.0 * 2.0 * 3.0));
  CHECK(pf.d2theta(3.0, 2.0) == doctest::Approx(2.0 * 2.0));
}

TEST_CASE("parametric dtheta matches central finite differences") {
  const auto pf =
      ParamField::shift_root(ScalarField::linear(1.0, 0.5), ScalarField::linear(2.0, -0.3));
  const double t = 0.7, theta = 1.3, step = 1e-5;
  const double fd = (pf.value(theta + step, t) - pf.value(theta - step, t)) / (2.0 * step);
  CHECK(pf.dtheta(theta, t) == doctest::Approx(fd).epsilon(1e-8));

  const double fd2 =
      (pf.dtheta(theta + step, t) - pf.dtheta(theta - step, t)) / (2.0 * step);
  CHECK(pf.d2theta(theta, t) == doctest::Approx(fd2).epsilon(1e-6));
}

TEST_CASE("system spec validation") {
  using qv::Coefficient;
  const auto one = ScalarField::constant(1.0);

  CHECK_THROWS_AS(qv::SystemSpec(one, one, one, ScalarField::constant(0.0), 1.0, 0.1),
                  qv::ConfigError);
  CHECK_THROWS_AS(qv::SystemSpec(one, one, one, one, -1.0, 0.1), qv::ConfigError);
  CHECK_THROWS_AS(qv::SystemSpec(one, one, one, one, 1.0, 1.5), qv::ConfigError);
  // parametric field without a theta interval
  CHECK_THROWS_AS(qv::SystemSpec(one, one, qv::ParamField::scale(one), one, 1.0, 0.1),
                  qv::ConfigError);

  const qv::SystemSpec ok(one, one, qv::ParamField::scale(one), one, 1.0, 0.1,
                          qv::ThetaInterval{0.5, 2.0, 1.0});
  CHECK(ok.parametric());
  CHECK(ok.theta0() == 1.0);
}

TEST_CASE("system spec JSON round trip") {
  const qv::SystemSpec spec(
      ScalarField::sinusoid(1.0, 0.25, 0.5, 0.1), ScalarField::polynomial({1.0, 0.5}),
      qv::ParamField::scale(ScalarField::constant(2.0)), ScalarField::constant(1.0), 2.0, 0.05,
      qv::ThetaInterval{0.5, 3.0, 1.25});
  const auto j = qv::to_json(spec);
  const qv::SystemSpec back = qv::system_from_json(j);
  CHECK(back.T() == spec.T());
  CHECK(back.eps() == spec.eps());
  CHECK(back.theta0() == spec.theta0());
  for (double t : {0.0, 0.3, 1.1, 2.0}) {
    CHECK(back.a().at(1.25, t) == doctest::Approx(spec.a().at(1.25, t)).epsilon(1e-15));
    CHECK(back.b().at(1.25, t) == doctest::Approx(spec.b().at(1.25, t)).epsilon(1e-15));
    CHECK(back.f().at(1.25, t) == doctest::Approx(spec.f().at(1.25, t)).epsilon(1e-15));
  }
  CHECK(back.f().parametric());
}
