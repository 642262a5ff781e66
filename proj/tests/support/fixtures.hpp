// Shared system configurations for the test suites.
#pragma once

#include "qv/system.hpp"

namespace fixtures {

/// Plain system with constant coefficients.
inline qv::SystemSpec constant_system(double a, double b, double f, double sigma, double T,
                                      double eps) {
  using qv::ScalarField;
  return qv::SystemSpec(ScalarField::constant(a), ScalarField::constant(b),
                        ScalarField::constant(f), ScalarField::constant(sigma), T, eps);
}

/// f(theta, t) = theta * f0(t), everything else plain.
inline qv::SystemSpec example1(double a, double b, double sigma, qv::ScalarField f0,
                               double theta0, double alpha, double beta, double T, double eps) {
  using qv::ScalarField;
  qv::ThetaInterval th{alpha, beta, theta0};
  return qv::SystemSpec(ScalarField::constant(a), ScalarField::constant(b),
                        qv::ParamField::scale(std::move(f0)), ScalarField::constant(sigma), T,
                        eps, th);
}

/// b(theta, t) = sqrt(h(t) + theta g(t)), everything else plain.
inline qv::SystemSpec example2(double a, double f, double sigma, qv::ScalarField h,
                               qv::ScalarField g, double theta0, double alpha, double beta,
                               double T, double eps) {
  using qv::ScalarField;
  qv::ThetaInterval th{alpha, beta, theta0};
  return qv::SystemSpec(ScalarField::constant(a),
                        qv::ParamField::shift_root(std::move(h), std::move(g)),
                        ScalarField::constant(f), ScalarField::constant(sigma), T, eps, th);
}

}  // namespace fixtures
