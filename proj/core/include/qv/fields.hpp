#pragma once

#include <string>
#include <vector>

#include "qv/errors.hpp"

namespace qv {

enum class Smoothness { C0, C1, C2 };

/// Deterministic time-dependent coefficient on [0, T].
///
/// Closed-form families evaluate exactly; the tabulated family interpolates
/// its sample table with a natural cubic spline and clamps outside the knots.
class ScalarField {
 public:
  enum class Family { Constant, Linear, Polynomial, Sinusoid, Tabulated };

  static ScalarField constant(double value);
  static ScalarField linear(double c0, double c1);
  static ScalarField polynomial(std::vector<double> coeffs);
  /// offset + amplitude * sin(2*pi*frequency*t + phase)
  static ScalarField sinusoid(double offset, double amplitude, double frequency, double phase);
  static ScalarField tabulated(std::vector<double> knots, std::vector<double> values,
                               Smoothness declared = Smoothness::C2);

  double operator()(double t) const;
  /// First derivative in t (exact for closed forms, spline derivative for tables).
  double deriv(double t) const;

  Family family() const { return family_; }
  Smoothness smoothness() const { return smooth_; }
  const std::vector<double>& params() const { return coef_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

 private:
  ScalarField() = default;

  Family family_ = Family::Constant;
  Smoothness smooth_ = Smoothness::C2;
  std::vector<double> coef_;    // polynomial coefficients or sinusoid parameters
  std::vector<double> knots_;   // tabulated only
  std::vector<double> values_;  // tabulated only
  std::vector<double> m_;       // tabulated only: spline second derivatives
};

/// theta-parameterized coefficient: value plus first and second theta-derivatives.
class ParamField {
 public:
  enum class Family {
    Scale,      // theta * base(t)
    ShiftRoot,  // sqrt(h(t) + theta * g(t))
    ThetaPoly,  // sum_j c_j(t) * theta^j
  };

  static ParamField scale(ScalarField base);
  static ParamField shift_root(ScalarField h, ScalarField g);
  static ParamField theta_poly(std::vector<ScalarField> coeffs);

  double value(double theta, double t) const;
  double dtheta(double theta, double t) const;
  double d2theta(double theta, double t) const;

  Family family() const { return family_; }
  const std::vector<ScalarField>& bases() const { return bases_; }

 private:
  ParamField() = default;

  Family family_ = Family::Scale;
  std::vector<ScalarField> bases_;
};

/// A system coefficient: either a plain ScalarField or a ParamField.
/// Plain fields ignore theta and have zero theta-derivatives.
class Coefficient {
 public:
  Coefficient(ScalarField f) : plain_(std::move(f)), parametric_(false) {}
  Coefficient(ParamField f) : param_(std::move(f)), parametric_(true) {}

  bool parametric() const { return parametric_; }

  double at(double theta, double t) const {
    return parametric_ ? param_.value(theta, t) : plain_(t);
  }
  double dtheta(double theta, double t) const {
    return parametric_ ? param_.dtheta(theta, t) : 0.0;
  }
  double d2theta(double theta, double t) const {
    return parametric_ ? param_.d2theta(theta, t) : 0.0;
  }

  const ScalarField& plain() const {
    if (parametric_) throw PreconditionError("Coefficient: parametric field has no plain view");
    return plain_;
  }
  const ParamField& param() const {
    if (!parametric_) throw PreconditionError("Coefficient: plain field has no parametric view");
    return param_;
  }

 private:
  ScalarField plain_ = ScalarField::constant(0.0);
  ParamField param_ = ParamField::scale(ScalarField::constant(0.0));
  bool parametric_ = false;
};

}  // namespace qv
