#include "qv/fields.hpp"

#include <algorithm>
#include <cmath>

namespace qv {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Natural cubic spline second derivatives (Thomas algorithm).
std::vector<double> spline_second_derivs(const std::vector<double>& x,
                                         const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  std::vector<double> c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = x[i] - x[i - 1];
    const double hr = x[i + 1] - x[i];
    const double b = 2.0 * (hl + hr);
    const double rhs = 6.0 * ((y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl);
    const double w = (i == 1) ? 0.0 : hl / c[i - 1];
    c[i] = b - w * hl;
    d[i] = rhs - w * d[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    const double hr = x[i + 1] - x[i];
    m[i] = (d[i] - hr * m[i + 1]) / c[i];
    if (i == 1) break;
  }
  return m;
}

}  // namespace

ScalarField ScalarField::constant(double value) {
  ScalarField f;
  f.family_ = Family::Constant;
  f.coef_ = {value};
  return f;
}

ScalarField ScalarField::linear(double c0, double c1) {
  ScalarField f;
  f.family_ = Family::Linear;
  f.coef_ = {c0, c1};
  return f;
}

ScalarField ScalarField::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw ConfigError("ScalarField::polynomial: empty coefficient list");
  ScalarField f;
  f.family_ = Family::Polynomial;
  f.coef_ = std::move(coeffs);
  return f;
}

ScalarField ScalarField::sinusoid(double offset, double amplitude, double frequency,
                                  double phase) {
  ScalarField f;
  f.family_ = Family::Sinusoid;
  f.coef_ = {offset, amplitude, frequency, phase};
  return f;
}

ScalarField ScalarField::tabulated(std::vector<double> knots, std::vector<double> values,
                                   Smoothness declared) {
  if (knots.size() != values.size())
    throw ConfigError("ScalarField::tabulated: knots/values size mismatch");
  if (knots.size() < 2) throw ConfigError("ScalarField::tabulated: need at least 2 knots");
  if (!std::is_sorted(knots.begin(), knots.end()))
    throw ConfigError("ScalarField::tabulated: knots must be sorted");
  ScalarField f;
  f.family_ = Family::Tabulated;
  f.smooth_ = declared;
  f.m_ = spline_second_derivs(knots, values);
  f.knots_ = std::move(knots);
  f.values_ = std::move(values);
  return f;
}

double ScalarField::operator()(double t) const {
  switch (family_) {
    case Family::Constant:
      return coef_[0];
    case Family::Linear:
      return coef_[0] + coef_[1] * t;
    case Family::Polynomial: {
      double v = 0.0;
      for (std::size_t i = coef_.size(); i-- > 0;) v = v * t + coef_[i];
      return v;
    }
    case Family::Sinusoid:
      return coef_[0] + coef_[1] * std::sin(kTwoPi * coef_[2] * t + coef_[3]);
    case Family::Tabulated: {
      if (t <= knots_.front()) return values_.front();
      if (t >= knots_.back()) return values_.back();
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
      const double h = knots_[i + 1] - knots_[i];
      const double a = (knots_[i + 1] - t) / h;
      const double b = (t - knots_[i]) / h;
      return a * values_[i] + b * values_[i + 1] +
             ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
    }
  }
  return 0.0;
}

double ScalarField::deriv(double t) const {
  switch (family_) {
    case Family::Constant:
      return 0.0;
    case Family::Linear:
      return coef_[1];
    case Family::Polynomial: {
      double v = 0.0;
      for (std::size_t i = coef_.size(); i-- > 1;)
        v = v * t + coef_[i] * static_cast<double>(i);
      return v;
    }
    case Family::Sinusoid:
      return coef_[1] * kTwoPi * coef_[2] * std::cos(kTwoPi * coef_[2] * t + coef_[3]);
    case Family::Tabulated: {
      if (t <= knots_.front() || t >= knots_.back()) return 0.0;
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
      const double h = knots_[i + 1] - knots_[i];
      const double a = (knots_[i + 1] - t) / h;
      const double b = (t - knots_[i]) / h;
      return (values_[i + 1] - values_[i]) / h +
             ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]) * h / 6.0;
    }
  }
  return 0.0;
}

ParamField ParamField::scale(ScalarField base) {
  ParamField f;
  f.family_ = Family::Scale;
  f.bases_.push_back(std::move(base));
  return f;
}

ParamField ParamField::shift_root(ScalarField h, ScalarField g) {
  ParamField f;
  f.family_ = Family::ShiftRoot;
  f.bases_.push_back(std::move(h));
  f.bases_.push_back(std::move(g));
  return f;
}

ParamField ParamField::theta_poly(std::vector<ScalarField> coeffs) {
  if (coeffs.empty()) throw ConfigError("ParamField::theta_poly: empty coefficient list");
  ParamField f;
  f.family_ = Family::ThetaPoly;
  f.bases_ = std::move(coeffs);
  return f;
}

double ParamField::value(double theta, double t) const {
  switch (family_) {
    case Family::Scale:
      return theta * bases_[0](t);
    case Family::ShiftRoot: {
      const double s = bases_[0](t) + theta * bases_[1](t);
      if (s <= 0.0) throw DomainError("ParamField::shift_root: h + theta*g must stay positive");
      return std::sqrt(s);
    }
    case Family::ThetaPoly: {
      double v = 0.0;
      for (std::size_t j = bases_.size(); j-- > 0;) v = v * theta + bases_[j](t);
      return v;
    }
  }
  return 0.0;
}

double ParamField::dtheta(double theta, double t) const {
  switch (family_) {
    case Family::Scale:
      return bases_[0](t);
    case Family::ShiftRoot: {
      const double g = bases_[1](t);
      return 0.5 * g / value(theta, t);
    }
    case Family::ThetaPoly: {
      double v = 0.0;
      for (std::size_t j = bases_.size(); j-- > 1;)
        v = v * theta + static_cast<double>(j) * bases_[j](t);
      return v;
    }
  }
  return 0.0;
}

double ParamField::d2theta(double theta, double t) const {
  switch (family_) {
    case Family::Scale:
      return 0.0;
    case Family::ShiftRoot: {
      const double g = bases_[1](t);
      const double v = value(theta, t);
      return -0.25 * g * g / (v * v * v);
    }
    case Family::ThetaPoly: {
      double v = 0.0;
      for (std::size_t j = bases_.size(); j-- > 2;)
        v = v * theta + static_cast<double>(j) * static_cast<double>(j - 1) * bases_[j](t);
      return v;
    }
  }
  return 0.0;
}

}  // namespace qv
