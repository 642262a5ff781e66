#include "qv/model.hpp"

#include <cmath>

#include "qv/quadrature.hpp"

namespace qv::model {

namespace {

constexpr double kQuadTol = 1e-10;

void check_tau(const SystemSpec& spec, double tau) {
  if (!(tau > 0.0) || tau > spec.T())
    throw DomainError("tau must lie in (0, T]");
}

}  // namespace

double psi_true(const SystemSpec& spec, double tau) {
  check_tau(spec, tau);
  const double th = spec.parametric() ? spec.theta0() : spec.theta_for_eval();
  return quad::adaptive_simpson(
      [&](double s) {
        const double f = spec.f().at(th, s);
        const double b = spec.b().at(th, s);
        return f * f * b * b;
      },
      0.0, tau, kQuadTol);
}

double psi_of_theta(const SystemSpec& spec, double theta, double tau) {
  if (!spec.parametric())
    throw PreconditionError("psi_of_theta: spec has no theta-parameterized coefficient");
  check_tau(spec, tau);
  return quad::adaptive_simpson(
      [&](double s) {
        const double f = spec.f().at(theta, s);
        const double b = spec.b().at(theta, s);
        return f * f * b * b;
      },
      0.0, tau, kQuadTol);
}

double dpsi_dtheta(const SystemSpec& spec, double theta, double tau) {
  if (!spec.parametric())
    throw PreconditionError("dpsi_dtheta: spec has no theta-parameterized coefficient");
  check_tau(spec, tau);
  // d/dtheta (f^2 b^2) = 2 f b (f' b + f b') with ' = d/dtheta
  return quad::adaptive_simpson(
      [&](double s) {
        const double f = spec.f().at(theta, s);
        const double b = spec.b().at(theta, s);
        const double fd = spec.f().dtheta(theta, s);
        const double bd = spec.b().dtheta(theta, s);
        return 2.0 * f * b * (fd * b + f * bd);
      },
      0.0, tau, kQuadTol);
}

double var_y_at(const SystemSpec& spec, double theta, double tau) {
  if (tau < 0.0 || tau > spec.T()) throw DomainError("var_y: tau must lie in [0, T]");
  if (tau == 0.0) return 0.0;
  auto rhs = [&](double t, double v) {
    const double a = spec.a().at(theta, t);
    const double b = spec.b().at(theta, t);
    return -2.0 * a * v + b * b;
  };
  const std::size_t n = 2000;
  const double h = tau / static_cast<double>(n);
  double v = 0.0, t = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double k1 = rhs(t, v);
    const double k2 = rhs(t + 0.5 * h, v + 0.5 * h * k1);
    const double k3 = rhs(t + 0.5 * h, v + 0.5 * h * k2);
    const double k4 = rhs(t + h, v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
  }
  return v;
}

double var_y(const SystemSpec& spec, double tau) {
  return var_y_at(spec, spec.parametric() ? spec.theta0() : spec.theta_for_eval(), tau);
}

double var_z_at(const SystemSpec& spec, double theta, double tau, const KernelConstants& kc) {
  check_tau(spec, tau);
  const double f = spec.f().at(theta, tau);
  const double b = spec.b().at(theta, tau);
  const double sg = spec.sigma().at(theta, tau);
  const double vy = var_y_at(spec, theta, tau);

  const double endpoint =
      4.0 * f * f * vy * (f * f * b * b * kc.dd_star_sq + sg * sg * kc.d_star_sq);

  const double q_hat_sq = kc.dd_sq * quad::adaptive_simpson(
                                         [&](double s) {
                                           const double fs = spec.f().at(theta, s);
                                           const double bs = spec.b().at(theta, s);
                                           const double p = fs * fs * bs * bs;
                                           return p * p;
                                         },
                                         0.0, tau, kQuadTol);
  const double r_hat_sq = kc.dd_sq * quad::adaptive_simpson(
                                         [&](double s) {
                                           const double fs = spec.f().at(theta, s);
                                           const double bs = spec.b().at(theta, s);
                                           const double ss = spec.sigma().at(theta, s);
                                           return fs * fs * bs * bs * ss * ss;
                                         },
                                         0.0, tau, kQuadTol);
  return endpoint + 4.0 * q_hat_sq + 4.0 * r_hat_sq;
}

double var_z(const SystemSpec& spec, double tau, const KernelConstants& kc) {
  return var_z_at(spec, spec.parametric() ? spec.theta0() : spec.theta_for_eval(), tau, kc);
}

double int_b2(const SystemSpec& spec, double tau) {
  check_tau(spec, tau);
  const double th = spec.theta_for_eval();
  return quad::adaptive_simpson(
      [&](double s) {
        const double b = spec.b().at(th, s);
        return b * b;
      },
      0.0, tau, kQuadTol);
}

double int_f2(const SystemSpec& spec, double tau) {
  check_tau(spec, tau);
  const double th = spec.theta_for_eval();
  return quad::adaptive_simpson(
      [&](double s) {
        const double f = spec.f().at(th, s);
        return f * f;
      },
      0.0, tau, kQuadTol);
}

}  // namespace qv::model
