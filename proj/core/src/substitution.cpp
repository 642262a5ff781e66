#include "qv/substitution.hpp"

#include <cmath>

#include "qv/model.hpp"

namespace qv {

ThetaSpace certify_theta_space(const SystemSpec& spec, double tau, int grid_points) {
  if (!spec.parametric() || !spec.theta())
    throw PreconditionError("certify_theta_space: spec is not parametric");
  if (grid_points < 2) throw ConfigError("certify_theta_space: need at least 2 grid points");

  const double alpha = spec.theta()->alpha;
  const double beta = spec.theta()->beta;
  double margin = std::numeric_limits<double>::infinity();
  double first_sign = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double th =
        alpha + (beta - alpha) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    const double d = model::dpsi_dtheta(spec, th, tau);
    if (first_sign == 0.0) first_sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    if (d == 0.0 || d * first_sign < 0.0)
      throw PreconditionError(
          "certify_theta_space: dPsi/dtheta vanishes or changes sign on the interval");
    margin = std::min(margin, std::abs(d));
  }
  const double scale = std::abs(model::psi_of_theta(spec, 0.5 * (alpha + beta), tau)) + 1.0;
  if (!(margin > 1e-10 * scale))
    throw PreconditionError("certify_theta_space: monotonicity margin is numerically zero");

  ThetaSpace s;
  s.alpha = alpha;
  s.beta = beta;
  s.tau = tau;
  s.increasing = first_sign > 0.0;
  s.margin = margin;
  return s;
}

SubstitutionResult substitution_estimator(double psi_hat, const SystemSpec& spec,
                                          const ThetaSpace& space) {
  if (!std::isfinite(psi_hat))
    throw DomainError("substitution_estimator: psi_hat is not finite");

  auto psi = [&](double th) { return model::psi_of_theta(spec, th, space.tau); };
  const double at_alpha = psi(space.alpha);
  const double at_beta = psi(space.beta);
  const double psi_min = space.increasing ? at_alpha : at_beta;
  const double psi_max = space.increasing ? at_beta : at_alpha;

  SubstitutionResult r;
  if (psi_hat <= psi_min) {
    r.theta_check = space.increasing ? space.alpha : space.beta;
    r.clamp = space.increasing ? ClampFlag::Low : ClampFlag::High;
    return r;
  }
  if (psi_hat >= psi_max) {
    r.theta_check = space.increasing ? space.beta : space.alpha;
    r.clamp = space.increasing ? ClampFlag::High : ClampFlag::Low;
    return r;
  }

  // bracketed root: bisection with secant acceleration
  const double tol = 1e-12 * std::max(1.0, std::abs(psi_hat));
  double lo = space.alpha, hi = space.beta;
  double flo = at_alpha - psi_hat, fhi = at_beta - psi_hat;
  double theta = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    double candidate = hi - fhi * (hi - lo) / (fhi - flo);  // secant through the bracket
    if (!(candidate > lo && candidate < hi)) candidate = 0.5 * (lo + hi);
    const double fc = psi(candidate) - psi_hat;
    theta = candidate;
    if (std::abs(fc) <= tol || hi - lo < 1e-15 * (1.0 + std::abs(theta))) break;
    if ((fc > 0.0) == (fhi > 0.0)) {
      hi = candidate;
      fhi = fc;
    } else {
      lo = candidate;
      flo = fc;
    }
  }
  r.theta_check = theta;
  r.clamp = ClampFlag::Interior;
  return r;
}

double se_limit_stddev(const SystemSpec& spec, double theta0, double tau,
                       const KernelConstants& kc) {
  const double vz = model::var_z_at(spec, theta0, tau, kc);
  if (vz == 0.0) return 0.0;  // fully degenerate system; certification refuses earlier
  const double dpsi = model::dpsi_dtheta(spec, theta0, tau);
  if (dpsi == 0.0)
    throw PreconditionError("se_limit_stddev: dPsi/dtheta vanishes at theta0");
  return std::sqrt(vz) / std::abs(dpsi);
}

}  // namespace qv
