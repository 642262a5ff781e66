#pragma once

#include "qv/kernels.hpp"
#include "qv/system.hpp"

namespace qv {

/// Certified parameter interval: direction and margin of theta |-> Psi_tau(theta).
/// Inversion is only allowed after certification (|dPsi/dtheta| bounded away
/// from zero over the whole interval).
struct ThetaSpace {
  double alpha = 0.0;
  double beta = 0.0;
  double tau = 0.0;
  bool increasing = true;
  double margin = 0.0;  // grid minimum of |dPsi/dtheta|
};

/// Sample |dPsi_tau/dtheta| on a theta-grid; throws PreconditionError when the
/// derivative changes sign or its minimum is numerically zero.
ThetaSpace certify_theta_space(const SystemSpec& spec, double tau, int grid_points = 200);

enum class ClampFlag { Interior, Low, High };

struct SubstitutionResult {
  double theta_check = 0.0;
  ClampFlag clamp = ClampFlag::Interior;
  bool clamped() const { return clamp != ClampFlag::Interior; }
};

/// Substitution estimator: invert Psi_tau at psi_hat over [alpha, beta],
/// returning the matching endpoint (with flag) when psi_hat falls outside
/// the attainable range. Root accuracy: |Psi(theta) - psi_hat| <=
/// 1e-12 max(1, |psi_hat|).
SubstitutionResult substitution_estimator(double psi_hat, const SystemSpec& spec,
                                          const ThetaSpace& space);

/// Predicted standard deviation of eps^{-1/2}(theta_check - theta_0):
/// sqrt(var_Z(theta_0, tau)) / |dPsi_tau/dtheta(theta_0)|.
double se_limit_stddev(const SystemSpec& spec, double theta0, double tau,
                       const KernelConstants& kc);

}  // namespace qv
