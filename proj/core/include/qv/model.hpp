#pragma once

#include "qv/kernels.hpp"
#include "qv/system.hpp"

namespace qv::model {

/// Psi_tau = int_0^tau f(s)^2 b(s)^2 ds, the quadratic variation of N = f Y.
/// Parametric specs evaluate at the true theta. Requires 0 < tau <= T.
double psi_true(const SystemSpec& spec, double tau);

/// theta |-> Psi_tau(theta) and its theta-derivative for parametric specs.
double psi_of_theta(const SystemSpec& spec, double theta, double tau);
double dpsi_dtheta(const SystemSpec& spec, double theta, double tau);

/// Var Y_tau from v' = -2 a v + b^2, v(0) = 0 (4th-order integration).
double var_y(const SystemSpec& spec, double tau);
double var_y_at(const SystemSpec& spec, double theta, double tau);

/// Limit variance of the normalized estimation error eps^{-1/2}(Psi_hat - Psi):
///   4 f^2 VarY (f^2 b^2 dd* + sigma^2 d*) + 4 dd int f^4 b^4 + 4 dd int f^2 b^2 sigma^2
/// with all coefficients evaluated at tau in the first group.
double var_z(const SystemSpec& spec, double tau, const KernelConstants& kc);
double var_z_at(const SystemSpec& spec, double theta, double tau, const KernelConstants& kc);

/// Oracles for the weighted estimators: int_0^tau b^2 and int_0^tau f^2.
double int_b2(const SystemSpec& spec, double tau);
double int_f2(const SystemSpec& spec, double tau);

}  // namespace qv::model
