#pragma once

#include <functional>
#include <optional>
#include <span>

#include "qv/kernels.hpp"
#include "qv/sim.hpp"

namespace qv {

/// Configuration of the kernel estimators. The bandwidth is the window width
/// in time units (the proofs take it equal to eps); K* smooths backward from
/// the endpoint, K smooths forward from interior points. The optional weight
/// g multiplies every observed increment (weighted variants estimate
/// int g^2 f^2 b^2).
struct EstimatorConfig {
  double bandwidth = 0.0;
  double tau = 0.0;
  Kernel k_star;
  Kernel k;
  std::function<double(double)> weight;  // null = unweighted

  EstimatorConfig(double bandwidth_, double tau_, Kernel k_star_, Kernel k_)
      : bandwidth(bandwidth_), tau(tau_), k_star(std::move(k_star_)), k(std::move(k_)) {}

  /// Production kernels at the given bandwidth: degree-1 backward K* and the
  /// degree-3 vanishing-endpoint K (its derivative enters the estimator, so K
  /// must be continuous on all of R).
  static EstimatorConfig defaults(double bandwidth, double tau);
};

/// Endpoint derivative estimate: (1/phi) sum K*((t_k - tau)/phi) dX_k over
/// the left window [tau - phi, tau). Requires tau >= phi.
double endpoint_derivative(const TimeGrid& grid, std::span<const double> x,
                           const EstimatorConfig& cfg);

/// Interior derivative estimate at t with the right-sided kernel on [t, t + phi).
/// Requires t <= T - phi.
double smooth_derivative(const TimeGrid& grid, std::span<const double> x,
                         const EstimatorConfig& cfg, double t);

/// Quadratic-variation estimate
///   Psi_hat = Nbar_tau^2 - 2 int_phi^{tau-phi} Nbar_s N'_s ds
/// with the backward smoother Nbar_s on [s - phi, s], the forward derivative
/// statistic N'_s = -(1/phi^2) sum K'((t_k - s)/phi) dX_k on [s, s + phi],
/// and a trapezoid s-sum. The band keeps both windows inside the data; the
/// split windows keep the two factors driven by disjoint increments at each
/// s (see the implementation note on the degenerate shared-window form).
double qv_estimate(const TimeGrid& grid, std::span<const double> x, const EstimatorConfig& cfg);

/// Same pipeline with increments g(t_k) dX_k; requires cfg.weight.
double weighted_qv_estimate(const TimeGrid& grid, std::span<const double> x,
                            const EstimatorConfig& cfg);

/// int_0^tau b^2 via weight g = 1/f (f known, bounded away from zero).
double estimate_int_b2(const TimeGrid& grid, std::span<const double> x, EstimatorConfig cfg,
                       const ScalarField& f_known);

/// int_0^tau f^2 via weight g = 1/b (b known, bounded away from zero).
double estimate_int_f2(const TimeGrid& grid, std::span<const double> x, EstimatorConfig cfg,
                       const ScalarField& b_known);

/// Number of increment samples inside one smoothing window on this grid.
std::size_t window_samples(const TimeGrid& grid, double bandwidth);

}  // namespace qv
