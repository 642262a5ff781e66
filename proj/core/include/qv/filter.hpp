#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qv/sim.hpp"
#include "qv/system.hpp"

namespace qv::filter {

/// Solution of the Riccati equation
///   dgamma/dt = -2 a gamma - gamma^2 f^2 / (eps^2 sigma^2) + b^2,  gamma(0) = 0
/// on the grid, with optional theta-sensitivity dgamma integrated alongside.
/// The recursion substeps internally at h_f = min(h, eps/200); gamma is
/// floored at zero with a diagnostic counter.
struct RiccatiPath {
  TimeGrid grid;
  std::vector<double> gamma;
  std::vector<double> dgamma;  // empty unless sensitivity was requested
  std::size_t floor_events = 0;
};

RiccatiPath solve_riccati(const SystemSpec& spec, double theta, const TimeGrid& grid,
                          bool with_sensitivity = false);

/// Stationary root of the Riccati right-hand side for coefficients frozen at
/// time t: gamma_inf = (eps^2 sigma^2/f^2)(-a + sqrt(a^2 + f^2 b^2/(eps^2 sigma^2))).
double riccati_stationary(const SystemSpec& spec, double theta, double t);

/// Conditional mean recursion (exponential-Euler: exact decay within a step)
///   m_{k+1} = e^{-q h} m_k + G psi1(q h) dX_k,   q = a + gamma f^2/(eps^2 sigma^2),
/// with the gain G = gamma f/(eps^2 sigma^2) and trapezoid-averaged gamma.
/// mdot co-integrates the exact theta-derivative of the same recursion.
struct FilterPath {
  TimeGrid grid;
  std::vector<double> m;
  std::vector<double> gamma;
  std::vector<double> mdot;  // empty unless sensitivity was requested
  double theta = 0.0;
  double eps = 0.0;
};

FilterPath kalman_bucy(const SystemSpec& spec, double theta, const TimeGrid& grid,
                       std::span<const double> x, const RiccatiPath& riccati);
FilterPath kalman_bucy(const SystemSpec& spec, double theta, const TimeGrid& grid,
                       std::span<const double> x);

/// Filter mean plus its theta-sensitivity mdot = d m/d theta.
FilterPath filter_sensitivity(const SystemSpec& spec, double theta, const TimeGrid& grid,
                              std::span<const double> x);

/// Log-likelihood sum M dX/(eps^2 sigma^2) - M^2 h/(2 eps^2 sigma^2), M = f m.
double log_likelihood(const SystemSpec& spec, double theta, const TimeGrid& grid,
                      std::span<const double> x);

/// Exact theta-gradient of log_likelihood through the filter sensitivity:
/// sum Mdot (dX - M dt)/(eps^2 sigma^2) with Mdot = fdot m + f mdot.
double log_likelihood_grad(const SystemSpec& spec, double theta, const TimeGrid& grid,
                           std::span<const double> x);

/// Cross-check realization of m through the integration-by-parts form
/// D(t) X_t - int X_s D'(s) ds (constant-coefficient specs only).
std::vector<double> kalman_bucy_by_parts(const SystemSpec& spec, double theta,
                                         const TimeGrid& grid, std::span<const double> x);

struct MleResult {
  double theta_hat = 0.0;
  bool at_boundary = false;
};

/// Coarse likelihood grid over (alpha, beta) plus golden-section refinement.
MleResult mle_grid(const SystemSpec& spec, const TimeGrid& grid, std::span<const double> x,
                   int grid_points = 64, bool refine = true);

struct BayesResult {
  double theta_tilde = 0.0;
  bool degenerate = false;  // posterior mass collapsed to one quadrature node
};

/// Posterior mean under `prior` by 256-panel Simpson with log-sum-exp scaling.
BayesResult bayes_estimator(const SystemSpec& spec, const TimeGrid& grid,
                            std::span<const double> x,
                            const std::function<double(double)>& prior, int panels = 256);

/// Fisher information integral int_from^to Sdot^2/(2 S sigma) dt, S = f b.
double fisher_information(const SystemSpec& spec, double theta, double from, double to);

/// Cumulative information profile I_tau^{t_k} on the grid (zero up to tau).
struct InfoProfile {
  TimeGrid grid;
  std::size_t tau_index = 0;
  std::vector<double> cumulative;
  double total() const { return cumulative.back(); }
};

InfoProfile info_profile(const SystemSpec& spec, double theta, const TimeGrid& grid, double tau);

/// One-step MLE-process on (tau, T]:
///   theta*_t = theta_check + I_tau^t(theta_check)^{-1}
///              int_tau^t Mdot(theta_check, s)/(eps sigma(s)^2) [dX_s - M ds].
/// Values are masked (NaN) until I_tau^t reaches `info_floor_fraction` of
/// I_tau^T; outputs are clamped into [alpha, beta] with an event counter.
struct OneStepPath {
  TimeGrid grid;
  std::vector<double> theta_star;  // NaN on the masked prefix and on [0, tau]
  std::size_t tau_index = 0;
  std::size_t first_valid = 0;  // grid index of the first unmasked value
  std::size_t clamp_events = 0;
  double theta_check = 0.0;
  double info_total = 0.0;

  double final_theta() const { return theta_star.back(); }
};

OneStepPath one_step_mle_process(const SystemSpec& spec, const TimeGrid& grid,
                                 std::span<const double> x, double theta_check, double tau,
                                 double info_floor_fraction = 0.05);

enum class AdaptiveMode {
  PrecomputedGamma,  // gamma(theta, t) tabulated on a theta-grid before the run
  Recurrent,         // gamma co-evolves with theta*_t plugged into the Riccati RHS
};

struct AdaptivePath {
  TimeGrid grid;
  std::vector<double> m_hat;
  std::vector<double> gamma_hat;  // recurrent mode only
  AdaptiveMode mode = AdaptiveMode::Recurrent;
};

/// Adaptive filtration: the mean recursion driven by theta*_t where defined,
/// and by theta_check on [0, tau] and the masked prefix.
AdaptivePath adaptive_filter(const SystemSpec& spec, const TimeGrid& grid,
                             std::span<const double> x, const OneStepPath& onestep,
                             AdaptiveMode mode, std::size_t theta_table_nodes = 65);

}  // namespace qv::filter
