#include "qv/estimators.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>
#include <vector>

namespace qv {

namespace {

void check_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw NumericError("estimator input path contains non-finite values");
}

void warn_small_window(std::size_t w) {
  static std::once_flag flag;
  std::call_once(flag, [w] {
    std::fprintf(stderr,
                 "qv: only %zu samples per smoothing window; estimates may be rough "
                 "(50+ recommended)\n",
                 w);
  });
}

// Increment index range [k0, k1) with t_k in [lo, lo + phi), clipped to the data.
struct Window {
  std::size_t k0, k1;
};

Window window_at(const TimeGrid& grid, double lo, double phi) {
  const double h = grid.h();
  const double tol = 1e-9 * h;
  auto first = static_cast<std::ptrdiff_t>(std::ceil((lo - tol) / h));
  if (first < 0) first = 0;
  auto last = static_cast<std::ptrdiff_t>(std::ceil((lo + phi - tol) / h));
  if (last > static_cast<std::ptrdiff_t>(grid.n)) last = static_cast<std::ptrdiff_t>(grid.n);
  return {static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
}

// Kernel (or kernel-derivative) samples at the offsets u, corrected by a
// linear-in-u shift so the discrete sums cell*sum c_i u_i^p reproduce the
// exact kernel moments for p = 0 and 1. Left-endpoint Riemann sums otherwise
// leave O(h/phi) moment defects that the 1/phi scalings amplify.
std::vector<double> projected_weights(const std::vector<double>& u, const Kernel& k,
                                      bool derivative, double cell) {
  std::vector<double> c(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) c[i] = derivative ? k.deriv(u[i]) : k(u[i]);

  const double target0 = derivative ? k.deriv_moment(0) : k.moment(0);
  const double target1 = derivative ? k.deriv_moment(1) : k.moment(1);
  double s0 = 0.0, s1 = 0.0, g1 = 0.0, g2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    s0 += c[i];
    s1 += c[i] * u[i];
    g1 += u[i];
    g2 += u[i] * u[i];
  }
  const double g0 = static_cast<double>(u.size());
  const double d0 = s0 * cell - target0;
  const double d1 = s1 * cell - target1;
  // solve [g0 g1; g1 g2] (alpha, beta)^T = (d0, d1)^T / cell
  const double det = g0 * g2 - g1 * g1;
  if (det <= 0.0 || u.size() < 3) return c;  // too few samples to correct
  const double alpha = (g2 * d0 - g1 * d1) / det / cell;
  const double beta = (g0 * d1 - g1 * d0) / det / cell;
  for (std::size_t i = 0; i < u.size(); ++i) c[i] -= alpha + beta * u[i];
  return c;
}

std::vector<double> weighted_increments(const TimeGrid& grid, std::span<const double> x,
                                        const std::function<double(double)>& g) {
  std::vector<double> dx(grid.n);
  if (g) {
    for (std::size_t k = 0; k < grid.n; ++k) dx[k] = g(grid.t(k)) * (x[k + 1] - x[k]);
  } else {
    for (std::size_t k = 0; k < grid.n; ++k) dx[k] = x[k + 1] - x[k];
  }
  return dx;
}

double endpoint_core(const TimeGrid& grid, const std::vector<double>& dx,
                     const EstimatorConfig& cfg) {
  const double phi = cfg.bandwidth;
  const double tau = cfg.tau;
  if (!(phi > 0.0)) throw DomainError("endpoint_derivative: bandwidth must be positive");
  if (tau < phi || tau > grid.T + 1e-9 * grid.h())
    throw DomainError("endpoint_derivative: window [tau - phi, tau] must fit in [0, T]");
  const Window w = window_at(grid, tau - phi, phi);
  std::vector<double> u(w.k1 - w.k0);
  for (std::size_t k = w.k0; k < w.k1; ++k) u[k - w.k0] = (grid.t(k) - tau) / phi;
  const std::vector<double> c = projected_weights(u, cfg.k_star, false, grid.h() / phi);
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) acc += c[i] * dx[w.k0 + i];
  return acc / phi;
}

// Trapezoid s-sum of Nbar_s * N'_s over grid points in [phi, tau - phi].
//
// The first factor smooths backward (K*, window [s - phi, s]) while the
// derivative factor smooths forward (K', window [s, s + phi]). Driving both
// factors from one shared forward window couples their fluctuations: the
// coupling has mean (int K F_K) f^2 b^2 = f^2 b^2 / 2 per unit time, which
// telescopes the whole statistic to zero instead of the quadratic variation.
// The split windows keep the increments multiplying each factor disjoint at
// every s, so the integral tracks int N dN with mean-zero noise.
double stieltjes_integral(const TimeGrid& grid, const std::vector<double>& dx,
                          const EstimatorConfig& cfg) {
  const double phi = cfg.bandwidth;
  const double h = grid.h();
  const std::size_t w = window_samples(grid, phi);

  // in-window offsets are the same for every s = t_j:
  // backward (t_{j-1-i} - t_j)/phi, forward (t_{j+i} - t_j)/phi
  std::vector<double> ub(w), uf(w);
  for (std::size_t i = 0; i < w; ++i) {
    ub[i] = -static_cast<double>(i + 1) * h / phi;
    uf[i] = static_cast<double>(i) * h / phi;
  }
  const std::vector<double> cb = projected_weights(ub, cfg.k_star, false, h / phi);
  const std::vector<double> ckp = projected_weights(uf, cfg.k, true, h / phi);

  const auto j_min = static_cast<std::size_t>(std::ceil(phi / h - 1e-9));
  const auto j_max = static_cast<std::size_t>(std::floor((cfg.tau - phi) / h + 1e-9));
  if (j_max <= j_min) return 0.0;  // zero-width s-interval
  double integral = 0.0;
  for (std::size_t j = j_min; j <= j_max; ++j) {
    double nb = 0.0, np = 0.0;
    const std::size_t limit = std::min(w, grid.n - j);
    for (std::size_t i = 0; i < limit; ++i) np += ckp[i] * dx[j + i];
    for (std::size_t i = 0; i < w; ++i) nb += cb[i] * dx[j - 1 - i];
    nb /= phi;
    np /= -(phi * phi);
    const double wgt = (j == j_min || j == j_max) ? 0.5 : 1.0;
    integral += wgt * nb * np;
  }
  return integral * h;
}

double qv_core(const TimeGrid& grid, std::span<const double> x, const EstimatorConfig& cfg) {
  check_finite(x);
  if (x.size() != grid.points())
    throw ConfigError("qv_estimate: path length does not match the grid");
  const double phi = cfg.bandwidth;
  if (!(phi > 0.0) || cfg.tau < phi || cfg.tau > grid.T + 1e-9 * grid.h())
    throw DomainError("qv_estimate: need 0 < phi <= tau <= T");
  const std::size_t w = window_samples(grid, phi);
  if (w < 20)
    throw DomainError("qv_estimate: fewer than 20 samples per window; refine the grid");
  if (w < 50) warn_small_window(w);

  const std::vector<double> dx = weighted_increments(grid, x, cfg.weight);
  const double nbar = endpoint_core(grid, dx, cfg);
  return nbar * nbar - 2.0 * stieltjes_integral(grid, dx, cfg);
}

}  // namespace

EstimatorConfig EstimatorConfig::defaults(double bandwidth, double tau) {
  // K* backward factor: degree-1 (smallest variance constants, no derivative
  // taken). K forward smoother: degree-3 vanishing, so K' integrates to zero
  // and the derivative statistic stays O(1).
  Kernel k_star = solve_moment_kernel(KernelSide::Left, 1, false);
  Kernel k = solve_moment_kernel(KernelSide::Right, 3, true);
  return EstimatorConfig(bandwidth, tau, std::move(k_star), std::move(k));
}

std::size_t window_samples(const TimeGrid& grid, double bandwidth) {
  return static_cast<std::size_t>(std::ceil(bandwidth / grid.h() - 1e-9));
}

double endpoint_derivative(const TimeGrid& grid, std::span<const double> x,
                           const EstimatorConfig& cfg) {
  check_finite(x);
  if (x.size() != grid.points())
    throw ConfigError("endpoint_derivative: path length does not match the grid");
  return endpoint_core(grid, weighted_increments(grid, x, cfg.weight), cfg);
}

double smooth_derivative(const TimeGrid& grid, std::span<const double> x,
                         const EstimatorConfig& cfg, double t) {
  check_finite(x);
  if (x.size() != grid.points())
    throw ConfigError("smooth_derivative: path length does not match the grid");
  const double phi = cfg.bandwidth;
  if (!(phi > 0.0)) throw DomainError("smooth_derivative: bandwidth must be positive");
  if (t < 0.0 || t > grid.T - phi + 1e-9 * grid.h())
    throw DomainError("smooth_derivative: window [t, t + phi] must fit in [0, T]");
  const std::vector<double> dx = weighted_increments(grid, x, cfg.weight);
  const Window w = window_at(grid, t, phi);
  std::vector<double> u(w.k1 - w.k0);
  for (std::size_t k = w.k0; k < w.k1; ++k) u[k - w.k0] = (grid.t(k) - t) / phi;
  const std::vector<double> c = projected_weights(u, cfg.k, false, grid.h() / phi);
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) acc += c[i] * dx[w.k0 + i];
  return acc / phi;
}

double qv_estimate(const TimeGrid& grid, std::span<const double> x, const EstimatorConfig& cfg) {
  EstimatorConfig plain = cfg;
  plain.weight = nullptr;
  return qv_core(grid, x, plain);
}

double weighted_qv_estimate(const TimeGrid& grid, std::span<const double> x,
                            const EstimatorConfig& cfg) {
  if (!cfg.weight) throw PreconditionError("weighted_qv_estimate: config carries no weight");
  return qv_core(grid, x, cfg);
}

namespace {

std::function<double(double)> reciprocal_weight(const ScalarField& field, double tau,
                                                const char* who) {
  // the inverted field must stay bounded away from zero on [0, tau]
  double inf_abs = std::abs(field(0.0));
  const int probes = 512;
  for (int i = 1; i <= probes; ++i) {
    const double t = tau * static_cast<double>(i) / probes;
    inf_abs = std::min(inf_abs, std::abs(field(t)));
  }
  if (inf_abs < 1e-8)
    throw NumericError(std::string(who) + ": known field is singular on [0, tau]");
  return [field](double t) { return 1.0 / field(t); };
}

}  // namespace

double estimate_int_b2(const TimeGrid& grid, std::span<const double> x, EstimatorConfig cfg,
                       const ScalarField& f_known) {
  cfg.weight = reciprocal_weight(f_known, cfg.tau, "estimate_int_b2");
  return qv_core(grid, x, cfg);
}

double estimate_int_f2(const TimeGrid& grid, std::span<const double> x, EstimatorConfig cfg,
                       const ScalarField& b_known) {
  cfg.weight = reciprocal_weight(b_known, cfg.tau, "estimate_int_f2");
  return qv_core(grid, x, cfg);
}

}  // namespace qv
