#include "qv/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qv/quadrature.hpp"

namespace qv::filter {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// psi1(z) = (1 - e^{-z})/z and its z-derivative, stable near zero.
double psi1(double z) {
  if (std::abs(z) < 1e-8) return 1.0 - 0.5 * z;
  return -std::expm1(-z) / z;
}

double psi1_prime(double z) {
  if (std::abs(z) < 1e-4) return -0.5 + z / 3.0 - z * z / 8.0;
  return (std::exp(-z) * (1.0 + z) - 1.0) / (z * z);
}

std::size_t substeps_per_interval(double h, double eps) {
  const double hf = std::min(h, eps / 200.0);
  return static_cast<std::size_t>(std::ceil(h / hf - 1e-9));
}

// Riccati right-hand side and its theta-derivative (variational equation).
struct RiccatiRhs {
  const SystemSpec& spec;
  double theta;
  double inv_eps2;

  double value(double t, double g) const {
    const double a = spec.a().at(theta, t);
    const double b = spec.b().at(theta, t);
    const double f = spec.f().at(theta, t);
    const double sg = spec.sigma().at(theta, t);
    return -2.0 * a * g - g * g * f * f * inv_eps2 / (sg * sg) + b * b;
  }

  // d/dtheta of value(), with dg the sensitivity state
  double sensitivity(double t, double g, double dg) const {
    const double a = spec.a().at(theta, t);
    const double b = spec.b().at(theta, t);
    const double f = spec.f().at(theta, t);
    const double sg = spec.sigma().at(theta, t);
    const double ad = spec.a().dtheta(theta, t);
    const double bd = spec.b().dtheta(theta, t);
    const double fd = spec.f().dtheta(theta, t);
    const double sd = spec.sigma().dtheta(theta, t);
    const double ratio = inv_eps2 / (sg * sg);
    return -2.0 * ad * g - 2.0 * a * dg -
           (2.0 * g * dg * f * f + 2.0 * g * g * f * fd) * ratio +
           2.0 * (sd / sg) * g * g * f * f * ratio + 2.0 * b * bd;
  }
};

// Advance (gamma, dgamma) across one grid interval with n_sub RK4 substeps.
void riccati_substeps(const RiccatiRhs& rhs, double t0, double h, std::size_t n_sub,
                      bool with_sens, double& g, double& dg, std::size_t& floor_events) {
  const double hs = h / static_cast<double>(n_sub);
  for (std::size_t s = 0; s < n_sub; ++s) {
    const double t = t0 + hs * static_cast<double>(s);
    const double k1 = rhs.value(t, g);
    const double k2 = rhs.value(t + 0.5 * hs, g + 0.5 * hs * k1);
    const double k3 = rhs.value(t + 0.5 * hs, g + 0.5 * hs * k2);
    const double k4 = rhs.value(t + hs, g + hs * k3);
    if (with_sens) {
      const double d1 = rhs.sensitivity(t, g, dg);
      const double d2 = rhs.sensitivity(t + 0.5 * hs, g + 0.5 * hs * k1, dg + 0.5 * hs * d1);
      const double d3 = rhs.sensitivity(t + 0.5 * hs, g + 0.5 * hs * k2, dg + 0.5 * hs * d2);
      const double d4 = rhs.sensitivity(t + hs, g + hs * k3, dg + hs * d3);
      dg += hs / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
    }
    g += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (g < 0.0) {
      g = 0.0;
      if (with_sens) dg = 0.0;
      ++floor_events;
    }
  }
}

// Exponential-Euler step of the conditional mean and (optionally) its exact
// theta-derivative. Coefficients at the interval midpoint, gamma trapezoid.
struct MeanStep {
  const SystemSpec& spec;
  double theta;
  double inv_eps2;

  void advance(double t_left, double h, double g0, double g1, double dg0, double dg1,
               double dx, bool with_sens, double& m, double& mdot) const {
    const double tm = t_left + 0.5 * h;
    const double a = spec.a().at(theta, tm);
    const double f = spec.f().at(theta, tm);
    const double sg = spec.sigma().at(theta, tm);
    const double ratio = inv_eps2 / (sg * sg);
    const double gbar = 0.5 * (g0 + g1);
    const double gain = gbar * f * ratio;
    const double q = a + gbar * f * f * ratio;
    const double z = q * h;
    const double decay = std::exp(-z);
    const double p = psi1(z);

    if (with_sens) {
      const double ad = spec.a().dtheta(theta, tm);
      const double fd = spec.f().dtheta(theta, tm);
      const double sd = spec.sigma().dtheta(theta, tm);
      const double dgbar = 0.5 * (dg0 + dg1);
      const double q_dot = ad + (dgbar * f * f + 2.0 * gbar * f * fd) * ratio -
                           2.0 * (sd / sg) * gbar * f * f * ratio;
      const double gain_dot =
          (dgbar * f + gbar * fd) * ratio - 2.0 * (sd / sg) * gbar * f * ratio;
      const double decay_dot = -h * q_dot * decay;
      const double p_dot = psi1_prime(z) * h * q_dot;
      mdot = decay_dot * m + decay * mdot + (gain_dot * p + gain * p_dot) * dx;
    }
    m = decay * m + gain * p * dx;
  }
};

void check_same_grid(const TimeGrid& a, const TimeGrid& b, const char* who) {
  if (!(a == b)) throw ConfigError(std::string(who) + ": grids do not match");
}

void check_path(const TimeGrid& grid, std::span<const double> x, const char* who) {
  if (x.size() != grid.points())
    throw ConfigError(std::string(who) + ": path length does not match the grid");
}

FilterPath run_filter(const SystemSpec& spec, double theta, const TimeGrid& grid,
                      std::span<const double> x, const RiccatiPath& ric, bool with_sens) {
  check_same_grid(grid, ric.grid, "kalman_bucy");
  check_path(grid, x, "kalman_bucy");
  if (with_sens && ric.dgamma.empty())
    throw PreconditionError("filter_sensitivity: Riccati path lacks dgamma");

  const double eps = spec.eps();
  const MeanStep step{spec, theta, 1.0 / (eps * eps)};
  const double h = grid.h();

  FilterPath out;
  out.grid = grid;
  out.theta = theta;
  out.eps = eps;
  out.m.assign(grid.points(), 0.0);
  out.gamma = ric.gamma;
  if (with_sens) out.mdot.assign(grid.points(), 0.0);

  double m = 0.0, mdot = 0.0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double dx = x[k + 1] - x[k];
    const double dg0 = with_sens ? ric.dgamma[k] : 0.0;
    const double dg1 = with_sens ? ric.dgamma[k + 1] : 0.0;
    step.advance(grid.t(k), h, ric.gamma[k], ric.gamma[k + 1], dg0, dg1, dx, with_sens, m,
                 mdot);
    if (!std::isfinite(m))
      throw NumericError("kalman_bucy: non-finite mean; refine the grid for this eps");
    out.m[k + 1] = m;
    if (with_sens) out.mdot[k + 1] = mdot;
  }
  return out;
}

}  // namespace

RiccatiPath solve_riccati(const SystemSpec& spec, double theta, const TimeGrid& grid,
                          bool with_sensitivity) {
  const double eps = spec.eps();
  if (!(eps > 0.0)) throw ConfigError("solve_riccati: eps must be positive");
  const RiccatiRhs rhs{spec, theta, 1.0 / (eps * eps)};
  const double h = grid.h();
  const std::size_t n_sub = substeps_per_interval(h, eps);

  RiccatiPath out;
  out.grid = grid;
  out.gamma.assign(grid.points(), 0.0);
  if (with_sensitivity) out.dgamma.assign(grid.points(), 0.0);

  double g = 0.0, dg = 0.0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    riccati_substeps(rhs, grid.t(k), h, n_sub, with_sensitivity, g, dg, out.floor_events);
    if (!std::isfinite(g))
      throw NumericError("solve_riccati: non-finite state; the grid is too coarse for the "
                         "filter time constant at this eps");
    out.gamma[k + 1] = g;
    if (with_sensitivity) out.dgamma[k + 1] = dg;
  }
  return out;
}

double riccati_stationary(const SystemSpec& spec, double theta, double t) {
  const double a = spec.a().at(theta, t);
  const double b = spec.b().at(theta, t);
  const double f = spec.f().at(theta, t);
  const double sg = spec.sigma().at(theta, t);
  const double eps = spec.eps();
  const double e2s2 = eps * eps * sg * sg;
  if (f == 0.0) throw DomainError("riccati_stationary: f must be nonzero");
  return e2s2 / (f * f) * (-a + std::sqrt(a * a + f * f * b * b / e2s2));
}

FilterPath kalman_bucy(const SystemSpec& spec, double theta, const TimeGrid& grid,
                       std::span<const double> x, const RiccatiPath& riccati) {
  return run_filter(spec, theta, grid, x, riccati, false);
}

FilterPath kalman_bucy(const SystemSpec& spec, double theta, const TimeGrid& grid,
                       std::span<const double> x) {
  return run_filter(spec, theta, grid, x, solve_riccati(spec, theta, grid), false);
}

FilterPath filter_sensitivity(const SystemSpec& spec, double theta, const TimeGrid& grid,
                              std::span<const double> x) {
  return run_filter(spec, theta, grid, x, solve_riccati(spec, theta, grid, true), true);
}

double log_likelihood(const SystemSpec& spec, double theta, const TimeGrid& grid,
                      std::span<const double> x) {
  const FilterPath fp = kalman_bucy(spec, theta, grid, x);
  const double eps = spec.eps();
  const double h = grid.h();
  double ll = 0.0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double t = grid.t(k);
    const double sg = spec.sigma().at(theta, t);
    const double mk = spec.f().at(theta, t) * fp.m[k];
    const double w = 1.0 / (eps * eps * sg * sg);
    ll += mk * (x[k + 1] - x[k]) * w - 0.5 * mk * mk * h * w;
  }
  return ll;
}

double log_likelihood_grad(const SystemSpec& spec, double theta, const TimeGrid& grid,
                           std::span<const double> x) {
  const FilterPath fp = filter_sensitivity(spec, theta, grid, x);
  const double eps = spec.eps();
  const double h = grid.h();
  double grad = 0.0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double t = grid.t(k);
    const double sg = spec.sigma().at(theta, t);
    const double f = spec.f().at(theta, t);
    const double fd = spec.f().dtheta(theta, t);
    const double mk = f * fp.m[k];
    const double mdotk = fd * fp.m[k] + f * fp.mdot[k];
    const double w = 1.0 / (eps * eps * sg * sg);
    grad += mdotk * ((x[k + 1] - x[k]) - mk * h) * w;
  }
  return grad;
}

std::vector<double> kalman_bucy_by_parts(const SystemSpec& spec, double theta,
                                         const TimeGrid& grid, std::span<const double> x) {
  check_path(grid, x, "kalman_bucy_by_parts");
  // the closed-form D(s) manipulation is only exercised for frozen coefficients
  for (const Coefficient* c : {&spec.a(), &spec.b(), &spec.f(), &spec.sigma()}) {
    const double v0 = c->at(theta, 0.0);
    for (int i = 1; i <= 16; ++i) {
      const double t = grid.T * static_cast<double>(i) / 16.0;
      if (std::abs(c->at(theta, t) - v0) > 1e-12 * (1.0 + std::abs(v0)))
        throw PreconditionError(
            "kalman_bucy_by_parts: requires time-constant coefficients");
    }
  }

  const RiccatiPath ric = solve_riccati(spec, theta, grid);
  const RiccatiRhs rhs{spec, theta, 1.0 / (spec.eps() * spec.eps())};
  const double eps = spec.eps();
  const double h = grid.h();
  const double f = spec.f().at(theta, 0.0);
  const double sg = spec.sigma().at(theta, 0.0);
  const double a = spec.a().at(theta, 0.0);
  const double inv_e2s2 = 1.0 / (eps * eps * sg * sg);

  std::vector<double> m(grid.points(), 0.0);
  auto q_at = [&](std::size_t k) { return a + ric.gamma[k] * f * f * inv_e2s2; };
  auto gain_at = [&](std::size_t k) { return ric.gamma[k] * f * inv_e2s2; };
  // c_k = q_k G_k + G'_k, the integrand of int X_s D'(s) ds after scaling
  auto c_at = [&](std::size_t k) {
    return q_at(k) * gain_at(k) + rhs.value(grid.t(k), ric.gamma[k]) * f * inv_e2s2;
  };

  double tail = 0.0;  // sum_{j<k} X_j e^{E_j - E_k} c_j h, updated recursively
  for (std::size_t k = 1; k < grid.points(); ++k) {
    const double de = 0.5 * h * (q_at(k - 1) + q_at(k));  // E_k - E_{k-1}
    tail = std::exp(-de) * (tail + x[k - 1] * c_at(k - 1) * h);
    m[k] = gain_at(k) * x[k] - tail;
  }
  return m;
}

MleResult mle_grid(const SystemSpec& spec, const TimeGrid& grid, std::span<const double> x,
                   int grid_points, bool refine) {
  if (!spec.parametric() || !spec.theta())
    throw PreconditionError("mle_grid: spec is not parametric");
  if (grid_points < 1) throw ConfigError("mle_grid: need at least one grid point");
  const double alpha = spec.theta()->alpha;
  const double beta = spec.theta()->beta;

  auto ll = [&](double th) { return log_likelihood(spec, th, grid, x); };

  if (grid_points == 1) return {0.5 * (alpha + beta), false};

  std::vector<double> nodes(static_cast<std::size_t>(grid_points));
  std::size_t best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nodes[i] = alpha + (beta - alpha) * static_cast<double>(i) /
                           static_cast<double>(nodes.size() - 1);
    const double v = ll(nodes[i]);
    if (v > best_ll) {
      best_ll = v;
      best = i;
    }
  }

  MleResult r;
  if (best == 0 || best + 1 == nodes.size()) {
    r.theta_hat = nodes[best];
    r.at_boundary = true;
    return r;
  }
  r.theta_hat = nodes[best];
  if (!refine) return r;

  // golden-section on the bracketing interval
  double lo = nodes[best - 1], hi = nodes[best + 1];
  constexpr double kInvPhi = 0.6180339887498949;
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = ll(c), fd = ll(d);
  for (int it = 0; it < 80 && hi - lo > 1e-9 * (beta - alpha); ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = ll(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = ll(d);
    }
  }
  r.theta_hat = 0.5 * (lo + hi);
  return r;
}

BayesResult bayes_estimator(const SystemSpec& spec, const TimeGrid& grid,
                            std::span<const double> x,
                            const std::function<double(double)>& prior, int panels) {
  if (!spec.parametric() || !spec.theta())
    throw PreconditionError("bayes_estimator: spec is not parametric");
  if (!prior) throw ConfigError("bayes_estimator: prior is required");
  if (panels < 2) panels = 2;
  if (panels % 2) ++panels;

  const double alpha = spec.theta()->alpha;
  const double beta = spec.theta()->beta;
  const double h = (beta - alpha) / static_cast<double>(panels);

  std::vector<double> node(static_cast<std::size_t>(panels) + 1);
  std::vector<double> logmass(node.size());
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < node.size(); ++i) {
    node[i] = alpha + h * static_cast<double>(i);
    const double p = prior(node[i]);
    if (p < 0.0) throw ConfigError("bayes_estimator: prior must be nonnegative");
    logmass[i] = p > 0.0 ? std::log(p) + log_likelihood(spec, node[i], grid, x)
                         : -std::numeric_limits<double>::infinity();
    shift = std::max(shift, logmass[i]);
  }
  if (!std::isfinite(shift))
    throw NumericError("bayes_estimator: prior mass vanishes on the whole interval");

  double num = 0.0, den = 0.0;
  std::size_t contributing = 0;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const double w = (i == 0 || i + 1 == node.size()) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double mass = w * std::exp(logmass[i] - shift);
    if (mass > 1e-14) ++contributing;
    num += mass * node[i];
    den += mass;
  }
  BayesResult r;
  r.theta_tilde = num / den;
  r.degenerate = contributing <= 1;
  return r;
}

double fisher_information(const SystemSpec& spec, double theta, double from, double to) {
  if (!(from >= 0.0) || !(to <= spec.T()) || !(from < to))
    throw DomainError("fisher_information: need 0 <= from < to <= T");
  auto s_val = [&](double t) { return spec.f().at(theta, t) * spec.b().at(theta, t); };
  for (int i = 0; i <= 512; ++i) {
    const double t = from + (to - from) * static_cast<double>(i) / 512.0;
    if (!(s_val(t) > 0.0))
      throw NumericError("fisher_information: S = f b touches zero on [from, to]");
  }
  return quad::adaptive_simpson(
      [&](double t) {
        const double s = s_val(t);
        const double sdot = spec.f().dtheta(theta, t) * spec.b().at(theta, t) +
                            spec.f().at(theta, t) * spec.b().dtheta(theta, t);
        return sdot * sdot / (2.0 * s * spec.sigma().at(theta, t));
      },
      from, to, 1e-10);
}

InfoProfile info_profile(const SystemSpec& spec, double theta, const TimeGrid& grid,
                         double tau) {
  if (tau < 0.0 || tau >= grid.T) throw DomainError("info_profile: need 0 <= tau < T");
  InfoProfile out;
  out.grid = grid;
  out.tau_index = static_cast<std::size_t>(std::llround(tau / grid.h()));
  out.cumulative.assign(grid.points(), 0.0);

  auto integrand = [&](double t) {
    const double s = spec.f().at(theta, t) * spec.b().at(theta, t);
    if (!(s > 0.0))
      throw NumericError("info_profile: S = f b touches zero beyond tau");
    const double sdot = spec.f().dtheta(theta, t) * spec.b().at(theta, t) +
                        spec.f().at(theta, t) * spec.b().dtheta(theta, t);
    return sdot * sdot / (2.0 * s * spec.sigma().at(theta, t));
  };

  const double h = grid.h();
  for (std::size_t k = out.tau_index; k < grid.n; ++k) {
    const double t0 = grid.t(k);
    const double step =
        h / 6.0 * (integrand(t0) + 4.0 * integrand(t0 + 0.5 * h) + integrand(t0 + h));
    out.cumulative[k + 1] = out.cumulative[k] + step;
  }
  return out;
}

OneStepPath one_step_mle_process(const SystemSpec& spec, const TimeGrid& grid,
                                 std::span<const double> x, double theta_check, double tau,
                                 double info_floor_fraction) {
  if (!spec.parametric() || !spec.theta())
    throw PreconditionError("one_step_mle_process: spec is not parametric");
  check_path(grid, x, "one_step_mle_process");
  const double alpha = spec.theta()->alpha;
  const double beta = spec.theta()->beta;
  if (!(theta_check > alpha && theta_check < beta))
    throw PreconditionError(
        "one_step_mle_process: preliminary estimator must be strictly interior "
        "(clamped substitution estimates are rejected)");

  const FilterPath fs = filter_sensitivity(spec, theta_check, grid, x);
  const InfoProfile info = info_profile(spec, theta_check, grid, tau);
  if (!(info.total() > 0.0))
    throw NumericError("one_step_mle_process: zero information accumulated on (tau, T]");

  const double eps = spec.eps();
  const double h = grid.h();
  const double floor_level = info_floor_fraction * info.total();

  OneStepPath out;
  out.grid = grid;
  out.tau_index = info.tau_index;
  out.theta_check = theta_check;
  out.info_total = info.total();
  out.theta_star.assign(grid.points(), kNaN);
  out.first_valid = grid.points();

  double score = 0.0;
  for (std::size_t k = info.tau_index; k < grid.n; ++k) {
    const double t = grid.t(k);
    const double f = spec.f().at(theta_check, t);
    const double fd = spec.f().dtheta(theta_check, t);
    const double sg = spec.sigma().at(theta_check, t);
    const double mk = f * fs.m[k];
    const double mdotk = fd * fs.m[k] + f * fs.mdot[k];
    score += mdotk * ((x[k + 1] - x[k]) - mk * h) / (eps * sg * sg);

    const double info_now = info.cumulative[k + 1];
    if (info_now >= floor_level && info_now > 0.0) {
      double th = theta_check + score / info_now;
      if (th < alpha) {
        th = alpha;
        ++out.clamp_events;
      } else if (th > beta) {
        th = beta;
        ++out.clamp_events;
      }
      out.theta_star[k + 1] = th;
      if (out.first_valid == grid.points()) out.first_valid = k + 1;
    }
  }
  if (out.first_valid == grid.points())
    throw NumericError("one_step_mle_process: information floor never reached");
  return out;
}

AdaptivePath adaptive_filter(const SystemSpec& spec, const TimeGrid& grid,
                             std::span<const double> x, const OneStepPath& onestep,
                             AdaptiveMode mode, std::size_t theta_table_nodes) {
  check_same_grid(grid, onestep.grid, "adaptive_filter");
  check_path(grid, x, "adaptive_filter");
  const double eps = spec.eps();
  const double h = grid.h();
  const std::size_t n_sub = substeps_per_interval(h, eps);

  auto theta_at = [&](std::size_t k) {
    return k >= onestep.first_valid ? onestep.theta_star[k] : onestep.theta_check;
  };

  AdaptivePath out;
  out.grid = grid;
  out.mode = mode;
  out.m_hat.assign(grid.points(), 0.0);

  if (mode == AdaptiveMode::Recurrent) {
    out.gamma_hat.assign(grid.points(), 0.0);
    double g = 0.0, dg_unused = 0.0, m = 0.0, mdot_unused = 0.0;
    std::size_t floor_events = 0;
    for (std::size_t k = 0; k < grid.n; ++k) {
      const double th = theta_at(k);
      const RiccatiRhs rhs{spec, th, 1.0 / (eps * eps)};
      const double g0 = g;
      riccati_substeps(rhs, grid.t(k), h, n_sub, false, g, dg_unused, floor_events);
      if (!std::isfinite(g))
        throw NumericError("adaptive_filter: non-finite Riccati state");
      out.gamma_hat[k + 1] = g;
      const MeanStep step{spec, th, 1.0 / (eps * eps)};
      step.advance(grid.t(k), h, g0, g, 0.0, 0.0, x[k + 1] - x[k], false, m, mdot_unused);
      out.m_hat[k + 1] = m;
    }
    return out;
  }

  // Precomputed mode: gamma(theta, t) tabulated on a theta-grid, linear in theta.
  if (theta_table_nodes < 2) theta_table_nodes = 2;
  const double alpha = spec.theta()->alpha;
  const double beta = spec.theta()->beta;
  std::vector<double> theta_nodes(theta_table_nodes);
  std::vector<RiccatiPath> table;
  table.reserve(theta_table_nodes);
  for (std::size_t i = 0; i < theta_table_nodes; ++i) {
    theta_nodes[i] = alpha + (beta - alpha) * static_cast<double>(i) /
                                 static_cast<double>(theta_table_nodes - 1);
    table.push_back(solve_riccati(spec.with_eps(eps), theta_nodes[i], grid));
  }
  auto gamma_lookup = [&](double th, std::size_t k) {
    if (th <= theta_nodes.front()) return table.front().gamma[k];
    if (th >= theta_nodes.back()) return table.back().gamma[k];
    const double pos = (th - alpha) / (beta - alpha) *
                       static_cast<double>(theta_table_nodes - 1);
    const auto i = std::min(static_cast<std::size_t>(pos), theta_table_nodes - 2);
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * table[i].gamma[k] + w * table[i + 1].gamma[k];
  };

  double m = 0.0, mdot_unused = 0.0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double th = theta_at(k);
    const MeanStep step{spec, th, 1.0 / (eps * eps)};
    step.advance(grid.t(k), h, gamma_lookup(th, k), gamma_lookup(th, k + 1), 0.0, 0.0,
                 x[k + 1] - x[k], false, m, mdot_unused);
    out.m_hat[k + 1] = m;
  }
  return out;
}

}  // namespace qv::filter
