#include "qv/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "qv/model.hpp"
#include "qv/rng.hpp"

namespace qv::mc {

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Qv: return "qv";
    case EstimatorKind::IntB2: return "int_b2";
    case EstimatorKind::IntF2: return "int_f2";
    case EstimatorKind::Se: return "se";
    case EstimatorKind::Mle: return "mle";
    case EstimatorKind::Bayes: return "bayes";
    case EstimatorKind::OneStep: return "onestep";
    case EstimatorKind::Adaptive: return "adaptive";
  }
  return "qv";
}

EstimatorKind estimator_kind_from_string(const std::string& s) {
  if (s == "qv") return EstimatorKind::Qv;
  if (s == "int_b2") return EstimatorKind::IntB2;
  if (s == "int_f2") return EstimatorKind::IntF2;
  if (s == "se") return EstimatorKind::Se;
  if (s == "mle") return EstimatorKind::Mle;
  if (s == "bayes") return EstimatorKind::Bayes;
  if (s == "onestep") return EstimatorKind::OneStep;
  if (s == "adaptive") return EstimatorKind::Adaptive;
  throw ConfigError("unknown estimator kind: " + s);
}

void ExperimentConfig::validate() const {
  if (eps_list.empty()) throw ConfigError("experiment: eps list is empty");
  for (double e : eps_list)
    if (!(e > 0.0) || e > 1.0) throw ConfigError("experiment: eps values must lie in (0,1]");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      throw ConfigError("experiment: eps list must be strictly decreasing");
  if (replications < 2) throw ConfigError("experiment: need at least 2 replications");
  if (!(tau > 0.0) || tau > system.T()) throw ConfigError("experiment: tau outside (0, T]");
  if (!(bandwidth_scale > 0.0)) throw ConfigError("experiment: bandwidth scale must be > 0");
  if (!(per_bandwidth >= 4.0)) throw ConfigError("experiment: per_bandwidth too small");
  const bool parametric_needed =
      estimator == EstimatorKind::Se || estimator == EstimatorKind::Mle ||
      estimator == EstimatorKind::Bayes || estimator == EstimatorKind::OneStep ||
      estimator == EstimatorKind::Adaptive;
  if (parametric_needed && !system.parametric())
    throw ConfigError("experiment: estimator '" + to_string(estimator) +
                      "' needs a parametric system");
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg{.system = system_from_json(j.at("system"))};
  cfg.eps_list = j.at("eps").get<std::vector<double>>();
  cfg.replications = j.at("replications").get<int>();
  cfg.estimator = estimator_kind_from_string(j.at("estimator").get<std::string>());
  cfg.tau = j.at("tau").get<double>();
  if (j.contains("t0")) cfg.t0 = j.at("t0").get<double>();
  if (j.contains("kernel")) {
    cfg.kernel.degree = j.at("kernel").value("degree", 3);
    cfg.kernel.vanish = j.at("kernel").value("vanish", true);
  }
  if (j.contains("bandwidth_scale")) cfg.bandwidth_scale = j.at("bandwidth_scale").get<double>();
  if (j.contains("adaptive_mode"))
    cfg.adaptive_mode = j.at("adaptive_mode").get<std::string>() == "precomputed"
                            ? filter::AdaptiveMode::PrecomputedGamma
                            : filter::AdaptiveMode::Recurrent;
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("per_bandwidth")) cfg.per_bandwidth = j.at("per_bandwidth").get<double>();
  if (j.contains("grid_override"))
    cfg.grid_override = j.at("grid_override").get<std::size_t>();
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["system"] = to_json(cfg.system);
  j["eps"] = cfg.eps_list;
  j["replications"] = cfg.replications;
  j["estimator"] = to_string(cfg.estimator);
  j["tau"] = cfg.tau;
  j["t0"] = cfg.t0;
  j["kernel"] = {{"degree", cfg.kernel.degree}, {"vanish", cfg.kernel.vanish}};
  j["bandwidth_scale"] = cfg.bandwidth_scale;
  j["adaptive_mode"] =
      cfg.adaptive_mode == filter::AdaptiveMode::PrecomputedGamma ? "precomputed" : "recurrent";
  j["seed"] = cfg.seed;
  j["per_bandwidth"] = cfg.per_bandwidth;
  if (cfg.grid_override) j["grid_override"] = *cfg.grid_override;
  return j;
}

namespace {

struct LevelContext {
  SystemSpec spec;
  TimeGrid grid;
  EstimatorConfig est;
  double psi_oracle = 0.0;  // target functional for qv/int_* runs
  double theta0 = 0.0;            // parametric runs
  std::optional<ThetaSpace> space{};
  double predicted_sd = 0.0;
};

EstimatorConfig make_estimator_config(const ExperimentConfig& cfg, double eps) {
  // KernelChoice selects the forward smoother K; the backward factor K* stays
  // the degree-1 kernel (no derivative of K* is ever taken).
  Kernel right = solve_moment_kernel(KernelSide::Right, cfg.kernel.degree, cfg.kernel.vanish);
  Kernel left = solve_moment_kernel(KernelSide::Left, 1, false);
  return EstimatorConfig(cfg.bandwidth_scale * eps, cfg.tau, std::move(left),
                         std::move(right));
}

LevelContext make_level(const ExperimentConfig& cfg, double eps) {
  LevelContext ctx{
      .spec = cfg.system.with_eps(eps),
      .grid = cfg.grid_override ? TimeGrid{cfg.system.T(), *cfg.grid_override}
                                : TimeGrid::for_eps(cfg.system.T(), eps, cfg.per_bandwidth),
      .est = make_estimator_config(cfg, eps)};
  const KernelConstants kc = constants(ctx.est.k_star, ctx.est.k);

  switch (cfg.estimator) {
    case EstimatorKind::Qv:
      ctx.psi_oracle = model::psi_true(ctx.spec, cfg.tau);
      ctx.predicted_sd = std::sqrt(model::var_z(ctx.spec, cfg.tau, kc));
      break;
    case EstimatorKind::IntB2:
      ctx.psi_oracle = model::int_b2(ctx.spec, cfg.tau);
      ctx.predicted_sd = std::numeric_limits<double>::quiet_NaN();
      break;
    case EstimatorKind::IntF2:
      ctx.psi_oracle = model::int_f2(ctx.spec, cfg.tau);
      ctx.predicted_sd = std::numeric_limits<double>::quiet_NaN();
      break;
    case EstimatorKind::Se:
      ctx.theta0 = ctx.spec.theta0();
      ctx.space = certify_theta_space(ctx.spec, cfg.tau);
      ctx.predicted_sd = se_limit_stddev(ctx.spec, ctx.theta0, cfg.tau, kc);
      break;
    case EstimatorKind::OneStep:
    case EstimatorKind::Adaptive:
      ctx.theta0 = ctx.spec.theta0();
      ctx.space = certify_theta_space(ctx.spec, cfg.tau);
      ctx.predicted_sd =
          1.0 / std::sqrt(filter::fisher_information(ctx.spec, ctx.theta0, cfg.tau,
                                                     ctx.spec.T()));
      break;
    case EstimatorKind::Mle:
    case EstimatorKind::Bayes:
      ctx.theta0 = ctx.spec.theta0();
      ctx.predicted_sd =
          1.0 / std::sqrt(filter::fisher_information(ctx.spec, ctx.theta0, 0.0, ctx.spec.T()));
      break;
  }
  return ctx;
}

RepRecord run_one(const ExperimentConfig& cfg, const LevelContext& ctx, std::size_t eps_index,
                  std::size_t rep) {
  RepRecord rec;
  rec.eps_index = eps_index;
  rec.rep = rep;
  rec.eps = ctx.spec.eps();

  const std::uint64_t seed = rng::derive_key(cfg.seed, eps_index, rep);
  const PathPair path = simulate(ctx.spec, ctx.grid, seed);

  try {
    switch (cfg.estimator) {
      case EstimatorKind::Qv: {
        rec.estimate = qv_estimate(ctx.grid, path.x, ctx.est);
        rec.oracle = ctx.psi_oracle;
        rec.aux = realized_qv_oracle(path, ctx.spec, cfg.tau);
        break;
      }
      case EstimatorKind::IntB2: {
        rec.estimate = estimate_int_b2(ctx.grid, path.x, ctx.est, ctx.spec.f().plain());
        rec.oracle = ctx.psi_oracle;
        break;
      }
      case EstimatorKind::IntF2: {
        rec.estimate = estimate_int_f2(ctx.grid, path.x, ctx.est, ctx.spec.b().plain());
        rec.oracle = ctx.psi_oracle;
        break;
      }
      case EstimatorKind::Se: {
        const double psi_hat = qv_estimate(ctx.grid, path.x, ctx.est);
        const SubstitutionResult se = substitution_estimator(psi_hat, ctx.spec, *ctx.space);
        rec.estimate = se.theta_check;
        rec.oracle = ctx.theta0;
        rec.aux = se.clamped() ? 1.0 : 0.0;
        break;
      }
      case EstimatorKind::Mle: {
        const filter::MleResult r = filter::mle_grid(ctx.spec, ctx.grid, path.x);
        rec.estimate = r.theta_hat;
        rec.oracle = ctx.theta0;
        rec.aux = r.at_boundary ? 1.0 : 0.0;
        break;
      }
      case EstimatorKind::Bayes: {
        const double alpha = ctx.spec.theta()->alpha;
        const double beta = ctx.spec.theta()->beta;
        const double density = 1.0 / (beta - alpha);
        const filter::BayesResult r = filter::bayes_estimator(
            ctx.spec, ctx.grid, path.x, [density](double) { return density; });
        rec.estimate = r.theta_tilde;
        rec.oracle = ctx.theta0;
        rec.aux = r.degenerate ? 1.0 : 0.0;
        break;
      }
      case EstimatorKind::OneStep:
      case EstimatorKind::Adaptive: {
        const double psi_hat = qv_estimate(ctx.grid, path.x, ctx.est);
        const SubstitutionResult se = substitution_estimator(psi_hat, ctx.spec, *ctx.space);
        if (se.clamped()) throw PreconditionError("preliminary estimator clamped");
        const filter::OneStepPath os =
            filter::one_step_mle_process(ctx.spec, ctx.grid, path.x, se.theta_check, cfg.tau);

        if (cfg.estimator == EstimatorKind::OneStep) {
          rec.estimate = os.final_theta();
          rec.oracle = ctx.theta0;
          double sup = 0.0;
          for (std::size_t k = std::max(
                   os.first_valid, static_cast<std::size_t>(std::llround(cfg.t0 / ctx.grid.h())));
               k < os.theta_star.size(); ++k)
            sup = std::max(sup, std::abs(os.theta_star[k] - ctx.theta0));
          rec.aux = sup;
        } else {
          const filter::AdaptivePath ap =
              filter::adaptive_filter(ctx.spec, ctx.grid, path.x, os, cfg.adaptive_mode);
          const filter::FilterPath ref =
              filter::kalman_bucy(ctx.spec, ctx.theta0, ctx.grid, path.x);
          double sup = 0.0;
          for (std::size_t k = os.tau_index + 1; k < ap.m_hat.size(); ++k)
            sup = std::max(sup, std::abs(ap.m_hat[k] - ref.m[k]));
          rec.estimate = sup;
          rec.oracle = 0.0;
          rec.aux = sup;
        }
        break;
      }
    }
    rec.error = rec.estimate - rec.oracle;
    rec.ok = std::isfinite(rec.error);
    if (!rec.ok) rec.reason = "non-finite estimate";
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.reason = e.what();
    rec.estimate = std::numeric_limits<double>::quiet_NaN();
    rec.error = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

}  // namespace

std::vector<RepRecord> run_replications(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const std::size_t levels = cfg.eps_list.size();
  const auto reps = static_cast<std::size_t>(cfg.replications);

  std::vector<LevelContext> contexts;
  contexts.reserve(levels);
  for (double eps : cfg.eps_list) contexts.push_back(make_level(cfg, eps));

  std::vector<RepRecord> records(levels * reps);
  std::atomic<std::size_t> next{0};
  const std::size_t total = records.size();

  unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(total));

  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
      const std::size_t level = i / reps;
      const std::size_t rep = i % reps;
      records[i] = run_one(cfg, contexts[level], level, rep);
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return records;
}

RateFit rate_regression(const std::vector<double>& eps, const std::vector<double>& rmse) {
  if (eps.size() != rmse.size()) throw ConfigError("rate_regression: size mismatch");
  if (eps.size() < 3) throw PreconditionError("rate_regression: need at least 3 eps levels");
  const std::size_t n = eps.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(rmse[i] > 0.0))
      throw NumericError("rate_regression: zero RMSE level makes the fit degenerate");
    lx[i] = std::log(eps[i]);
    ly[i] = std::log(rmse[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    ss_res += r * r;
  }
  fit.slope_se = n > 2 ? std::sqrt(ss_res / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

namespace {

// chi-square quantile via the Wilson-Hilferty normal approximation
double chi2_quantile(double p, double dof) {
  // inverse normal CDF (Acklam-style rational approximation)
  auto inv_norm = [](double q) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (q < plow) {
      const double u = std::sqrt(-2.0 * std::log(q));
      return (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
             ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    if (q > 1.0 - plow) {
      const double u = std::sqrt(-2.0 * std::log(1.0 - q));
      return -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
             ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    const double u = q - 0.5, r = u * u;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  };
  const double z = inv_norm(p);
  const double f = 2.0 / (9.0 * dof);
  const double v = 1.0 - f + z * std::sqrt(f);
  return dof * v * v * v;
}

}  // namespace

VarianceRatio variance_ratio(const std::vector<double>& values, double predicted_variance) {
  if (values.size() < 100)
    throw PreconditionError("variance_ratio: need at least 100 samples");
  if (!(predicted_variance > 0.0))
    throw DomainError("variance_ratio: predicted variance must be positive");
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double s2 = ss / (n - 1.0);

  VarianceRatio r;
  r.ratio = s2 / predicted_variance;
  const double dof = n - 1.0;
  r.lo = dof * s2 / chi2_quantile(0.975, dof) / predicted_variance;
  r.hi = dof * s2 / chi2_quantile(0.025, dof) / predicted_variance;
  return r;
}

MCSummary summarize(const ExperimentConfig& cfg, const std::vector<RepRecord>& records,
                    double wall_seconds) {
  MCSummary s;
  s.wall_seconds = wall_seconds;

  std::vector<LevelContext> contexts;
  for (double eps : cfg.eps_list) contexts.push_back(make_level(cfg, eps));

  for (std::size_t level = 0; level < cfg.eps_list.size(); ++level) {
    EpsSummary e;
    e.eps = cfg.eps_list[level];
    e.predicted_sd_norm = contexts[level].predicted_sd;
    double sum = 0.0, sum_sq = 0.0, sum_aux = 0.0;
    for (const auto& rec : records) {
      if (rec.eps_index != level) continue;
      ++e.total;
      if (!rec.ok) continue;
      ++e.ok;
      sum += rec.error;
      sum_sq += rec.error * rec.error;
      sum_aux += rec.aux;
    }
    if (e.ok > 0) {
      const auto m = static_cast<double>(e.ok);
      e.mean_error = sum / m;
      e.rmse = std::sqrt(sum_sq / m);
      e.sd = e.ok > 1 ? std::sqrt((sum_sq - m * e.mean_error * e.mean_error) / (m - 1.0)) : 0.0;
      e.mean_aux = sum_aux / m;
      e.clamp_rate = cfg.estimator == EstimatorKind::Se ? e.mean_aux : 0.0;
      e.empirical_sd_norm = e.sd / std::sqrt(e.eps);
    }
    e.quarantine_rate =
        e.total ? 1.0 - static_cast<double>(e.ok) / static_cast<double>(e.total) : 0.0;
    s.levels.push_back(e);
  }

  if (s.levels.size() >= 3) {
    std::vector<double> eps, rmse;
    for (const auto& e : s.levels) {
      eps.push_back(e.eps);
      rmse.push_back(e.rmse);
    }
    try {
      s.rate = rate_regression(eps, rmse);
    } catch (const std::exception&) {
      s.rate.reset();
    }
  }
  return s;
}

nlohmann::json to_json(const MCSummary& s) {
  nlohmann::json j;
  j["levels"] = nlohmann::json::array();
  for (const auto& e : s.levels) {
    nlohmann::json l;
    l["eps"] = e.eps;
    l["replications"] = e.total;
    l["ok"] = e.ok;
    l["quarantine_rate"] = e.quarantine_rate;
    l["mean_error"] = e.mean_error;
    l["rmse"] = e.rmse;
    l["sd"] = e.sd;
    l["clamp_rate"] = e.clamp_rate;
    l["mean_aux"] = e.mean_aux;
    l["predicted_sd_norm"] = e.predicted_sd_norm;
    l["empirical_sd_norm"] = e.empirical_sd_norm;
    j["levels"].push_back(l);
  }
  if (s.rate) {
    j["rate"] = {{"slope", s.rate->slope},
                 {"intercept", s.rate->intercept},
                 {"slope_se", s.rate->slope_se}};
  }
  j["wall_seconds"] = s.wall_seconds;
  return j;
}

void write_records_csv(const std::vector<RepRecord>& records, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("write_records_csv: cannot open " + file);
  out << "eps_index,rep,eps,estimate,oracle,error,aux,ok,reason\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%d,", r.eps_index,
                  r.rep, r.eps, r.estimate, r.oracle, r.error, r.aux, r.ok ? 1 : 0);
    out << buf << r.reason << "\n";
  }
}

std::vector<RepRecord> read_records_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("read_records_csv: cannot open " + file);
  std::string line;
  std::getline(in, line);
  std::vector<RepRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    RepRecord r;
    std::getline(row, cell, ',');
    r.eps_index = std::stoul(cell);
    std::getline(row, cell, ',');
    r.rep = std::stoul(cell);
    std::getline(row, cell, ',');
    r.eps = std::stod(cell);
    std::getline(row, cell, ',');
    r.estimate = std::stod(cell);
    std::getline(row, cell, ',');
    r.oracle = std::stod(cell);
    std::getline(row, cell, ',');
    r.error = std::stod(cell);
    std::getline(row, cell, ',');
    r.aux = std::stod(cell);
    std::getline(row, cell, ',');
    r.ok = cell == "1";
    std::getline(row, r.reason);
    out.push_back(std::move(r));
  }
  return out;
}

double predicted_sd_norm(const ExperimentConfig& cfg) {
  return make_level(cfg, cfg.eps_list.front()).predicted_sd;
}

}  // namespace qv::mc
