#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qv/estimators.hpp"
#include "qv/filter.hpp"
#include "qv/substitution.hpp"
#include "qv/system.hpp"

namespace qv::mc {

enum class EstimatorKind { Qv, IntB2, IntF2, Se, Mle, Bayes, OneStep, Adaptive };

std::string to_string(EstimatorKind k);
EstimatorKind estimator_kind_from_string(const std::string& s);

struct KernelChoice {
  int degree = 3;
  bool vanish = true;
};

/// One Monte Carlo study: a system, an eps ladder, a replication count and an
/// estimator. The grid refines with eps (h = eps/per_bandwidth) unless a fixed
/// step count is forced.
struct ExperimentConfig {
  SystemSpec system;
  std::vector<double> eps_list{};   // strictly decreasing
  int replications = 2;             // M >= 2
  EstimatorKind estimator = EstimatorKind::Qv;
  double tau = 0.5;
  double t0 = 0.0;                  // consistency anchor for the one-step process
  KernelChoice kernel{};
  double bandwidth_scale = 1.0;     // phi = scale * eps
  filter::AdaptiveMode adaptive_mode = filter::AdaptiveMode::Recurrent;
  std::uint64_t seed = 1;
  double per_bandwidth = 100.0;
  std::optional<std::size_t> grid_override{};

  void validate() const;
};

ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// One replication outcome. `error` is estimate - oracle; `aux` carries the
/// estimator-specific extra (clamp flag for SE, sup-error for the one-step and
/// adaptive runs). Failed preconditions quarantine the record instead of
/// aborting the sweep.
struct RepRecord {
  std::size_t eps_index = 0;
  std::size_t rep = 0;
  double eps = 0.0;
  double estimate = 0.0;
  double oracle = 0.0;
  double error = 0.0;
  double aux = 0.0;
  bool ok = true;
  std::string reason;  // quarantine reason when !ok
};

/// Deterministic given the config: records are keyed by (eps index, rep) and
/// independent of the thread count (0 = hardware concurrency).
std::vector<RepRecord> run_replications(const ExperimentConfig& cfg, int threads = 0);

struct EpsSummary {
  double eps = 0.0;
  std::size_t total = 0;
  std::size_t ok = 0;
  double quarantine_rate = 0.0;
  double mean_error = 0.0;
  double rmse = 0.0;
  double sd = 0.0;
  double clamp_rate = 0.0;         // SE runs
  double mean_aux = 0.0;
  double predicted_sd_norm = 0.0;  // predictor for eps^{-1/2} (estimate - oracle)
  double empirical_sd_norm = 0.0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

struct MCSummary {
  std::vector<EpsSummary> levels;
  std::optional<RateFit> rate;  // defined only with >= 3 eps levels
  double wall_seconds = 0.0;
};

/// Least squares of log RMSE on log eps. Throws on fewer than 3 levels or a
/// zero RMSE level.
RateFit rate_regression(const std::vector<double>& eps, const std::vector<double>& rmse);

struct VarianceRatio {
  double ratio = 0.0;  // empirical variance / predicted variance
  double lo = 0.0;     // 95% chi-square interval for the ratio
  double hi = 0.0;
};

/// Empirical variance of `values` over `predicted_variance`, with a
/// chi-square confidence interval. Requires at least 100 samples.
VarianceRatio variance_ratio(const std::vector<double>& values, double predicted_variance);

MCSummary summarize(const ExperimentConfig& cfg, const std::vector<RepRecord>& records,
                    double wall_seconds = 0.0);
nlohmann::json to_json(const MCSummary& s);

void write_records_csv(const std::vector<RepRecord>& records, const std::string& file);
std::vector<RepRecord> read_records_csv(const std::string& file);

/// Predicted sd of the eps-normalized error for the config's estimator
/// (limit-theory predictor; NaN when the theory gives none).
double predicted_sd_norm(const ExperimentConfig& cfg);

}  // namespace qv::mc
