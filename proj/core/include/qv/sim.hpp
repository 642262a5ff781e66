#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qv/system.hpp"

namespace qv {

/// Uniform grid 0 = t_0 < t_1 < ... < t_n = T.
struct TimeGrid {
  double T = 1.0;
  std::size_t n = 2;  // number of steps; n+1 points

  double h() const { return T / static_cast<double>(n); }
  double t(std::size_t k) const {
    return T * static_cast<double>(k) / static_cast<double>(n);
  }
  std::size_t points() const { return n + 1; }

  /// Default resolution rule: about `per_bandwidth` samples per kernel window
  /// of width eps, i.e. h = eps / per_bandwidth.
  static TimeGrid for_eps(double T, double eps, double per_bandwidth = 100.0);
};

bool operator==(const TimeGrid& a, const TimeGrid& b);

/// Simulated hidden/observed pair on a grid. Estimators only ever receive
/// the observed column; Y stays available for oracle diagnostics.
struct PathPair {
  TimeGrid grid;
  std::vector<double> y;  // hidden state, y[0] = 0
  std::vector<double> x;  // observations, x[0] = 0
  std::uint64_t seed = 0;
  std::uint64_t stream_v = 0;
  std::uint64_t stream_w = 1;
};

/// Euler-Maruyama simulation of the pair driven by two independent
/// counter-based Gaussian streams. Bit-identical for identical inputs.
PathPair simulate(const SystemSpec& spec, const TimeGrid& grid, std::uint64_t seed);

/// Same recursions driven by caller-provided increments (coupled-grid and
/// zero-innovation studies). dv and dw must each hold grid.n entries.
PathPair simulate_with_increments(const SystemSpec& spec, const TimeGrid& grid,
                                  std::span<const double> dv, std::span<const double> dw);

/// N_k = f(t_k) Y_k, the derivative of the noise-free observed path.
std::vector<double> derivative_oracle(const PathPair& path, const SystemSpec& spec);

/// Realized quadratic variation sum_{t_k < tau} (N_{k+1} - N_k)^2.
double realized_qv_oracle(const PathPair& path, const SystemSpec& spec, double tau);

// ---- path files: CSV (t,Y,X) and binary frame "QVP1" + f64 LE triplets ----

void write_csv(const PathPair& path, const std::string& file);
PathPair read_csv(const std::string& file);
void write_frame(const PathPair& path, const std::string& file);
PathPair read_frame(const std::string& file);

/// Loads either format, sniffing the magic header.
PathPair read_path(const std::string& file);

}  // namespace qv
