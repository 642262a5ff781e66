#include "qv/sim.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

#include "qv/rng.hpp"

namespace qv {

TimeGrid TimeGrid::for_eps(double T, double eps, double per_bandwidth) {
  if (!(T > 0.0) || !(eps > 0.0) || !(per_bandwidth > 0.0))
    throw ConfigError("TimeGrid::for_eps: T, eps and per_bandwidth must be positive");
  const auto n = static_cast<std::size_t>(std::ceil(per_bandwidth * T / eps));
  return TimeGrid{T, n < 2 ? 2 : n};
}

bool operator==(const TimeGrid& a, const TimeGrid& b) { return a.T == b.T && a.n == b.n; }

namespace {

void check_grid(const TimeGrid& grid) {
  if (grid.n < 2) throw ConfigError("TimeGrid: need at least 2 steps");
  if (!(grid.T > 0.0)) throw ConfigError("TimeGrid: horizon must be positive");
}

PathPair run_euler(const SystemSpec& spec, const TimeGrid& grid,
                   const std::function<double(std::size_t)>& dv,
                   const std::function<double(std::size_t)>& dw) {
  const double th = spec.parametric() ? spec.theta0() : spec.theta_for_eval();
  const double h = grid.h();
  const double eps = spec.eps();

  PathPair p;
  p.grid = grid;
  p.y.assign(grid.points(), 0.0);
  p.x.assign(grid.points(), 0.0);
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double t = grid.t(k);
    const double a = spec.a().at(th, t);
    const double b = spec.b().at(th, t);
    const double f = spec.f().at(th, t);
    const double sg = spec.sigma().at(th, t);
    p.y[k + 1] = p.y[k] - a * p.y[k] * h + b * dv(k);
    p.x[k + 1] = p.x[k] + f * p.y[k] * h + eps * sg * dw(k);
  }
  return p;
}

}  // namespace

PathPair simulate(const SystemSpec& spec, const TimeGrid& grid, std::uint64_t seed) {
  check_grid(grid);
  if (spec.parametric() && !(spec.theta() && spec.theta()->truth))
    throw ConfigError("simulate: parametric spec needs the true theta");
  const double sqrt_h = std::sqrt(grid.h());
  PathPair p = run_euler(
      spec, grid,
      [&](std::size_t k) { return sqrt_h * rng::gaussian(seed, 0, k); },
      [&](std::size_t k) { return sqrt_h * rng::gaussian(seed, 1, k); });
  p.seed = seed;
  return p;
}

PathPair simulate_with_increments(const SystemSpec& spec, const TimeGrid& grid,
                                  std::span<const double> dv, std::span<const double> dw) {
  check_grid(grid);
  if (dv.size() != grid.n || dw.size() != grid.n)
    throw ConfigError("simulate_with_increments: need exactly grid.n increments per stream");
  if (spec.parametric() && !(spec.theta() && spec.theta()->truth))
    throw ConfigError("simulate: parametric spec needs the true theta");
  return run_euler(
      spec, grid, [&](std::size_t k) { return dv[k]; }, [&](std::size_t k) { return dw[k]; });
}

std::vector<double> derivative_oracle(const PathPair& path, const SystemSpec& spec) {
  const double th = spec.theta_for_eval();
  std::vector<double> n(path.y.size());
  for (std::size_t k = 0; k < n.size(); ++k) n[k] = spec.f().at(th, path.grid.t(k)) * path.y[k];
  return n;
}

double realized_qv_oracle(const PathPair& path, const SystemSpec& spec, double tau) {
  if (tau < 0.0 || tau > path.grid.T)
    throw DomainError("realized_qv_oracle: tau must lie in [0, T]");
  const std::vector<double> n = derivative_oracle(path, spec);
  double qv = 0.0;
  for (std::size_t k = 0; k + 1 < n.size() && path.grid.t(k) < tau; ++k) {
    const double d = n[k + 1] - n[k];
    qv += d * d;
  }
  return qv;
}

// ------------------------------ files ------------------------------

void write_csv(const PathPair& path, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("write_csv: cannot open " + file);
  out << "t,Y,X\n";
  char line[96];
  for (std::size_t k = 0; k < path.grid.points(); ++k) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", path.grid.t(k), path.y[k],
                  path.x[k]);
    out << line;
  }
}

PathPair read_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("read_csv: cannot open " + file);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> t, y, x;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double v[3] = {0, 0, 0};
    for (int i = 0; i < 3 && std::getline(row, cell, ','); ++i) v[i] = std::stod(cell);
    t.push_back(v[0]);
    y.push_back(v[1]);
    x.push_back(v[2]);
  }
  if (t.size() < 3) throw ConfigError("read_csv: too few samples in " + file);
  PathPair p;
  p.grid = TimeGrid{t.back(), t.size() - 1};
  const double h = p.grid.h();
  for (std::size_t k = 0; k < t.size(); ++k)
    if (std::abs(t[k] - p.grid.t(k)) > 1e-9 * (1.0 + p.grid.T))
      throw ConfigError("read_csv: non-uniform time grid in " + file);
  (void)h;
  p.y = std::move(y);
  p.x = std::move(x);
  return p;
}

namespace {
constexpr char kFrameMagic[4] = {'Q', 'V', 'P', '1'};
}

void write_frame(const PathPair& path, const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("write_frame: cannot open " + file);
  out.write(kFrameMagic, 4);
  for (std::size_t k = 0; k < path.grid.points(); ++k) {
    const double triple[3] = {path.grid.t(k), path.y[k], path.x[k]};
    out.write(reinterpret_cast<const char*>(triple), sizeof(triple));
  }
}

PathPair read_frame(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("read_frame: cannot open " + file);
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kFrameMagic, 4) != 0)
    throw ConfigError("read_frame: bad magic header in " + file);
  std::vector<double> t, y, x;
  double triple[3];
  while (in.read(reinterpret_cast<char*>(triple), sizeof(triple))) {
    t.push_back(triple[0]);
    y.push_back(triple[1]);
    x.push_back(triple[2]);
  }
  if (t.size() < 3) throw ConfigError("read_frame: too few samples in " + file);
  PathPair p;
  p.grid = TimeGrid{t.back(), t.size() - 1};
  for (std::size_t k = 0; k < t.size(); ++k)
    if (std::abs(t[k] - p.grid.t(k)) > 1e-9 * (1.0 + p.grid.T))
      throw ConfigError("read_frame: non-uniform time grid in " + file);
  p.y = std::move(y);
  p.x = std::move(x);
  return p;
}

PathPair read_path(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("read_path: cannot open " + file);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  in.close();
  if (std::memcmp(magic, kFrameMagic, 4) == 0) return read_frame(file);
  return read_csv(file);
}

}  // namespace qv
