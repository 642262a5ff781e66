#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "qv/model.hpp"
#include "qv/rng.hpp"
#include "qv/sim.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace qv;

TEST_CASE("grid rule ties the step to eps") {
  const TimeGrid g = TimeGrid::for_eps(1.0, 0.05);
  CHECK(g.n == 2000);
  CHECK(g.h() == doctest::Approx(0.0005));
  CHECK(g.t(g.n) == doctest::Approx(1.0));
}

TEST_CASE("degenerate system stays at zero") {
  SystemSpec spec(ScalarField::constant(1.0), ScalarField::constant(0.0),
                  ScalarField::constant(1.0), ScalarField::constant(1.0), 1.0, 1e-300);
  // eps must be positive; the noise-free limit is emulated with a tiny eps
  const auto path = simulate(spec, TimeGrid{1.0, 500}, 42);
  for (double y : path.y) CHECK(y == 0.0);
  for (double x : path.x) CHECK(std::abs(x) < 1e-290);
}

TEST_CASE("noise-free observations are the Riemann sum of f Y") {
  const auto spec = fixtures::constant_system(1.0, 1.0, 2.0, 1.0, 1.0, 1e-300);
  const TimeGrid grid{1.0, 400};
  const auto path = simulate(spec, grid, 7);
  double riemann = 0.0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    riemann += 2.0 * path.y[k] * grid.h();
    CHECK(path.x[k + 1] == doctest::Approx(riemann).epsilon(1e-10));
  }
}

TEST_CASE("seed determinism: identical inputs give identical bytes") {
  const auto spec = fixtures::constant_system(1.0, 1.0, 1.0, 1.0, 1.0, 0.1);
  const TimeGrid grid = TimeGrid::for_eps(1.0, 0.1);
  const auto p1 = simulate(spec, grid, 123);
  const auto p2 = simulate(spec, grid, 123);
  CHECK(p1.y == p2.y);  // element-wise bitwise equality
  CHECK(p1.x == p2.x);
  const auto p3 = simulate(spec, grid, 124);
  CHECK(p1.y != p3.y);
}

TEST_CASE("terminal variance matches var_y over many seeds") {
  const auto spec = fixtures::constant_system(1.0, 1.0, 1.0, 1.0, 1.0, 0.1);
  const TimeGrid grid{1.0, 1000};
  const int m = 10000;
  std::vector<double> terminal(m);
  for (int i = 0; i < m; ++i)
    terminal[static_cast<std::size_t>(i)] =
        simulate(spec, grid, rng::derive_key(99, 0, static_cast<std::uint64_t>(i))).y.back();
  const double mean = oracle::mean(terminal);
  double var = 0.0;
  for (double y : terminal) var += (y - mean) * (y - mean);
  var /= static_cast<double>(m - 1);

  const double target = model::var_y(spec, 1.0);
  // sampling error of a Gaussian sample variance: sd = sqrt(2/(m-1)) var
  const double se = std::sqrt(2.0 / (m - 1)) * target;
  CHECK(std::abs(var - target) < 3.0 * se + 3.0 * target * grid.h());  // MC + Euler bias
  CHECK(std::abs(mean) < 3.0 * std::sqrt(target / m));
}

TEST_CASE("driving streams are uncorrelated") {
  const std::size_t n = 1000000;
  double sum_vw = 0.0, sum_v2 = 0.0, sum_w2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = rng::gaussian(2024, 0, k);
    const double w = rng::gaussian(2024, 1, k);
    sum_vw += v * w;
    sum_v2 += v * v;
    sum_w2 += w * w;
  }
  const double corr = sum_vw / std::sqrt(sum_v2 * sum_w2);
  CHECK(std::abs(corr) < 0.01);
  CHECK(sum_v2 / static_cast<double>(n) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("strong error: coarse vs coupled fine grid is O(sqrt(h)) or better") {
  const auto spec = fixtures::constant_system(1.0, 1.0, 1.0, 1.0, 1.0, 0.1);

  auto rms_gap = [&](std::size_t steps) {
    const TimeGrid cg{1.0, steps};
    const TimeGrid fg{1.0, 2 * steps};
    double ss = 0.0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
      const double hf = fg.h();
      std::vector<double> dvf(fg.n), dwf(fg.n), dvc(cg.n), dwc(cg.n);
      for (std::size_t k = 0; k < fg.n; ++k) {
        dvf[k] = std::sqrt(hf) * rng::gaussian(500 + static_cast<std::uint64_t>(s), 0, k);
        dwf[k] = std::sqrt(hf) * rng::gaussian(500 + static_cast<std::uint64_t>(s), 1, k);
      }
      for (std::size_t k = 0; k < cg.n; ++k) {
        dvc[k] = dvf[2 * k] + dvf[2 * k + 1];  // same Brownian path, coarser mesh
        dwc[k] = dwf[2 * k] + dwf[2 * k + 1];
      }
      const auto pc = simulate_with_increments(spec, cg, dvc, dwc);
      const auto pf = simulate_with_increments(spec, fg, dvf, dwf);
      const double gap = pc.y.back() - pf.y.back();
      ss += gap * gap;
    }
    return std::sqrt(ss / seeds);
  };

  const double r1 = rms_gap(256);
  const double r2 = rms_gap(512);
  CHECK(r1 <= 1.0 * std::sqrt(1.0 / 256));  // asserted bound
  CHECK(r2 <= 1.0 * std::sqrt(1.0 / 512));
  CHECK(r2 / r1 < 0.75);  // additive noise: contracts at first order here
}

TEST_CASE("derivative and realized-QV oracles") {
  const auto spec = fixtures::constant_system(0.5, 1.0, 1.0, 1.0, 1.0, 0.1);
  const TimeGrid grid{1.0, 2000};
  const auto path = simulate(spec, grid, 31);

  SUBCASE("f == 1 gives N == Y, f == 0 gives N == 0") {
    const auto n = derivative_oracle(path, spec);
    CHECK(n == path.y);
    const auto zero_f = fixtures::constant_system(0.5, 1.0, 0.0, 1.0, 1.0, 0.1);
    for (double v : derivative_oracle(path, zero_f)) CHECK(v == 0.0);
  }

  SUBCASE("f(t) = t pins the pointwise product") {
    const SystemSpec ramp(ScalarField::constant(0.5), ScalarField::constant(1.0),
                          ScalarField::linear(0.0, 1.0), ScalarField::constant(1.0), 1.0, 0.1);
    const auto n = derivative_oracle(path, ramp);
    for (std::size_t k = 0; k < n.size(); k += 97)
      CHECK(n[k] == doctest::Approx(grid.t(k) * path.y[k]).epsilon(1e-14));
  }

  SUBCASE("a smooth (b == 0) path has zero realized QV") {
    const auto smooth = fixtures::constant_system(0.0, 0.0, 1.0, 1.0, 1.0, 1e-300);
    const auto qv1 = realized_qv_oracle(simulate(smooth, TimeGrid{1.0, 500}, 1), smooth, 0.9);
    CHECK(qv1 == 0.0);
  }

  SUBCASE("realized QV approaches psi_true and improves when h halves") {
    const double tau = 0.5;
    const double psi = model::psi_true(spec, tau);
    double gap_coarse = 0.0, gap_fine = 0.0;
    const int seeds = 60;
    for (int s = 0; s < seeds; ++s) {
      const auto su = static_cast<std::uint64_t>(s);
      const auto pc = simulate(spec, TimeGrid{1.0, 4000}, 900 + su);
      const auto pf = simulate(spec, TimeGrid{1.0, 8000}, 900 + su);
      gap_coarse += std::abs(realized_qv_oracle(pc, spec, tau) - psi);
      gap_fine += std::abs(realized_qv_oracle(pf, spec, tau) - psi);
    }
    gap_coarse /= seeds;
    gap_fine /= seeds;
    CHECK(gap_fine < gap_coarse);
    CHECK(gap_coarse / psi < 0.25);
  }
}

TEST_CASE("path files round-trip through CSV and binary frames") {
  const auto spec = fixtures::constant_system(1.0, 1.0, 1.0, 1.0, 1.0, 0.1);
  const auto path = simulate(spec, TimeGrid{1.0, 300}, 5);

  const auto dir = std::filesystem::temp_directory_path();
  const auto csv = (dir / "qv_test_path.csv").string();
  const auto bin = (dir / "qv_test_path.qvp").string();

  write_csv(path, csv);
  const auto from_csv = read_csv(csv);
  CHECK(from_csv.grid.n == path.grid.n);
  for (std::size_t k = 0; k < path.x.size(); k += 29) {
    CHECK(from_csv.x[k] == path.x[k]);  // %.17g round-trips doubles
    CHECK(from_csv.y[k] == path.y[k]);
  }

  write_frame(path, bin);
  const auto from_bin = read_frame(bin);
  CHECK(from_bin.x == path.x);
  CHECK(from_bin.y == path.y);

  CHECK(read_path(bin).x == path.x);
  CHECK(read_path(csv).x.size() == path.x.size());

  std::filesystem::remove(csv);
  std::filesystem::remove(bin);
}

TEST_CASE("simulate rejects a parametric spec without the true theta") {
  const SystemSpec spec(ScalarField::constant(1.0), ScalarField::constant(1.0),
                        ParamField::scale(ScalarField::constant(1.0)),
                        ScalarField::constant(1.0), 1.0, 0.1, ThetaInterval{0.5, 2.0});
  CHECK_THROWS_AS(simulate(spec, TimeGrid{1.0, 100}, 1), ConfigError);
}
