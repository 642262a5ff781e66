#include <doctest.h>

#include <cmath>

#include "qv/kernels.hpp"
#include "support/oracles.hpp"

using qv::Kernel;
using qv::KernelSide;

TEST_CASE("degree-1 right kernel is 4 - 6u") {
  const Kernel k = qv::solve_moment_kernel(KernelSide::Right, 1, false);
  REQUIRE(k.coeffs().size() == 2);
  CHECK(k.coeffs()[0] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(k.coeffs()[1] == doctest::Approx(-6.0).epsilon(1e-14));
  CHECK(k(0.5) == doctest::Approx(1.0));
  CHECK(k(1.5) == 0.0);
  CHECK(k(-0.1) == 0.0);
  CHECK(k.deriv(0.5) == doctest::Approx(-6.0));

  // exact moments by polynomial arithmetic
  const oracle::Poly p{4.0, -6.0};
  CHECK(oracle::poly_integral(p, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(oracle::poly_integral(oracle::poly_shift_up(p), 0.0, 1.0) ==
        doctest::Approx(0.0).epsilon(1e-15));
  CHECK(oracle::poly_integral(oracle::poly_mul(p, p), 0.0, 1.0) ==
        doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("degree-1 left kernel mirrors the right one") {
  const Kernel left = qv::solve_moment_kernel(KernelSide::Left, 1, false);
  REQUIRE(left.coeffs().size() == 2);
  CHECK(left.coeffs()[0] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(left.coeffs()[1] == doctest::Approx(6.0).epsilon(1e-14));
  const Kernel right = qv::solve_moment_kernel(KernelSide::Right, 1, false);
  for (double u : {0.1, 0.4, 0.9}) CHECK(left(-u) == doctest::Approx(right(u)));
}

TEST_CASE("degree-3 vanishing kernel: 36u - 96u^2 + 60u^3") {
  const Kernel k = qv::solve_moment_kernel(KernelSide::Right, 3, true);
  REQUIRE(k.coeffs().size() == 4);
  CHECK(k.coeffs()[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(k.coeffs()[1] == doctest::Approx(36.0).epsilon(1e-12));
  CHECK(k.coeffs()[2] == doctest::Approx(-96.0).epsilon(1e-12));
  CHECK(k.coeffs()[3] == doctest::Approx(60.0).epsilon(1e-12));
  CHECK(k(0.0) == doctest::Approx(0.0));
  CHECK(k(1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("construction rejects non-square constraint sets") {
  CHECK_THROWS_AS(qv::solve_moment_kernel(KernelSide::Right, 0, false), qv::PreconditionError);
  CHECK_THROWS_AS(qv::solve_moment_kernel(KernelSide::Right, 2, false), qv::PreconditionError);
  CHECK_THROWS_AS(qv::solve_moment_kernel(KernelSide::Right, 2, true), qv::PreconditionError);
  CHECK_THROWS_AS(qv::solve_moment_kernel(KernelSide::Right, 5, true), qv::PreconditionError);
}

TEST_CASE("moment kernels must dip negative somewhere") {
  for (bool vanish : {false, true}) {
    const Kernel k = qv::solve_moment_kernel(KernelSide::Right, vanish ? 3 : 1, vanish);
    double min_value = 1e300;
    for (int i = 0; i <= 1000; ++i) min_value = std::min(min_value, k(i / 1000.0));
    CHECK(min_value < 0.0);
  }
}

TEST_CASE("validate: constructed kernels pass at 1e-10") {
  for (bool vanish : {false, true}) {
    auto [k_star, k] = qv::default_kernel_pair(vanish);
    for (const Kernel& kk : {k_star, k}) {
      const auto report = qv::validate(kk, 1e-10);
      CHECK(report.pass());
      CHECK(report.moment0_residual < 1e-10);
      CHECK(report.moment1_residual < 1e-10);
    }
  }
}

TEST_CASE("validate: flags the broken kernels") {
  // uniform density on [0,1]: mass fine, first moment 1/2
  const Kernel uniform(KernelSide::Right, {1.0}, false);
  auto r = qv::validate(uniform);
  CHECK(r.moment0_ok);
  CHECK(!r.moment1_ok);
  CHECK(r.moment1_residual == doctest::Approx(0.5).epsilon(1e-8));

  // 6u(1-u): mass 1, first moment 1/2
  const Kernel bump(KernelSide::Right, {0.0, 6.0, -6.0}, true);
  r = qv::validate(bump);
  CHECK(r.moment0_ok);
  CHECK(!r.moment1_ok);
  CHECK(r.moment1_residual == doctest::Approx(0.5).epsilon(1e-8));

  // doubled kernel: both moments off; constants still computable
  const Kernel doubled(KernelSide::Left, {8.0, 12.0}, false);
  r = qv::validate(doubled);
  CHECK(!r.moment0_ok);
  CHECK(!r.pass());
  const auto kc = qv::constants(doubled, qv::solve_moment_kernel(KernelSide::Right, 1, false));
  CHECK(std::isfinite(kc.d_star_sq));  // computable, but the pipeline must reject via validate
}

TEST_CASE("constants of the degree-1 pair: d*2 = 4, dd*2 = 2/15") {
  auto [k_star, k] = qv::default_kernel_pair(false);
  const auto kc = qv::constants(k_star, k);
  CHECK(kc.d_star_sq == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(kc.d_sq == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(kc.dd_star_sq == doctest::Approx(2.0 / 15.0).epsilon(1e-8));
  CHECK(kc.dd_sq == doctest::Approx(2.0 / 15.0).epsilon(1e-8));

  // exact polynomial oracle for the double integral
  const double exact = oracle::exact_min_double_integral({4.0, 6.0}, -1.0, 0.0);
  CHECK(exact == doctest::Approx(2.0 / 15.0).epsilon(1e-14));
  CHECK(kc.dd_star_sq == doctest::Approx(exact).epsilon(1e-9));

  // and the brute 2-D trapezoid regression oracle at 1e3 x 1e3 nodes
  const double brute = oracle::trapezoid_min_double_integral(
      [&](double u) { return k_star(u); }, -1.0, 0.0, 1000);
  CHECK(kc.dd_star_sq == doctest::Approx(brute).epsilon(1e-5));
}

TEST_CASE("constants of the vanishing pair: d2 = 192/35, dd2 = 8/35") {
  auto [k_star, k] = qv::default_kernel_pair(true);
  const auto kc = qv::constants(k_star, k);
  CHECK(kc.d_star_sq == doctest::Approx(192.0 / 35.0).epsilon(1e-10));
  CHECK(kc.d_sq == doctest::Approx(192.0 / 35.0).epsilon(1e-10));
  CHECK(kc.dd_star_sq == doctest::Approx(8.0 / 35.0).epsilon(1e-8));
  CHECK(kc.dd_sq == doctest::Approx(8.0 / 35.0).epsilon(1e-8));

  const double exact = oracle::exact_min_double_integral({0.0, 36.0, -96.0, 60.0}, 0.0, 1.0);
  CHECK(exact == doctest::Approx(8.0 / 35.0).epsilon(1e-12));
  CHECK(kc.dd_sq == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("mirror symmetry and quadrature refinement") {
  auto [k_star, k] = qv::default_kernel_pair(true);
  const auto c400 = qv::constants(k_star, k, 400);
  const auto c800 = qv::constants(k_star, k, 800);
  CHECK(std::abs(c400.dd_star_sq - c800.dd_star_sq) < 1e-8);
  CHECK(std::abs(c400.dd_sq - c800.dd_sq) < 1e-8);
  // left constants equal the mirrored right constants
  CHECK(c400.d_star_sq == doctest::Approx(c400.d_sq).epsilon(1e-12));
  CHECK(c400.dd_star_sq == doctest::Approx(c400.dd_sq).epsilon(1e-8));
}
