#include "qv/kernels.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "qv/quadrature.hpp"

namespace qv {

namespace {

double eval_poly(const std::vector<double>& c, double u) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * u + c[i];
  return v;
}

// int_{lo}^{hi} u^p du
double power_moment(double lo, double hi, int p) {
  return (std::pow(hi, p + 1) - std::pow(lo, p + 1)) / static_cast<double>(p + 1);
}

// Solve A x = rhs by Gaussian elimination with partial pivoting.
std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> rhs,
                                const std::vector<std::string>& row_names) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-14)
      throw NumericError("solve_moment_kernel: constraint system singular at '" +
                         row_names[col] + "'");
    std::swap(A[piv], A[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double m = A[r][col] / A[col][col];
      for (std::size_t c = col; c < n; ++c) A[r][c] -= m * A[col][c];
      rhs[r] -= m * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[i] / A[i][i];
  return x;
}

}  // namespace

Kernel::Kernel(KernelSide side, std::vector<double> coeffs, bool vanish_endpoints)
    : side_(side), coeffs_(std::move(coeffs)), vanish_(vanish_endpoints) {
  if (coeffs_.empty()) throw ConfigError("Kernel: empty coefficient list");
}

double Kernel::operator()(double u) const {
  if (u < lo() || u > hi()) return 0.0;
  return eval_poly(coeffs_, u);
}

double Kernel::deriv(double u) const {
  if (u < lo() || u > hi()) return 0.0;
  double v = 0.0;
  for (std::size_t i = coeffs_.size(); i-- > 1;)
    v = v * u + coeffs_[i] * static_cast<double>(i);
  return v;
}

Kernel Kernel::mirrored() const {
  std::vector<double> c = coeffs_;
  for (std::size_t i = 1; i < c.size(); i += 2) c[i] = -c[i];
  const KernelSide other = side_ == KernelSide::Left ? KernelSide::Right : KernelSide::Left;
  return Kernel(other, std::move(c), vanish_);
}

double Kernel::moment(int p) const {
  double m = 0.0;
  for (std::size_t j = 0; j < coeffs_.size(); ++j)
    m += coeffs_[j] * power_moment(lo(), hi(), static_cast<int>(j) + p);
  return m;
}

double Kernel::deriv_moment(int p) const {
  double m = 0.0;
  for (std::size_t j = 1; j < coeffs_.size(); ++j)
    m += coeffs_[j] * static_cast<double>(j) *
         power_moment(lo(), hi(), static_cast<int>(j) - 1 + p);
  return m;
}

Kernel solve_moment_kernel(KernelSide side, int degree, bool vanish_endpoints) {
  if (degree < 1) throw PreconditionError("solve_moment_kernel: degree must be >= 1");
  if (vanish_endpoints && degree < 3)
    throw PreconditionError("solve_moment_kernel: vanishing endpoints need degree >= 3");

  const std::size_t unknowns = static_cast<std::size_t>(degree) + 1;
  const std::size_t constraints = 2 + (vanish_endpoints ? 2u : 0u);
  if (unknowns > constraints)
    throw PreconditionError(
        "solve_moment_kernel: under-determined system (degree " + std::to_string(degree) +
        " gives " + std::to_string(unknowns) + " unknowns for " + std::to_string(constraints) +
        " constraints)");
  if (unknowns < constraints)
    throw PreconditionError("solve_moment_kernel: over-determined system, constraint 'K(lo)=0' "
                            "cannot be met at degree " + std::to_string(degree));

  const double lo = side == KernelSide::Left ? -1.0 : 0.0;
  const double hi = side == KernelSide::Left ? 0.0 : 1.0;

  std::vector<std::vector<double>> A;
  std::vector<double> rhs;
  std::vector<std::string> names;

  std::vector<double> row(unknowns);
  for (std::size_t j = 0; j < unknowns; ++j) row[j] = power_moment(lo, hi, static_cast<int>(j));
  A.push_back(row);
  rhs.push_back(1.0);
  names.emplace_back("int K = 1");

  for (std::size_t j = 0; j < unknowns; ++j)
    row[j] = power_moment(lo, hi, static_cast<int>(j) + 1);
  A.push_back(row);
  rhs.push_back(0.0);
  names.emplace_back("int u K = 0");

  if (vanish_endpoints) {
    for (std::size_t j = 0; j < unknowns; ++j) row[j] = std::pow(lo, static_cast<double>(j));
    A.push_back(row);
    rhs.push_back(0.0);
    names.emplace_back("K(lo) = 0");
    for (std::size_t j = 0; j < unknowns; ++j) row[j] = std::pow(hi, static_cast<double>(j));
    A.push_back(row);
    rhs.push_back(0.0);
    names.emplace_back("K(hi) = 0");
  }

  return Kernel(side, solve_dense(std::move(A), std::move(rhs), names), vanish_endpoints);
}

ValidationReport validate(const Kernel& k, double tolerance) {
  ValidationReport r;
  const std::size_t nodes = 1000;
  const double m0 = quad::composite_simpson([&](double u) { return k(u); }, k.lo(), k.hi(), nodes);
  const double m1 =
      quad::composite_simpson([&](double u) { return u * k(u); }, k.lo(), k.hi(), nodes);
  r.moment0_residual = std::abs(m0 - 1.0);
  r.moment1_residual = std::abs(m1);
  r.moment0_ok = r.moment0_residual <= tolerance;
  r.moment1_ok = r.moment1_residual <= tolerance;
  r.support_ok = true;
  for (double u : {-2.0, -1.0 - 1e-9, 1.0 + 1e-9, 2.0, 17.0})
    if (k(u) != 0.0) r.support_ok = false;
  return r;
}

namespace {

// int int X(u) X(v) (u ^ v) du dv with the inner integral split at v = u.
double min_double_integral(const Kernel& k, std::size_t n) {
  const double lo = k.lo(), hi = k.hi();
  auto inner = [&](double u) {
    const double below =
        quad::composite_simpson([&](double v) { return k(v) * v; }, lo, u, n);
    const double above = quad::composite_simpson([&](double v) { return k(v); }, u, hi, n);
    return below + u * above;
  };
  return quad::composite_simpson([&](double u) { return k(u) * inner(u); }, lo, hi, n);
}

}  // namespace

KernelConstants constants(const Kernel& k_star, const Kernel& k, std::size_t n) {
  if (k_star.side() != KernelSide::Left)
    throw PreconditionError("constants: K* must be the left-sided kernel");
  if (k.side() != KernelSide::Right)
    throw PreconditionError("constants: K must be the right-sided kernel");
  KernelConstants c;
  const std::size_t nodes = 2000;
  c.d_star_sq = quad::composite_simpson([&](double u) { return k_star(u) * k_star(u); },
                                        k_star.lo(), k_star.hi(), nodes);
  c.d_sq =
      quad::composite_simpson([&](double u) { return k(u) * k(u); }, k.lo(), k.hi(), nodes);
  c.dd_star_sq = min_double_integral(k_star, n);
  c.dd_sq = min_double_integral(k, n);
  return c;
}

std::pair<Kernel, Kernel> default_kernel_pair(bool vanish_endpoints) {
  const int degree = vanish_endpoints ? 3 : 1;
  Kernel right = solve_moment_kernel(KernelSide::Right, degree, vanish_endpoints);
  return {right.mirrored(), right};
}

}  // namespace qv
