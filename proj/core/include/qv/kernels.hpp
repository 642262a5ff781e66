#pragma once

#include <cstddef>
#include <vector>

#include "qv/errors.hpp"

namespace qv {

enum class KernelSide {
  Left,   // support [-1, 0], used for the endpoint statistic
  Right,  // support [0, 1], used for the interior smoother and its derivative
};

/// One-sided polynomial smoothing kernel with unit mass and zero first moment.
///
/// The moment conditions on a one-sided support force every such kernel to
/// take negative values somewhere. Kernels built with vanish_endpoints are
/// continuous on all of R; without it they jump at the support boundary.
class Kernel {
 public:
  Kernel(KernelSide side, std::vector<double> coeffs, bool vanish_endpoints);

  double operator()(double u) const;  // 0 outside the support
  /// Exact polynomial derivative on the support, 0 outside.
  double deriv(double u) const;

  KernelSide side() const { return side_; }
  double lo() const { return side_ == KernelSide::Left ? -1.0 : 0.0; }
  double hi() const { return side_ == KernelSide::Left ? 0.0 : 1.0; }
  bool vanish_endpoints() const { return vanish_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  /// Same polynomial reflected onto the opposite support (u -> -u).
  Kernel mirrored() const;

  /// Exact polynomial moments int u^p K(u) du and int u^p K'(u) du over the
  /// support. Discrete estimator weights are projected onto these so the
  /// sampled sums satisfy the kernel conditions at any grid resolution.
  double moment(int p) const;
  double deriv_moment(int p) const;

 private:
  KernelSide side_;
  std::vector<double> coeffs_;
  bool vanish_;
};

struct ValidationReport {
  double moment0_residual = 0.0;  // |int K - 1|
  double moment1_residual = 0.0;  // |int u K|
  bool moment0_ok = false;
  bool moment1_ok = false;
  bool support_ok = false;
  bool pass() const { return moment0_ok && moment1_ok && support_ok; }
};

/// Limit-variance constants of a kernel pair (K*, K).
struct KernelConstants {
  double d_star_sq = 0.0;  // int K*(u)^2 du
  double d_sq = 0.0;       // int K(u)^2 du
  double dd_star_sq = 0.0; // int int K*(u) K*(v) (u ^ v) du dv
  double dd_sq = 0.0;      // same double integral for K (enters the Q/R terms)
};

/// Solve the square linear system for a polynomial kernel meeting
/// unit mass, zero first moment and (optionally) vanishing endpoints.
/// degree 1 without vanishing and degree 3 with vanishing are square;
/// anything else is rejected as under- or over-determined.
Kernel solve_moment_kernel(KernelSide side, int degree, bool vanish_endpoints);

/// Check the moment conditions by 1e3-node quadrature and support compliance.
ValidationReport validate(const Kernel& k, double tolerance = 1e-10);

/// Quadrature of the variance constants; the (u ^ v) double integrals split
/// the square along the diagonal so each half has a smooth integrand.
/// `n` is the panel count per axis.
KernelConstants constants(const Kernel& k_star, const Kernel& k, std::size_t n = 400);

/// Matched mirror pair (K*, K) of the requested family: degree-3 vanishing
/// (K = 36u - 96u^2 + 60u^3) or degree-1 (K = 4 - 6u). Only a vanishing K may
/// be differentiated inside the quadratic-variation estimator: a boundary
/// jump feeds the derivative smoother a spurious O(1/bandwidth) term.
/// EstimatorConfig::defaults combines a degree-1 K* with the vanishing K.
std::pair<Kernel, Kernel> default_kernel_pair(bool vanish_endpoints = true);

}  // namespace qv
