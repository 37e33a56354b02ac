#pragma once

// The kernel induced by random gaussian gates,
//
//   kappa(x, y) = (1/2 - arccos(cos(x, y)) / (2 pi)) <x, y>
//              = E_u[ 1[u.x >= 0] 1[u.y >= 0] ] <x, y>,
//
// its Gram matrix H_inf over a sample, and the finite-width comparisons.

#include <cstdint>

#include "galu/types.hpp"

namespace galu {

double kappa(const VectorRef& x, const VectorRef& y);

/// <Phi(x), Phi(y)> / k for one gaussian gate bank of width k drawn from `seed`.
double mc_kernel_estimate(const VectorRef& x, const VectorRef& y, Index k, std::uint64_t seed);

struct KernelGram {
  Matrix matrix;
  Vector source_norms;  // row norms of the sample

  Index size() const { return matrix.rows(); }
};

KernelGram gram_infinity(const MatrixRef& xs);
KernelGram gram_infinity(const LabeledSet& data);

/// y^T H_inf^{-1} y, the squared RKHS norm of the kernel interpolant.
/// Throws NumericalError when H_inf is singular.
double rkhs_norm_sq(const LabeledSet& data);

struct NormTransfer {
  double w_norm_sq = 0.0;       // y^T ((1/k) Xbar Xbar^T)^{-1} y
  double kernel_norm_sq = 0.0;  // y^T H_inf^{-1} y
  double gap = 0.0;
};

NormTransfer norm_transfer_check(const LabeledSet& data, Index k, std::uint64_t seed);

/// Spectral-norm distance between (1/k) Xbar Xbar^T and H_inf for one
/// gaussian gate bank of width k drawn from `seed`.
double gram_deviation(const MatrixRef& xs, const KernelGram& h_inf, Index k, std::uint64_t seed);

/// Width that makes ||(1/k) Xbar Xbar^T - H_inf|| <= lambda / r with
/// probability at least 1 - delta: ceil(32 r^2 ||X||^4 log(m / delta) / lambda^2).
Index hoeffding_width(const LabeledSet& data, double r, double delta);

}  // namespace galu
