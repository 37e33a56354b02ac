#include "galu/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "galu/error.hpp"
#include "galu/feature_map.hpp"
#include "galu/linalg.hpp"
#include "galu/spectral.hpp"

namespace galu {

double kappa(const VectorRef& x, const VectorRef& y) {
  if (x.size() != y.size()) throw DimensionError("kappa: dimension mismatch");
  if (!x.allFinite() || !y.allFinite()) throw DomainError("kappa: non-finite input");
  const double nx = x.norm(), ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return 0.0;
  // acos loses half the digits near parallel vectors; the half-angle form does not.
  const Vector ux = x / nx, uy = y / ny;
  const double angle = 2.0 * std::atan2((ux - uy).norm(), (ux + uy).norm());
  return (0.5 - angle / (2.0 * std::numbers::pi)) * x.dot(y);
}

double mc_kernel_estimate(const VectorRef& x, const VectorRef& y, Index k, std::uint64_t seed) {
  if (x.size() != y.size()) throw DimensionError("mc_kernel_estimate: dimension mismatch");
  if (k < 1) throw DomainError("mc_kernel_estimate: k must be positive");
  const GateBank gates = GateBank::gaussian(x.size(), k, seed);
  return embed_point(x, gates, true).dot(embed_point(y, gates, true));
}

KernelGram gram_infinity(const MatrixRef& xs) {
  if (!xs.allFinite()) throw DomainError("gram_infinity: non-finite input");
  const Index m = xs.rows();
  KernelGram out{Matrix(m, m), xs.rowwise().norm()};
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j <= i; ++j) {
      const double v = kappa(xs.row(i).transpose(), xs.row(j).transpose());
      out.matrix(i, j) = v;
      out.matrix(j, i) = v;
    }
  }
  return out;
}

KernelGram gram_infinity(const LabeledSet& data) { return gram_infinity(data.xs); }

double rkhs_norm_sq(const LabeledSet& data) {
  const KernelGram h = gram_infinity(data);
  const Vector c = spd_solve(h.matrix, data.ys, "rkhs_norm_sq");
  return std::max(0.0, data.ys.dot(c));
}

NormTransfer norm_transfer_check(const LabeledSet& data, Index k, std::uint64_t seed) {
  const GateBank gates = GateBank::gaussian(data.dim(), k, seed);
  const Matrix h = gram_from_gates(data.xs, gates, GramScale::one_over_k);
  NormTransfer out;
  out.w_norm_sq = std::max(0.0, data.ys.dot(spd_solve(h, data.ys, "norm_transfer_check (H)")));
  out.kernel_norm_sq = rkhs_norm_sq(data);
  out.gap = std::abs(out.w_norm_sq - out.kernel_norm_sq);
  return out;
}

double gram_deviation(const MatrixRef& xs, const KernelGram& h_inf, Index k, std::uint64_t seed) {
  const GateBank gates = GateBank::gaussian(xs.cols(), k, seed);
  const Matrix diff = gram_from_gates(xs, gates, GramScale::one_over_k) - h_inf.matrix;
  const Vector eig = symmetric_eigenvalues(diff);
  return std::max(std::abs(eig(0)), std::abs(eig(eig.size() - 1)));
}

Index hoeffding_width(const LabeledSet& data, double r, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("hoeffding_width: delta must be in (0, 1)");
  if (!(r > 0.0)) throw DomainError("hoeffding_width: r must be positive");
  const double lambda = lambda_exact(data);
  require_diverse(data, lambda);
  const double norm_sq = std::pow(spectral_norm(data.xs), 2);
  const double m = static_cast<double>(data.size());
  return ceil_index(32.0 * r * r * norm_sq * norm_sq * std::log(m / delta) / (lambda * lambda));
}

}  // namespace galu
