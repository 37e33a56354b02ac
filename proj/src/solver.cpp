#include "galu/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "galu/error.hpp"
#include "galu/linalg.hpp"

namespace galu {

namespace {

struct ReducedSvd {
  Matrix left;    // m x n0
  Vector values;  // n0, decreasing
  Matrix right;   // n x n0
};

// Thin SVD A = left * diag(values) * right^T with n0 = min(m, n), computed on
// the square triangular factor of a Householder QR.
ReducedSvd reduced_svd(const MatrixRef& a) {
  const Index m = a.rows();
  const Index n = a.cols();
  ReducedSvd out;
  if (m >= n) {
    Eigen::HouseholderQR<Matrix> qr(a);
    const Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    Eigen::BDCSVD<Matrix> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix padded = Matrix::Zero(m, n);
    padded.topRows(n) = svd.matrixU();
    out.left = qr.householderQ() * padded;
    out.values = svd.singularValues();
    out.right = svd.matrixV();
  } else {
    // A^T = Q R, so A = R^T Q^T = U S V^T Q^T with R^T = U S V^T.
    Eigen::HouseholderQR<Matrix> qr(a.transpose());
    const Matrix rt = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>().transpose();
    Eigen::BDCSVD<Matrix> svd(rt, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix padded = Matrix::Zero(n, m);
    padded.topRows(m) = svd.matrixV();
    out.left = svd.matrixU();
    out.values = svd.singularValues();
    out.right = qr.householderQ() * padded;
  }
  return out;
}

bool triangular_diag_clears(const Matrix& packed, Index n) {
  const Vector diag = packed.diagonal().head(n).cwiseAbs();
  if (n == 0) return false;
  const double top = diag.maxCoeff();
  return top > 0.0 && diag.minCoeff() > kRankTolerance * top;
}

}  // namespace

SolveResult min_norm_solve(const FeatureMatrix& features, const VectorRef& y) {
  const Index m = features.rows();
  if (y.size() != m)
    throw DimensionError("min_norm_solve: " + std::to_string(m) + " rows but y has length " +
                         std::to_string(y.size()));
  if (!y.allFinite()) throw DomainError("min_norm_solve: non-finite label");

  SolveResult out;
  const Index n = features.cols();
  if (m == 0 || n == 0) {
    out.w_star = WeightStack(Vector::Zero(n), features.d, features.k);
    out.residual = -y;
    out.train_mse = m == 0 ? 0.0 : y.squaredNorm() / static_cast<double>(m);
    return out;
  }

  const ReducedSvd svd = reduced_svd(features.data);
  out.rank = numerical_rank(svd.values);
  const Index r = out.rank;
  Vector coeffs = svd.left.leftCols(r).transpose() * y;
  coeffs.array() /= svd.values.head(r).array();
  out.w_star = WeightStack(svd.right.leftCols(r) * coeffs, features.d, features.k);
  out.residual = features.data * out.w_star.w - y;
  out.train_mse = out.residual.squaredNorm() / static_cast<double>(m);
  return out;
}

Index feature_rank(const FeatureMatrix& features) {
  if (features.data.size() == 0) return 0;
  return numerical_rank(singular_values(features.data));
}

double expected_loss_law(const FeatureMatrix& features) {
  if (features.rows() == 0) throw DimensionError("expected_loss_law: empty feature matrix");
  return 1.0 - static_cast<double>(feature_rank(features)) / static_cast<double>(features.rows());
}

CorollaryPrediction corollary_prediction(Index m, Index d, Index k, double delta, double c1,
                                         double c2) {
  if (m < 1 || d < 1 || k < 1) throw DomainError("corollary_prediction: m, d, k must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("corollary_prediction: delta in (0, 1)");
  if (!(c1 > 0.0 && c2 > 0.0)) throw DomainError("corollary_prediction: constants must be positive");
  const double dd = static_cast<double>(d);
  const double log_term = std::log(c2 * dd * dd / delta);
  if (!(log_term > 0.0))
    throw DomainError("constants make bound vacuous: log(c2 d^2 / delta) <= 0");
  const double raw = static_cast<double>(k) * dd * c1 * c1 / (64.0 * std::numbers::pi) / log_term;
  CorollaryPrediction out;
  out.m_prime = floor_index(raw);
  if (out.m_prime <= 0) throw DomainError("constants make bound vacuous: m' = 0");
  out.loss_bound = 1.0 - static_cast<double>(out.m_prime) / static_cast<double>(m);
  out.in_range = static_cast<double>(out.m_prime) >= dd &&
                 static_cast<double>(out.m_prime) <= c2 * dd * dd;
  out.vacuous = out.loss_bound < 0.0;
  return out;
}

LeastSquaresProjector::LeastSquaresProjector(const MatrixRef& a)
    : rows_(a.rows()), cols_(a.cols()), wide_(a.cols() >= a.rows()) {
  if (rows_ == 0 || cols_ == 0) {
    basis_ = Matrix::Zero(rows_, 0);
    return;
  }
  if (wide_) {
    Eigen::HouseholderQR<Matrix> qr(a.transpose());
    if (triangular_diag_clears(qr.matrixQR(), rows_)) {
      rank_ = rows_;
      return;
    }
  } else {
    Eigen::HouseholderQR<Matrix> qr(a);
    if (triangular_diag_clears(qr.matrixQR(), cols_)) {
      rank_ = cols_;
      qr_.emplace(std::move(qr));
      return;
    }
  }
  const ReducedSvd svd = reduced_svd(a);
  rank_ = numerical_rank(svd.values);
  basis_ = svd.left.leftCols(rank_);
}

double LeastSquaresProjector::residual_sq(const VectorRef& y) const {
  if (y.size() != rows_) throw DimensionError("LeastSquaresProjector: length mismatch");
  if (qr_) {
    const Vector z = qr_->householderQ().adjoint() * y;
    return z.tail(rows_ - cols_).squaredNorm();
  }
  if (full_rank() && wide_) return 0.0;
  return (y - basis_ * (basis_.transpose() * y)).squaredNorm();
}

}  // namespace galu
