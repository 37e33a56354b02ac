#pragma once

// Closed-form minimum-norm least squares against the feature matrix.
//
// With Xbar of full row rank the interpolant is w* = Xbar^T (Xbar Xbar^T)^{-1} y;
// otherwise w* = pinv(Xbar) y. For y ~ N(0, I_m) the expected minimum mean
// squared loss is 1 - rank(Xbar)/m.

#include <optional>

#include "galu/feature_map.hpp"
#include "galu/types.hpp"

namespace galu {

struct SolveResult {
  WeightStack w_star;
  double train_mse = 0.0;  // ||residual||^2 / m
  Index rank = 0;
  Vector residual;         // Xbar w* - y
};

SolveResult min_norm_solve(const FeatureMatrix& features, const VectorRef& y);

/// 1 - rank(Xbar) / m.
double expected_loss_law(const FeatureMatrix& features);

/// Numerical rank of the feature matrix.
Index feature_rank(const FeatureMatrix& features);

struct CorollaryPrediction {
  Index m_prime = 0;
  double loss_bound = 0.0;  // 1 - m'/m
  bool in_range = false;    // d <= m' <= c2 d^2
  bool vacuous = false;     // loss_bound < 0
};

/// m' = floor(k d c1^2 / (64 pi) / log(c2 d^2 / delta)) and the bound 1 - m'/m.
/// Throws DomainError when m' <= 0.
CorollaryPrediction corollary_prediction(Index m, Index d, Index k, double delta, double c1,
                                         double c2);

/// Factors a matrix once and returns least-squares residual norms for many
/// right-hand sides. A Householder QR is used when every |R_ii| clears the rank
/// tolerance; otherwise an orthonormal basis of the column space is taken from
/// an SVD.
class LeastSquaresProjector {
public:
  explicit LeastSquaresProjector(const MatrixRef& a);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index rank() const { return rank_; }
  bool full_rank() const { return rank_ == std::min(rows_, cols_); }

  /// min_w ||A w - y||^2.
  double residual_sq(const VectorRef& y) const;

private:
  Index rows_ = 0;
  Index cols_ = 0;
  Index rank_ = 0;
  bool wide_ = false;
  std::optional<Eigen::HouseholderQR<Matrix>> qr_;  // tall, full column rank
  Matrix basis_;                                    // deficient: m x rank orthonormal
};

}  // namespace galu
