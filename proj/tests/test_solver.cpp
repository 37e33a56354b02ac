#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "galu/datagen.hpp"
#include "galu/error.hpp"
#include "galu/feature_map.hpp"
#include "galu/linalg.hpp"
#include "galu/rng.hpp"
#include "galu/solver.hpp"

using namespace galu;

namespace {

FeatureMatrix random_features(Index m, Index d, Index k, std::uint64_t seed) {
  return build_feature_matrix(Rng(seed).normal_matrix(m, d), GateBank::gaussian(d, k, seed + 1));
}

Matrix null_space_basis(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const Vector s = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-10 * s(0)) ++rank;
  return svd.matrixV().rightCols(a.cols() - rank);
}

}  // namespace

TEST(MinNormSolve, FullRowRankInterpolates) {
  const FeatureMatrix f = random_features(10, 4, 6, 1);
  const Vector y = Rng(2).normal_vector(10);
  const SolveResult r = min_norm_solve(f, y);
  EXPECT_EQ(r.rank, 10);
  EXPECT_LE(r.train_mse, 1e-8 * (1.0 + y.squaredNorm() / 10.0));
  EXPECT_LE(r.residual.norm(), 1e-10 * y.norm());
}

TEST(MinNormSolve, IdenticalRowsProjectOntoSpan) {
  const Vector row = Rng(3).normal_vector(6);
  FeatureMatrix f{Matrix(2, 6), 3, 2, false};
  f.data.row(0) = row.transpose();
  f.data.row(1) = row.transpose();
  const SolveResult r = min_norm_solve(f, Vector((Vector(2) << 1.0, -1.0).finished()));
  EXPECT_NEAR(r.residual.squaredNorm(), 2.0, 1e-12);
  EXPECT_NEAR(r.train_mse, 1.0, 1e-12);
  EXPECT_NEAR(r.residual(0), -1.0, 1e-12);
  EXPECT_NEAR(r.residual(1), 1.0, 1e-12);
  EXPECT_EQ(r.rank, 1);
}

TEST(MinNormSolve, MatchesNormalEquationsOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FeatureMatrix f = random_features(6, 2, 2, 10 + seed);
    const Vector y = Rng(20 + seed).normal_vector(6);
    const Matrix normal = f.data.transpose() * f.data;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(normal);
    const Vector rhs = eig.eigenvectors().transpose() * (f.data.transpose() * y);
    Vector coeff = Vector::Zero(rhs.size());
    const double top = eig.eigenvalues().maxCoeff();
    for (Index i = 0; i < rhs.size(); ++i)
      if (eig.eigenvalues()(i) > 1e-12 * top) coeff(i) = rhs(i) / eig.eigenvalues()(i);
    const Vector w = eig.eigenvectors() * coeff;
    const double oracle = (f.data * w - y).squaredNorm() / 6.0;
    EXPECT_NEAR(min_norm_solve(f, y).train_mse, oracle, 1e-8);
  }
}

TEST(MinNormSolve, Invariants) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index m = 8 + static_cast<Index>(seed) * 3;
    const FeatureMatrix f = random_features(m, 3, 1 + static_cast<Index>(seed % 4), 30 + seed);
    const Vector y = Rng(40 + seed).normal_vector(m);
    const SolveResult r = min_norm_solve(f, y);
    EXPECT_NEAR(r.train_mse, r.residual.squaredNorm() / double(m), 1e-10 * std::max(r.train_mse, 1e-300));
    EXPECT_LE(r.rank, std::min(f.rows(), f.cols()));
    EXPECT_TRUE(r.residual.isApprox(f.data * r.w_star.w - y, 1e-10) || r.residual.norm() < 1e-10);
    EXPECT_EQ(r.w_star.d, 3);
    EXPECT_EQ(r.w_star.k, f.k);
  }
}

TEST(MinNormSolve, OptimalUnderPerturbation) {
  const FeatureMatrix f = random_features(30, 4, 3, 50);
  const Vector y = Rng(51).normal_vector(30);
  const SolveResult r = min_norm_solve(f, y);
  const double best = (f.data * r.w_star.w - y).squaredNorm();
  Rng rng(52);
  for (int t = 0; t < 100; ++t) {
    const Vector delta = 1e-3 * rng.unit_vector(12);
    EXPECT_GE((f.data * (r.w_star.w + delta) - y).squaredNorm(), best - 1e-9);
  }
}

TEST(MinNormSolve, OrthogonalToNullSpace) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    FeatureMatrix f = random_features(6, 4, 3, 60 + seed);
    f.data.row(5) = f.data.row(0);
    const SolveResult r = min_norm_solve(f, Rng(70 + seed).normal_vector(6));
    const Matrix null = null_space_basis(f.data);
    EXPECT_LE((null.transpose() * r.w_star.w).norm(), 1e-8 * r.w_star.w.norm());
  }
}

TEST(MinNormSolve, ErrorsOnBadInput) {
  const FeatureMatrix f = random_features(4, 2, 2, 80);
  EXPECT_THROW(min_norm_solve(f, Vector::Ones(3)), DimensionError);
  EXPECT_THROW(min_norm_solve(f, Vector::Constant(4, INFINITY)), DomainError);
}

TEST(ExpectedLossLaw, Extremes) {
  EXPECT_EQ(expected_loss_law(random_features(5, 3, 4, 90)), 0.0);
  const FeatureMatrix zero{Matrix::Zero(5, 6), 3, 2, false};
  EXPECT_EQ(expected_loss_law(zero), 1.0);
  EXPECT_EQ(feature_rank(zero), 0);
}

TEST(ExpectedLossLaw, MonteCarloMeanMatchesRankLaw) {
  const LabeledSet data = gen_gaussian(400, 20, 91);
  const FeatureMatrix f = build_feature_matrix(data, GateBank::gaussian(20, 10, 92));
  const double law = expected_loss_law(f);
  const LeastSquaresProjector proj(f.data);
  const Index draws = 200;
  Vector losses(draws);
  for (Index t = 0; t < draws; ++t) {
    const Vector y = Rng(derive_seed(93, t)).normal_vector(400);
    losses(t) = proj.residual_sq(y) / 400.0;
  }
  const double mean = losses.mean();
  const double se = std::sqrt((losses.array() - mean).square().sum() / (draws - 1) / draws);
  EXPECT_NEAR(mean, law, 3.0 * se);
  EXPECT_NEAR(law, 0.5, 0.03);
  EXPECT_NEAR(mean, 0.509, 0.03);
}

TEST(LeastSquaresProjector, AgreesWithMinNormSolve) {
  struct Shape { Index m, d, k; };
  for (Shape s : {Shape{20, 3, 2}, Shape{6, 3, 4}, Shape{12, 3, 4}}) {
    FeatureMatrix f = random_features(s.m, s.d, s.k, 100 + s.m);
    for (int dup = 0; dup < 2; ++dup) {
      if (dup) f.data.row(s.m - 1) = f.data.row(0);
      const LeastSquaresProjector proj(f.data);
      const Vector y = Rng(101).normal_vector(s.m);
      const SolveResult r = min_norm_solve(f, y);
      EXPECT_EQ(proj.rank(), r.rank);
      EXPECT_NEAR(proj.residual_sq(y), r.residual.squaredNorm(), 1e-9 * (1.0 + y.squaredNorm()));
    }
  }
}

TEST(CorollaryPrediction, IdealizedConstantsGiveRankLaw) {
  const Index m = 1000, d = 20, k = 10;
  const double delta = 0.1, c2 = 1.0;
  const double c1 = std::sqrt(64.0 * std::numbers::pi * std::log(c2 * d * d / delta));
  const CorollaryPrediction p = corollary_prediction(m, d, k, delta, c1, c2);
  EXPECT_EQ(p.m_prime, k * d);
  EXPECT_NEAR(p.loss_bound, 1.0 - double(k * d) / m, 1e-12);
  EXPECT_FALSE(p.vacuous);
}

TEST(CorollaryPrediction, VacuousWhenMPrimeExceedsM) {
  const double c1 = std::sqrt(64.0 * std::numbers::pi * std::log(400.0 / 0.1));
  const CorollaryPrediction p = corollary_prediction(100, 20, 10, 0.1, c1, 1.0);
  EXPECT_GT(p.m_prime, 100);
  EXPECT_LT(p.loss_bound, 0.0);
  EXPECT_TRUE(p.vacuous);
}

TEST(CorollaryPrediction, ErrorsWhenDegenerate) {
  EXPECT_THROW(corollary_prediction(100, 2, 1, 0.1, 1e-3, 1.0), DomainError);
  EXPECT_THROW(corollary_prediction(100, 2, 1, 0.1, 1.0, 1e-6), DomainError);
  EXPECT_THROW(corollary_prediction(100, 2, 1, 1.5, 1.0, 1.0), DomainError);
}

TEST(CorollaryPrediction, EmpiricalLossBelowBound) {
  const Index m = 400, d = 20, k = 10;
  const FeatureMatrix f = build_feature_matrix(gen_gaussian(m, d, 110), GateBank::gaussian(d, k, 111));
  const Index rank = feature_rank(f);
  const double c1 = std::sqrt(32.0 * std::numbers::pi * std::log(d * d / 0.1));
  const CorollaryPrediction p = corollary_prediction(m, d, k, 0.1, c1, 1.0);
  ASSERT_LE(p.m_prime, rank);
  const LeastSquaresProjector proj(f.data);
  double mean = 0.0;
  for (Index t = 0; t < 100; ++t)
    mean += proj.residual_sq(Rng(derive_seed(112, t)).normal_vector(m)) / double(m) / 100.0;
  EXPECT_LE(mean, p.loss_bound);
}
