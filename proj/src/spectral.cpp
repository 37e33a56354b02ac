#include "galu/spectral.hpp"

#include <cmath>
#include <numbers>

#include "galu/error.hpp"
#include "galu/kernel.hpp"
#include "galu/linalg.hpp"
#include "galu/rng.hpp"

namespace galu {

double lambda_exact(const MatrixRef& xs) {
  if (xs.rows() < 1) throw DimensionError("lambda_exact: empty sample");
  return min_eigenvalue(gram_infinity(xs).matrix);
}

double lambda_exact(const LabeledSet& data) { return lambda_exact(data.xs); }

McEstimate lambda_mc(const LabeledSet& data, Index k, Index trials, std::uint64_t seed) {
  if (trials < 2) throw DomainError("lambda_mc: need at least 2 trials");
  if (k < 1) throw DomainError("lambda_mc: k must be positive");
  const Index m = data.size();
  std::vector<Matrix> grams;
  grams.reserve(static_cast<std::size_t>(trials));
  Matrix total = Matrix::Zero(m, m);
  for (Index t = 0; t < trials; ++t) {
    const GateBank gates =
        GateBank::gaussian(data.dim(), k, derive_seed(seed, static_cast<std::uint64_t>(t)));
    grams.push_back(gram_from_gates(data.xs, gates, GramScale::one_over_k));
    total += grams.back();
  }
  const double n = static_cast<double>(trials);
  McEstimate out;
  out.estimate = min_eigenvalue(total / n);

  Vector leave_one_out(trials);
  for (Index t = 0; t < trials; ++t)
    leave_one_out(t) = min_eigenvalue((total - grams[static_cast<std::size_t>(t)]) / (n - 1.0));
  const double mean = leave_one_out.mean();
  out.std_error = std::sqrt((n - 1.0) / n * (leave_one_out.array() - mean).square().sum());
  return out;
}

double khatri_rao_bound(const LabeledSet& data) {
  const Index m = data.size();
  const Index d = data.dim();
  if (m > d * d) return 0.0;
  const Vector s = singular_values(khatri_rao_rows(data.xs));
  const double smallest = s(s.size() - 1);
  return smallest * smallest / (2.0 * std::numbers::pi);
}

void require_diverse(const LabeledSet& data, double lambda) {
  const double scale = 0.5 * data.xs.rowwise().squaredNorm().maxCoeff();
  if (!(lambda > kRankTolerance * scale))
    throw NumericalError("data not diverse: lambda(X) = " + std::to_string(lambda));
}

Index chernoff_width(const LabeledSet& data, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("chernoff_width: delta must be in (0, 1)");
  const double lambda = lambda_exact(data);
  require_diverse(data, lambda);
  const double norm = spectral_norm(data.xs);
  const double m = static_cast<double>(data.size());
  return std::max<Index>(1, ceil_index(8.0 * norm * norm * std::log(m / delta) / lambda));
}

double sigma_min(const FeatureMatrix& features) {
  if (features.rows() > features.cols()) return 0.0;
  const Vector s = singular_values(features.data);
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

SpectralReport spectral_report(const LabeledSet& data, const GateBank& gates, double delta,
                               Index mc_trials, std::uint64_t mc_seed) {
  SpectralReport r;
  const FeatureMatrix features = build_feature_matrix(data, gates);
  r.sigma_min_xbar = sigma_min(features);
  r.lambda_min_H = min_eigenvalue(gram(features));
  r.lambda_X_exact = lambda_exact(data);
  const McEstimate mc = lambda_mc(data, gates.width(), mc_trials, mc_seed);
  r.lambda_X_mc = mc.estimate;
  r.lambda_X_mc_stderr = mc.std_error;
  r.khatri_rao_bound = khatri_rao_bound(data);
  r.chernoff_k = chernoff_width(data, delta);
  return r;
}

}  // namespace galu
