#pragma once

// Spectral quantities of a sample and of its feature matrix:
//
//   lambda(X)        min eigenvalue of (1/k) E[Xbar Xbar^T] = H_inf
//   sigma_min(Xbar)  smallest singular value of the feature matrix
//   Khatri-Rao bound lambda(X) >= sigma_min^2(X * X) / (2 pi)  (unit rows)
//   Chernoff width   k with sigma_min^2(Xbar) >= (k/2) lambda(X) w.p. 1 - delta

#include <cstdint>

#include "galu/feature_map.hpp"
#include "galu/types.hpp"

namespace galu {

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

struct SpectralReport {
  double sigma_min_xbar = 0.0;
  double lambda_min_H = 0.0;
  double lambda_X_exact = 0.0;
  double lambda_X_mc = 0.0;
  double lambda_X_mc_stderr = 0.0;
  double khatri_rao_bound = 0.0;
  Index chernoff_k = 0;
};

/// lambda(X) through the closed-form kernel Gram.
double lambda_exact(const LabeledSet& data);
double lambda_exact(const MatrixRef& xs);

/// Minimum eigenvalue of (1/k) Xbar Xbar^T averaged over `trials` gaussian gate
/// banks, with a jackknife standard error. Trial t uses derive_seed(seed, t).
McEstimate lambda_mc(const LabeledSet& data, Index k, Index trials, std::uint64_t seed);

/// sigma_min^2 of the m x d^2 Khatri-Rao matrix, divided by 2 pi. Zero when m > d^2.
double khatri_rao_bound(const LabeledSet& data);

/// ceil(8 ||X||^2 log(m / delta) / lambda(X)). Throws NumericalError when the
/// data is not diverse (lambda(X) numerically zero).
Index chernoff_width(const LabeledSet& data, double delta);

/// Smallest singular value of Xbar; zero when m > d k.
double sigma_min(const FeatureMatrix& features);

/// Throws NumericalError("data not diverse") when `lambda` is at or below
/// kRankTolerance times the largest diagonal entry of H_inf.
void require_diverse(const LabeledSet& data, double lambda);

/// Every field of SpectralReport for one gate bank.
SpectralReport spectral_report(const LabeledSet& data, const GateBank& gates, double delta,
                               Index mc_trials, std::uint64_t mc_seed);

}  // namespace galu
