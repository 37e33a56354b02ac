#pragma once

// Property suites. Each check runs one numerical claim at a configurable size
// and reports the measured statistic next to its pass threshold. Defaults are
// the acceptance sizes.

#include <cstdint>
#include <vector>

#include "galu/experiments/results.hpp"
#include "galu/feature_map.hpp"
#include "galu/model.hpp"
#include "galu/types.hpp"

namespace galu::experiments {

/// kappa at the angles 0, pi, pi/2 and pi/3: max error against 1/2, 0, 0, 1/6.
CheckRow check_kappa_special_values();

/// Fraction of (pair, seed) combinations with |mc_kernel_estimate - kappa| <= 3/sqrt(k).
CheckRow check_mc_kernel(std::uint64_t seed, Index pairs = 50, Index seeds_per_pair = 10,
                         Index d = 10, Index k = 1000, double required = 0.98);

/// Fraction of gate draws with ||(1/k) Xbar Xbar^T - H_inf|| <= lambda / r at the
/// Hoeffding width, against 1 - delta minus binomial slack.
CheckRow check_gram_concentration(std::uint64_t seed, Index m = 6, Index d = 10, double r = 4.0,
                                  double delta = 0.1, Index trials = 200);

/// Max over trials of |y^T H^{-1} y - y^T H_inf^{-1} y| / (||y||^2 / lambda) at
/// the r = 2 Hoeffding width; passes when at most a delta-fraction exceed 1.
CheckRow check_norm_transfer(std::uint64_t seed, Index m = 6, Index d = 10, double delta = 0.1,
                             Index trials = 20);

/// Fraction of gate draws with sigma_min^2(Xbar) < (k/2) lambda(X) at the
/// Chernoff width, against delta + 3 sqrt(delta (1 - delta) / trials).
CheckRow check_lemma1(std::uint64_t seed, Index m = 50, Index d = 25, double delta = 0.1,
                      Index trials = 200);

/// Bound violations of gradient descent over instances on which the
/// concentration event holds (fails when no instance is eligible).
CheckRow check_theorem3(std::uint64_t seed, Index instances = 20, Index m = 200, Index d = 20,
                        double delta = 0.1, Index iterations = 2000, Index log_every = 10);

/// Number of feature matrices (of varied rank) whose Monte Carlo mean minimum
/// loss lies within 3 standard errors of 1 - rank/m.
CheckRow check_theorem4(std::uint64_t seed, Index cases = 10, Index draws = 200,
                        Index required = 9);

/// Max over random admissible instances of the hinge-gradient discrepancy.
CheckRow check_theorem6(std::uint64_t seed, Index instances = 100,
                        GateRule rule = GateRule::standard);

/// Number of repeats with empirical_sup <= lemma bound at the lemma width.
CheckRow check_perturbation(std::uint64_t seed, Index d = 50, double epsilon = 0.05,
                            Index n_probe = 1000, Index repeats = 100, Index required = 99);

/// Number of seeds with mu >= 1/8 at the lemma dimension.
CheckRow check_cluster_mu(std::uint64_t seed, Index n = 10, double delta = 0.01, Index seeds = 100,
                          Index required = 99);

struct ClusteredOutcome {
  Index n = 0;
  Index d = 0;
  Index k = 0;
  Index threshold_k = 0;
  double mu = 0.0;
  double train_mse = 0.0;
  double test_error = 0.0;  // max |prediction - label| on in-span held-out points
  Index rank = 0;
};

/// Clustered memorization: draws the cluster model, fits the minimum-norm
/// GaLU interpolant with sphere gates and evaluates held-out points built as
/// normalized combinations of the training points of one cluster.
/// k = 0 selects the threshold width (8n/mu) log(n/delta); d = 0 the lemma dimension.
ClusteredOutcome run_clustered(std::uint64_t seed, Index n, Index d, double delta, Index m_train,
                               Index m_test, Index k = 0,
                               std::size_t memory_budget = kDefaultMemoryBudget);

/// Max of train mse / 1e-8 and test error / 1e-6 for the clustered run.
CheckRow check_clustered(std::uint64_t seed, Index n = 10, Index d = 0, double delta = 0.01,
                         Index m_train = 40, Index m_test = 10);

/// Khatri-Rao bound minus lambda(X) (max over random unit-row samples).
CheckRow check_khatri_rao(std::uint64_t seed, Index samples = 20, Index m = 6, Index d = 4);

/// |sigma_min^2 - lambda_min(H)| / lambda_min(H), max over random feature matrices.
CheckRow check_sigma_vs_eigen(std::uint64_t seed, Index samples = 10);

std::vector<CheckRow> kernel_suite(std::uint64_t seed);
std::vector<CheckRow> theory_suite(std::uint64_t seed, bool negate_indicator);

}  // namespace galu::experiments
