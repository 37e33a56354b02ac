#include "galu/experiments/checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "galu/datagen.hpp"
#include "galu/error.hpp"
#include "galu/feature_map.hpp"
#include "galu/kernel.hpp"
#include "galu/linalg.hpp"
#include "galu/rng.hpp"
#include "galu/solver.hpp"
#include "galu/spectral.hpp"
#include "galu/trainer.hpp"

namespace galu::experiments {

namespace {

CheckRow at_most(std::string property, double measured, double threshold, std::string detail = {}) {
  return {std::move(property), measured, threshold, measured <= threshold, std::move(detail)};
}

CheckRow at_least(std::string property, double measured, double threshold, std::string detail = {}) {
  return {std::move(property), measured, threshold, measured >= threshold, std::move(detail)};
}

std::uint64_t sub(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return derive_seed(seed, a, b);
}

double binomial_slack(double p, Index n) {
  return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

template <typename... Args>
std::string describe(const Args&... args) {
  std::ostringstream out;
  ((out << args), ...);
  return out.str();
}

}  // namespace

CheckRow check_kappa_special_values() {
  Vector x(3), y(3);
  x << 0.6, 0.8, 0.0;
  double err = std::abs(kappa(x, x) - 0.5);
  err = std::max(err, std::abs(kappa(x, -x)));
  y << -0.8, 0.6, 0.0;
  err = std::max(err, std::abs(kappa(x, y)));
  // Unit y at angle pi/3 from x.
  Vector z = 0.5 * x + std::sqrt(3.0) / 2.0 * y;
  err = std::max(err, std::abs(kappa(x, z) - 1.0 / 6.0));
  return at_most("kappa_special_values", err, 1e-12);
}

CheckRow check_mc_kernel(std::uint64_t seed, Index pairs, Index seeds_per_pair, Index d, Index k,
                         double required) {
  const double tolerance = 3.0 / std::sqrt(static_cast<double>(k));
  Index hits = 0;
  for (Index p = 0; p < pairs; ++p) {
    Rng rng(sub(seed, 1, static_cast<std::uint64_t>(p)));
    const Vector x = rng.unit_vector(d);
    const Vector y = rng.unit_vector(d);
    const double exact = kappa(x, y);
    for (Index s = 0; s < seeds_per_pair; ++s) {
      const double estimate =
          mc_kernel_estimate(x, y, k, sub(seed, 2, static_cast<std::uint64_t>(p * seeds_per_pair + s)));
      hits += std::abs(estimate - exact) <= tolerance;
    }
  }
  const double fraction = static_cast<double>(hits) / static_cast<double>(pairs * seeds_per_pair);
  return at_least("mc_kernel_identity", fraction, required,
                  describe(pairs, " pairs x ", seeds_per_pair, " seeds, k=", k));
}

CheckRow check_gram_concentration(std::uint64_t seed, Index m, Index d, double r, double delta,
                                  Index trials) {
  const LabeledSet data = gen_sphere(m, d, sub(seed, 3));
  const double lambda = lambda_exact(data);
  const Index k = hoeffding_width(data, r, delta);
  const KernelGram h_inf = gram_infinity(data);
  Index inside = 0;
  for (Index t = 0; t < trials; ++t)
    inside += gram_deviation(data.xs, h_inf, k, sub(seed, 4, static_cast<std::uint64_t>(t))) <=
              lambda / r;
  const double fraction = static_cast<double>(inside) / static_cast<double>(trials);
  return at_least("gram_concentration", fraction, 1.0 - delta - binomial_slack(delta, trials),
                  describe("k=", k, ", r=", r));
}

CheckRow check_norm_transfer(std::uint64_t seed, Index m, Index d, double delta, Index trials) {
  LabeledSet data = gen_sphere(m, d, sub(seed, 5));
  Rng rng(sub(seed, 6));
  for (Index i = 0; i < m; ++i) data.ys(i) = rng.coin() ? 1.0 : -1.0;
  const double lambda = lambda_exact(data);
  const Index k = hoeffding_width(data, 2.0, delta);
  const double allowed = data.ys.squaredNorm() / lambda;
  Index exceed = 0;
  double worst = 0.0;
  for (Index t = 0; t < trials; ++t) {
    const NormTransfer nt = norm_transfer_check(data, k, sub(seed, 7, static_cast<std::uint64_t>(t)));
    worst = std::max(worst, nt.gap / allowed);
    exceed += nt.gap > allowed;
  }
  const double fraction = static_cast<double>(exceed) / static_cast<double>(trials);
  return at_most("norm_transfer", fraction, delta + binomial_slack(delta, trials),
                 describe("k=", k, ", worst gap / (|y|^2/lambda) = ", worst));
}

CheckRow check_lemma1(std::uint64_t seed, Index m, Index d, double delta, Index trials) {
  const LabeledSet data = gen_sphere(m, d, sub(seed, 8));
  const double lambda = lambda_exact(data);
  const Index k = chernoff_width(data, delta);
  Index failures = 0;
  for (Index t = 0; t < trials; ++t) {
    const GateBank gates = GateBank::gaussian(d, k, sub(seed, 9, static_cast<std::uint64_t>(t)));
    const double sigma_sq = min_eigenvalue(gram_from_gates(data.xs, gates));
    failures += sigma_sq < 0.5 * static_cast<double>(k) * lambda;
  }
  const double fraction = static_cast<double>(failures) / static_cast<double>(trials);
  return at_most("lemma1_concentration", fraction, delta + binomial_slack(delta, trials),
                 describe("k=", k, ", lambda=", lambda));
}

CheckRow check_theorem3(std::uint64_t seed, Index instances, Index m, Index d, double delta,
                        Index iterations, Index log_every) {
  Index eligible = 0;
  Index violations = 0;
  Index records = 0;
  for (Index i = 0; i < instances; ++i) {
    const LabeledSet data = gen_sphere(m, d, sub(seed, 10, static_cast<std::uint64_t>(i)));
    const Index k = chernoff_width(data, delta);
    const GateBank gates = GateBank::gaussian(d, k, sub(seed, 11, static_cast<std::uint64_t>(i)));
    GdOptions opt;
    opt.iterations = iterations;
    opt.delta = delta;
    opt.log_every = log_every;
    const GdResult res = gd_convex_gram(gram_from_gates(data.xs, gates), data, k, false, opt);
    if (!res.concentration_event || res.rank != m) continue;
    ++eligible;
    for (const TraceRecord& rec : res.trace.records) {
      ++records;
      // Relative slack 1e-9 absorbs rounding in the logged objective.
      if (rec.theorem3_bound && rec.objective > *rec.theorem3_bound * (1.0 + 1e-9)) ++violations;
    }
  }
  CheckRow row = at_most("theorem3_bound", static_cast<double>(violations), 0.0,
                         describe(eligible, "/", instances, " instances on the event, ", records,
                                  " logged iterations"));
  if (eligible == 0) {
    row.passed = false;
    row.detail += "; no eligible instance";
  }
  return row;
}

CheckRow check_theorem4(std::uint64_t seed, Index cases, Index draws, Index required) {
  constexpr Index m = 80;
  constexpr Index d = 6;
  Index agree = 0;
  std::ostringstream detail;
  for (Index c = 0; c < cases; ++c) {
    const LabeledSet data = gen_gaussian(m, d, sub(seed, 12, static_cast<std::uint64_t>(c)));
    const Index k = 1 + c % 10;
    const GateBank gates = GateBank::gaussian(d, k, sub(seed, 13, static_cast<std::uint64_t>(c)));
    const FeatureMatrix features = build_feature_matrix(data, gates);
    const double expected = expected_loss_law(features);
    const LeastSquaresProjector projector(features.data);
    Rng rng(sub(seed, 14, static_cast<std::uint64_t>(c)));
    Vector losses(draws);
    for (Index t = 0; t < draws; ++t)
      losses(t) = projector.residual_sq(rng.normal_vector(m)) / static_cast<double>(m);
    const double mean = losses.mean();
    const double se = std::sqrt((losses.array() - mean).square().sum() /
                                static_cast<double>(draws - 1) / static_cast<double>(draws));
    agree += std::abs(mean - expected) <= 3.0 * se + 1e-12;
    detail << (c ? " " : "") << "r=" << feature_rank(features);
  }
  return at_least("theorem4_law", static_cast<double>(agree), static_cast<double>(required),
                  detail.str());
}

CheckRow check_theorem6(std::uint64_t seed, Index instances, GateRule rule) {
  constexpr Index m = 20;
  constexpr Index d = 5;
  constexpr Index k = 8;
  double worst = 0.0;
  for (Index i = 0; i < instances; ++i) {
    const std::uint64_t s = sub(seed, 15, static_cast<std::uint64_t>(i));
    LabeledSet data = gen_sphere(m, d, derive_seed(s, 0));
    Rng rng(derive_seed(s, 1));
    for (Index j = 0; j < m; ++j) data.ys(j) = rng.coin() ? 1.0 : -1.0;
    const GateBank gates = GateBank::gaussian(d, k, derive_seed(s, 2));
    NaturalParams params = NaturalParams::random(d, k, derive_seed(s, 3));
    // Scale alpha so both networks stay inside [-0.9, 0.9] on the sample.
    const double galu_peak =
        galu_forward_batch(data.xs, params, gates, true).cwiseAbs().maxCoeff();
    const double relu_peak =
        relu_forward_batch(data.xs, gates.gates, params.alpha, true).cwiseAbs().maxCoeff();
    const double peak = std::max(galu_peak, relu_peak);
    if (peak > 0.9) params.alpha *= 0.9 / peak;
    const GradientComparison cmp = hinge_grad_equality(data, gates, params.W, params.alpha, rule);
    worst = std::max(worst, cmp.max_abs_diff);
  }
  return at_most("theorem6_gradient_equality", worst, 1e-12,
                 rule == GateRule::negated ? "negated indicator" : "");
}

CheckRow check_perturbation(std::uint64_t seed, Index d, double epsilon, Index n_probe,
                            Index repeats, Index required) {
  const Index k = perturbation_width(d, epsilon, 0.01);
  Index within = 0;
  double worst = 0.0;
  double bound = 0.0;
  for (Index r = 0; r < repeats; ++r) {
    const GateBank gates = GateBank::gaussian(d, k, sub(seed, 16, static_cast<std::uint64_t>(r)));
    const PerturbationGap gap =
        gate_perturbation_gap(gates, epsilon, n_probe, sub(seed, 17, static_cast<std::uint64_t>(r)));
    within += gap.empirical_sup <= gap.lemma_bound;
    worst = std::max(worst, gap.empirical_sup);
    bound = gap.lemma_bound;
  }
  return at_least("perturbation_lemma", static_cast<double>(within), static_cast<double>(required),
                  describe("k=", k, ", worst sup=", worst, ", bound=", bound));
}

CheckRow check_cluster_mu(std::uint64_t seed, Index n, double delta, Index seeds, Index required) {
  const Index d = cluster_lemma_dimension(n, delta);
  Index good = 0;
  double smallest = 1.0;
  for (Index s = 0; s < seeds; ++s) {
    const ClusterModel model =
        make_cluster_model(n, d, sub(seed, 18, static_cast<std::uint64_t>(s)), delta, 1);
    const double mu = cluster_mu(model.centers);
    smallest = std::min(smallest, mu);
    good += mu >= 0.125;
  }
  return at_least("cluster_mu_lemma", static_cast<double>(good), static_cast<double>(required),
                  describe("d=", d, ", min mu=", smallest));
}

ClusteredOutcome run_clustered(std::uint64_t seed, Index n, Index d, double delta, Index m_train,
                               Index m_test, Index k, std::size_t memory_budget) {
  ClusteredOutcome out;
  out.n = n;
  out.d = d > 0 ? d : cluster_lemma_dimension(n, delta);
  const std::uint64_t model_seed = derive_seed(seed, 0);
  out.mu = cluster_mu(make_cluster_model(n, out.d, model_seed, delta, 1).centers);
  out.threshold_k = cluster_width(n, out.mu, delta);
  out.k = k > 0 ? k : out.threshold_k;

  const ClusterModel model = make_cluster_model(n, out.d, model_seed, delta, out.k);
  const ClusteredSet train = gen_clustered(model, m_train, derive_seed(seed, 1));
  const GateBank gates = GateBank::sphere(out.d, out.k, derive_seed(seed, 2));
  SolveResult fit;
  {
    const FeatureMatrix features = build_feature_matrix(train.data, gates, memory_budget);
    fit = min_norm_solve(features, train.data.ys);
  }
  out.train_mse = fit.train_mse;
  out.rank = fit.rank;

  // Held-out points: positive combinations of one cluster's training points,
  // projected back to the sphere (still in the span of those points).
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(n));
  for (Index i = 0; i < m_train; ++i)
    members[static_cast<std::size_t>(train.cluster[static_cast<std::size_t>(i)])].push_back(i);
  std::vector<Index> populated;
  for (Index q = 0; q < n; ++q)
    if (!members[static_cast<std::size_t>(q)].empty()) populated.push_back(q);
  Rng rng(derive_seed(seed, 3));
  for (Index t = 0; t < m_test && !populated.empty(); ++t) {
    const Index q = populated[static_cast<std::size_t>(t) % populated.size()];
    Vector x = Vector::Zero(out.d);
    for (Index i : members[static_cast<std::size_t>(q)])
      x += (0.1 + rng.uniform()) * train.data.xs.row(i).transpose();
    x.normalize();
    const double label = x.dot(model.directions.row(q).transpose());
    const double prediction = embed_point(x, gates, false).dot(fit.w_star.w);
    out.test_error = std::max(out.test_error, std::abs(prediction - label));
  }
  return out;
}

CheckRow check_clustered(std::uint64_t seed, Index n, Index d, double delta, Index m_train,
                         Index m_test) {
  const ClusteredOutcome o = run_clustered(sub(seed, 19), n, d, delta, m_train, m_test);
  const double measured = std::max(o.train_mse / 1e-8, o.test_error / 1e-6);
  return at_most("clustered_memorization", measured, 1.0,
                 describe("k=", o.k, ", mu=", o.mu, ", train mse=", o.train_mse,
                          ", in-span test error=", o.test_error));
}

CheckRow check_khatri_rao(std::uint64_t seed, Index samples, Index m, Index d) {
  double worst = -1e300;
  for (Index s = 0; s < samples; ++s) {
    const LabeledSet data = gen_sphere(m, d, sub(seed, 20, static_cast<std::uint64_t>(s)));
    worst = std::max(worst, khatri_rao_bound(data) - lambda_exact(data));
  }
  return at_most("khatri_rao_lower_bound", worst, 1e-6);
}

CheckRow check_sigma_vs_eigen(std::uint64_t seed, Index samples) {
  double worst = 0.0;
  for (Index s = 0; s < samples; ++s) {
    const LabeledSet data = gen_gaussian(12, 4, sub(seed, 21, static_cast<std::uint64_t>(s)));
    const GateBank gates = GateBank::gaussian(4, 6, sub(seed, 22, static_cast<std::uint64_t>(s)));
    const FeatureMatrix features = build_feature_matrix(data, gates);
    const double sigma = sigma_min(features);
    const Vector eig = symmetric_eigenvalues(gram(features));
    // Rank-deficient samples (an example with every gate closed) have both
    // values at rounding level; compare against the tolerance floor then.
    const double scale = std::max(std::abs(eig(0)), kRankTolerance * eig(eig.size() - 1));
    worst = std::max(worst, std::abs(sigma * sigma - eig(0)) / scale);
  }
  return at_most("sigma_min_vs_gram_eigenvalue", worst, 1e-6);
}

std::vector<CheckRow> kernel_suite(std::uint64_t seed) {
  return {check_kappa_special_values(), check_mc_kernel(seed), check_gram_concentration(seed),
          check_norm_transfer(seed)};
}

std::vector<CheckRow> theory_suite(std::uint64_t seed, bool negate_indicator) {
  return {check_lemma1(seed),
          check_theorem3(seed),
          check_theorem4(seed),
          check_theorem6(seed, 100, negate_indicator ? GateRule::negated : GateRule::standard),
          check_perturbation(seed),
          check_cluster_mu(seed),
          check_clustered(seed),
          check_khatri_rao(seed),
          check_sigma_vs_eigen(seed)};
}

}  // namespace galu::experiments
