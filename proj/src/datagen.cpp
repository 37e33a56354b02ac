#include "galu/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "galu/error.hpp"
#include "galu/linalg.hpp"
#include "galu/rng.hpp"

namespace galu {

namespace {

void require_shape(Index m, Index d, const char* what) {
  if (m < 1 || d < 1) throw DimensionError(std::string(what) + ": need m >= 1 and d >= 1");
}

// Examples and labels come from separate streams so that the first rows of a
// larger sample coincide with a smaller sample of the same seed.
Matrix gaussian_rows(Index m, Index d, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  Matrix xs(m, d);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < d; ++j) xs(i, j) = rng.normal();
  return xs;
}

Vector gaussian_labels(Index m, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 1));
  return rng.normal_vector(m);
}

}  // namespace

LabeledSet gen_gaussian(Index m, Index d, std::uint64_t seed) {
  require_shape(m, d, "gen_gaussian");
  return {gaussian_rows(m, d, seed), gaussian_labels(m, seed)};
}

LabeledSet gen_sphere(Index m, Index d, std::uint64_t seed) {
  require_shape(m, d, "gen_sphere");
  LabeledSet out = gen_gaussian(m, d, seed);
  for (Index i = 0; i < m; ++i) {
    const double norm = out.xs.row(i).norm();
    if (norm > 0.0) {
      out.xs.row(i) /= norm;
    } else {
      out.xs.row(i).setZero();
      out.xs(i, 0) = 1.0;
    }
  }
  return out;
}

Vector linear_margin_separator(Index d, std::uint64_t seed) {
  if (d < 1) throw DimensionError("linear_margin_separator: need d >= 1");
  return Rng(derive_seed(seed, 0)).unit_vector(d);
}

LabeledSet gen_linear_margin(Index m, Index d, double margin, std::uint64_t seed, MarginKind kind) {
  require_shape(m, d, "gen_linear_margin");
  if (!(margin >= 0.0) || !std::isfinite(margin))
    throw DomainError("gen_linear_margin: margin must be finite and non-negative");
  const Vector w = linear_margin_separator(d, seed);
  Rng rng(derive_seed(seed, 1));
  LabeledSet out{Matrix(m, d), Vector(m)};
  Vector x(d);
  long long attempts = 0;
  Index accepted = 0;
  while (accepted < m) {
    for (Index j = 0; j < d; ++j) x(j) = rng.normal();
    ++attempts;
    const double inner = w.dot(x);
    const double score = kind == MarginKind::absolute ? std::abs(inner)
                                                      : std::abs(inner) / x.norm();
    if (score >= margin) {
      out.xs.row(accepted) = x.transpose();
      out.ys(accepted) = inner >= 0.0 ? 1.0 : -1.0;
      ++accepted;
    }
    if (attempts >= 100000 &&
        static_cast<double>(accepted) < 1e-4 * static_cast<double>(attempts))
      throw DomainError("gen_linear_margin: acceptance rate below 1e-4; margin too large");
  }
  return out;
}

LabeledSet gen_parity(Index m, Index d, std::uint64_t seed) {
  require_shape(m, d, "gen_parity");
  Rng rng(seed);
  LabeledSet out{Matrix(m, d), Vector(m)};
  for (Index i = 0; i < m; ++i) {
    double label = 1.0;
    for (Index j = 0; j < d; ++j) {
      const double v = rng.coin() ? 1.0 : -1.0;
      out.xs(i, j) = v;
      label *= v;
    }
    out.ys(i) = label;
  }
  return out;
}

void ClusterModel::validate() const {
  const Index n = centers.rows();
  if (n < 1 || centers.cols() < 1) throw DimensionError("ClusterModel: need n >= 1 and d >= 1");
  if (directions.rows() != n || directions.cols() != centers.cols())
    throw DimensionError("ClusterModel: directions must be n x d");
  if (mixing.size() != n) throw DimensionError("ClusterModel: mixing must have length n");
  if (!centers.allFinite() || !directions.allFinite() || !mixing.allFinite())
    throw DomainError("ClusterModel: non-finite entry");
  for (Index i = 0; i < n; ++i)
    if (std::abs(centers.row(i).norm() - 1.0) > 1e-9)
      throw DomainError("ClusterModel: center " + std::to_string(i) + " is not unit norm");
  if (!(radius > 0.0)) throw DomainError("ClusterModel: radius must be positive");
  if ((mixing.array() < 0.0).any() || std::abs(mixing.sum() - 1.0) > 1e-12)
    throw DomainError("ClusterModel: mixing must be a probability vector");
}

ClusteredSet gen_clustered(const ClusterModel& model, Index m, std::uint64_t seed) {
  model.validate();
  if (m < 1) throw DimensionError("gen_clustered: need m >= 1");
  if (model.radius >= 2.0) throw DomainError("gen_clustered: radius must be below 2");
  const Index n = model.clusters();
  const Index d = model.dim();
  // Chord 0.99 r corresponds to the geodesic angle 2 asin(0.99 r / 2).
  const double max_angle = 2.0 * std::asin(0.99 * model.radius / 2.0);

  Vector cumulative(n);
  std::partial_sum(model.mixing.data(), model.mixing.data() + n, cumulative.data());
  Rng rng(seed);
  ClusteredSet out{{Matrix(m, d), Vector(m)}, std::vector<Index>(static_cast<std::size_t>(m))};
  for (Index i = 0; i < m; ++i) {
    const double u = rng.uniform();
    Index q = 0;
    while (q < n - 1 && u >= cumulative(q)) ++q;
    const Vector v = model.centers.row(q).transpose();

    Vector t = rng.normal_vector(d);
    t -= v.dot(t) * v;
    const double t_norm = t.norm();
    const double angle = max_angle * rng.uniform();
    Vector x = v;
    if (t_norm > 0.0 && d > 1) x = std::cos(angle) * v + std::sin(angle) * (t / t_norm);

    out.data.xs.row(i) = x.transpose();
    out.data.ys(i) = x.dot(model.directions.row(q).transpose());
    out.cluster[static_cast<std::size_t>(i)] = q;
  }
  return out;
}

ClusterModel make_cluster_model(Index n, Index d, std::uint64_t seed, double delta, Index k) {
  if (n < 1 || d < 1 || k < 1) throw DomainError("make_cluster_model: n, d, k must be positive");
  if (!(delta > 0.0)) throw DomainError("make_cluster_model: delta must be positive");
  Rng rng(seed);
  const double entry = 1.0 / std::sqrt(static_cast<double>(d));
  ClusterModel model;
  model.centers.resize(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) model.centers(i, j) = rng.coin() ? entry : -entry;
  // Rows of identical-magnitude entries: rescale so the norm is 1 to rounding.
  model.centers.rowwise().normalize();
  model.directions = rng.normal_matrix(n, d);
  model.mixing = Vector::Constant(n, 1.0 / static_cast<double>(n));
  model.radius = delta / (static_cast<double>(n) * static_cast<double>(k) *
                          std::sqrt(static_cast<double>(d)));
  return model;
}

double cluster_mu(const MatrixRef& centers) {
  const Index n = centers.rows();
  if (n < 1) throw DimensionError("cluster_mu: need at least one center");
  for (Index i = 0; i < n; ++i)
    if (std::abs(centers.row(i).norm() - 1.0) > 1e-9)
      throw DomainError("cluster_mu: center " + std::to_string(i) + " is not unit norm");
  Matrix h(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      const double angle = 2.0 * std::atan2((centers.row(i) - centers.row(j)).norm(),
                                            (centers.row(i) + centers.row(j)).norm());
      h(i, j) = h(j, i) = 0.5 - angle / (2.0 * std::numbers::pi);
    }
  }
  return min_eigenvalue(h);
}

Index cluster_lemma_dimension(Index n, double delta) {
  if (n < 1 || !(delta > 0.0 && delta < 1.0))
    throw DomainError("cluster_lemma_dimension: need n >= 1, delta in (0, 1)");
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return ceil_index(nn / 2.0 * std::log(2.0 * nn / delta));
}

Index cluster_width(Index n, double mu, double delta) {
  if (n < 1 || !(mu > 0.0) || !(delta > 0.0 && delta < 1.0))
    throw DomainError("cluster_width: need n >= 1, mu > 0, delta in (0, 1)");
  const double nd = static_cast<double>(n);
  return std::max<Index>(1, ceil_index(8.0 * nd / mu * std::log(nd / delta)));
}

}  // namespace galu
