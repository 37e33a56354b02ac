#pragma once

// Seeded synthetic data. Every generator is a pure function of its arguments.

#include <cstdint>
#include <vector>

#include "galu/types.hpp"

namespace galu {

/// Rows iid N(0, I_d), labels iid N(0, 1).
LabeledSet gen_gaussian(Index m, Index d, std::uint64_t seed);
/// gen_gaussian with every row scaled to unit norm (same labels).
LabeledSet gen_sphere(Index m, Index d, std::uint64_t seed);

enum class MarginKind {
  absolute,  // |<w, x>| >= margin
  cosine,    // |<w, x>| / ||x|| >= margin
};

/// The unit separator used by gen_linear_margin for (d, seed).
Vector linear_margin_separator(Index d, std::uint64_t seed);

/// Gaussian examples kept only when they clear `margin` against a uniform unit
/// separator w; labels sign(<w, x>) with sign(0) = +1. Throws DomainError when
/// the acceptance rate falls below 1e-4.
LabeledSet gen_linear_margin(Index m, Index d, double margin, std::uint64_t seed,
                             MarginKind kind = MarginKind::absolute);

/// Entries uniform in {-1, +1}; label is the product of the coordinates.
LabeledSet gen_parity(Index m, Index d, std::uint64_t seed);

/// n sphere caps with linear labels y = x.l_q inside cap q.
struct ClusterModel {
  Matrix centers;     // n x d, unit rows
  Matrix directions;  // n x d
  double radius = 0.0;
  Vector mixing;      // length n, sums to 1

  Index clusters() const { return centers.rows(); }
  Index dim() const { return centers.cols(); }
  void validate() const;
};

struct ClusteredSet {
  LabeledSet data;
  std::vector<Index> cluster;  // cluster of each row
};

/// Per example: q ~ mixing, then x on the sphere within Euclidean distance
/// 0.99 r of v_q (angle uniform on the cap's geodesic radius, direction uniform
/// orthogonal to v_q), y = x.l_q. Throws DomainError when r >= 2.
ClusteredSet gen_clustered(const ClusterModel& model, Index m, std::uint64_t seed);

/// Centers uniform in {+-1/sqrt(d)}^d, directions iid N(0, I_d), uniform mixing,
/// radius delta / (n k sqrt(d)). The centers and directions do not depend on k.
ClusterModel make_cluster_model(Index n, Index d, std::uint64_t seed, double delta, Index k);

/// Minimum eigenvalue of H_ij = 1/2 - arccos(v_i.v_j) / (2 pi). Rows must be unit.
double cluster_mu(const MatrixRef& centers);

/// ceil((n^2 / 2) log(2 n^2 / delta)), the dimension that makes mu >= 1/8 likely.
Index cluster_lemma_dimension(Index n, double delta);

/// ceil((8 n / mu) log(n / delta)), the gate count for clustered memorization.
Index cluster_width(Index n, double mu, double delta);

}  // namespace galu
