#pragma once

// The random embedding Phi_U and the block feature matrix Xbar.
//
// Row i of Xbar is Phi_U(x_i) = [1[u_1.x_i >= 0] x_i, ..., 1[u_k.x_i >= 0] x_i],
// so a GaLU network with fixed gates is the linear model x -> Phi_U(x).w and
// training it under squared loss is least squares against Xbar.

#include <cstddef>

#include "galu/types.hpp"

namespace galu {

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{4} << 30;  // 4 GiB

/// Dense m x (d*k) feature matrix. Column block j (width d) belongs to gate j.
struct FeatureMatrix {
  Matrix data;
  Index d = 0;
  Index k = 0;
  bool normalized = false;  // true when every entry carries the 1/sqrt(k) factor

  Index rows() const { return data.rows(); }
  Index cols() const { return data.cols(); }
  auto block(Index j) const { return data.middleCols(j * d, d); }

  /// Same matrix scaled by 1/sqrt(k) (no-op when already normalized).
  FeatureMatrix normalized_copy() const;
};

/// Phi_U(x), scaled by 1/sqrt(k) when `normalized`.
Vector embed_point(const VectorRef& x, const GateBank& gates, bool normalized);

/// m x k matrix of gate indicators 1[u_j.x_i >= 0] as 0/1 doubles.
Matrix gate_pattern(const MatrixRef& xs, const GateBank& gates);

/// Unnormalized Xbar. Throws CapacityError when m*d*k doubles exceed `memory_budget` bytes.
FeatureMatrix build_feature_matrix(const LabeledSet& data, const GateBank& gates,
                                   std::size_t memory_budget = kDefaultMemoryBudget);
FeatureMatrix build_feature_matrix(const MatrixRef& xs, const GateBank& gates,
                                   std::size_t memory_budget = kDefaultMemoryBudget);

/// Bytes needed for an m x (d*k) double matrix.
std::size_t feature_matrix_bytes(Index m, Index d, Index k);

enum class GramScale { raw, one_over_k };

/// Xbar Xbar^T, divided by k under `one_over_k`.
Matrix gram(const FeatureMatrix& features, GramScale scale = GramScale::raw);

/// The same Gram computed as (X X^T) o (S S^T) with S the gate pattern, without
/// materializing Xbar. Cost is O(m^2 (d + k)).
Matrix gram_from_gates(const MatrixRef& xs, const GateBank& gates,
                       GramScale scale = GramScale::raw);

}  // namespace galu
