#pragma once

// Core value types shared by every module.
//
// Layout convention, used everywhere in the library: examples are the ROWS of
// an m x d matrix, while gate banks and first-layer weights are d x k matrices
// whose COLUMNS are the per-neuron vectors u_j / w_j. A collapsed weight vector
// of length d*k stores neuron j in the contiguous block [j*d, (j+1)*d).

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace galu {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;
using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;

/// Training sample: `xs` is m x d (one example per row), `ys` has length m.
struct LabeledSet {
  Matrix xs;
  Vector ys;

  Index size() const { return xs.rows(); }
  Index dim() const { return xs.cols(); }

  /// Throws DimensionError / DomainError when an invariant does not hold.
  /// With `require_unit_rows`, every row norm must be within 1e-9 of one.
  void validate(bool require_unit_rows = false) const;

  /// Rows `[begin, begin + count)` as a new set.
  LabeledSet slice(Index begin, Index count) const;
};

enum class GateSource { gaussian, sphere };

std::string_view to_string(GateSource source);
GateSource gate_source_from_string(std::string_view name);

/// Fixed random gates u_1..u_k stored as the columns of a d x k matrix.
struct GateBank {
  Matrix gates;
  GateSource source = GateSource::gaussian;
  std::uint64_t seed = 0;

  Index dim() const { return gates.rows(); }
  Index width() const { return gates.cols(); }
  auto gate(Index j) const { return gates.col(j); }

  void validate() const;

  /// Columns iid N(0, I_d).
  static GateBank gaussian(Index d, Index k, std::uint64_t seed);
  /// The gaussian draw for the same seed with each column scaled to unit norm.
  static GateBank sphere(Index d, Index k, std::uint64_t seed);
  static GateBank draw(GateSource source, Index d, Index k, std::uint64_t seed);

  /// First `k` gates (nested banks keep rank monotone in k).
  GateBank leading(Index k) const;
};

/// Concatenated first-layer vector w = [w_1; ...; w_k] of the convex problem.
struct WeightStack {
  Vector w;
  Index d = 0;
  Index k = 0;

  WeightStack() = default;
  WeightStack(Vector values, Index dim, Index width);

  auto block(Index j) const { return w.segment(j * d, d); }
  auto block(Index j) { return w.segment(j * d, d); }

  /// View as the d x k matrix [w_1 ... w_k].
  Matrix as_matrix() const;
};

/// Weights of the two-layer network in its natural parameterization.
struct NaturalParams {
  Matrix W;      // d x k, column j is w_j
  Vector alpha;  // length k

  Index dim() const { return W.rows(); }
  Index width() const { return W.cols(); }

  void validate() const;
  void validate_against(const GateBank& gates) const;

  /// v(W, alpha) = [alpha_1 w_1; ...; alpha_k w_k].
  WeightStack collapse() const;

  /// W with iid N(0, 1/d) entries, alpha iid N(0, 1).
  static NaturalParams random(Index d, Index k, std::uint64_t seed);
  /// W taken from `w` block by block, alpha = 1.
  static NaturalParams from_stack(const WeightStack& w);
};

bool all_finite(const Eigen::Ref<const Matrix>& m);

}  // namespace galu
