#pragma once

// Forward evaluation of single-hidden-layer GaLU and ReLU networks.
//
//   GaLU neuron   g_{w,u}(x) = 1[u.x >= 0] * (x.w)
//   GaLU network  N(x) = s * sum_j alpha_j g_{w_j,u_j}(x)
//   ReLU network  N(x) = s * sum_j alpha_j max(u_j.x, 0)
//
// with s = 1/sqrt(k) for the normalized variants and s = 1 otherwise. Sums run
// over ascending neuron index in double precision.

#include "galu/types.hpp"

namespace galu {

/// Which side of the hyperplane counts as open. `negated` exists only as a
/// mutation canary for the property suite and is never used by default.
enum class GateRule { standard, negated };

/// The gate indicator 1[t >= 0]; open at t == 0.
constexpr bool gate_open(double preactivation, GateRule rule = GateRule::standard) noexcept {
  return rule == GateRule::standard ? preactivation >= 0.0 : preactivation < 0.0;
}

double galu_neuron(const VectorRef& x, const VectorRef& w, const VectorRef& u);

double galu_forward(const VectorRef& x, const NaturalParams& params, const GateBank& gates,
                    bool normalized);

/// ReLU network whose first-layer weights are the columns of `gates_as_weights`.
double relu_forward(const VectorRef& x, const GateBank& gates_as_weights, const VectorRef& alpha,
                    bool normalized);

/// Output scale 1/sqrt(k) or 1.
double output_scale(Index k, bool normalized);

/// Forward pass over every row of `xs`.
Vector galu_forward_batch(const MatrixRef& xs, const NaturalParams& params, const GateBank& gates,
                          bool normalized);
Vector relu_forward_batch(const MatrixRef& xs, const MatrixRef& weights, const VectorRef& alpha,
                          bool normalized);

}  // namespace galu
