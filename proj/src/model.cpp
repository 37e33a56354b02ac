#include "galu/model.hpp"

#include <cmath>
#include <string>

#include "galu/error.hpp"

namespace galu {

namespace {

void require_same_dim(Index a, Index b, const char* what) {
  if (a != b)
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
}

}  // namespace

double output_scale(Index k, bool normalized) {
  return normalized ? 1.0 / std::sqrt(static_cast<double>(k)) : 1.0;
}

double galu_neuron(const VectorRef& x, const VectorRef& w, const VectorRef& u) {
  require_same_dim(x.size(), w.size(), "galu_neuron");
  require_same_dim(x.size(), u.size(), "galu_neuron");
  return gate_open(u.dot(x)) ? x.dot(w) : 0.0;
}

double galu_forward(const VectorRef& x, const NaturalParams& params, const GateBank& gates,
                    bool normalized) {
  params.validate_against(gates);
  require_same_dim(x.size(), gates.dim(), "galu_forward");
  double sum = 0.0;
  for (Index j = 0; j < gates.width(); ++j)
    sum += params.alpha(j) * galu_neuron(x, params.W.col(j), gates.gate(j));
  return output_scale(gates.width(), normalized) * sum;
}

double relu_forward(const VectorRef& x, const GateBank& gates_as_weights, const VectorRef& alpha,
                    bool normalized) {
  const Matrix& U = gates_as_weights.gates;
  require_same_dim(x.size(), U.rows(), "relu_forward");
  require_same_dim(alpha.size(), U.cols(), "relu_forward");
  double sum = 0.0;
  for (Index j = 0; j < U.cols(); ++j) {
    // max(t, 0) written as 1[t >= 0] * t so it shares the gate convention.
    if (gate_open(U.col(j).dot(x))) sum += alpha(j) * x.dot(U.col(j));
  }
  return output_scale(U.cols(), normalized) * sum;
}

Vector galu_forward_batch(const MatrixRef& xs, const NaturalParams& params, const GateBank& gates,
                          bool normalized) {
  params.validate_against(gates);
  require_same_dim(xs.cols(), gates.dim(), "galu_forward_batch");
  const Matrix pre = xs * gates.gates;
  const Matrix lin = xs * params.W;
  Vector out(xs.rows());
  const double scale = output_scale(gates.width(), normalized);
  for (Index i = 0; i < xs.rows(); ++i) {
    double sum = 0.0;
    for (Index j = 0; j < gates.width(); ++j)
      if (gate_open(pre(i, j))) sum += params.alpha(j) * lin(i, j);
    out(i) = scale * sum;
  }
  return out;
}

Vector relu_forward_batch(const MatrixRef& xs, const MatrixRef& weights, const VectorRef& alpha,
                          bool normalized) {
  require_same_dim(xs.cols(), weights.rows(), "relu_forward_batch");
  require_same_dim(alpha.size(), weights.cols(), "relu_forward_batch");
  const Matrix pre = xs * weights;
  Vector out(xs.rows());
  const double scale = output_scale(weights.cols(), normalized);
  for (Index i = 0; i < xs.rows(); ++i) {
    double sum = 0.0;
    for (Index j = 0; j < weights.cols(); ++j)
      if (gate_open(pre(i, j))) sum += alpha(j) * pre(i, j);
    out(i) = scale * sum;
  }
  return out;
}

}  // namespace galu
