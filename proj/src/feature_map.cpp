#include "galu/feature_map.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "galu/error.hpp"
#include "galu/model.hpp"

namespace galu {

FeatureMatrix FeatureMatrix::normalized_copy() const {
  if (normalized) return *this;
  FeatureMatrix out{data / std::sqrt(static_cast<double>(k)), d, k, true};
  return out;
}

Vector embed_point(const VectorRef& x, const GateBank& gates, bool normalized) {
  if (x.size() != gates.dim())
    throw DimensionError("embed_point: x has dimension " + std::to_string(x.size()) +
                         ", gates have " + std::to_string(gates.dim()));
  const Index d = gates.dim();
  const Index k = gates.width();
  const double scale = output_scale(k, normalized);
  Vector out = Vector::Zero(d * k);
  for (Index j = 0; j < k; ++j)
    if (gate_open(gates.gate(j).dot(x))) out.segment(j * d, d) = scale * x;
  return out;
}

Matrix gate_pattern(const MatrixRef& xs, const GateBank& gates) {
  if (xs.cols() != gates.dim()) throw DimensionError("gate_pattern: dimension mismatch");
  const Matrix pre = xs * gates.gates;
  return pre.unaryExpr([](double t) { return gate_open(t) ? 1.0 : 0.0; });
}

std::size_t feature_matrix_bytes(Index m, Index d, Index k) {
  const long double bytes = static_cast<long double>(m) * static_cast<long double>(d) *
                            static_cast<long double>(k) * sizeof(double);
  if (bytes > static_cast<long double>(std::numeric_limits<std::size_t>::max()))
    return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(bytes);
}

FeatureMatrix build_feature_matrix(const MatrixRef& xs, const GateBank& gates,
                                   std::size_t memory_budget) {
  if (xs.cols() != gates.dim())
    throw DimensionError("build_feature_matrix: examples have dimension " +
                         std::to_string(xs.cols()) + ", gates have " +
                         std::to_string(gates.dim()));
  const Index m = xs.rows();
  const Index d = gates.dim();
  const Index k = gates.width();
  const std::size_t bytes = feature_matrix_bytes(m, d, k);
  if (bytes > memory_budget)
    throw CapacityError("feature matrix " + std::to_string(m) + " x " + std::to_string(d * k) +
                        " needs " + std::to_string(bytes >> 20) + " MiB, budget is " +
                        std::to_string(memory_budget >> 20) + " MiB");

  const Matrix open = gate_pattern(xs, gates);
  FeatureMatrix out{Matrix(m, d * k), d, k, false};
  for (Index j = 0; j < k; ++j) out.data.middleCols(j * d, d) = open.col(j).asDiagonal() * xs;
  return out;
}

FeatureMatrix build_feature_matrix(const LabeledSet& data, const GateBank& gates,
                                   std::size_t memory_budget) {
  return build_feature_matrix(data.xs, gates, memory_budget);
}

Matrix gram(const FeatureMatrix& features, GramScale scale) {
  const Index m = features.rows();
  Matrix h = Matrix::Zero(m, m);
  h.selfadjointView<Eigen::Lower>().rankUpdate(features.data);
  h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
  if (scale == GramScale::one_over_k) h /= static_cast<double>(features.k);
  return h;
}

Matrix gram_from_gates(const MatrixRef& xs, const GateBank& gates, GramScale scale) {
  const Matrix s = gate_pattern(xs, gates);
  Matrix h = (xs * xs.transpose()).cwiseProduct(s * s.transpose());
  if (scale == GramScale::one_over_k) h /= static_cast<double>(gates.width());
  return h;
}

}  // namespace galu
