#include "galu/types.hpp"

#include <cmath>

#include "galu/error.hpp"
#include "galu/rng.hpp"

namespace galu {

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

void LabeledSet::validate(bool require_unit_rows) const {
  if (xs.rows() < 1 || xs.cols() < 1) throw DimensionError("LabeledSet: need m >= 1 and d >= 1");
  if (ys.size() != xs.rows())
    throw DimensionError("LabeledSet: " + std::to_string(xs.rows()) + " examples but " +
                         std::to_string(ys.size()) + " labels");
  if (!xs.allFinite() || !ys.allFinite()) throw DomainError("LabeledSet: non-finite entry");
  if (require_unit_rows) {
    for (Index i = 0; i < xs.rows(); ++i) {
      if (std::abs(xs.row(i).norm() - 1.0) > 1e-9)
        throw DomainError("LabeledSet: row " + std::to_string(i) + " is not unit norm");
    }
  }
}

LabeledSet LabeledSet::slice(Index begin, Index count) const {
  if (begin < 0 || count < 0 || begin + count > size())
    throw DimensionError("LabeledSet::slice: range out of bounds");
  return {xs.middleRows(begin, count), ys.segment(begin, count)};
}

std::string_view to_string(GateSource source) {
  return source == GateSource::gaussian ? "gaussian" : "sphere";
}

GateSource gate_source_from_string(std::string_view name) {
  if (name == "gaussian") return GateSource::gaussian;
  if (name == "sphere") return GateSource::sphere;
  throw DomainError("unknown gate source '" + std::string(name) + "'");
}

void GateBank::validate() const {
  if (gates.rows() < 1 || gates.cols() < 1) throw DimensionError("GateBank: need d >= 1 and k >= 1");
  if (!gates.allFinite()) throw DomainError("GateBank: non-finite gate entry");
  if (source == GateSource::sphere) {
    for (Index j = 0; j < gates.cols(); ++j) {
      if (std::abs(gates.col(j).norm() - 1.0) > 1e-9)
        throw DomainError("GateBank: sphere gate " + std::to_string(j) + " is not unit norm");
    }
  }
}

GateBank GateBank::gaussian(Index d, Index k, std::uint64_t seed) {
  if (d < 1 || k < 1) throw DimensionError("GateBank: need d >= 1 and k >= 1");
  Rng rng(seed);
  return {rng.normal_matrix(d, k), GateSource::gaussian, seed};
}

GateBank GateBank::sphere(Index d, Index k, std::uint64_t seed) {
  GateBank bank = gaussian(d, k, seed);
  for (Index j = 0; j < k; ++j) {
    const double norm = bank.gates.col(j).norm();
    // A zero gaussian column has probability zero; fall back to e_1.
    if (norm > 0.0) {
      bank.gates.col(j) /= norm;
    } else {
      bank.gates.col(j).setZero();
      bank.gates(0, j) = 1.0;
    }
  }
  bank.source = GateSource::sphere;
  return bank;
}

GateBank GateBank::draw(GateSource source, Index d, Index k, std::uint64_t seed) {
  return source == GateSource::gaussian ? gaussian(d, k, seed) : sphere(d, k, seed);
}

GateBank GateBank::leading(Index k) const {
  if (k < 1 || k > width()) throw DimensionError("GateBank::leading: k out of range");
  return {gates.leftCols(k), source, seed};
}

WeightStack::WeightStack(Vector values, Index dim, Index width)
    : w(std::move(values)), d(dim), k(width) {
  if (w.size() != d * k)
    throw DimensionError("WeightStack: length " + std::to_string(w.size()) + " != d*k = " +
                         std::to_string(d * k));
}

Matrix WeightStack::as_matrix() const { return Eigen::Map<const Matrix>(w.data(), d, k); }

void NaturalParams::validate() const {
  if (W.rows() < 1 || W.cols() < 1) throw DimensionError("NaturalParams: empty W");
  if (alpha.size() != W.cols()) throw DimensionError("NaturalParams: alpha length != k");
  if (!W.allFinite() || !alpha.allFinite()) throw DomainError("NaturalParams: non-finite entry");
}

void NaturalParams::validate_against(const GateBank& gates) const {
  validate();
  if (W.rows() != gates.dim() || W.cols() != gates.width())
    throw DimensionError("NaturalParams: W is " + std::to_string(W.rows()) + "x" +
                         std::to_string(W.cols()) + " but gates are " +
                         std::to_string(gates.dim()) + "x" + std::to_string(gates.width()));
}

WeightStack NaturalParams::collapse() const {
  Matrix scaled = W * alpha.asDiagonal();
  return {Eigen::Map<const Vector>(scaled.data(), scaled.size()), W.rows(), W.cols()};
}

NaturalParams NaturalParams::random(Index d, Index k, std::uint64_t seed) {
  Rng rng(seed);
  NaturalParams p;
  p.W = rng.normal_matrix(d, k) / std::sqrt(static_cast<double>(d));
  p.alpha = rng.normal_vector(k);
  return p;
}

NaturalParams NaturalParams::from_stack(const WeightStack& w) {
  return {w.as_matrix(), Vector::Ones(w.k)};
}

}  // namespace galu
