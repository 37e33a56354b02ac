#include <cmath>

#include <gtest/gtest.h>

#include "galu/error.hpp"
#include "galu/feature_map.hpp"
#include "galu/model.hpp"
#include "galu/rng.hpp"

using namespace galu;

namespace {

Vector unit(Index d, Index i) { return Vector::Unit(d, i); }

GateBank bank_of(Matrix gates) { return {std::move(gates), GateSource::gaussian, 0}; }

}  // namespace

TEST(GateRule, OpenAtZero) {
  EXPECT_TRUE(gate_open(0.0));
  EXPECT_TRUE(gate_open(-0.0));
  EXPECT_TRUE(gate_open(1e-300));
  EXPECT_FALSE(gate_open(-1e-300));
  EXPECT_FALSE(gate_open(0.0, GateRule::negated));
  EXPECT_TRUE(gate_open(-1.0, GateRule::negated));
}

TEST(GaluNeuron, HandValues) {
  EXPECT_DOUBLE_EQ(galu_neuron(unit(3, 0), unit(3, 0), unit(3, 0)), 1.0);
  EXPECT_DOUBLE_EQ(galu_neuron(unit(3, 0), unit(3, 0), -unit(3, 0)), 0.0);
  const Vector w = Vector::Constant(3, 0.7);
  EXPECT_DOUBLE_EQ(galu_neuron(unit(3, 0), w, unit(3, 1)), 0.7);
}

TEST(GaluNeuron, DimensionMismatchThrows) {
  EXPECT_THROW(galu_neuron(unit(3, 0), unit(2, 0), unit(3, 0)), DimensionError);
  EXPECT_THROW(galu_neuron(unit(3, 0), unit(3, 0), unit(4, 0)), DimensionError);
}

TEST(GaluNeuron, LinearInWeights) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = rng.normal_vector(6), u = rng.normal_vector(6);
    const Vector w1 = rng.normal_vector(6), w2 = rng.normal_vector(6);
    const double a = rng.normal(), b = rng.normal();
    const double lhs = galu_neuron(x, a * w1 + b * w2, u);
    const double rhs = a * galu_neuron(x, w1, u) + b * galu_neuron(x, w2, u);
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST(GaluForward, ZeroAlphaGivesZero) {
  const GateBank gates = GateBank::gaussian(4, 5, 1);
  NaturalParams p = NaturalParams::random(4, 5, 2);
  p.alpha.setZero();
  EXPECT_EQ(galu_forward(Vector::Ones(4), p, gates, true), 0.0);
}

TEST(GaluForward, SingleNeuronNormalizedMatchesNeuron) {
  Rng rng(3);
  const Vector x = rng.normal_vector(5), w = rng.normal_vector(5), u = rng.normal_vector(5);
  const GateBank gates = bank_of(u);
  const NaturalParams p{w, Vector::Ones(1)};
  EXPECT_DOUBLE_EQ(galu_forward(x, p, gates, true), galu_neuron(x, w, u));
}

TEST(GaluForward, EqualsEmbeddingDotCollapsedWeights) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GateBank gates = GateBank::gaussian(7, 9, seed);
    const NaturalParams p = NaturalParams::random(7, 9, seed + 100);
    const Vector x = Rng(seed + 200).normal_vector(7);
    const double direct = galu_forward(x, p, gates, true);
    const double via_features = embed_point(x, gates, true).dot(p.collapse().w);
    EXPECT_NEAR(direct, via_features, 1e-12 * std::max(1.0, std::abs(direct)));
  }
}

TEST(GaluForward, ScalingAbsorption) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GateBank gates = GateBank::gaussian(5, 6, seed);
    const NaturalParams p = NaturalParams::random(5, 6, seed + 1);
    const NaturalParams absorbed{p.W * p.alpha.asDiagonal(), Vector::Ones(6)};
    const Vector x = Rng(seed + 2).normal_vector(5);
    EXPECT_NEAR(galu_forward(x, p, gates, false), galu_forward(x, absorbed, gates, false), 1e-13);
  }
}

TEST(GaluForward, ShapeMismatchThrows) {
  const GateBank gates = GateBank::gaussian(4, 3, 1);
  const NaturalParams p = NaturalParams::random(4, 2, 1);
  EXPECT_THROW(galu_forward(Vector::Ones(4), p, gates, true), DimensionError);
}

TEST(ReluForward, AllGatesClosedGivesZero) {
  const GateBank u = bank_of(-Matrix::Identity(3, 3));
  EXPECT_EQ(relu_forward(Vector::Ones(3), u, Vector::Ones(3), false), 0.0);
}

TEST(ReluForward, SingleNeuronHandValue) {
  const GateBank u = bank_of(unit(2, 0));
  EXPECT_DOUBLE_EQ(relu_forward(2.0 * unit(2, 0), u, Vector::Constant(1, 3.0), false), 6.0);
}

TEST(ReluForward, EqualsGaluWithWeightsEqualGates) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const GateBank u = GateBank::gaussian(6, 8, seed);
    const Vector alpha = Rng(seed + 5).normal_vector(8);
    const Vector x = Rng(seed + 9).normal_vector(6);
    const NaturalParams p{u.gates, alpha};
    for (bool normalized : {false, true})
      EXPECT_EQ(relu_forward(x, u, alpha, normalized), galu_forward(x, p, u, normalized));
  }
}

TEST(ForwardBatch, MatchesPointwise) {
  const GateBank gates = GateBank::gaussian(5, 7, 4);
  const NaturalParams p = NaturalParams::random(5, 7, 5);
  const Matrix xs = Rng(6).normal_matrix(12, 5);
  const Vector galu = galu_forward_batch(xs, p, gates, true);
  const Vector relu = relu_forward_batch(xs, gates.gates, p.alpha, true);
  for (Index i = 0; i < xs.rows(); ++i) {
    EXPECT_NEAR(galu(i), galu_forward(xs.row(i).transpose(), p, gates, true), 1e-12);
    EXPECT_NEAR(relu(i), relu_forward(xs.row(i).transpose(), gates, p.alpha, true), 1e-12);
  }
}

TEST(NaturalParams, CollapseAndFromStack) {
  const NaturalParams p = NaturalParams::random(3, 4, 8);
  const WeightStack w = p.collapse();
  ASSERT_EQ(w.w.size(), 12);
  for (Index j = 0; j < 4; ++j)
    EXPECT_TRUE(w.block(j).isApprox(p.alpha(j) * p.W.col(j)));
  const NaturalParams back = NaturalParams::from_stack(w);
  EXPECT_TRUE(back.alpha.isOnes());
  EXPECT_TRUE(back.W.isApprox(w.as_matrix()));
}

TEST(GateBank, SphereColumnsAreUnitAndShareDirections) {
  const GateBank g = GateBank::gaussian(5, 6, 77);
  const GateBank s = GateBank::sphere(5, 6, 77);
  s.validate();
  for (Index j = 0; j < 6; ++j) {
    EXPECT_NEAR(s.gate(j).norm(), 1.0, 1e-12);
    EXPECT_TRUE(s.gate(j).isApprox(g.gate(j).normalized()));
  }
}

TEST(GateBank, LeadingIsPrefix) {
  const GateBank g = GateBank::gaussian(4, 10, 1);
  EXPECT_EQ(g.leading(3).gates, g.gates.leftCols(3));
  EXPECT_THROW(g.leading(11), DimensionError);
  EXPECT_THROW(g.leading(0), DimensionError);
}

TEST(LabeledSet, Validation) {
  LabeledSet ok{Matrix::Identity(3, 3), Vector::Ones(3)};
  EXPECT_NO_THROW(ok.validate(true));
  LabeledSet bad_labels{Matrix::Identity(3, 3), Vector::Ones(2)};
  EXPECT_THROW(bad_labels.validate(), DimensionError);
  LabeledSet not_unit{2.0 * Matrix::Identity(2, 2), Vector::Ones(2)};
  EXPECT_THROW(not_unit.validate(true), DomainError);
  LabeledSet nan{Matrix::Identity(2, 2), Vector::Constant(2, std::nan(""))};
  EXPECT_THROW(nan.validate(), DomainError);
}

TEST(Rng, DeriveSeedSeparatesStreams) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(0, 1));
  EXPECT_EQ(derive_seed(5, 2, 3), derive_seed(derive_seed(5, 2), 3));
  Rng a(9), b(9);
  EXPECT_EQ(a.normal_matrix(3, 3), b.normal_matrix(3, 3));
}
