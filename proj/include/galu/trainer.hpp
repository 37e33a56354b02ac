#pragma once

// Iterative training.
//
// Convex path: full-batch gradient descent on F(w) = (1/2m) ||Xbar w - y||^2
// with the step m / (k ||X||^2) (m / ||X||^2 for normalized features), which
// for full-rank Xbar and sigma_min^2(Xbar) >= (k/2) lambda(X) satisfies
//
//   F(w_t) <= exp(-t lambda(X) / (2 ||X||^2)) (k ||X||^2 / m) ||w_0 - w*||^2.
//
// Natural path: GD, SGD or Adam on (W, alpha) of the normalized GaLU network,
// or on (U, alpha) of the normalized ReLU network. Gates are never trained.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "galu/feature_map.hpp"
#include "galu/model.hpp"
#include "galu/types.hpp"

namespace galu {

struct TraceRecord {
  Index iteration = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  std::optional<double> dist_to_opt;
  std::optional<double> theorem3_bound;
};

struct TrainTrace {
  std::vector<TraceRecord> records;

  bool empty() const { return records.empty(); }
  const TraceRecord& back() const { return records.back(); }
};

enum class Method { gd, sgd, adam };
enum class Loss { mse, hinge, linear };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);
std::string_view to_string(Loss loss);
Loss loss_from_string(std::string_view name);

struct OptimizerConfig {
  Method method = Method::adam;
  double step_size = 1e-3;
  Index batch_size = 128;
  Index iterations = 1000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  bool train_alpha = true;  // false freezes the output layer
  Index log_every = 1;

  void validate() const;
};

// ---- convex path ----------------------------------------------------------

enum class GdRepresentation { automatic, primal, dual };

struct GdOptions {
  Index iterations = 100;
  double delta = 0.1;
  std::optional<double> step_size{};  // default m / (k ||X||^2)
  GdRepresentation representation = GdRepresentation::automatic;
  Index log_every = 1;
};

struct GdResult {
  TrainTrace trace;
  Vector w;  // final iterate (empty when run from a Gram matrix only)
  double step_size = 0.0;
  double lambda_x = 0.0;
  double data_norm_sq = 0.0;
  Index rank = 0;
  double sigma_min_sq = 0.0;          // lambda_min(Xbar Xbar^T)
  bool concentration_event = false;   // sigma_min^2 >= (k_eff / 2) lambda(X)
  Index required_width = 0;           // chernoff_width(data, delta), 0 if not diverse
};

/// Gradient descent from w_0 = 0 on F. `data` supplies X (for ||X|| and
/// lambda(X)) and y. The dual representation iterates c with w = Xbar^T c,
/// which is cheaper when d k > m.
GdResult gd_convex(const FeatureMatrix& features, const LabeledSet& data,
                   const GdOptions& options = {});

/// Dual-only variant driven by the Gram H = Xbar Xbar^T of a width-k bank.
GdResult gd_convex_gram(const MatrixRef& gram_matrix, const LabeledSet& data, Index k,
                        bool normalized, const GdOptions& options = {});

/// exp(-t lambda / (2 R)) * (k_eff R / m) * dist0_sq with R = ||X||^2.
double theorem3_bound(Index t, double lambda, double data_norm_sq, Index k_eff, Index m,
                      double dist0_sq);

// ---- natural path ---------------------------------------------------------

struct NaturalGradient {
  Matrix first;   // d x k: dL/dW (GaLU) or dL/dU (ReLU)
  Vector alpha;   // k
  double objective = 0.0;
};

/// Objective: mse (1/2m) sum (N - y)^2, hinge (1/m) sum max(0, 1 - y N),
/// linear (1/m) sum -y N.
double loss_objective(const VectorRef& outputs, const VectorRef& ys, Loss loss);

/// d objective / d output_i. Hinge uses -y/m whenever y N <= 1.
Vector loss_derivative(const VectorRef& outputs, const VectorRef& ys, Loss loss);

/// Gradient of the normalized GaLU network objective with respect to (W, alpha).
NaturalGradient galu_gradient(const MatrixRef& xs, const VectorRef& ys, const GateBank& gates,
                              const NaturalParams& params, Loss loss,
                              GateRule rule = GateRule::standard);

/// Gradient of the normalized ReLU network objective with respect to (U, alpha).
/// The derivative of max(t, 0) at t = 0 is taken as 1.
NaturalGradient relu_gradient(const MatrixRef& xs, const VectorRef& ys, const MatrixRef& weights,
                              const VectorRef& alpha, Loss loss);

struct NaturalResult {
  NaturalParams params;
  TrainTrace trace;
};

struct ReluResult {
  Matrix weights;
  Vector alpha;
  TrainTrace trace;
};

/// Trace records hold the (mini)batch objective and gradient norm before each
/// logged update; the last record is the full-sample objective at the result.
NaturalResult train_natural(const LabeledSet& data, const GateBank& gates,
                            const NaturalParams& init, const OptimizerConfig& cfg, Loss loss);

ReluResult train_relu(const LabeledSet& data, const GateBank& init_gates, const VectorRef& init_alpha,
                      const OptimizerConfig& cfg, Loss loss);

// ---- checks ---------------------------------------------------------------

struct GradientComparison {
  double galu_grad_norm = 0.0;
  double relu_grad_norm = 0.0;
  double max_abs_diff = 0.0;
};

/// Hinge-loss gradients dL/dW of the GaLU network (W, alpha, U) and dL/dU of the
/// ReLU network (U, alpha). Requires labels and both networks' outputs in
/// [-1, 1]; throws DomainError otherwise. `rule` only affects the GaLU side.
GradientComparison hinge_grad_equality(const LabeledSet& data, const GateBank& gates,
                                       const MatrixRef& W, const VectorRef& alpha,
                                       GateRule rule = GateRule::standard);

struct PerturbationGap {
  double empirical_sup = 0.0;
  double lemma_bound = 0.0;
};

/// Perturbs each gate by epsilon times an independent uniform unit direction
/// and returns max over n_probe unit points of ||Phi_U(x) - Phi_W(x)||
/// (normalized map) next to sqrt(5 sqrt(3d) epsilon / sqrt(2 pi)).
PerturbationGap gate_perturbation_gap(const GateBank& gates, double epsilon, Index n_probe,
                                      std::uint64_t seed);

/// ceil(pi / (sqrt(6) d eps^2) (log(2/delta) + d log(3/eps))).
Index perturbation_width(Index d, double epsilon, double delta);

enum class Network { galu, relu };

/// Max relative error (infinity norm) between the analytic gradient and
/// central differences with step 1e-5. For ReLU the first-layer weights are
/// the gates. When some |u_j.x_i| < 1e-6 the gates are redrawn from
/// derive_seed(gates.seed, attempt); NumericalError after 10 redraws.
double finite_diff_check(const LabeledSet& data, const GateBank& gates,
                         const NaturalParams& params, Loss loss, Network network = Network::galu);

}  // namespace galu
