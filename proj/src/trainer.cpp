#include "galu/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "galu/error.hpp"
#include "galu/linalg.hpp"
#include "galu/rng.hpp"
#include "galu/solver.hpp"
#include "galu/spectral.hpp"

namespace galu {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::gd: return "gd";
    case Method::sgd: return "sgd";
    case Method::adam: return "adam";
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  if (name == "gd") return Method::gd;
  if (name == "sgd") return Method::sgd;
  if (name == "adam") return Method::adam;
  throw DomainError("unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(Loss loss) {
  switch (loss) {
    case Loss::mse: return "mse";
    case Loss::hinge: return "hinge";
    case Loss::linear: return "linear";
  }
  return "?";
}

Loss loss_from_string(std::string_view name) {
  if (name == "mse") return Loss::mse;
  if (name == "hinge") return Loss::hinge;
  if (name == "linear") return Loss::linear;
  throw DomainError("unknown loss '" + std::string(name) + "'");
}

void OptimizerConfig::validate() const {
  if (!(step_size > 0.0)) throw DomainError("optimizer: step_size must be positive");
  if (batch_size < 1) throw DomainError("optimizer: batch_size must be positive");
  if (iterations < 0) throw DomainError("optimizer: iterations must be non-negative");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0) ||
      !(adam_eps > 0.0))
    throw DomainError("optimizer: adam parameters must lie in (0,1) x (0,1) x (0,inf)");
  if (log_every < 1) throw DomainError("optimizer: log_every must be positive");
}

// ---- convex path ----------------------------------------------------------

double theorem3_bound(Index t, double lambda, double data_norm_sq, Index k_eff, Index m,
                      double dist0_sq) {
  return std::exp(-static_cast<double>(t) * lambda / (2.0 * data_norm_sq)) *
         (static_cast<double>(k_eff) * data_norm_sq / static_cast<double>(m)) * dist0_sq;
}

namespace {

struct ConvexSetup {
  double lambda = 0.0;
  double norm_sq = 0.0;
  Index required_width = 0;
};

ConvexSetup convex_setup(const LabeledSet& data, double delta) {
  ConvexSetup s;
  s.norm_sq = std::pow(spectral_norm(data.xs), 2);
  s.lambda = lambda_exact(data);
  try {
    s.required_width = chernoff_width(data, delta);
  } catch (const NumericalError&) {
    s.required_width = 0;
  }
  return s;
}

bool should_log(Index t, Index iterations, Index every) {
  return t % every == 0 || t == iterations;
}

// Iterates c_{t+1} = c_t - (eta/m) (H c_t - y); w_t = Xbar^T c_t.
void run_dual(const MatrixRef& h, const VectorRef& y, const GdOptions& opt, GdResult& out,
              Index k_eff, double lambda, double norm_sq, Vector& c) {
  const Index m = h.rows();
  const double md = static_cast<double>(m);
  const double rate = out.step_size / md;

  std::optional<Vector> c_star;
  double dist0_sq = 0.0;
  if (out.rank == m) {
    Eigen::LDLT<Matrix> ldlt(h);
    c_star = ldlt.solve(y);
    dist0_sq = std::max(0.0, y.dot(*c_star));  // ||w*||^2 = y^T H^{-1} y
  }

  c = Vector::Zero(m);
  for (Index t = 0;; ++t) {
    const Vector hc = h * c;
    const Vector r = hc - y;
    if (should_log(t, opt.iterations, opt.log_every)) {
      TraceRecord rec;
      rec.iteration = t;
      rec.objective = r.squaredNorm() / (2.0 * md);
      rec.grad_norm = std::sqrt(std::max(0.0, r.dot(h * r))) / md;
      if (c_star) {
        const Vector diff = c - *c_star;
        rec.dist_to_opt = std::sqrt(std::max(0.0, diff.dot(h * diff)));
        rec.theorem3_bound = theorem3_bound(t, lambda, norm_sq, k_eff, m, dist0_sq);
      }
      out.trace.records.push_back(rec);
    }
    if (t == opt.iterations) break;
    c -= rate * r;
  }
}

Index psd_rank(const Vector& eigenvalues) {
  return numerical_rank(eigenvalues.cwiseMax(0.0));
}

}  // namespace

namespace {

GdResult dual_impl(const MatrixRef& gram_matrix, const LabeledSet& data, Index k, bool normalized,
                   const GdOptions& options, Vector& c) {
  data.validate();
  const Index m = data.size();
  if (gram_matrix.rows() != m || gram_matrix.cols() != m)
    throw DimensionError("gd_convex_gram: Gram must be m x m");
  if (options.iterations < 0) throw DomainError("gd_convex: iterations must be non-negative");
  if (options.log_every < 1) throw DomainError("gd_convex: log_every must be positive");

  const ConvexSetup s = convex_setup(data, options.delta);
  const Index k_eff = normalized ? 1 : k;
  GdResult out;
  out.lambda_x = s.lambda;
  out.data_norm_sq = s.norm_sq;
  out.required_width = s.required_width;
  out.step_size = options.step_size.value_or(static_cast<double>(m) /
                                             (static_cast<double>(k_eff) * s.norm_sq));
  const Vector eig = symmetric_eigenvalues(gram_matrix);
  out.rank = psd_rank(eig);
  out.sigma_min_sq = std::max(0.0, eig(0));
  out.concentration_event = out.sigma_min_sq >= 0.5 * static_cast<double>(k_eff) * s.lambda;
  run_dual(gram_matrix, data.ys, options, out, k_eff, s.lambda, s.norm_sq, c);
  return out;
}

}  // namespace

GdResult gd_convex_gram(const MatrixRef& gram_matrix, const LabeledSet& data, Index k,
                        bool normalized, const GdOptions& options) {
  Vector c;
  return dual_impl(gram_matrix, data, k, normalized, options, c);
}

GdResult gd_convex(const FeatureMatrix& features, const LabeledSet& data, const GdOptions& options) {
  data.validate();
  const Index m = data.size();
  if (features.rows() != m || features.d != data.dim())
    throw DimensionError("gd_convex: features do not match the data");
  if (options.iterations < 0) throw DomainError("gd_convex: iterations must be non-negative");
  if (options.log_every < 1) throw DomainError("gd_convex: log_every must be positive");

  const bool dual = options.representation == GdRepresentation::dual ||
                    (options.representation == GdRepresentation::automatic &&
                     features.cols() > m);
  const Matrix h = gram(features);
  if (dual) {
    Vector c;
    GdResult out = dual_impl(h, data, features.k, features.normalized, options, c);
    out.w = features.data.transpose() * c;
    return out;
  }

  const ConvexSetup s = convex_setup(data, options.delta);
  const Index k_eff = features.normalized ? 1 : features.k;
  GdResult out;
  out.lambda_x = s.lambda;
  out.data_norm_sq = s.norm_sq;
  out.required_width = s.required_width;
  out.step_size = options.step_size.value_or(static_cast<double>(m) /
                                             (static_cast<double>(k_eff) * s.norm_sq));
  const Vector eig = symmetric_eigenvalues(h);
  out.rank = psd_rank(eig);
  out.sigma_min_sq = features.cols() >= m ? std::max(0.0, eig(0)) : 0.0;
  out.concentration_event = out.sigma_min_sq >= 0.5 * static_cast<double>(k_eff) * s.lambda;

  std::optional<Vector> w_star;
  double dist0_sq = 0.0;
  if (out.rank == m) {
    w_star = min_norm_solve(features, data.ys).w_star.w;
    dist0_sq = w_star->squaredNorm();
  }

  const double md = static_cast<double>(m);
  Vector w = Vector::Zero(features.cols());
  for (Index t = 0;; ++t) {
    const Vector r = features.data * w - data.ys;
    const Vector grad = features.data.transpose() * r / md;
    if (should_log(t, options.iterations, options.log_every)) {
      TraceRecord rec;
      rec.iteration = t;
      rec.objective = r.squaredNorm() / (2.0 * md);
      rec.grad_norm = grad.norm();
      if (w_star) {
        rec.dist_to_opt = (w - *w_star).norm();
        rec.theorem3_bound = theorem3_bound(t, s.lambda, s.norm_sq, k_eff, m, dist0_sq);
      }
      out.trace.records.push_back(rec);
    }
    if (t == options.iterations) break;
    w -= out.step_size * grad;
  }
  out.w = std::move(w);
  return out;
}

// ---- natural path ---------------------------------------------------------

double loss_objective(const VectorRef& outputs, const VectorRef& ys, Loss loss) {
  if (outputs.size() != ys.size()) throw DimensionError("loss_objective: length mismatch");
  const double m = static_cast<double>(ys.size());
  switch (loss) {
    case Loss::mse: return (outputs - ys).squaredNorm() / (2.0 * m);
    case Loss::hinge:
      return (1.0 - ys.array() * outputs.array()).max(0.0).sum() / m;
    case Loss::linear: return -ys.dot(outputs) / m;
  }
  return 0.0;
}

Vector loss_derivative(const VectorRef& outputs, const VectorRef& ys, Loss loss) {
  if (outputs.size() != ys.size()) throw DimensionError("loss_derivative: length mismatch");
  const double m = static_cast<double>(ys.size());
  switch (loss) {
    case Loss::mse: return (outputs - ys) / m;
    case Loss::hinge: {
      Vector out(ys.size());
      for (Index i = 0; i < ys.size(); ++i) out(i) = ys(i) * outputs(i) <= 1.0 ? -ys(i) / m : 0.0;
      return out;
    }
    case Loss::linear: return -ys / m;
  }
  return Vector();
}

NaturalGradient galu_gradient(const MatrixRef& xs, const VectorRef& ys, const GateBank& gates,
                              const NaturalParams& params, Loss loss, GateRule rule) {
  params.validate_against(gates);
  if (xs.cols() != gates.dim() || xs.rows() != ys.size())
    throw DimensionError("galu_gradient: shape mismatch");
  const Index k = gates.width();
  const double s = 1.0 / std::sqrt(static_cast<double>(k));
  const Matrix open =
      (xs * gates.gates).unaryExpr([rule](double t) { return gate_open(t, rule) ? 1.0 : 0.0; });
  const Matrix gated = open.cwiseProduct(xs * params.W);  // g_ij
  const Vector outputs = s * (gated * params.alpha);
  const Vector r = loss_derivative(outputs, ys, loss);

  NaturalGradient out;
  out.objective = loss_objective(outputs, ys, loss);
  out.first = s * (xs.transpose() * (r.asDiagonal() * open)) * params.alpha.asDiagonal();
  out.alpha = s * (gated.transpose() * r);
  return out;
}

NaturalGradient relu_gradient(const MatrixRef& xs, const VectorRef& ys, const MatrixRef& weights,
                              const VectorRef& alpha, Loss loss) {
  if (xs.cols() != weights.rows() || xs.rows() != ys.size() || alpha.size() != weights.cols())
    throw DimensionError("relu_gradient: shape mismatch");
  const Index k = weights.cols();
  const double s = 1.0 / std::sqrt(static_cast<double>(k));
  const Matrix pre = xs * weights;
  const Matrix open = pre.unaryExpr([](double t) { return gate_open(t) ? 1.0 : 0.0; });
  const Matrix act = open.cwiseProduct(pre);
  const Vector outputs = s * (act * alpha);
  const Vector r = loss_derivative(outputs, ys, loss);

  NaturalGradient out;
  out.objective = loss_objective(outputs, ys, loss);
  out.first = s * (xs.transpose() * (r.asDiagonal() * open)) * alpha.asDiagonal();
  out.alpha = s * (act.transpose() * r);
  return out;
}

namespace {

// First-layer matrix and alpha packed as one vector for the shared optimizer.
struct Packed {
  Index d = 0;
  Index k = 0;
  Vector theta;

  Eigen::Map<const Matrix> first() const { return {theta.data(), d, k}; }
  Eigen::Map<const Vector> alpha() const { return {theta.data() + d * k, k}; }
};

Packed pack(const MatrixRef& first, const VectorRef& alpha) {
  Packed p{first.rows(), first.cols(), Vector(first.size() + alpha.size())};
  p.theta.head(first.size()) = Eigen::Map<const Vector>(Matrix(first).data(), first.size());
  p.theta.tail(alpha.size()) = alpha;
  return p;
}

Vector flatten(const NaturalGradient& g, bool train_alpha) {
  Vector out(g.first.size() + g.alpha.size());
  out.head(g.first.size()) = Eigen::Map<const Vector>(g.first.data(), g.first.size());
  if (train_alpha)
    out.tail(g.alpha.size()) = g.alpha;
  else
    out.tail(g.alpha.size()).setZero();
  return out;
}

// Draws minibatch index sets: each epoch is a seeded permutation cut into
// consecutive batches; a tail shorter than the batch size is dropped.
class BatchStream {
public:
  BatchStream(Index m, Index batch, std::uint64_t seed)
      : m_(m), batch_(std::min(batch, m)), seed_(seed), order_(static_cast<std::size_t>(m)) {}

  const std::vector<Index>& next() {
    if (pos_ + batch_ > m_ || epoch_ < 0) {
      ++epoch_;
      std::iota(order_.begin(), order_.end(), Index{0});
      Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(epoch_)));
      std::shuffle(order_.begin(), order_.end(), rng.engine());
      pos_ = 0;
    }
    current_.assign(order_.begin() + pos_, order_.begin() + pos_ + batch_);
    pos_ += batch_;
    return current_;
  }

private:
  Index m_;
  Index batch_;
  std::uint64_t seed_;
  std::vector<Index> order_;
  std::vector<Index> current_;
  Index pos_ = 0;
  Index epoch_ = -1;
};

template <typename GradFn>
TrainTrace optimize(const LabeledSet& data, const OptimizerConfig& cfg, Packed& params,
                    GradFn&& gradient) {
  cfg.validate();
  TrainTrace trace;
  const Index m = data.size();
  const Index n = params.theta.size();
  Vector first_moment = Vector::Zero(n);
  Vector second_moment = Vector::Zero(n);
  BatchStream stream(m, cfg.batch_size, cfg.seed);
  Matrix xb;
  Vector yb;

  for (Index t = 0; t < cfg.iterations; ++t) {
    NaturalGradient g;
    if (cfg.method == Method::gd) {
      g = gradient(data.xs, data.ys, params);
    } else {
      const std::vector<Index>& idx = stream.next();
      const Index b = static_cast<Index>(idx.size());
      xb.resize(b, data.dim());
      yb.resize(b);
      for (Index i = 0; i < b; ++i) {
        xb.row(i) = data.xs.row(idx[static_cast<std::size_t>(i)]);
        yb(i) = data.ys(idx[static_cast<std::size_t>(i)]);
      }
      g = gradient(xb, yb, params);
    }
    const Vector flat = flatten(g, cfg.train_alpha);
    if (t % cfg.log_every == 0) {
      TraceRecord rec;
      rec.iteration = t;
      rec.objective = g.objective;
      rec.grad_norm = flat.norm();
      trace.records.push_back(rec);
    }
    if (cfg.method == Method::adam) {
      first_moment = cfg.adam_beta1 * first_moment + (1.0 - cfg.adam_beta1) * flat;
      second_moment =
          cfg.adam_beta2 * second_moment + (1.0 - cfg.adam_beta2) * flat.cwiseAbs2();
      const double step = static_cast<double>(t + 1);
      const double c1 = 1.0 - std::pow(cfg.adam_beta1, step);
      const double c2 = 1.0 - std::pow(cfg.adam_beta2, step);
      params.theta.array() -= cfg.step_size * (first_moment.array() / c1) /
                              ((second_moment.array() / c2).sqrt() + cfg.adam_eps);
    } else {
      params.theta -= cfg.step_size * flat;
    }
  }

  const NaturalGradient final_grad = gradient(data.xs, data.ys, params);
  TraceRecord last;
  last.iteration = cfg.iterations;
  last.objective = final_grad.objective;
  last.grad_norm = flatten(final_grad, cfg.train_alpha).norm();
  trace.records.push_back(last);
  return trace;
}

}  // namespace

NaturalResult train_natural(const LabeledSet& data, const GateBank& gates,
                            const NaturalParams& init, const OptimizerConfig& cfg, Loss loss) {
  data.validate();
  init.validate_against(gates);
  if (data.dim() != gates.dim()) throw DimensionError("train_natural: data and gates differ in d");
  Packed p = pack(init.W, init.alpha);
  auto gradient = [&](const MatrixRef& xs, const VectorRef& ys, const Packed& q) {
    return galu_gradient(xs, ys, gates, NaturalParams{q.first(), q.alpha()}, loss);
  };
  NaturalResult out;
  out.trace = optimize(data, cfg, p, gradient);
  out.params = NaturalParams{p.first(), p.alpha()};
  return out;
}

ReluResult train_relu(const LabeledSet& data, const GateBank& init_gates, const VectorRef& init_alpha,
                      const OptimizerConfig& cfg, Loss loss) {
  data.validate();
  if (data.dim() != init_gates.dim()) throw DimensionError("train_relu: data and weights differ in d");
  if (init_alpha.size() != init_gates.width()) throw DimensionError("train_relu: alpha length != k");
  Packed p = pack(init_gates.gates, init_alpha);
  auto gradient = [&](const MatrixRef& xs, const VectorRef& ys, const Packed& q) {
    return relu_gradient(xs, ys, q.first(), q.alpha(), loss);
  };
  ReluResult out;
  out.trace = optimize(data, cfg, p, gradient);
  out.weights = p.first();
  out.alpha = p.alpha();
  return out;
}

// ---- checks ---------------------------------------------------------------

GradientComparison hinge_grad_equality(const LabeledSet& data, const GateBank& gates,
                                       const MatrixRef& W, const VectorRef& alpha, GateRule rule) {
  data.validate();
  const NaturalParams galu_params{W, alpha};
  galu_params.validate_against(gates);
  if ((data.ys.array().abs() > 1.0).any())
    throw DomainError("hinge_grad_equality: labels must lie in [-1, 1]");
  const Vector galu_out = galu_forward_batch(data.xs, galu_params, gates, true);
  const Vector relu_out = relu_forward_batch(data.xs, gates.gates, alpha, true);
  if ((galu_out.array().abs() > 1.0).any() || (relu_out.array().abs() > 1.0).any())
    throw DomainError(
        "hinge_grad_equality: network outputs leave [-1, 1]; rescale alpha so both networks "
        "stay in the linear part of the hinge");

  const NaturalGradient g = galu_gradient(data.xs, data.ys, gates, galu_params, Loss::hinge, rule);
  const NaturalGradient r = relu_gradient(data.xs, data.ys, gates.gates, alpha, Loss::hinge);
  GradientComparison out;
  out.galu_grad_norm = g.first.norm();
  out.relu_grad_norm = r.first.norm();
  out.max_abs_diff = (g.first - r.first).cwiseAbs().maxCoeff();
  return out;
}

Index perturbation_width(Index d, double epsilon, double delta) {
  if (d < 1 || !(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0))
    throw DomainError("perturbation_width: need d >= 1, epsilon > 0, delta in (0, 1)");
  const double dd = static_cast<double>(d);
  return ceil_index(std::numbers::pi / (std::sqrt(6.0) * dd * epsilon * epsilon) *
                    (std::log(2.0 / delta) + dd * std::log(3.0 / epsilon)));
}

PerturbationGap gate_perturbation_gap(const GateBank& gates, double epsilon, Index n_probe,
                                      std::uint64_t seed) {
  gates.validate();
  if (!(epsilon >= 0.0)) throw DomainError("gate_perturbation_gap: epsilon must be non-negative");
  if (n_probe < 1) throw DomainError("gate_perturbation_gap: n_probe must be positive");
  const Index d = gates.dim();
  const Index k = gates.width();
  Rng rng(seed);
  Matrix perturbed = gates.gates;
  for (Index j = 0; j < k; ++j) perturbed.col(j) += epsilon * rng.unit_vector(d);
  Matrix probes(n_probe, d);
  for (Index i = 0; i < n_probe; ++i) probes.row(i) = rng.unit_vector(d).transpose();

  const Matrix pre_u = probes * gates.gates;
  const Matrix pre_w = probes * perturbed;
  double worst = 0.0;
  for (Index i = 0; i < n_probe; ++i) {
    Index flips = 0;
    for (Index j = 0; j < k; ++j) flips += gate_open(pre_u(i, j)) != gate_open(pre_w(i, j));
    // Each flipped block contributes ||x||^2 / k = 1 / k.
    worst = std::max(worst, std::sqrt(static_cast<double>(flips) / static_cast<double>(k)));
  }
  PerturbationGap out;
  out.empirical_sup = worst;
  out.lemma_bound = std::sqrt(5.0 * std::sqrt(3.0 * static_cast<double>(d)) * epsilon /
                              std::sqrt(2.0 * std::numbers::pi));
  return out;
}

double finite_diff_check(const LabeledSet& data, const GateBank& gates_in,
                         const NaturalParams& params, Loss loss, Network network) {
  data.validate();
  params.validate_against(gates_in);
  GateBank gates = gates_in;
  constexpr double kBoundary = 1e-6;
  constexpr double h = 1e-5;
  constexpr int kRedraws = 10;
  // A central step on the ReLU first layer moves u.x by up to h ||x||.
  const Vector margin =
      network == Network::relu
          ? Vector((2.0 * h * data.xs.rowwise().norm()).cwiseMax(kBoundary))
          : Vector::Constant(data.size(), kBoundary);
  for (int attempt = 0;; ++attempt) {
    const Matrix pre = (data.xs * gates.gates).cwiseAbs();
    if (((pre.colwise() - margin).array() >= 0.0).all()) break;
    if (attempt == kRedraws)
      throw NumericalError("finite_diff_check: gates stay within 1e-6 of an example after 10 redraws");
    gates = GateBank::draw(gates.source, gates.dim(), gates.width(),
                           derive_seed(gates_in.seed, static_cast<std::uint64_t>(attempt)));
  }

  // Parameters: first layer (W for GaLU, the gates for ReLU) then alpha.
  Packed p = pack(network == Network::galu ? params.W : gates.gates, params.alpha);
  auto evaluate = [&](const Packed& q) {
    if (network == Network::galu)
      return galu_gradient(data.xs, data.ys, gates, NaturalParams{q.first(), q.alpha()}, loss);
    return relu_gradient(data.xs, data.ys, q.first(), q.alpha(), loss);
  };

  const Vector analytic = flatten(evaluate(p), true);
  Vector numeric(analytic.size());
  for (Index i = 0; i < p.theta.size(); ++i) {
    const double saved = p.theta(i);
    p.theta(i) = saved + h;
    const double up = evaluate(p).objective;
    p.theta(i) = saved - h;
    const double down = evaluate(p).objective;
    p.theta(i) = saved;
    numeric(i) = (up - down) / (2.0 * h);
  }
  const double scale = std::max(analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff());
  if (scale == 0.0) return 0.0;
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

}  // namespace galu
