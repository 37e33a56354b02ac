#include "galu/experiments/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

#include "galu/datagen.hpp"
#include "galu/error.hpp"
#include "galu/experiments/checks.hpp"
#include "galu/experiments/pool.hpp"
#include "galu/feature_map.hpp"
#include "galu/model.hpp"
#include "galu/rng.hpp"
#include "galu/solver.hpp"
#include "galu/trainer.hpp"

namespace galu::experiments {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> activations(Activation a) {
  switch (a) {
    case Activation::galu: return {"galu"};
    case Activation::relu: return {"relu"};
    case Activation::both: return {"galu", "relu"};
  }
  return {};
}

struct RowSink {
  std::string experiment;
  Index m = 0;
  Index d = 0;
  std::string activation;
  std::uint64_t seed = 0;
  Clock::time_point start = Clock::now();
  std::vector<ResultRow> rows;

  void add(Index k, const std::string& metric, double value) {
    rows.push_back({experiment, m, d, k, activation, metric, value, seed, seconds_since(start)});
  }
};

double mse_of(const VectorRef& predictions, const VectorRef& ys) {
  return (predictions - ys).squaredNorm() / static_cast<double>(ys.size());
}

double accuracy_of(const VectorRef& predictions, const VectorRef& ys) {
  Index hits = 0;
  for (Index i = 0; i < ys.size(); ++i) hits += (predictions(i) >= 0.0 ? 1.0 : -1.0) == ys(i);
  return static_cast<double>(hits) / static_cast<double>(ys.size());
}

// ReLU first layer N(0, I/d), output layer N(0, 1).
std::pair<GateBank, Vector> relu_init(Index d, Index k, std::uint64_t seed) {
  const NaturalParams p = NaturalParams::random(d, k, seed);
  return {GateBank{p.W, GateSource::gaussian, seed}, p.alpha};
}

struct TrainedModel {
  Vector train_predictions;
  TrainTrace trace;
  SavedModel saved;
};

TrainedModel train_model(const std::string& activation, const LabeledSet& data, Index k,
                         std::uint64_t seed, const ExperimentConfig& cfg) {
  OptimizerConfig opt = cfg.optimizer;
  opt.seed = derive_seed(seed, 7);
  TrainedModel out;
  if (activation == "galu") {
    const GateBank gates = GateBank::gaussian(data.dim(), k, derive_seed(seed, 5));
    const NaturalParams init = NaturalParams::random(data.dim(), k, derive_seed(seed, 6));
    NaturalResult res = train_natural(data, gates, init, opt, cfg.loss);
    out.trace = std::move(res.trace);
    out.saved = SavedModel{gates, std::move(res.params), true, "galu"};
  } else {
    const auto [weights, alpha] = relu_init(data.dim(), k, derive_seed(seed, 6));
    ReluResult res = train_relu(data, weights, alpha, opt, cfg.loss);
    out.trace = std::move(res.trace);
    GateBank first{res.weights, GateSource::gaussian, derive_seed(seed, 6)};
    out.saved = SavedModel{first, NaturalParams{res.weights, res.alpha}, true, "relu"};
  }
  out.train_predictions = out.saved.predict(data.xs);
  return out;
}

// ---- memorize -------------------------------------------------------------

struct SearchTask {
  Index m = 0;
  Index d = 0;
  Index trial = 0;
  std::string activation;
};

void memorize_task(const ExperimentConfig& cfg, const SearchTask& task, RowSink& sink,
                   std::vector<std::string>& notes) {
  const std::uint64_t seed = sink.seed;
  const LabeledSet data = gen_gaussian(task.m, task.d, derive_seed(seed, 1));
  const Index k_max = cfg.k_max > 0 ? cfg.k_max : 4 * ((task.m + task.d - 1) / task.d);
  const GateBank bank = GateBank::gaussian(task.d, k_max, derive_seed(seed, 2));
  const bool iterative = cfg.mode == Mode::iterative;

  std::map<Index, bool> verdicts;
  auto succeeds = [&](Index k) {
    if (auto it = verdicts.find(k); it != verdicts.end()) return it->second;
    double mse = 0.0;
    if (!iterative) {
      const FeatureMatrix features = build_feature_matrix(data, bank.leading(k), cfg.memory_budget);
      mse = LeastSquaresProjector(features.data).residual_sq(data.ys) / static_cast<double>(task.m);
    } else {
      OptimizerConfig opt = cfg.optimizer;
      opt.seed = derive_seed(seed, 3, static_cast<std::uint64_t>(k));
      TrainTrace trace;
      if (task.activation == "galu") {
        const NaturalParams init =
            NaturalParams::random(task.d, k, derive_seed(seed, 4, static_cast<std::uint64_t>(k)));
        const NaturalResult res = train_natural(data, bank.leading(k), init, opt, Loss::mse);
        mse = mse_of(galu_forward_batch(data.xs, res.params, bank.leading(k), true), data.ys);
        trace = res.trace;
      } else {
        const auto [weights, alpha] =
            relu_init(task.d, k, derive_seed(seed, 4, static_cast<std::uint64_t>(k)));
        const ReluResult res = train_relu(data, weights, alpha, opt, Loss::mse);
        mse = mse_of(relu_forward_batch(data.xs, res.weights, res.alpha, true), data.ys);
        trace = res.trace;
      }
      sink.add(k, "probe_plateaued", trace_plateaued(trace) ? 1.0 : 0.0);
    }
    sink.add(k, "probe_mse", mse);
    const bool ok = mse < cfg.success_mse;
    verdicts[k] = ok;
    return ok;
  };

  if (!succeeds(k_max)) {
    sink.add(k_max, "search_failed", 1.0);
    notes.push_back("memorize m=" + std::to_string(task.m) + " d=" + std::to_string(task.d) + " " +
                    task.activation + ": k_max=" + std::to_string(k_max) + " does not reach mse < " +
                    format_double(cfg.success_mse));
    return;
  }
  Index lo = 0;  // largest k known to fail (0: none)
  Index hi = k_max;
  while (hi - lo > 1) {
    const Index mid = lo + (hi - lo) / 2;
    (succeeds(mid) ? hi : lo) = mid;
  }
  // Any success below hi contradicts monotonicity; fall back to a linear scan.
  bool monotone = true;
  for (const auto& [k, ok] : verdicts)
    if (ok && k < hi) monotone = false;
  if (hi > 1 && !verdicts.count(hi - 1)) monotone = monotone && !succeeds(hi - 1);
  if (!monotone) {
    for (Index k = 1; k < hi; ++k) {
      if (succeeds(k)) {
        hi = k;
        break;
      }
    }
    sink.add(hi, "non_monotone", 1.0);
    notes.push_back("memorize m=" + std::to_string(task.m) + " d=" + std::to_string(task.d) + " " +
                    task.activation + ": success not monotone in k; linear scan used");
  }
  sink.add(hi, "min_k", static_cast<double>(hi));
}

}  // namespace

bool trace_plateaued(const TrainTrace& trace) {
  const std::size_t n = trace.records.size();
  if (n < 20) return true;
  const std::size_t tenth = n / 10;
  double last = 0.0;
  double before = 0.0;
  for (std::size_t i = 0; i < tenth; ++i) {
    last += trace.records[n - 1 - i].objective;
    before += trace.records[n - 1 - tenth - i].objective;
  }
  return before - last <= 0.01 * std::abs(before);
}

CommandOutput cmd_memorize(const ExperimentConfig& cfg) {
  cfg.validate();
  CommandOutput out;
  std::vector<SearchTask> tasks;
  for (Index m : cfg.m)
    for (Index d : cfg.d)
      for (Index t = 0; t < cfg.trials; ++t)
        for (const std::string& a : activations(cfg.activation)) {
          if (a == "relu" && cfg.mode == Mode::closed_form) continue;
          tasks.push_back({m, d, t, a});
        }
  if (cfg.activation != Activation::galu && cfg.mode == Mode::closed_form)
    out.notes.push_back("closed-form mode has no ReLU solution; ReLU skipped (use --mode iterative)");

  std::vector<RowSink> sinks(tasks.size());
  std::vector<std::vector<std::string>> notes(tasks.size());
  parallel_for(static_cast<Index>(tasks.size()), cfg.threads, [&](Index i) {
    const SearchTask& task = tasks[static_cast<std::size_t>(i)];
    RowSink& sink = sinks[static_cast<std::size_t>(i)];
    sink.experiment = "memorize";
    sink.m = task.m;
    sink.d = task.d;
    sink.activation = task.activation;
    // Data and gates depend on (m, d, trial) only, so GaLU and ReLU share them.
    sink.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(task.m),
                            derive_seed(static_cast<std::uint64_t>(task.d),
                                        static_cast<std::uint64_t>(task.trial)));
    sink.start = Clock::now();
    memorize_task(cfg, task, sink, notes[static_cast<std::size_t>(i)]);
  });
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    out.rows.insert(out.rows.end(), sinks[i].rows.begin(), sinks[i].rows.end());
    out.notes.insert(out.notes.end(), notes[i].begin(), notes[i].end());
  }
  if (cfg.mode == Mode::iterative) {
    for (const ResultRow& r : out.rows)
      if (r.metric == "probe_plateaued" && r.value == 0.0) {
        out.notes.push_back("iterative budget of " + std::to_string(cfg.optimizer.iterations) +
                            " steps did not plateau for at least one probe (see probe_plateaued)");
        break;
      }
  }
  sort_canonical(out.rows);
  return out;
}

// ---- underparam -----------------------------------------------------------

CommandOutput cmd_underparam(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.ratios.empty() && cfg.k.empty()) throw ConfigError("underparam needs ratios or k values");
  CommandOutput out;

  struct Point {
    Index m, d, k;
  };
  std::vector<Point> points;
  for (Index m : cfg.m)
    for (Index d : cfg.d) {
      std::vector<Index> ks = cfg.k;
      for (double r : cfg.ratios)
        ks.push_back(std::max<Index>(1, static_cast<Index>(std::llround(r * static_cast<double>(m) /
                                                                        static_cast<double>(d)))));
      for (Index k : ks) points.push_back({m, d, k});
    }

  const bool want_galu = cfg.activation != Activation::relu;
  const bool want_relu = cfg.activation != Activation::galu;
  if (want_galu)
    for (const Point& p : points)
      if (feature_matrix_bytes(p.m, p.d, p.k) > cfg.memory_budget)
        throw CapacityError("underparam: feature matrix for m=" + std::to_string(p.m) +
                            ", d=" + std::to_string(p.d) + ", k=" + std::to_string(p.k) +
                            " exceeds the memory budget");
  struct Task {
    Point p;
    Index trial;
    std::string activation;
  };
  std::vector<Task> tasks;
  for (const Point& p : points)
    for (Index t = 0; t < cfg.trials; ++t) {
      if (want_galu) tasks.push_back({p, t, "galu"});
      if (want_relu) tasks.push_back({p, t, "relu"});
    }

  std::vector<RowSink> sinks(tasks.size());
  parallel_for(static_cast<Index>(tasks.size()), cfg.threads, [&](Index i) {
    const Task& task = tasks[static_cast<std::size_t>(i)];
    RowSink& sink = sinks[static_cast<std::size_t>(i)];
    sink.experiment = "underparam";
    sink.m = task.p.m;
    sink.d = task.p.d;
    sink.activation = task.activation;
    sink.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(task.trial));
    sink.start = Clock::now();
    const std::uint64_t point_seed =
        derive_seed(sink.seed, static_cast<std::uint64_t>(task.p.m * 1000003 + task.p.d),
                    static_cast<std::uint64_t>(task.p.k));
    const LabeledSet data = gen_gaussian(task.p.m, task.p.d, derive_seed(point_seed, 1));
    const double md = static_cast<double>(task.p.m);
    if (task.activation == "galu") {
      const GateBank gates = GateBank::gaussian(task.p.d, task.p.k, derive_seed(point_seed, 2));
      const FeatureMatrix features = build_feature_matrix(data, gates, cfg.memory_budget);
      const LeastSquaresProjector projector(features.data);
      Rng rng(derive_seed(point_seed, 3));
      double total = 0.0;
      for (Index draw = 0; draw < cfg.label_draws; ++draw)
        total += projector.residual_sq(draw == 0 ? Vector(data.ys) : rng.normal_vector(task.p.m)) / md;
      sink.add(task.p.k, "mse", total / static_cast<double>(cfg.label_draws));
      sink.add(task.p.k, "rank_law", 1.0 - static_cast<double>(projector.rank()) / md);
    } else {
      const TrainedModel model = train_model("relu", data, task.p.k, point_seed, cfg);
      sink.add(task.p.k, "mse", mse_of(model.train_predictions, data.ys));
      sink.add(task.p.k, "plateaued", trace_plateaued(model.trace) ? 1.0 : 0.0);
    }
  });

  // Per point and activation: mean and standard error over trials.
  std::map<std::tuple<Index, Index, Index, std::string>, std::vector<double>> per_point;
  for (const RowSink& sink : sinks) {
    out.rows.insert(out.rows.end(), sink.rows.begin(), sink.rows.end());
    for (const ResultRow& r : sink.rows)
      if (r.metric == "mse") per_point[{r.m, r.d, r.k, r.activation}].push_back(r.value);
  }
  for (const auto& [key, values] : per_point) {
    const auto& [m, d, k, activation] = key;
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double se = values.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    const double ratio = static_cast<double>(k * d) / static_cast<double>(m);
    auto add = [&](const std::string& metric, double value) {
      out.rows.push_back({"underparam", m, d, k, activation, metric, value, cfg.seed, 0.0});
    };
    add("mse_mean", mean);
    add("mse_stderr", se);
    add("ratio_kd_over_m", ratio);
    add("reference_one_minus_ratio", 1.0 - ratio);
    add("reference_one_minus_twice_ratio", 1.0 - 2.0 * ratio);
  }
  sort_canonical(out.rows);
  return out;
}

// ---- clustered ------------------------------------------------------------

CommandOutput cmd_clustered(const ExperimentConfig& cfg) {
  cfg.validate();
  CommandOutput out;
  struct Task {
    Index m, d, k, trial;
  };
  std::vector<Task> tasks;
  const std::vector<Index> ks = cfg.k.empty() ? std::vector<Index>{0} : cfg.k;
  for (Index m : cfg.m)
    for (Index d : cfg.d)
      for (Index k : ks)
        for (Index t = 0; t < cfg.trials; ++t) tasks.push_back({m, d, k, t});

  std::vector<RowSink> sinks(tasks.size());
  parallel_for(static_cast<Index>(tasks.size()), cfg.threads, [&](Index i) {
    const Task& task = tasks[static_cast<std::size_t>(i)];
    RowSink& sink = sinks[static_cast<std::size_t>(i)];
    sink.experiment = "clustered";
    sink.activation = "galu";
    sink.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(task.trial));
    sink.start = Clock::now();
    const ClusteredOutcome o = run_clustered(sink.seed, cfg.clusters, task.d, cfg.delta, task.m,
                                             cfg.m_test, task.k, cfg.memory_budget);
    sink.m = task.m;
    sink.d = o.d;
    sink.add(o.k, "train_mse", o.train_mse);
    sink.add(o.k, "test_error", o.test_error);
    sink.add(o.k, "mu", o.mu);
    sink.add(o.k, "threshold_k", static_cast<double>(o.threshold_k));
    sink.add(o.k, "rank", static_cast<double>(o.rank));
    sink.add(o.k, "clusters", static_cast<double>(o.n));
  });
  for (const RowSink& sink : sinks) out.rows.insert(out.rows.end(), sink.rows.begin(), sink.rows.end());
  sort_canonical(out.rows);
  return out;
}

// ---- linsep / parity ------------------------------------------------------

namespace {

CommandOutput classification(const ExperimentConfig& cfg, const std::string& name, bool parity) {
  cfg.validate();
  if (cfg.k.empty()) throw ConfigError(name + " needs at least one k");
  CommandOutput out;
  struct Task {
    Index m, d, k, trial;
    std::string activation;
  };
  std::vector<Task> tasks;
  for (Index m : cfg.m)
    for (Index d : cfg.d)
      for (Index k : cfg.k)
        for (Index t = 0; t < cfg.trials; ++t)
          for (const std::string& a : activations(cfg.activation)) tasks.push_back({m, d, k, t, a});

  std::vector<RowSink> sinks(tasks.size());
  std::vector<std::optional<std::pair<std::string, SavedModel>>> models(tasks.size());
  std::vector<bool> plateaued(tasks.size(), true);
  parallel_for(static_cast<Index>(tasks.size()), cfg.threads, [&](Index i) {
    const Task& task = tasks[static_cast<std::size_t>(i)];
    RowSink& sink = sinks[static_cast<std::size_t>(i)];
    sink.experiment = name;
    sink.m = task.m;
    sink.d = task.d;
    sink.activation = task.activation;
    sink.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(task.trial));
    sink.start = Clock::now();
    const Index total = task.m + cfg.m_test;
    const std::uint64_t data_seed = derive_seed(sink.seed, static_cast<std::uint64_t>(task.d), 1);
    const LabeledSet all = parity ? gen_parity(total, task.d, data_seed)
                                  : gen_linear_margin(total, task.d, cfg.margin, data_seed,
                                                      cfg.margin_kind);
    const LabeledSet train = all.slice(0, task.m);
    const LabeledSet test = all.slice(task.m, cfg.m_test);
    const std::uint64_t model_seed = derive_seed(sink.seed, static_cast<std::uint64_t>(task.k), 2);
    const TrainedModel model = train_model(task.activation, train, task.k, model_seed, cfg);
    sink.add(task.k, "train_accuracy", accuracy_of(model.train_predictions, train.ys));
    sink.add(task.k, "test_accuracy", accuracy_of(model.saved.predict(test.xs), test.ys));
    sink.add(task.k, "final_objective", model.trace.back().objective);
    plateaued[static_cast<std::size_t>(i)] = trace_plateaued(model.trace);
    sink.add(task.k, "plateaued", plateaued[static_cast<std::size_t>(i)] ? 1.0 : 0.0);
    models[static_cast<std::size_t>(i)].emplace(
        name + "_" + task.activation + "_d" + std::to_string(task.d) + "_k" +
            std::to_string(task.k) + "_t" + std::to_string(task.trial) + ".json",
        model.saved);
  });
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    out.rows.insert(out.rows.end(), sinks[i].rows.begin(), sinks[i].rows.end());
    if (models[i]) out.models.push_back(std::move(*models[i]));
    if (!plateaued[i])
      out.notes.push_back(name + " " + tasks[i].activation + " k=" + std::to_string(tasks[i].k) +
                          ": objective still decreasing after " +
                          std::to_string(cfg.optimizer.iterations) + " steps");
  }
  sort_canonical(out.rows);
  return out;
}

CommandOutput checks_output(const std::string& name, std::vector<CheckRow> checks,
                            std::uint64_t seed) {
  CommandOutput out;
  for (const CheckRow& c : checks) {
    out.rows.push_back({name, 0, 0, 0, "galu", c.property, c.measured, seed, 0.0});
    out.rows.push_back({name, 0, 0, 0, "galu", c.property + "_threshold", c.threshold, seed, 0.0});
    out.rows.push_back({name, 0, 0, 0, "galu", c.property + "_passed", c.passed ? 1.0 : 0.0, seed, 0.0});
  }
  out.checks = std::move(checks);
  sort_canonical(out.rows);
  return out;
}

}  // namespace

CommandOutput cmd_linsep(const ExperimentConfig& cfg) { return classification(cfg, "linsep", false); }
CommandOutput cmd_parity(const ExperimentConfig& cfg) { return classification(cfg, "parity", true); }

CommandOutput cmd_kernel_check(const ExperimentConfig& cfg) {
  cfg.validate();
  return checks_output("kernel-check", kernel_suite(cfg.seed), cfg.seed);
}

CommandOutput cmd_theory_check(const ExperimentConfig& cfg) {
  cfg.validate();
  return checks_output("theory-check", theory_suite(cfg.seed, cfg.negate_indicator), cfg.seed);
}

CommandOutput run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::memorize: return cmd_memorize(cfg);
    case Experiment::underparam: return cmd_underparam(cfg);
    case Experiment::clustered: return cmd_clustered(cfg);
    case Experiment::linsep: return cmd_linsep(cfg);
    case Experiment::parity: return cmd_parity(cfg);
    case Experiment::kernel_check: return cmd_kernel_check(cfg);
    case Experiment::theory_check: return cmd_theory_check(cfg);
  }
  throw ConfigError("unknown experiment");
}

void write_outputs(const ExperimentConfig& cfg, const CommandOutput& output) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());

  auto open = [](const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
  };
  {
    std::ofstream csv = open(dir / "results.csv");
    write_csv(csv, output.rows);
  }
  {
    std::ofstream json = open(dir / "config.json");
    json << to_json(cfg).dump(2) << '\n';
  }
  {
    std::ofstream summary = open(dir / "summary.txt");
    summary << "experiment " << to_string(cfg.experiment) << ", seed " << cfg.seed << '\n';
    if (!output.checks.empty()) write_summary(summary, output.checks);
    for (const ResultRow& r : output.rows)
      if (r.metric == "min_k" || r.metric == "mse_mean" || r.metric == "test_accuracy" ||
          r.metric == "train_mse" || r.metric == "test_error")
        summary << r.metric << " m=" << r.m << " d=" << r.d << " k=" << r.k << " "
                << r.activation << ": " << format_double(r.value) << '\n';
    for (const std::string& note : output.notes) summary << "note: " << note << '\n';
  }
  if (!output.models.empty()) {
    fs::create_directories(dir / "models", ec);
    if (ec) throw ConfigError("cannot create model directory: " + ec.message());
    for (const auto& [file, model] : output.models) save_model(model, (dir / "models" / file).string());
  }
}

int exit_status(const CommandOutput& output) {
  return output.checks.empty() || all_passed(output.checks) ? 0 : 2;
}

}  // namespace galu::experiments
