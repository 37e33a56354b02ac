// galu <subcommand> [options]: runs one experiment and writes results.csv,
// config.json and summary.txt into --out.
//
// Exit codes: 0 success, 1 usage error, 2 property-suite failure, 3 capacity error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "galu/error.hpp"
#include "galu/experiments/commands.hpp"
#include "galu/experiments/config.hpp"

namespace {

using namespace galu;
using namespace galu::experiments;

struct Overrides {
  std::string config_file;
  std::optional<std::string> m, d, k, ratios;
  std::optional<std::uint64_t> seed;
  std::optional<Index> trials, iterations, threads, k_max, label_draws, m_test, clusters;
  std::optional<std::string> activation, mode, out, loss, method;
  std::optional<double> success_mse, delta, margin, step_size;
  bool negate_indicator = false;
  bool full_budget = false;
};

ExperimentConfig resolve(Experiment experiment, const Overrides& o) {
  ExperimentConfig cfg = default_config(experiment);
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file);
    if (!in) throw ConfigError("cannot read config file " + o.config_file);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config file: ") + e.what());
    }
    if (doc.contains("experiment") &&
        experiment_from_string(doc["experiment"].get<std::string>()) != experiment)
      throw ConfigError("config file is for experiment " + doc["experiment"].get<std::string>());
    cfg = apply_json(cfg, doc);
  }
  if (o.m) cfg.m = parse_index_list(*o.m);
  if (o.d) cfg.d = parse_index_list(*o.d);
  if (o.k) cfg.k = parse_index_list(*o.k);
  if (o.ratios) cfg.ratios = parse_double_list(*o.ratios);
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.iterations) cfg.optimizer.iterations = *o.iterations;
  if (o.full_budget) cfg.optimizer.iterations = 100000;
  if (o.threads) cfg.threads = *o.threads;
  if (o.k_max) cfg.k_max = *o.k_max;
  if (o.label_draws) cfg.label_draws = *o.label_draws;
  if (o.m_test) cfg.m_test = *o.m_test;
  if (o.clusters) cfg.clusters = *o.clusters;
  if (o.activation) cfg.activation = activation_from_string(*o.activation);
  if (o.mode) cfg.mode = mode_from_string(*o.mode);
  if (o.out) cfg.out_dir = *o.out;
  try {
    if (o.loss) cfg.loss = loss_from_string(*o.loss);
    if (o.method) cfg.optimizer.method = method_from_string(*o.method);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (o.success_mse) cfg.success_mse = *o.success_mse;
  if (o.delta) cfg.delta = *o.delta;
  if (o.margin) cfg.margin = *o.margin;
  if (o.step_size) cfg.optimizer.step_size = *o.step_size;
  if (o.negate_indicator) cfg.negate_indicator = true;
  cfg.validate();
  return cfg;
}

void add_options(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_file, "JSON config file");
  sub->add_option("--m", o.m, "sample size(s), e.g. 1000 or 500,1000");
  sub->add_option("--d", o.d, "input dimension(s)");
  sub->add_option("--k", o.k, "width(s), N or comma list");
  sub->add_option("--ratios", o.ratios, "underparam kd/m list");
  sub->add_option("--seed", o.seed, "root seed");
  sub->add_option("--trials", o.trials, "independent trials per point");
  sub->add_option("--activation", o.activation, "galu|relu|both");
  sub->add_option("--mode", o.mode, "closed-form|iterative");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--iterations", o.iterations, "optimizer steps");
  sub->add_flag("--full-budget", o.full_budget, "100000 optimizer steps");
  sub->add_option("--step-size", o.step_size, "optimizer step size");
  sub->add_option("--method", o.method, "gd|sgd|adam");
  sub->add_option("--loss", o.loss, "mse|hinge");
  sub->add_option("--threads", o.threads, "worker threads");
  sub->add_option("--k-max", o.k_max, "memorize: upper end of the k search");
  sub->add_option("--label-draws", o.label_draws, "underparam: label vectors per gate draw");
  sub->add_option("--m-test", o.m_test, "held-out examples");
  sub->add_option("--clusters", o.clusters, "clustered: number of clusters");
  sub->add_option("--success-mse", o.success_mse, "memorize: success threshold");
  sub->add_option("--delta", o.delta, "failure probability");
  sub->add_option("--margin", o.margin, "linsep: margin");
  sub->add_flag("--negate-indicator", o.negate_indicator, "test only: flip the gate indicator");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GaLU random-feature networks: experiments and property checks"};
  app.require_subcommand(1);
  Overrides overrides;
  const std::pair<const char*, Experiment> commands[] = {
      {"memorize", Experiment::memorize},         {"underparam", Experiment::underparam},
      {"clustered", Experiment::clustered},       {"linsep", Experiment::linsep},
      {"parity", Experiment::parity},             {"kernel-check", Experiment::kernel_check},
      {"theory-check", Experiment::theory_check}};
  for (const auto& [name, experiment] : commands) add_options(app.add_subcommand(name), overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    Experiment experiment = Experiment::memorize;
    for (const auto& [name, e] : commands)
      if (app.got_subcommand(name)) experiment = e;
    const ExperimentConfig cfg = resolve(experiment, overrides);
    const CommandOutput output = run_experiment(cfg);
    write_outputs(cfg, output);
    for (const CheckRow& c : output.checks)
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.property << " measured="
                << format_double(c.measured) << " threshold=" << format_double(c.threshold) << '\n';
    for (const std::string& note : output.notes) std::cerr << "note: " << note << '\n';
    std::cout << "wrote " << output.rows.size() << " rows to " << cfg.out_dir << "/results.csv\n";
    return exit_status(output);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
