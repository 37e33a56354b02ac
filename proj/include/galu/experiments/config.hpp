#pragma once

// Experiment configuration: one JSON document per run, every field optional
// and overridable from the command line.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "galu/datagen.hpp"
#include "galu/trainer.hpp"

namespace galu::experiments {

enum class Experiment { memorize, underparam, clustered, linsep, parity, kernel_check, theory_check };
enum class Activation { galu, relu, both };
enum class Mode { closed_form, iterative };

std::string_view to_string(Experiment e);
Experiment experiment_from_string(std::string_view name);
std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);
std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view name);

/// Thrown for invalid configuration values (maps to exit code 1).
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::memorize;
  std::vector<Index> m{1000};
  std::vector<Index> d{20, 50, 100};
  std::vector<Index> k;              // empty: experiment-specific default
  std::vector<double> ratios;        // underparam: kd/m values
  std::uint64_t seed = 0;
  Index trials = 5;
  Index label_draws = 1;             // underparam: label vectors per gate draw
  Activation activation = Activation::galu;
  Mode mode = Mode::closed_form;
  OptimizerConfig optimizer;
  Loss loss = Loss::mse;
  double success_mse = 0.01;
  Index k_max = 0;                   // memorize: 0 means 4 ceil(m/d)
  double delta = 0.01;
  Index clusters = 10;               // clustered: n
  Index m_test = 10000;
  double margin = 0.01;
  MarginKind margin_kind = MarginKind::absolute;
  Index threads = 1;
  std::size_t memory_budget = kDefaultMemoryBudget;
  bool negate_indicator = false;     // mutation canary for the check suites
  std::string out_dir = "results";

  void validate() const;
};

/// Defaults for one experiment (sizes of the reference figures).
ExperimentConfig default_config(Experiment experiment);

/// Overlay the fields present in `doc` onto `base`. Unknown keys are errors.
ExperimentConfig apply_json(ExperimentConfig base, const nlohmann::json& doc);

nlohmann::json to_json(const ExperimentConfig& cfg);

/// Parses "8" or "4,8,16".
std::vector<Index> parse_index_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);

}  // namespace galu::experiments
