#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "galu/experiments/config.hpp"
#include "galu/experiments/results.hpp"
#include "galu/experiments/serialization.hpp"

namespace galu::experiments {

struct CommandOutput {
  std::vector<ResultRow> rows;
  std::vector<CheckRow> checks;   // non-empty for the check commands
  std::vector<std::string> notes; // warnings and flags for summary.txt
  std::vector<std::pair<std::string, SavedModel>> models;  // file name -> model
};

/// Minimal k with closed-form (or trained) mse below success_mse, by binary
/// search over nested gate banks, per (m, d), trial and activation.
CommandOutput cmd_memorize(const ExperimentConfig& cfg);
/// Closed-form GaLU mse across kd/m ratios, optionally trained ReLU.
CommandOutput cmd_underparam(const ExperimentConfig& cfg);
CommandOutput cmd_clustered(const ExperimentConfig& cfg);
CommandOutput cmd_linsep(const ExperimentConfig& cfg);
CommandOutput cmd_parity(const ExperimentConfig& cfg);
CommandOutput cmd_kernel_check(const ExperimentConfig& cfg);
CommandOutput cmd_theory_check(const ExperimentConfig& cfg);

CommandOutput run_experiment(const ExperimentConfig& cfg);

/// Writes results.csv, config.json, summary.txt and any models under
/// cfg.out_dir. Throws ConfigError when the directory cannot be written.
void write_outputs(const ExperimentConfig& cfg, const CommandOutput& output);

/// Exit status for a finished command: 2 when a check failed, else 0.
int exit_status(const CommandOutput& output);

/// Mean of the last tenth of the logged objectives is within 1% of the
/// preceding tenth.
bool trace_plateaued(const TrainTrace& trace);

}  // namespace galu::experiments
