#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "galu/types.hpp"

namespace galu::experiments {

struct ResultRow {
  std::string experiment;
  Index m = 0;
  Index d = 0;
  Index k = 0;
  std::string activation;
  std::string metric;
  double value = 0.0;
  std::uint64_t seed = 0;
  double elapsed_s = 0.0;
};

/// One property of a check suite, measured against its threshold.
struct CheckRow {
  std::string property;
  double measured = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

inline constexpr const char* kCsvHeader =
    "experiment,param_m,param_d,param_k,activation,metric,value,seed,elapsed_s";

/// Sort by (experiment, m, d, k, activation, metric, seed).
void sort_canonical(std::vector<ResultRow>& rows);

/// Header plus one line per row; floats with 17 significant digits. Throws
/// DomainError on a non-finite value.
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

/// Formats a double with 17 significant digits.
std::string format_double(double value);

/// "PASS <property> measured=... threshold=..." lines and a final tally.
void write_summary(std::ostream& out, const std::vector<CheckRow>& checks);

bool all_passed(const std::vector<CheckRow>& checks);

}  // namespace galu::experiments
