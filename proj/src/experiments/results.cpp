#include "galu/experiments/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <tuple>

#include "galu/error.hpp"

namespace galu::experiments {

void sort_canonical(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.experiment, a.m, a.d, a.k, a.activation, a.metric, a.seed) <
           std::tie(b.experiment, b.m, b.d, b.k, b.activation, b.metric, b.seed);
  });
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    if (!std::isfinite(r.value))
      throw DomainError("result row " + r.experiment + "/" + r.metric + " has a non-finite value");
    out << r.experiment << ',' << r.m << ',' << r.d << ',' << r.k << ',' << r.activation << ','
        << r.metric << ',' << format_double(r.value) << ',' << r.seed << ','
        << format_double(r.elapsed_s) << '\n';
  }
}

void write_summary(std::ostream& out, const std::vector<CheckRow>& checks) {
  std::size_t passed = 0;
  for (const CheckRow& c : checks) {
    passed += c.passed;
    out << (c.passed ? "PASS " : "FAIL ") << c.property << " measured=" << format_double(c.measured)
        << " threshold=" << format_double(c.threshold);
    if (!c.detail.empty()) out << " (" << c.detail << ")";
    out << '\n';
  }
  out << passed << "/" << checks.size() << " properties passed\n";
}

bool all_passed(const std::vector<CheckRow>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRow& c) { return c.passed; });
}

}  // namespace galu::experiments
