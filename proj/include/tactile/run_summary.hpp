#pragma once

// Completion-time aggregation across persons and repeated runs.

#include <stdexcept>
#include <string>
#include <vector>

namespace tactile::service {

struct PersonRuns {
  std::string person;
  std::vector<double> seconds;  // one completion time per run, in run order
};

struct RunSummary {
  std::vector<PersonRuns> persons;
  std::vector<double> mean_s;        // unrounded per-run mean over persons
  std::vector<long> mean_rounded_s;  // nearest second, half up
  std::vector<long> percent_of_first;  // round(100 * mean_k / mean_1), half up

  std::size_t run_count() const { return mean_s.size(); }
};

class RaggedRuns : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

long round_half_up(double value);

// Throws RaggedRuns when persons have differing run counts and
// std::invalid_argument when the first-run mean is not positive.
RunSummary aggregate_runs(const std::vector<PersonRuns>& persons);
RunSummary aggregate_runs(const std::vector<std::vector<double>>& seconds);

// 100 * (1 - mean_k / mean_1): relative time reduction of run k.
double reduction_pct(const RunSummary& summary, std::size_t run_index);

std::string format_run_summary(const RunSummary& summary);

}  // namespace tactile::service
