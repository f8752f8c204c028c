#pragma once

// Offline scoring of a directory of JSONL logs: navigation summaries labelled
// with person and run feed aggregate_runs, trial records feed
// aggregate_trials.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tactile/pattern_lab.hpp"
#include "tactile/run_summary.hpp"

namespace tactile::service {

struct ScoreReport {
  std::optional<RunSummary> runs;
  patterns::AccuracyTable accuracy;
  std::size_t trial_count = 0;
  std::size_t files_read = 0;
  std::vector<std::string> warnings;
};

// Reads every *.jsonl file under `dir` (non-recursive, name order).
// Unparseable lines and records that cannot be scored become warnings.
ScoreReport score_logs(const std::filesystem::path& dir,
                       const std::vector<patterns::Pattern>& catalog);

std::string format_accuracy(const patterns::AccuracyTable& table);

// "person2" < "person10".
bool natural_less(const std::string& a, const std::string& b);

}  // namespace tactile::service
