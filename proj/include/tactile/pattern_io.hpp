#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactile/pattern_lab.hpp"

namespace tactile::patterns {

// {"id", "name", "step_ms", "steps": [[[motor, intensity], ...], ...]} plus an
// optional "direction" carrying the canonical answer.
nlohmann::json to_json(const Pattern& pattern);
Pattern pattern_from_json(const nlohmann::json& doc);  // throws PatternError
Pattern read_pattern_file(const std::filesystem::path& path);

nlohmann::json to_json(const TrialRecord& record);
TrialRecord trial_from_json(const nlohmann::json& doc);  // throws std::invalid_argument

// JSONL, one record per line; blank lines skipped.
std::vector<TrialRecord> read_trial_log(std::istream& in);
void write_trial_log(std::ostream& out, const std::vector<TrialRecord>& records);

nlohmann::json to_json(const VerdictShares& shares);
nlohmann::json to_json(const AccuracyTable& table);

// Current UTC time as 2026-01-31T12:00:00.000Z.
std::string iso8601_now();
bool is_iso8601(const std::string& text);

}  // namespace tactile::patterns
