#include "tactile/pattern_io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <regex>
#include <sstream>

namespace tactile::patterns {

using nlohmann::json;

json to_json(const Pattern& pattern) {
  json steps = json::array();
  for (const auto& step : pattern.steps) {
    json motors = json::array();
    for (const auto& a : step) motors.push_back({a.motor, a.intensity});
    steps.push_back(std::move(motors));
  }
  return json{{"id", pattern.id},
              {"name", pattern.name},
              {"step_ms", pattern.step_ms},
              {"direction", to_string(pattern.direction)},
              {"steps", std::move(steps)}};
}

Pattern pattern_from_json(const json& doc) {
  Pattern pattern;
  try {
    pattern.id = doc.at("id").get<std::string>();
    pattern.name = doc.value("name", pattern.id);
    pattern.step_ms = doc.value("step_ms", kDefaultStepMs);
    if (doc.contains("direction")) {
      pattern.direction = parse_direction(doc.at("direction").get<std::string>());
    }
    for (const auto& step_doc : doc.at("steps")) {
      Step step;
      for (const auto& pair : step_doc) {
        if (!pair.is_array() || pair.size() != 2) {
          throw PatternError("step entries must be [motor_index, intensity] pairs");
        }
        const int motor = pair[0].get<int>();
        const int intensity = pair[1].get<int>();
        if (intensity < 0 || intensity > kMaxDuty) {
          throw PatternError("intensity out of range");
        }
        step.push_back({motor, static_cast<std::uint16_t>(intensity)});
      }
      pattern.steps.push_back(std::move(step));
    }
  } catch (const json::exception& e) {
    throw PatternError(std::string("malformed pattern document: ") + e.what());
  } catch (const PatternError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw PatternError(e.what());
  }
  validate(pattern);
  return normalized(std::move(pattern));
}

Pattern read_pattern_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PatternError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw PatternError(path.string() + ": " + e.what());
  }
  return pattern_from_json(doc);
}

json to_json(const TrialRecord& record) {
  json doc{{"pattern_id", record.pattern_id},
           {"answer_direction", to_string(record.answer_direction)},
           {"answer_simultaneity", nullptr},
           {"timestamp", record.timestamp}};
  if (record.answer_simultaneity) {
    doc["answer_simultaneity"] = to_string(*record.answer_simultaneity);
  }
  return doc;
}

TrialRecord trial_from_json(const json& doc) {
  TrialRecord record;
  try {
    record.pattern_id = doc.at("pattern_id").get<std::string>();
    record.answer_direction = parse_direction(doc.at("answer_direction").get<std::string>());
    const auto& sim = doc.at("answer_simultaneity");
    if (!sim.is_null()) record.answer_simultaneity = parse_simultaneity(sim.get<std::string>());
    record.timestamp = doc.at("timestamp").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed trial record: ") + e.what());
  }
  if (!is_iso8601(record.timestamp)) {
    throw std::invalid_argument("trial timestamp is not ISO-8601: '" + record.timestamp + "'");
  }
  return record;
}

std::vector<TrialRecord> read_trial_log(std::istream& in) {
  std::vector<TrialRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(trial_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("trial log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_trial_log(std::ostream& out, const std::vector<TrialRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

json to_json(const VerdictShares& shares) {
  return json{{"n", shares.total()},
              {"correct", shares.correct},
              {"partially_correct", shares.partial},
              {"wrong", shares.wrong},
              {"correct_pct", round_one_decimal(shares.correct_pct())},
              {"partially_correct_pct", round_one_decimal(shares.partial_pct())},
              {"wrong_pct", round_one_decimal(shares.wrong_pct())}};
}

json to_json(const AccuracyTable& table) {
  json by_sim = json::object();
  for (const auto& [cls, shares] : table.by_simultaneity) by_sim[to_string(cls)] = to_json(shares);
  json by_axis = json::object();
  for (const auto& [cls, shares] : table.by_axis) by_axis[to_string(cls)] = to_json(shares);
  return json{{"by_simultaneity", std::move(by_sim)}, {"by_axis", std::move(by_axis)}};
}

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()) % 1000;
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  std::tm utc{};
  gmtime_r(&secs, &utc);
  std::ostringstream out;
  out << std::put_time(&utc, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0')
      << ms.count() << 'Z';
  return out.str();
}

bool is_iso8601(const std::string& text) {
  static const std::regex pattern(
      R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2}))");
  return std::regex_match(text, pattern);
}

}  // namespace tactile::patterns
