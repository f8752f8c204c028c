#include "tactile/log_scoring.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tactile/pattern_io.hpp"

namespace tactile::service {

using nlohmann::json;

bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
    const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
    if (da && db) {
      std::size_t ie = i;
      std::size_t je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      const std::string na = a.substr(i, ie - i);
      const std::string nb = b.substr(j, je - j);
      const auto sa = na.find_first_not_of('0');
      const auto sb = nb.find_first_not_of('0');
      const std::string ta = sa == std::string::npos ? "" : na.substr(sa);
      const std::string tb = sb == std::string::npos ? "" : nb.substr(sb);
      if (ta.size() != tb.size()) return ta.size() < tb.size();
      if (ta != tb) return ta < tb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

ScoreReport score_logs(const std::filesystem::path& dir,
                       const std::vector<patterns::Pattern>& catalog) {
  ScoreReport report;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) report.warnings.push_back("no .jsonl logs in " + dir.string());

  std::map<std::string, std::map<int, double>, decltype(&natural_less)> times(&natural_less);
  std::vector<std::pair<patterns::Pattern, patterns::TrialRecord>> trials;

  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) {
      report.warnings.push_back("cannot read " + file.string());
      continue;
    }
    ++report.files_read;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string where = file.filename().string() + ":" + std::to_string(line_no);
      json doc;
      try {
        doc = json::parse(line);
      } catch (const json::exception&) {
        report.warnings.push_back(where + ": not valid JSON, skipped");
        continue;
      }
      if (!doc.is_object()) continue;

      if (doc.contains("pattern_id") && doc.contains("answer_direction")) {
        try {
          patterns::TrialRecord record = patterns::trial_from_json(doc);
          const patterns::Pattern* pattern = patterns::find_pattern(catalog, record.pattern_id);
          if (pattern == nullptr) {
            report.warnings.push_back(where + ": unknown pattern '" + record.pattern_id + "'");
            continue;
          }
          trials.emplace_back(*pattern, std::move(record));
        } catch (const std::exception& e) {
          report.warnings.push_back(where + ": " + e.what());
        }
        continue;
      }

      if (doc.value("kind", "") == "summary" && doc.value("mode", "") == "navigate" &&
          doc.contains("person") && doc.contains("run")) {
        try {
          const auto person = doc.at("person").get<std::string>();
          const int run = doc.at("run").get<int>();
          if (doc.value("did_not_finish", false) || doc.at("completion_time_s").is_null()) {
            report.warnings.push_back(where + ": " + person + " run " + std::to_string(run) +
                                      " did not finish, excluded");
            continue;
          }
          if (!times[person].emplace(run, doc.at("completion_time_s").get<double>()).second) {
            report.warnings.push_back(where + ": duplicate " + person + " run " +
                                      std::to_string(run) + ", first kept");
          }
        } catch (const json::exception& e) {
          report.warnings.push_back(where + ": " + e.what());
        }
      }
    }
  }

  report.trial_count = trials.size();
  report.accuracy = patterns::aggregate_trials(trials);

  if (!times.empty()) {
    std::map<int, int> run_counts;
    for (const auto& [person, runs] : times) {
      for (const auto& [run, secs] : runs) ++run_counts[run];
    }
    std::vector<PersonRuns> persons;
    for (const auto& [person, runs] : times) {
      if (runs.size() != run_counts.size()) {
        report.warnings.push_back(person + " lacks some runs, excluded from the run summary");
        continue;
      }
      PersonRuns p{person, {}};
      for (const auto& [run, secs] : runs) p.seconds.push_back(secs);
      persons.push_back(std::move(p));
    }
    if (!persons.empty()) report.runs = aggregate_runs(persons);
  }
  return report;
}

std::string format_accuracy(const patterns::AccuracyTable& table) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  auto header = [&out](const char* title) {
    out << std::left << std::setw(18) << title << std::right << std::setw(6) << "n"
        << std::setw(10) << "correct" << std::setw(10) << "partial" << std::setw(10) << "wrong"
        << '\n';
  };
  auto row = [&out](const std::string& label, const patterns::VerdictShares& s) {
    out << std::left << std::setw(18) << label << std::right << std::setw(6) << s.total()
        << std::setw(9) << patterns::round_one_decimal(s.correct_pct()) << '%' << std::setw(9)
        << patterns::round_one_decimal(s.partial_pct()) << '%' << std::setw(9)
        << patterns::round_one_decimal(s.wrong_pct()) << '%' << '\n';
  };
  header("by simultaneity");
  for (const auto& [cls, shares] : table.by_simultaneity) row(patterns::to_string(cls), shares);
  header("by axis");
  for (const auto& [cls, shares] : table.by_axis) row(patterns::to_string(cls), shares);
  return out.str();
}

}  // namespace tactile::service
