#include "tactile/run_summary.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace tactile::service {

long round_half_up(double value) { return static_cast<long>(std::floor(value + 0.5)); }

RunSummary aggregate_runs(const std::vector<PersonRuns>& persons) {
  RunSummary summary;
  summary.persons = persons;
  if (persons.empty()) return summary;

  const std::size_t runs = persons.front().seconds.size();
  for (const auto& p : persons) {
    if (p.seconds.size() != runs) {
      throw RaggedRuns("person '" + p.person + "' has " + std::to_string(p.seconds.size()) +
                       " runs, expected " + std::to_string(runs));
    }
  }

  for (std::size_t k = 0; k < runs; ++k) {
    double sum = 0.0;
    for (const auto& p : persons) sum += p.seconds[k];
    summary.mean_s.push_back(sum / static_cast<double>(persons.size()));
    summary.mean_rounded_s.push_back(round_half_up(summary.mean_s.back()));
  }
  if (runs > 0 && !(summary.mean_s.front() > 0.0)) {
    throw std::invalid_argument("first-run mean must be positive to express percentages");
  }
  for (std::size_t k = 0; k < runs; ++k) {
    summary.percent_of_first.push_back(
        round_half_up(100.0 * summary.mean_s[k] / summary.mean_s.front()));
  }
  return summary;
}

RunSummary aggregate_runs(const std::vector<std::vector<double>>& seconds) {
  std::vector<PersonRuns> persons;
  for (std::size_t i = 0; i < seconds.size(); ++i) {
    persons.push_back({"person" + std::to_string(i + 1), seconds[i]});
  }
  return aggregate_runs(persons);
}

double reduction_pct(const RunSummary& summary, std::size_t run_index) {
  return 100.0 * (1.0 - summary.mean_s.at(run_index) / summary.mean_s.at(0));
}

std::string format_run_summary(const RunSummary& summary) {
  std::size_t label_width = std::string("average time [sec]").size();
  for (const auto& p : summary.persons) {
    label_width = std::max(label_width, p.person.size() + 6);
  }
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(label_width)) << "" << std::right;
  for (std::size_t k = 0; k < summary.run_count(); ++k) out << "  Run " << std::setw(2) << k + 1;
  out << '\n';
  for (const auto& p : summary.persons) {
    out << std::left << std::setw(static_cast<int>(label_width)) << (p.person + " [sec]")
        << std::right;
    for (double s : p.seconds) {
      std::ostringstream cell;
      cell << s;
      out << std::setw(8) << cell.str();
    }
    out << '\n';
  }
  out << std::left << std::setw(static_cast<int>(label_width)) << "average time [sec]"
      << std::right;
  for (long m : summary.mean_rounded_s) out << std::setw(8) << m;
  out << '\n';
  out << std::left << std::setw(static_cast<int>(label_width)) << "average time [%]" << std::right;
  for (long p : summary.percent_of_first) out << std::setw(8) << p;
  out << '\n';
  return out.str();
}

}  // namespace tactile::service
