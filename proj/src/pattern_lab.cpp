#include "tactile/pattern_lab.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace tactile::patterns {

void validate(const Pattern& pattern) {
  if (pattern.id.empty()) throw PatternError("pattern id is empty");
  if (pattern.step_ms <= 0) throw PatternError(pattern.id + ": step_ms must be positive");
  if (pattern.steps.empty()) throw PatternError(pattern.id + ": pattern has no steps");
  for (std::size_t k = 0; k < pattern.steps.size(); ++k) {
    const Step& step = pattern.steps[k];
    if (step.empty()) {
      throw PatternError(pattern.id + ": step " + std::to_string(k) + " activates no motor");
    }
    std::set<int> seen;
    for (const auto& a : step) {
      if (a.motor < 0 || a.motor >= static_cast<int>(kMotorCount)) {
        throw PatternError(pattern.id + ": motor index " + std::to_string(a.motor) +
                           " out of range");
      }
      if (a.intensity == 0 || a.intensity > kMaxDuty) {
        throw PatternError(pattern.id + ": intensity must be in [1, 4095]");
      }
      if (!seen.insert(a.motor).second) {
        throw PatternError(pattern.id + ": motor " + std::to_string(a.motor) +
                           " listed twice in step " + std::to_string(k));
      }
    }
  }
}

Pattern normalized(Pattern pattern) {
  for (auto& step : pattern.steps) {
    std::sort(step.begin(), step.end(),
              [](const Activation& a, const Activation& b) { return a.motor < b.motor; });
  }
  return pattern;
}

std::size_t max_simultaneous(const Pattern& pattern) {
  std::size_t most = 0;
  for (const auto& step : pattern.steps) most = std::max(most, step.size());
  return most;
}

Simultaneity simultaneity_for(std::size_t active_motors) {
  if (active_motors <= 1) return Simultaneity::Single;
  if (active_motors <= 5) return Simultaneity::LowerMultiple;
  return Simultaneity::HigherMultiple;
}

namespace {

enum class Move { None, RowOrder, ColumnOrder, Other };

int column_major(int motor) { return (motor % kGridSide) * kGridSide + motor / kGridSide; }

std::vector<int> motors_of(const Step& step, bool column_order) {
  std::vector<int> out;
  out.reserve(step.size());
  for (const auto& a : step) out.push_back(column_order ? column_major(a.motor) : a.motor);
  std::sort(out.begin(), out.end());
  return out;
}

// True when `to` is `from` shifted by the same +1 or -1 in linear index.
bool unit_raster_shift(const std::vector<int>& from, const std::vector<int>& to) {
  if (from.size() != to.size() || from.empty()) return false;
  for (int delta : {1, -1}) {
    bool all = true;
    for (std::size_t i = 0; i < from.size() && all; ++i) all = to[i] == from[i] + delta;
    if (all) return true;
  }
  return false;
}

Move classify_move(const Step& from, const Step& to) {
  if (motors_of(from, false) == motors_of(to, false)) return Move::None;
  if (unit_raster_shift(motors_of(from, false), motors_of(to, false))) return Move::RowOrder;
  if (unit_raster_shift(motors_of(from, true), motors_of(to, true))) return Move::ColumnOrder;
  return Move::Other;
}

}  // namespace

PatternClass classify(const Pattern& pattern) {
  PatternClass cls;
  cls.simultaneity = simultaneity_for(max_simultaneous(pattern));

  bool row = false;
  bool column = false;
  for (std::size_t k = 1; k < pattern.steps.size(); ++k) {
    switch (classify_move(pattern.steps[k - 1], pattern.steps[k])) {
      case Move::None:
        break;
      case Move::RowOrder:
        row = true;
        break;
      case Move::ColumnOrder:
        column = true;
        break;
      case Move::Other:
        cls.axis = Axis::MultiAxis;
        return cls;
    }
  }
  cls.axis = row && column ? Axis::MultiAxis : Axis::SingleAxis;
  return cls;
}

namespace {

Step step_where(auto predicate) {
  Step step;
  for (int r = 0; r < kGridSide; ++r) {
    for (int c = 0; c < kGridSide; ++c) {
      if (predicate(r, c)) step.push_back({static_cast<int>(motor_index(r, c)), kMaxDuty});
    }
  }
  return step;
}

Step single(int motor) { return Step{{motor, kMaxDuty}}; }

Pattern make(std::string id, std::string name, Direction direction, std::vector<Step> steps) {
  return normalized(Pattern{std::move(id), std::move(name), kDefaultStepMs, std::move(steps),
                            direction});
}

std::vector<Pattern> build_catalog() {
  std::vector<Pattern> catalog;
  std::vector<Step> steps;

  for (int i = 0; i < 25; ++i) steps.push_back(single(i));
  catalog.push_back(make("P1", "row sweep", Direction::RowSweep, steps));

  steps.clear();
  for (int k = 0; k <= 8; ++k) steps.push_back(step_where([k](int r, int c) { return r + c == k; }));
  catalog.push_back(make("P2", "diagonal wavefront", Direction::DiagonalSweep, steps));

  steps.clear();
  for (int k = 0; k < 5; ++k) steps.push_back(step_where([k](int r, int) { return r == k; }));
  catalog.push_back(make("P3", "row bar top to bottom", Direction::ColumnSweep, steps));

  steps.clear();
  for (int k = 0; k < 5; ++k) steps.push_back(step_where([k](int, int c) { return c == k; }));
  catalog.push_back(make("P4", "column bar left to right", Direction::RowSweep, steps));

  steps.clear();
  for (int k = 0; k < 5; ++k) {
    steps.push_back(step_where([k](int r, int c) { return std::max(r, c) == k; }));
  }
  catalog.push_back(make("P5", "expanding frame", Direction::DiagonalSweep, steps));

  catalog.push_back(make("P6", "localization triad", Direction::Static,
                         {Step{{6, kMaxDuty}, {8, kMaxDuty}, {17, kMaxDuty}}}));

  steps.clear();
  for (int i = 0; i < 25; ++i) steps.push_back(single(column_major(i)));
  catalog.push_back(make("P7", "column sweep", Direction::ColumnSweep, steps));

  steps.clear();
  for (int i = 24; i >= 0; --i) steps.push_back(single(i));
  catalog.push_back(make("P8", "reverse row sweep", Direction::RowSweep, steps));

  steps.clear();
  for (int k = 0; k < 5; ++k) steps.push_back(single(static_cast<int>(motor_index(k, k))));
  catalog.push_back(make("P9", "diagonal single sweep", Direction::DiagonalSweep, steps));

  steps.clear();
  for (int k = 0; k < 5; ++k) {
    steps.push_back(step_where([k](int r, int c) { return std::min(r, c) == k; }));
  }
  catalog.push_back(make("P10", "contracting frame", Direction::DiagonalSweep, steps));

  catalog.push_back(make("P11", "localization cross", Direction::Static,
                         {step_where([](int r, int c) {
                           return c == 2 || (r == 2 && (c == 1 || c == 3));
                         })}));

  for (const auto& p : catalog) validate(p);
  return catalog;
}

}  // namespace

const std::vector<Pattern>& builtin_patterns() {
  static const std::vector<Pattern> catalog = build_catalog();
  return catalog;
}

const Pattern* find_pattern(const std::vector<Pattern>& catalog, const std::string& id) {
  const auto it = std::find_if(catalog.begin(), catalog.end(),
                               [&id](const Pattern& p) { return p.id == id; });
  return it == catalog.end() ? nullptr : &*it;
}

std::vector<ScheduledGrid> schedule(const Pattern& pattern) {
  std::vector<ScheduledGrid> entries;
  entries.reserve(pattern.steps.size() + 1);
  int t = 0;
  for (const auto& step : pattern.steps) {
    MotorGrid grid;
    for (const auto& a : step) grid.set(static_cast<std::size_t>(a.motor), a.intensity);
    entries.push_back({t, grid});
    t += pattern.step_ms;
  }
  entries.push_back({t, MotorGrid{}});
  return entries;
}

Pattern from_schedule(const std::vector<ScheduledGrid>& entries, std::string id,
                      std::string name, Direction direction) {
  Pattern pattern{std::move(id), std::move(name), kDefaultStepMs, {}, direction};
  if (entries.size() >= 2) pattern.step_ms = entries[1].t_ms - entries[0].t_ms;
  for (std::size_t k = 0; k + 1 < entries.size(); ++k) {
    Step step;
    for (std::size_t i = 0; i < kMotorCount; ++i) {
      if (entries[k].grid[i] != 0) step.push_back({static_cast<int>(i), entries[k].grid[i]});
    }
    pattern.steps.push_back(std::move(step));
  }
  return pattern;
}

TrialResult score_trial(const Pattern& pattern, const TrialRecord& record) {
  if (record.pattern_id != pattern.id) {
    throw PatternMismatch("trial answers pattern '" + record.pattern_id + "', not '" +
                          pattern.id + "'");
  }
  TrialResult result;
  result.criterion1_met = record.answer_direction == pattern.direction;
  result.criterion2_met = record.answer_simultaneity.has_value() &&
                          *record.answer_simultaneity == classify(pattern).simultaneity;
  if (result.criterion1_met && result.criterion2_met) {
    result.verdict = Verdict::Correct;
  } else if (result.criterion1_met || result.criterion2_met) {
    result.verdict = Verdict::PartiallyCorrect;
  } else {
    result.verdict = Verdict::Wrong;
  }
  return result;
}

namespace {

double share(std::size_t part, std::size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(total);
}

void tally(VerdictShares& shares, Verdict verdict) {
  switch (verdict) {
    case Verdict::Correct:
      ++shares.correct;
      break;
    case Verdict::PartiallyCorrect:
      ++shares.partial;
      break;
    case Verdict::Wrong:
      ++shares.wrong;
      break;
  }
}

}  // namespace

double VerdictShares::correct_pct() const { return share(correct, total()); }
double VerdictShares::partial_pct() const { return share(partial, total()); }
double VerdictShares::wrong_pct() const { return share(wrong, total()); }

AccuracyTable aggregate_trials(const std::vector<std::pair<Pattern, TrialRecord>>& trials) {
  AccuracyTable table;
  for (const auto& [pattern, record] : trials) {
    const Verdict verdict = score_trial(pattern, record).verdict;
    const PatternClass cls = classify(pattern);
    tally(table.by_simultaneity[cls.simultaneity], verdict);
    tally(table.by_axis[cls.axis], verdict);
  }
  return table;
}

double round_one_decimal(double pct) { return std::floor(pct * 10.0 + 0.5 + 1e-9) / 10.0; }

std::string to_string(Direction d) {
  switch (d) {
    case Direction::RowSweep:
      return "RowSweep";
    case Direction::ColumnSweep:
      return "ColumnSweep";
    case Direction::DiagonalSweep:
      return "DiagonalSweep";
    case Direction::Static:
      return "Static";
    case Direction::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

std::string to_string(Simultaneity s) {
  switch (s) {
    case Simultaneity::Single:
      return "Single";
    case Simultaneity::LowerMultiple:
      return "LowerMultiple";
    case Simultaneity::HigherMultiple:
      return "HigherMultiple";
  }
  return "Single";
}

std::string to_string(Axis a) { return a == Axis::SingleAxis ? "SingleAxis" : "MultiAxis"; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Correct:
      return "Correct";
    case Verdict::PartiallyCorrect:
      return "PartiallyCorrect";
    case Verdict::Wrong:
      return "Wrong";
  }
  return "Wrong";
}

Direction parse_direction(const std::string& text) {
  for (auto d : {Direction::RowSweep, Direction::ColumnSweep, Direction::DiagonalSweep,
                 Direction::Static, Direction::Unknown}) {
    if (to_string(d) == text) return d;
  }
  throw std::invalid_argument("unknown direction '" + text + "'");
}

Simultaneity parse_simultaneity(const std::string& text) {
  for (auto s : {Simultaneity::Single, Simultaneity::LowerMultiple, Simultaneity::HigherMultiple}) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument("unknown simultaneity '" + text + "'");
}

}  // namespace tactile::patterns
