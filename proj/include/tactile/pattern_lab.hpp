#pragma once

// Vibration pattern catalog, taxonomy and trial scoring.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tactile/grid.hpp"

namespace tactile::patterns {

inline constexpr int kDefaultStepMs = 500;

struct Activation {
  int motor = 0;
  std::uint16_t intensity = kMaxDuty;
  friend bool operator==(const Activation&, const Activation&) = default;
};

using Step = std::vector<Activation>;

// Movement direction a user reports. RowSweep: activity travels along the rows
// (horizontal, row-major raster). ColumnSweep: travels along the columns
// (vertical). DiagonalSweep: along both at once. Static: no movement.
enum class Direction { RowSweep, ColumnSweep, DiagonalSweep, Static, Unknown };

enum class Simultaneity { Single, LowerMultiple, HigherMultiple };

enum class Axis { SingleAxis, MultiAxis };

struct Pattern {
  std::string id;
  std::string name;
  int step_ms = kDefaultStepMs;
  std::vector<Step> steps;
  Direction direction = Direction::Unknown;  // canonical answer for criterion 1

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

class PatternError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Steps non-empty, each step a non-empty set of distinct motors < 25 with
// intensity in [1, 4095], step_ms > 0. Throws PatternError.
void validate(const Pattern& pattern);

// Sorts each step by motor index; validated patterns compare equal after this
// regardless of how their activations were listed.
Pattern normalized(Pattern pattern);

struct PatternClass {
  Simultaneity simultaneity = Simultaneity::Single;
  Axis axis = Axis::SingleAxis;
  friend bool operator==(const PatternClass&, const PatternClass&) = default;
};

std::size_t max_simultaneous(const Pattern& pattern);
Simultaneity simultaneity_for(std::size_t active_motors);
PatternClass classify(const Pattern& pattern);

// The eleven-pattern catalog, ids P1..P11.
const std::vector<Pattern>& builtin_patterns();
const Pattern* find_pattern(const std::vector<Pattern>& catalog, const std::string& id);

struct ScheduledGrid {
  int t_ms = 0;
  MotorGrid grid;
  friend bool operator==(const ScheduledGrid&, const ScheduledGrid&) = default;
};

// One grid per step at k * step_ms followed by an all-zero grid.
std::vector<ScheduledGrid> schedule(const Pattern& pattern);

// Inverse of schedule() for validated, normalized patterns.
Pattern from_schedule(const std::vector<ScheduledGrid>& entries, std::string id,
                      std::string name, Direction direction);

struct TrialRecord {
  std::string pattern_id;
  Direction answer_direction = Direction::Unknown;
  // Empty when the user gave no count (timeout); never meets criterion 2.
  std::optional<Simultaneity> answer_simultaneity;
  std::string timestamp;  // ISO-8601, UTC
};

enum class Verdict { Correct, PartiallyCorrect, Wrong };

struct TrialResult {
  Verdict verdict = Verdict::Wrong;
  bool criterion1_met = false;
  bool criterion2_met = false;
  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

class PatternMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

TrialResult score_trial(const Pattern& pattern, const TrialRecord& record);

struct VerdictShares {
  std::size_t correct = 0;
  std::size_t partial = 0;
  std::size_t wrong = 0;

  std::size_t total() const { return correct + partial + wrong; }
  double correct_pct() const;
  double partial_pct() const;
  double wrong_pct() const;

  friend bool operator==(const VerdictShares&, const VerdictShares&) = default;
};

// Only populated groups appear.
struct AccuracyTable {
  std::map<Simultaneity, VerdictShares> by_simultaneity;
  std::map<Axis, VerdictShares> by_axis;

  bool empty() const { return by_simultaneity.empty() && by_axis.empty(); }
};

AccuracyTable aggregate_trials(const std::vector<std::pair<Pattern, TrialRecord>>& trials);

// Percentage rounded half-up to one decimal, the reporting precision.
double round_one_decimal(double pct);

std::string to_string(Direction d);
std::string to_string(Simultaneity s);
std::string to_string(Axis a);
std::string to_string(Verdict v);
Direction parse_direction(const std::string& text);
Simultaneity parse_simultaneity(const std::string& text);

}  // namespace tactile::patterns
