#include "tactile/haptic_map.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace tactile::haptic {

MappingConfig MappingConfig::indoor() { return MappingConfig{}; }

MappingConfig MappingConfig::outdoor() {
  MappingConfig config;
  config.mode = Mode::Outdoor;
  config.near_clip_mm = 2000;
  config.far_clip_mm = 6000;
  return config;
}

void MappingConfig::validate() const {
  if (near_clip_mm == 0 || near_clip_mm >= far_clip_mm) {
    throw std::invalid_argument("mapping config: need 0 < near_clip_mm < far_clip_mm");
  }
  if (max_duty == 0 || max_duty > kMaxDuty) {
    throw std::invalid_argument("mapping config: max_duty must be in [1, 4095]");
  }
  if (levels < 2 || levels > static_cast<int>(max_duty) + 1) {
    throw std::invalid_argument("mapping config: levels must be in [2, max_duty + 1]");
  }
  if (const auto* p = std::get_if<Percentile>(&aggregation)) {
    if (!(p->fraction > 0.0 && p->fraction < 1.0)) {
      throw std::invalid_argument("mapping config: percentile fraction must be in (0, 1)");
    }
  }
}

CellSpan cell_span(int cell, int extent) {
  return CellSpan{cell * extent / kGridSide, (cell + 1) * extent / kGridSide};
}

namespace {

std::uint16_t aggregate(std::vector<std::uint16_t>& valid, const Aggregation& rule) {
  if (std::holds_alternative<MinValid>(rule)) {
    return *std::min_element(valid.begin(), valid.end());
  }
  if (std::holds_alternative<MeanValid>(rule)) {
    std::uint64_t sum = 0;
    for (auto v : valid) sum += v;
    // Round half up in integer arithmetic; stays within [min, max].
    return static_cast<std::uint16_t>((2 * sum + valid.size()) / (2 * valid.size()));
  }
  const double fraction = std::get<Percentile>(rule).fraction;
  const auto n = valid.size();
  // The tolerance keeps e.g. 0.1 * 30 at rank 3 despite binary rounding.
  auto rank = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  auto nth = valid.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(valid.begin(), nth, valid.end());
  return *nth;
}

}  // namespace

CellDepths downsample(const DepthFrame& frame, const MappingConfig& config) {
  if (frame.width < kGridSide || frame.height < kGridSide) {
    throw FrameTooSmall("depth frame " + std::to_string(frame.width) + "x" +
                        std::to_string(frame.height) + " is smaller than 5x5");
  }
  if (frame.depths.size() !=
      static_cast<std::size_t>(frame.width) * static_cast<std::size_t>(frame.height)) {
    throw std::invalid_argument("depth frame buffer does not match width x height");
  }

  CellDepths cells;
  std::vector<std::uint16_t> valid;
  for (int r = 0; r < kGridSide; ++r) {
    const CellSpan rows = cell_span(r, frame.height);
    for (int c = 0; c < kGridSide; ++c) {
      const CellSpan cols = cell_span(c, frame.width);
      valid.clear();
      for (int y = rows.begin; y < rows.end; ++y) {
        for (int x = cols.begin; x < cols.end; ++x) {
          const auto d = frame.at(y, x);
          if (d != kNoData) valid.push_back(d);
        }
      }
      if (!valid.empty()) cells[motor_index(r, c)] = aggregate(valid, config.aggregation);
    }
  }
  return cells;
}

std::uint16_t intensity_for_depth(std::uint16_t depth_mm, const MappingConfig& config) {
  const double max_duty = config.max_duty;
  const double near = config.near_clip_mm;
  const double far = config.far_clip_mm;
  // Outdoors the near field belongs to the cane.
  if (config.mode == Mode::Outdoor && depth_mm < config.near_clip_mm) return 0;
  if (depth_mm <= config.near_clip_mm) return config.max_duty;
  if (depth_mm >= config.far_clip_mm) return 0;

  const double raw = max_duty * (far - depth_mm) / (far - near);
  const double step = std::floor(raw * config.levels / (max_duty + 1.0));
  const double value = std::round(step * (max_duty / (config.levels - 1)));
  return static_cast<std::uint16_t>(std::min(value, max_duty));
}

MotorGrid map_intensity(const CellDepths& cells, const MappingConfig& config) {
  MotorGrid grid;
  for (std::size_t i = 0; i < kMotorCount; ++i) {
    if (cells[i]) {
      grid.set(i, intensity_for_depth(*cells[i], config));
    } else if (config.nodata_max) {
      grid.set(i, config.max_duty);
    }
  }
  return grid;
}

MotorGrid process_frame(const DepthFrame& frame, const MappingConfig& config) {
  return map_intensity(downsample(frame, config), config);
}

std::string to_string(Mode mode) { return mode == Mode::Indoor ? "Indoor" : "Outdoor"; }

Mode parse_mode(const std::string& text) {
  std::string lower;
  for (char ch : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (lower == "indoor") return Mode::Indoor;
  if (lower == "outdoor") return Mode::Outdoor;
  throw std::invalid_argument("unknown mode '" + text + "'");
}

std::string to_string(const Aggregation& aggregation) {
  if (std::holds_alternative<MinValid>(aggregation)) return "MinValid";
  if (std::holds_alternative<MeanValid>(aggregation)) return "MeanValid";
  std::ostringstream out;
  out << "Percentile(" << std::get<Percentile>(aggregation).fraction << ")";
  return out.str();
}

Aggregation parse_aggregation(const std::string& text) {
  if (text == "MinValid") return MinValid{};
  if (text == "MeanValid") return MeanValid{};
  const std::string prefix = "Percentile(";
  if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size() + 1 && text.back() == ')') {
    const std::string number = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    std::size_t used = 0;
    double fraction = 0.0;
    try {
      fraction = std::stod(number, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == number.size() && used > 0) return Percentile{fraction};
  }
  throw std::invalid_argument("unknown aggregation '" + text + "'");
}

}  // namespace tactile::haptic
