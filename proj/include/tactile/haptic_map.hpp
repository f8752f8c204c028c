#pragma once

// Depth frame -> 5x5 motor grid mapping.
//
// Two stages: downsample() pools a WxH millimeter depth image into 25 cells,
// map_intensity() turns each cell distance into a quantized PWM duty. Both are
// pure functions; process_frame() is their composition.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tactile/grid.hpp"

namespace tactile::haptic {

inline constexpr std::uint16_t kNoData = 0;

struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> depths;  // row-major millimeters, 0 = no data
  std::uint64_t timestamp_ms = 0;

  std::uint16_t at(int row, int col) const {
    return depths[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(col)];
  }

  static DepthFrame uniform(int width, int height, std::uint16_t mm) {
    return DepthFrame{width, height,
                      std::vector<std::uint16_t>(static_cast<std::size_t>(width) *
                                                     static_cast<std::size_t>(height),
                                                 mm),
                      0};
  }
};

class FrameTooSmall : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Cell value is empty when the cell held no valid pixel.
using CellDepths = std::array<std::optional<std::uint16_t>, kMotorCount>;

enum class Mode { Indoor, Outdoor };

struct MinValid {
  friend bool operator==(const MinValid&, const MinValid&) = default;
};
struct MeanValid {
  friend bool operator==(const MeanValid&, const MeanValid&) = default;
};
// Nearest-rank percentile over the valid pixels; fraction in (0, 1).
struct Percentile {
  double fraction = 0.10;
  friend bool operator==(const Percentile&, const Percentile&) = default;
};
using Aggregation = std::variant<MinValid, Percentile, MeanValid>;

struct MappingConfig {
  Mode mode = Mode::Indoor;
  std::uint16_t near_clip_mm = 300;
  std::uint16_t far_clip_mm = 3000;
  int levels = 8;
  Aggregation aggregation = Percentile{0.10};
  std::uint16_t max_duty = kMaxDuty;
  // Treat a no-data cell as an obstacle at max_duty instead of silence.
  bool nodata_max = false;

  static MappingConfig indoor();
  static MappingConfig outdoor();

  // Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  friend bool operator==(const MappingConfig&, const MappingConfig&) = default;
};

// Half-open pixel range [begin, end) covered by cell index `cell` along an
// axis of `extent` pixels.
struct CellSpan {
  int begin = 0;
  int end = 0;
};
CellSpan cell_span(int cell, int extent);

CellDepths downsample(const DepthFrame& frame, const MappingConfig& config);

// Duty for a single valid cell distance.
std::uint16_t intensity_for_depth(std::uint16_t depth_mm, const MappingConfig& config);

MotorGrid map_intensity(const CellDepths& cells, const MappingConfig& config);

MotorGrid process_frame(const DepthFrame& frame, const MappingConfig& config);

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);
std::string to_string(const Aggregation& aggregation);
Aggregation parse_aggregation(const std::string& text);

}  // namespace tactile::haptic
