#pragma once

// File formats owned by the mapping stage: 16-bit binary PGM depth frames and
// the flat `key = value` mapping config.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "tactile/haptic_map.hpp"

namespace tactile::haptic {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PgmFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// P5 with maxval <= 65535; samples are millimeters. Samples are big-endian
// 16-bit when maxval > 255, single octets otherwise.
DepthFrame read_pgm(std::istream& in);
DepthFrame read_pgm_file(const std::filesystem::path& path);

// Always writes maxval 65535.
void write_pgm(std::ostream& out, const DepthFrame& frame);
void write_pgm_file(const std::filesystem::path& path, const DepthFrame& frame);

// Keys: mode, near_clip_mm, far_clip_mm, levels, aggregation, max_duty,
// nodata_max. `mode` selects the defaults the other keys override, in any
// order. '#' starts a comment.
MappingConfig parse_config(std::istream& in);
MappingConfig read_config_file(const std::filesystem::path& path);
std::string format_config(const MappingConfig& config);

}  // namespace tactile::haptic
