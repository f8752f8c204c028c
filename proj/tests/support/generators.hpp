#pragma once

#include <cstdint>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "tactile/haptic_map.hpp"

namespace gen {

inline std::filesystem::path source_dir() { return TACTILE_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& name) {
  return source_dir() / "tests" / "fixtures" / name;
}

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

struct ConfigCase {
  tactile::haptic::MappingConfig config;
  oracle::Pooling pooling;
};

inline ConfigCase random_config(Rng& rng) {
  ConfigCase c;
  c.config.mode = coin(rng) ? tactile::haptic::Mode::Indoor : tactile::haptic::Mode::Outdoor;
  c.config.near_clip_mm = static_cast<std::uint16_t>(uniform_int(rng, 1, 5000));
  c.config.far_clip_mm =
      static_cast<std::uint16_t>(c.config.near_clip_mm + uniform_int(rng, 1, 10000));
  c.config.max_duty = static_cast<std::uint16_t>(coin(rng, 0.7) ? 4095 : uniform_int(rng, 1, 4095));
  c.config.levels = uniform_int(rng, 2, std::min(64, c.config.max_duty + 1));
  c.config.nodata_max = coin(rng, 0.2);
  switch (uniform_int(rng, 0, 2)) {
    case 0:
      c.config.aggregation = tactile::haptic::MinValid{};
      c.pooling = {oracle::Rule::Min, 0};
      break;
    case 1:
      c.config.aggregation = tactile::haptic::MeanValid{};
      c.pooling = {oracle::Rule::Mean, 0};
      break;
    default: {
      const int per_mille = uniform_int(rng, 1, 999);
      c.config.aggregation = tactile::haptic::Percentile{per_mille / 1000.0};
      c.pooling = {oracle::Rule::Percentile, per_mille};
    }
  }
  return c;
}

// Depth values cluster around the clip window so that every branch of the
// mapping is exercised; `nodata` is the probability of a zero pixel.
inline tactile::haptic::DepthFrame random_frame(Rng& rng, int max_side, double nodata) {
  const int w = uniform_int(rng, 5, max_side);
  const int h = uniform_int(rng, 5, max_side);
  auto frame = tactile::haptic::DepthFrame::uniform(w, h, 0);
  // Some frames leave whole regions empty.
  const bool blank_band = coin(rng, 0.2);
  const int band_lo = uniform_int(rng, 0, w - 1);
  const int band_hi = uniform_int(rng, band_lo, w - 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint16_t d = 0;
      if (!(blank_band && x >= band_lo && x <= band_hi) && !coin(rng, nodata)) {
        d = static_cast<std::uint16_t>(uniform_int(rng, 1, coin(rng, 0.8) ? 12000 : 65535));
      }
      frame.depths[static_cast<std::size_t>(y * w + x)] = d;
    }
  }
  return frame;
}

}  // namespace gen
