#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace tactile {

inline constexpr int kGridSide = 5;
inline constexpr std::size_t kMotorCount = 25;
inline constexpr std::uint16_t kMaxDuty = 4095;  // 12-bit PWM grayscale

inline constexpr std::size_t motor_index(int row, int col) {
  return static_cast<std::size_t>(row * kGridSide + col);
}

// 5x5 vibration intensities, row-major, index 0 = top-left motor.
class MotorGrid {
 public:
  MotorGrid() = default;

  static MotorGrid from_values(std::span<const std::uint16_t> values) {
    if (values.size() != kMotorCount) {
      throw std::invalid_argument("motor grid needs 25 values, got " +
                                  std::to_string(values.size()));
    }
    MotorGrid grid;
    for (std::size_t i = 0; i < kMotorCount; ++i) grid.set(i, values[i]);
    return grid;
  }

  static MotorGrid uniform(std::uint16_t value) {
    MotorGrid grid;
    for (std::size_t i = 0; i < kMotorCount; ++i) grid.set(i, value);
    return grid;
  }

  std::uint16_t operator[](std::size_t i) const { return values_[i]; }
  std::uint16_t at(int row, int col) const { return values_.at(motor_index(row, col)); }

  void set(std::size_t i, std::uint16_t value) {
    if (i >= kMotorCount) throw std::out_of_range("motor index out of range");
    if (value > kMaxDuty) throw std::out_of_range("intensity exceeds 4095");
    values_[i] = value;
  }

  const std::array<std::uint16_t, kMotorCount>& values() const { return values_; }

  bool all_zero() const {
    for (auto v : values_) {
      if (v != 0) return false;
    }
    return true;
  }

  friend bool operator==(const MotorGrid&, const MotorGrid&) = default;

 private:
  std::array<std::uint16_t, kMotorCount> values_{};
};

}  // namespace tactile
