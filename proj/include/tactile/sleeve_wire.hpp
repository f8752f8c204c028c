#pragma once

// Host -> sleeve wire codec and a model of the 24-channel PWM driver chain.
//
// WireFrame layout (43 octets):
//   [0..1]  magic 0xAA 0x55
//   [2]     version 0x01
//   [3]     sequence number, wraps modulo 256
//   [4..41] 25 x 12-bit duties, motor 0 first, MSB-first, 4 zero pad bits
//   [42]    CRC-8/ATM (poly 0x07, init 0x00) over octets [2..41]

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>

#include "tactile/grid.hpp"

namespace tactile::wire {

inline constexpr std::uint8_t kMagic0 = 0xAA;
inline constexpr std::uint8_t kMagic1 = 0x55;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kPayloadOctets = 38;
inline constexpr std::size_t kFrameOctets = 43;
inline constexpr std::size_t kDriverChannels = 24;
inline constexpr std::size_t kDriverOctets = 36;  // 24 x 12 bits

using WireFrame = std::array<std::uint8_t, kFrameOctets>;
using ShiftData = std::array<std::uint8_t, kDriverOctets>;
using DriverChannels = std::array<std::uint16_t, kDriverChannels>;

std::uint8_t crc8_atm(std::span<const std::uint8_t> data);

WireFrame encode_wireframe(const MotorGrid& grid, std::uint8_t seq);

enum class DecodeError { BadMagic, BadVersion, BadLength, BadCrc };

struct DecodedFrame {
  MotorGrid grid;
  std::uint8_t seq = 0;
};

// Checks run in the order length, magic, CRC, version, so that corruption of
// the version octet is reported as BadCrc and only a well-formed frame from a
// different protocol revision yields BadVersion.
std::variant<DecodedFrame, DecodeError> decode_wireframe(std::span<const std::uint8_t> octets);

std::string to_string(DecodeError error);

struct ChannelSplit {
  DriverChannels driver{};
  std::uint16_t aux = 0;  // motor 24, on the microcontroller's own PWM pin
};

ChannelSplit split_channels(const MotorGrid& grid);

// Channel 23 is shifted out first, channel 0 last, each MSB-first.
// Throws std::out_of_range when a value exceeds 4095.
ShiftData pack_tlc5947(std::span<const std::uint16_t> channels);
DriverChannels unpack_tlc5947(const ShiftData& shifted);

struct DriverState {
  ShiftData shift_register{};
  DriverChannels latched_outputs{};
  std::uint16_t aux_output = 0;

  friend bool operator==(const DriverState&, const DriverState&) = default;
};

// Shifting 288 bits replaces the register; outputs follow only on latch.
DriverState emulate_driver(const DriverState& state, const ShiftData& shifted, bool latch);

// split -> pack -> shift + latch, plus the aux pin update.
DriverState drive_grid(const DriverState& state, const MotorGrid& grid);

std::string to_hex(std::span<const std::uint8_t> octets);

}  // namespace tactile::wire
