#include "tactile/sleeve_wire.hpp"

#include <stdexcept>

namespace tactile::wire {

namespace {

constexpr std::array<std::uint8_t, 256> make_crc_table() {
  std::array<std::uint8_t, 256> table{};
  for (int i = 0; i < 256; ++i) {
    auto crc = static_cast<std::uint8_t>(i);
    for (int bit = 0; bit < 8; ++bit) {
      crc = static_cast<std::uint8_t>((crc & 0x80) ? (crc << 1) ^ 0x07 : crc << 1);
    }
    table[static_cast<std::size_t>(i)] = crc;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

// MSB-first bit writer over a fixed octet buffer.
class BitWriter {
 public:
  explicit BitWriter(std::span<std::uint8_t> out) : out_(out) {}

  void put12(std::uint16_t value) {
    for (int bit = 11; bit >= 0; --bit) {
      if ((value >> bit) & 1U) out_[pos_ / 8] |= static_cast<std::uint8_t>(0x80U >> (pos_ % 8));
      ++pos_;
    }
  }

 private:
  std::span<std::uint8_t> out_;
  std::size_t pos_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint16_t get12() {
    std::uint16_t value = 0;
    for (int bit = 0; bit < 12; ++bit) {
      const bool set = (in_[pos_ / 8] >> (7 - pos_ % 8)) & 1U;
      value = static_cast<std::uint16_t>((value << 1) | (set ? 1U : 0U));
      ++pos_;
    }
    return value;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint8_t crc8_atm(std::span<const std::uint8_t> data) {
  std::uint8_t crc = 0x00;
  for (auto octet : data) crc = kCrcTable[crc ^ octet];
  return crc;
}

WireFrame encode_wireframe(const MotorGrid& grid, std::uint8_t seq) {
  WireFrame frame{};
  frame[0] = kMagic0;
  frame[1] = kMagic1;
  frame[2] = kVersion;
  frame[3] = seq;
  BitWriter writer{std::span<std::uint8_t>(frame).subspan(4, kPayloadOctets)};
  for (std::size_t i = 0; i < kMotorCount; ++i) writer.put12(grid[i]);
  frame[kFrameOctets - 1] = crc8_atm(std::span(frame).subspan(2, 2 + kPayloadOctets));
  return frame;
}

std::variant<DecodedFrame, DecodeError> decode_wireframe(std::span<const std::uint8_t> octets) {
  if (octets.size() != kFrameOctets) return DecodeError::BadLength;
  if (octets[0] != kMagic0 || octets[1] != kMagic1) return DecodeError::BadMagic;
  if (crc8_atm(octets.subspan(2, 2 + kPayloadOctets)) != octets[kFrameOctets - 1]) {
    return DecodeError::BadCrc;
  }
  if (octets[2] != kVersion) return DecodeError::BadVersion;

  DecodedFrame decoded;
  decoded.seq = octets[3];
  BitReader reader(octets.subspan(4, kPayloadOctets));
  for (std::size_t i = 0; i < kMotorCount; ++i) decoded.grid.set(i, reader.get12());
  return decoded;
}

std::string to_string(DecodeError error) {
  switch (error) {
    case DecodeError::BadMagic:
      return "BadMagic";
    case DecodeError::BadVersion:
      return "BadVersion";
    case DecodeError::BadLength:
      return "BadLength";
    case DecodeError::BadCrc:
      return "BadCrc";
  }
  return "Unknown";
}

ChannelSplit split_channels(const MotorGrid& grid) {
  ChannelSplit split;
  for (std::size_t i = 0; i < kDriverChannels; ++i) split.driver[i] = grid[i];
  split.aux = grid[kMotorCount - 1];
  return split;
}

ShiftData pack_tlc5947(std::span<const std::uint16_t> channels) {
  if (channels.size() != kDriverChannels) {
    throw std::invalid_argument("TLC5947 chain needs exactly 24 channels");
  }
  ShiftData out{};
  BitWriter writer(out);
  for (std::size_t k = kDriverChannels; k-- > 0;) {
    if (channels[k] > kMaxDuty) {
      throw std::out_of_range("channel " + std::to_string(k) + " exceeds 4095");
    }
    writer.put12(channels[k]);
  }
  return out;
}

DriverChannels unpack_tlc5947(const ShiftData& shifted) {
  DriverChannels channels{};
  BitReader reader(shifted);
  for (std::size_t k = kDriverChannels; k-- > 0;) channels[k] = reader.get12();
  return channels;
}

DriverState emulate_driver(const DriverState& state, const ShiftData& shifted, bool latch) {
  DriverState next = state;
  next.shift_register = shifted;
  if (latch) next.latched_outputs = unpack_tlc5947(next.shift_register);
  return next;
}

DriverState drive_grid(const DriverState& state, const MotorGrid& grid) {
  const ChannelSplit split = split_channels(grid);
  DriverState next = emulate_driver(state, pack_tlc5947(split.driver), true);
  next.aux_output = split.aux;
  return next;
}

std::string to_hex(std::span<const std::uint8_t> octets) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(octets.size() * 2);
  for (auto o : octets) {
    out.push_back(kDigits[o >> 4]);
    out.push_back(kDigits[o & 0x0F]);
  }
  return out;
}

}  // namespace tactile::wire
