#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace nsp {

inline constexpr std::uint8_t kRasterEmpty = 0xA0;
inline constexpr std::uint8_t kRasterFiring = 0xA1;
inline constexpr std::size_t kRasterChannels = 68;
inline constexpr std::size_t kRasterBitmapBytes = 9;

// One 20 kHz tick of the spike raster. Empty ticks serialize to the header
// byte alone; firing ticks carry a 72-bit LSB-first bitmap and an LE tick.
struct RasterPacket {
  bool firing = false;
  std::array<std::uint8_t, kRasterBitmapBytes> bitmap{};
  std::uint32_t tick = 0;

  void append_to(std::vector<std::uint8_t>& out) const;
  std::vector<std::uint8_t> bytes() const;
  bool channel(std::size_t i) const { return (bitmap[i / 8] >> (i % 8)) & 1u; }
  bool operator==(const RasterPacket&) const = default;
};

// flags must hold exactly 68 detection bits (nonzero = fired).
RasterPacket raster_tick(std::span<const std::uint8_t> flags, std::uint32_t tick);

// Throws Errc::format on an unknown header or truncated packet.
std::vector<RasterPacket> parse_raster(std::span<const std::uint8_t> bytes);

}  // namespace nsp
