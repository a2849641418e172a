#include "nsp/raster.hpp"

#include <algorithm>
#include <string>

#include "nsp/bitio.hpp"
#include "nsp/core.hpp"

namespace nsp {

void RasterPacket::append_to(std::vector<std::uint8_t>& out) const {
  if (!firing) {
    out.push_back(kRasterEmpty);
    return;
  }
  out.push_back(kRasterFiring);
  out.insert(out.end(), bitmap.begin(), bitmap.end());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(tick >> (8 * i)));
}

std::vector<std::uint8_t> RasterPacket::bytes() const {
  std::vector<std::uint8_t> out;
  append_to(out);
  return out;
}

RasterPacket raster_tick(std::span<const std::uint8_t> flags, std::uint32_t tick) {
  if (flags.size() != kRasterChannels)
    throw Error(Errc::invalid_argument, "raster tick needs exactly 68 detection bits");
  RasterPacket p;
  std::uint8_t any = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const std::uint8_t bit = flags[i] ? 1 : 0;
    p.bitmap[i / 8] |= static_cast<std::uint8_t>(bit << (i % 8));
    any |= bit;
  }
  p.firing = any != 0;
  if (p.firing) p.tick = tick;
  else p.bitmap.fill(0);
  return p;
}

std::vector<RasterPacket> parse_raster(std::span<const std::uint8_t> bytes) {
  std::vector<RasterPacket> out;
  ByteReader r(bytes);
  while (r.remaining() > 0) {
    const auto at = r.offset();
    const auto header = r.u8();
    RasterPacket p;
    if (header == kRasterFiring) {
      p.firing = true;
      auto bm = r.raw(kRasterBitmapBytes);
      std::copy(bm.begin(), bm.end(), p.bitmap.begin());
      if (p.bitmap[8] & 0xF0) throw Error(Errc::format, "raster bitmap sets padding bits at offset " + std::to_string(at));
      p.tick = r.u32();
    } else if (header != kRasterEmpty) {
      throw Error(Errc::format, "unknown raster header at offset " + std::to_string(at));
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace nsp
