#pragma once

#include <array>
#include <cstdint>

#include "nsp/bitio.hpp"

namespace nsp {

inline constexpr unsigned kRiceWindow = 64;
inline constexpr std::uint32_t kRiceEscapeQuotient = 512;
inline constexpr unsigned kRiceEscapeBits = 16;
inline constexpr unsigned kRiceChunkK = 8;

// Rice parameter per quantized zero-proportion bin; bin i covers p0 in
// [i/16, (i+1)/16) and stores round(log2(max(1, -1/log2(1 - p)))) at the bin's
// lower edge, with bin 0 evaluated at the Q0.8 resolution 1/256.
inline constexpr std::array<std::uint8_t, 16> kRiceLookup = {7, 3, 2, 2, 1, 1, 1, 0,
                                                              0, 0, 0, 0, 0, 0, 0, 0};

// Adaptive Golomb-Rice state tracking the proportion of zero symbols.
struct RiceState {
  std::uint32_t zero_count = 0;
  std::uint32_t symbol_count = 0;
  std::uint32_t p0_hat = 0;  // Q0.8, 0..256
  std::uint8_t k = kRiceLookup[0];

  bool operator==(const RiceState&) const = default;
};

void gc_adapt(RiceState& state, std::uint32_t m);

// Rice code with the current k, then adaptation. Quotients of 512 or more are
// written as 512 ones followed by 16 raw bits of m.
void gc_encode(RiceState& state, std::uint32_t m, BitWriter& out);
std::uint32_t gc_decode(RiceState& state, BitReader& in);

// Fixed-parameter Rice code with no adaptation (RLE side information).
void rice_encode_fixed(std::uint32_t m, unsigned k, BitWriter& out);
std::uint32_t rice_decode_fixed(unsigned k, BitReader& in);

}  // namespace nsp
