#include "nsp/rice.hpp"

#include <algorithm>
#include <string>

#include "nsp/core.hpp"

namespace nsp {

void gc_adapt(RiceState& state, std::uint32_t m) {
  state.zero_count += (m == 0);
  if (++state.symbol_count < kRiceWindow) return;
  const std::uint32_t fraction = (state.zero_count << 8) / kRiceWindow;
  state.p0_hat = (state.p0_hat + fraction) >> 1;
  state.k = kRiceLookup[std::min<std::uint32_t>(state.p0_hat >> 4, 15)];
  state.zero_count = 0;
  state.symbol_count = 0;
}

void rice_encode_fixed(std::uint32_t m, unsigned k, BitWriter& out) {
  const std::uint32_t q = m >> k;
  if (q >= kRiceEscapeQuotient) {
    if (m >= (1u << kRiceEscapeBits))
      throw Error(Errc::invalid_argument, "Rice escape value " + std::to_string(m) + " exceeds 16 bits");
    out.write_ones(kRiceEscapeQuotient);
    out.write(m, kRiceEscapeBits);
    return;
  }
  out.write_ones(q);
  out.write_bit(false);
  out.write(m & ((1u << k) - 1u), k);
}

std::uint32_t rice_decode_fixed(unsigned k, BitReader& in) {
  std::uint32_t q = 0;
  while (in.read_bit()) {
    if (++q == kRiceEscapeQuotient) return in.read(kRiceEscapeBits);
  }
  return (q << k) | in.read(k);
}

void gc_encode(RiceState& state, std::uint32_t m, BitWriter& out) {
  rice_encode_fixed(m, state.k, out);
  gc_adapt(state, m);
}

std::uint32_t gc_decode(RiceState& state, BitReader& in) {
  const auto m = rice_decode_fixed(state.k, in);
  gc_adapt(state, m);
  return m;
}

}  // namespace nsp
