#pragma once

#include <cstdint>

namespace nsp {

inline constexpr int kResidualMax = 1022;  // |x - (2*x1 - x2)| for 9-bit x

// Second-order linear-extrapolation predictor: e(n) = x(n) - 2x(n-1) + x(n-2).
// History starts at zero; encoder and decoder keep identical copies.
class Dpcm2 {
public:
  Dpcm2() = default;
  Dpcm2(int x1, int x2) : x1_(x1), x2_(x2) {}

  int forward(int x);
  // Throws Errc::corrupt_stream if the reconstruction leaves the 9-bit range.
  int inverse(int e);
  void reset() { x1_ = x2_ = 0; }

  int x1() const { return x1_; }
  int x2() const { return x2_; }
  bool operator==(const Dpcm2&) const = default;

private:
  int x1_ = 0;
  int x2_ = 0;
};

constexpr std::uint32_t zigzag_map(int e) {
  return e >= 0 ? static_cast<std::uint32_t>(e) << 1 : (static_cast<std::uint32_t>(-(e + 1)) << 1) | 1u;
}

constexpr int zigzag_unmap(std::uint32_t m) {
  return (m & 1u) ? -static_cast<int>((m + 1) >> 1) : static_cast<int>(m >> 1);
}

}  // namespace nsp
