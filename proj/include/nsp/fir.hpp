#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace nsp {

inline constexpr std::size_t kFirChannels = 16;
inline constexpr std::size_t kFirTaps = 16;
inline constexpr unsigned kFirAccBits = 26;
inline constexpr unsigned kFirProductShift = 2;

using FirCoeffs = std::array<std::int16_t, kFirTaps>;
using FirCoeffBank = std::array<FirCoeffs, kFirChannels>;

// Sign-extends the low 26 bits.
std::int32_t wrap_acc26(std::int64_t v);

// 16 independent 16-tap filters. Each product c_i * x[n-i] is shifted right by
// 2 before entering a wrapping 26-bit accumulator; the output is the
// accumulator shifted by out_shift and saturated to i16.
class FirBank {
public:
  explicit FirBank(unsigned out_shift = 12);

  void load_coeffs(std::size_t channel, std::span<const std::int16_t> coeffs);
  void load_bank(const FirCoeffBank& bank);
  const FirCoeffs& coeffs(std::size_t channel) const;
  std::int16_t step(std::size_t channel, int x);
  void reset();

  unsigned out_shift() const { return out_shift_; }

private:
  void check_channel(std::size_t channel) const;

  unsigned out_shift_;
  FirCoeffBank coeffs_{};
  std::array<std::array<std::int32_t, kFirTaps>, kFirChannels> delay_{};
  std::array<std::size_t, kFirChannels> head_{};
};

// Coefficient file: 16 lines of 16 integers.
FirCoeffBank parse_fir_coeffs(const std::string& text);
FirCoeffBank read_fir_coeffs(const std::string& path);

}  // namespace nsp
