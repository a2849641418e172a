#include "nsp/fir.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "nsp/core.hpp"

namespace nsp {

std::int32_t wrap_acc26(std::int64_t v) {
  constexpr std::uint64_t mask = (std::uint64_t{1} << kFirAccBits) - 1;
  constexpr std::uint64_t sign = std::uint64_t{1} << (kFirAccBits - 1);
  const std::uint64_t low = static_cast<std::uint64_t>(v) & mask;
  return static_cast<std::int32_t>(static_cast<std::int64_t>(low ^ sign) - static_cast<std::int64_t>(sign));
}

FirBank::FirBank(unsigned out_shift) : out_shift_(out_shift) {
  if (out_shift >= kFirAccBits) throw Error(Errc::invalid_argument, "FIR out_shift must be below 26");
}

void FirBank::check_channel(std::size_t channel) const {
  if (channel >= kFirChannels) throw Error(Errc::invalid_argument, "FIR channel must be below 16");
}

void FirBank::load_coeffs(std::size_t channel, std::span<const std::int16_t> coeffs) {
  check_channel(channel);
  if (coeffs.size() != kFirTaps)
    throw Error(Errc::invalid_argument, "FIR needs exactly 16 coefficients, got " + std::to_string(coeffs.size()));
  std::copy(coeffs.begin(), coeffs.end(), coeffs_[channel].begin());
}

void FirBank::load_bank(const FirCoeffBank& bank) { coeffs_ = bank; }

const FirCoeffs& FirBank::coeffs(std::size_t channel) const {
  check_channel(channel);
  return coeffs_[channel];
}

std::int16_t FirBank::step(std::size_t channel, int x) {
  check_channel(channel);
  auto& line = delay_[channel];
  auto& head = head_[channel];
  head = (head + kFirTaps - 1) % kFirTaps;
  line[head] = x;
  const auto& c = coeffs_[channel];
  std::int32_t acc = 0;
  for (std::size_t i = 0; i < kFirTaps; ++i) {
    const std::int64_t product = static_cast<std::int64_t>(c[i]) * line[(head + i) % kFirTaps];
    acc = wrap_acc26(static_cast<std::int64_t>(acc) + (product >> kFirProductShift));
  }
  const std::int32_t y = acc >> out_shift_;
  return static_cast<std::int16_t>(std::clamp<std::int32_t>(y, std::numeric_limits<std::int16_t>::min(),
                                                            std::numeric_limits<std::int16_t>::max()));
}

void FirBank::reset() {
  for (auto& line : delay_) line.fill(0);
  head_.fill(0);
}

FirCoeffBank parse_fir_coeffs(const std::string& text) {
  FirCoeffBank bank{};
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    if (row >= kFirChannels) throw Error(Errc::format, "coefficient file has more than 16 rows");
    std::istringstream ls(line);
    long v;
    std::size_t col = 0;
    while (ls >> v) {
      if (col >= kFirTaps) throw Error(Errc::format, "row " + std::to_string(row) + " has more than 16 coefficients");
      if (v < std::numeric_limits<std::int16_t>::min() || v > std::numeric_limits<std::int16_t>::max())
        throw Error(Errc::format, "coefficient out of i16 range in row " + std::to_string(row));
      bank[row][col++] = static_cast<std::int16_t>(v);
    }
    if (!ls.eof() || col != kFirTaps)
      throw Error(Errc::format, "row " + std::to_string(row) + " must hold 16 integers");
    ++row;
  }
  if (row != kFirChannels) throw Error(Errc::format, "coefficient file must have 16 rows");
  return bank;
}

FirCoeffBank read_fir_coeffs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::format, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_fir_coeffs(ss.str());
}

}  // namespace nsp
