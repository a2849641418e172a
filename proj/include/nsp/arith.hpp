#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "nsp/bitio.hpp"

namespace nsp {

inline constexpr unsigned kAcAlphabet = 257;  // 0..255 plus ESC
inline constexpr std::uint32_t kAcEsc = 256;
inline constexpr std::uint32_t kAcMaxTotal = 1u << 15;
inline constexpr unsigned kAcEscRawBits = 11;  // mapped residues reach 2044
inline constexpr std::size_t kAcTableSlots = 4;

// Frozen symbol model of the semi-adaptive arithmetic coder.
class FrequencyTable {
public:
  using Counts = std::array<std::uint16_t, kAcAlphabet>;

  // Histogram with values >= 256 folded into ESC, add-one smoothing, and a
  // rescale that keeps the total within kAcMaxTotal.
  static FrequencyTable train(std::span<const std::uint32_t> symbols);
  // Validates: every count >= 1 and total <= kAcMaxTotal.
  static FrequencyTable from_counts(const Counts& counts);

  std::uint32_t count(std::uint32_t s) const { return counts_[s]; }
  std::uint32_t cumulative(std::uint32_t s) const { return cum_[s]; }
  std::uint32_t total() const { return cum_[kAcAlphabet]; }
  const Counts& counts() const { return counts_; }
  // Symbol whose interval [cum[s], cum[s+1]) contains v.
  std::uint32_t lookup(std::uint32_t v) const;

  bool operator==(const FrequencyTable& o) const { return counts_ == o.counts_; }

private:
  FrequencyTable() = default;
  void rebuild();

  Counts counts_{};
  std::array<std::uint32_t, kAcAlphabet + 1> cum_{};
};

// 32-bit range coder with byte-wise renormalization and carry propagation
// through a pending 0xFF run.
class RangeEncoder {
public:
  explicit RangeEncoder(BitWriter& out) : out_(out) {}
  void encode(std::uint32_t cum, std::uint32_t freq, std::uint32_t total);
  void encode_direct(std::uint32_t value, unsigned nbits);
  void finish();

private:
  void shift_low();

  BitWriter& out_;
  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t pending_ = 1;
};

class RangeDecoder {
public:
  explicit RangeDecoder(BitReader& in);
  // Returns the cumulative frequency target, to be followed by consume().
  std::uint32_t target(std::uint32_t total);
  void consume(std::uint32_t cum, std::uint32_t freq);
  std::uint32_t decode_direct(unsigned nbits);

private:
  void normalize();

  BitReader& in_;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t step_ = 0;
};

class AcEncoder {
public:
  AcEncoder(const FrequencyTable& table, BitWriter& out) : table_(table), rc_(out) {}
  // Mapped residue in [0, 2^11).
  void put(std::uint32_t m);
  // ESC followed by `nbits` raw bits; used for side information such as RLE chunks.
  void put_escaped(std::uint32_t value, unsigned nbits);
  void finish() { rc_.finish(); }

private:
  const FrequencyTable& table_;
  RangeEncoder rc_;
};

class AcDecoder {
public:
  AcDecoder(const FrequencyTable& table, BitReader& in) : table_(table), rc_(in) {}
  std::uint32_t get();
  // Throws Errc::corrupt_stream if the next symbol is not ESC.
  std::uint32_t get_escaped(unsigned nbits);

private:
  std::uint32_t next_symbol();

  const FrequencyTable& table_;
  RangeDecoder rc_;
};

// Whole-sequence helpers. ac_encode returns the number of bits appended.
std::uint64_t ac_encode(const FrequencyTable& table, std::span<const std::uint32_t> symbols, BitWriter& out);
std::vector<std::uint32_t> ac_decode(const FrequencyTable& table, BitReader& in, std::size_t count);

}  // namespace nsp
