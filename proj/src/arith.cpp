#include "nsp/arith.hpp"

#include <algorithm>
#include <string>

#include "nsp/core.hpp"

namespace nsp {

namespace {
constexpr std::uint32_t kTop = 1u << 24;
}

FrequencyTable FrequencyTable::train(std::span<const std::uint32_t> symbols) {
  if (symbols.empty()) throw Error(Errc::invalid_argument, "empty training sequence");
  std::array<std::uint64_t, kAcAlphabet> hist{};
  hist.fill(1);
  for (auto s : symbols) ++hist[std::min(s, kAcEsc)];
  std::uint64_t sum = 0;
  for (auto h : hist) sum += h;

  FrequencyTable t;
  if (sum <= kAcMaxTotal) {
    for (unsigned s = 0; s < kAcAlphabet; ++s) t.counts_[s] = static_cast<std::uint16_t>(hist[s]);
  } else {
    // Keep the smoothing floor of 1 and scale the excess into the remaining budget.
    const std::uint64_t budget = kAcMaxTotal - kAcAlphabet;
    const std::uint64_t excess = sum - kAcAlphabet;
    for (unsigned s = 0; s < kAcAlphabet; ++s)
      t.counts_[s] = static_cast<std::uint16_t>(1 + (hist[s] - 1) * budget / excess);
  }
  t.rebuild();
  return t;
}

FrequencyTable FrequencyTable::from_counts(const Counts& counts) {
  FrequencyTable t;
  t.counts_ = counts;
  std::uint32_t total = 0;
  for (auto c : counts) {
    if (c == 0) throw Error(Errc::corrupt_stream, "frequency table holds a zero count");
    total += c;
  }
  if (total > kAcMaxTotal)
    throw Error(Errc::corrupt_stream, "frequency table total " + std::to_string(total) + " exceeds limit");
  t.rebuild();
  return t;
}

void FrequencyTable::rebuild() {
  cum_[0] = 0;
  for (unsigned s = 0; s < kAcAlphabet; ++s) cum_[s + 1] = cum_[s] + counts_[s];
}

std::uint32_t FrequencyTable::lookup(std::uint32_t v) const {
  auto it = std::upper_bound(cum_.begin(), cum_.end(), v);
  return static_cast<std::uint32_t>(it - cum_.begin()) - 1;
}

void RangeEncoder::encode(std::uint32_t cum, std::uint32_t freq, std::uint32_t total) {
  const std::uint32_t r = range_ / total;
  low_ += static_cast<std::uint64_t>(r) * cum;
  range_ = r * freq;
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::encode_direct(std::uint32_t value, unsigned nbits) {
  for (unsigned i = nbits; i-- > 0;) {
    range_ >>= 1;
    if ((value >> i) & 1u) low_ += range_;
    while (range_ < kTop) {
      range_ <<= 8;
      shift_low();
    }
  }
}

void RangeEncoder::shift_low() {
  // Bytes are held back while they could still absorb a carry out of `low`.
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t byte = cache_;
    do {
      out_.write(static_cast<std::uint8_t>(byte + carry), 8);
      byte = 0xFF;
    } while (--pending_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++pending_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
}

RangeDecoder::RangeDecoder(BitReader& in) : in_(in) {
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | in_.read(8);
}

std::uint32_t RangeDecoder::target(std::uint32_t total) {
  step_ = range_ / total;
  const std::uint32_t v = code_ / step_;
  if (v >= total) throw Error(Errc::corrupt_stream, "range decoder target outside model");
  return v;
}

void RangeDecoder::consume(std::uint32_t cum, std::uint32_t freq) {
  code_ -= step_ * cum;
  range_ = step_ * freq;
  normalize();
}

std::uint32_t RangeDecoder::decode_direct(unsigned nbits) {
  std::uint32_t v = 0;
  for (unsigned i = 0; i < nbits; ++i) {
    range_ >>= 1;
    std::uint32_t bit = 0;
    if (code_ >= range_) {
      code_ -= range_;
      bit = 1;
    }
    v = (v << 1) | bit;
    normalize();
  }
  return v;
}

void RangeDecoder::normalize() {
  while (range_ < kTop) {
    code_ = (code_ << 8) | in_.read(8);
    range_ <<= 8;
  }
}

void AcEncoder::put(std::uint32_t m) {
  if (m >= (1u << kAcEscRawBits))
    throw Error(Errc::invalid_argument, "symbol " + std::to_string(m) + " exceeds the escape range");
  if (m < kAcEsc) {
    rc_.encode(table_.cumulative(m), table_.count(m), table_.total());
  } else {
    put_escaped(m, kAcEscRawBits);
  }
}

void AcEncoder::put_escaped(std::uint32_t value, unsigned nbits) {
  rc_.encode(table_.cumulative(kAcEsc), table_.count(kAcEsc), table_.total());
  rc_.encode_direct(value, nbits);
}

std::uint32_t AcDecoder::next_symbol() {
  const auto v = rc_.target(table_.total());
  const auto s = table_.lookup(v);
  rc_.consume(table_.cumulative(s), table_.count(s));
  return s;
}

std::uint32_t AcDecoder::get() {
  const auto s = next_symbol();
  return s == kAcEsc ? rc_.decode_direct(kAcEscRawBits) : s;
}

std::uint32_t AcDecoder::get_escaped(unsigned nbits) {
  if (next_symbol() != kAcEsc) throw Error(Errc::corrupt_stream, "expected escape symbol");
  return rc_.decode_direct(nbits);
}

std::uint64_t ac_encode(const FrequencyTable& table, std::span<const std::uint32_t> symbols, BitWriter& out) {
  const auto start = out.bit_count();
  AcEncoder enc(table, out);
  for (auto s : symbols) enc.put(s);
  enc.finish();
  return out.bit_count() - start;
}

std::vector<std::uint32_t> ac_decode(const FrequencyTable& table, BitReader& in, std::size_t count) {
  AcDecoder dec(table, in);
  std::vector<std::uint32_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(dec.get());
  return out;
}

}  // namespace nsp
