#include "nsp/bitio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "nsp/core.hpp"

namespace nsp {

void BitWriter::write(std::uint32_t value, unsigned nbits) {
  if (nbits > 32) throw Error(Errc::invalid_argument, "write of more than 32 bits");
  if (nbits < 32 && (value >> nbits) != 0)
    throw Error(Errc::invalid_argument, "value does not fit in " + std::to_string(nbits) + " bits");
  for (unsigned i = nbits; i-- > 0;) write_bit((value >> i) & 1u);
}

void BitWriter::write_bit(bool bit) {
  const unsigned offset = bits_ & 7u;
  if (offset == 0) buf_.push_back(0);
  if (bit) buf_.back() |= static_cast<std::uint8_t>(0x80u >> offset);
  ++bits_;
}

void BitWriter::write_ones(std::uint32_t count) {
  for (std::uint32_t i = 0; i < count; ++i) write_bit(true);
}

BitReader::BitReader(std::span<const std::uint8_t> data)
    : data_(data), limit_(static_cast<std::uint64_t>(data.size()) * 8) {}

BitReader::BitReader(std::span<const std::uint8_t> data, std::uint64_t limit_bits)
    : data_(data), limit_(limit_bits) {
  if (limit_bits > static_cast<std::uint64_t>(data.size()) * 8)
    throw Error(Errc::truncated_stream, "bit limit exceeds buffer size");
}

bool BitReader::read_bit() {
  if (pos_ >= limit_)
    throw Error(Errc::truncated_stream, "read past end of bit stream at bit " + std::to_string(pos_));
  const bool bit = (data_[pos_ >> 3] >> (7 - (pos_ & 7u))) & 1u;
  ++pos_;
  return bit;
}

std::uint32_t BitReader::read(unsigned nbits) {
  if (nbits > 32) throw Error(Errc::invalid_argument, "read of more than 32 bits");
  if (nbits > remaining())
    throw Error(Errc::truncated_stream, "read of " + std::to_string(nbits) + " bits past end at bit " +
                                            std::to_string(pos_));
  std::uint32_t v = 0;
  for (unsigned i = 0; i < nbits; ++i) v = (v << 1) | static_cast<std::uint32_t>(read_bit());
  return v;
}

void ByteWriter::u16(std::uint16_t v) {
  u8(static_cast<std::uint8_t>(v));
  u8(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v) {
  u16(static_cast<std::uint16_t>(v));
  u16(static_cast<std::uint16_t>(v >> 16));
}

void ByteWriter::u64(std::uint64_t v) {
  u32(static_cast<std::uint32_t>(v));
  u32(static_cast<std::uint32_t>(v >> 32));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteReader::need(std::size_t n) const {
  if (data_.size() - pos_ < n)
    throw Error(Errc::format, "unexpected end of data at offset " + std::to_string(pos_));
}

std::uint8_t ByteReader::u8() {
  need(1);
  return data_[pos_++];
}

std::uint16_t ByteReader::u16() {
  need(2);
  const std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
  pos_ += 2;
  return v;
}

std::uint32_t ByteReader::u32() {
  const std::uint32_t lo = u16();
  const std::uint32_t hi = u16();
  return lo | (hi << 16);
}

std::uint64_t ByteReader::u64() {
  const std::uint64_t lo = u32();
  const std::uint64_t hi = u32();
  return lo | (hi << 32);
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::span<const std::uint8_t> ByteReader::raw(std::size_t n) {
  need(n);
  auto s = data_.subspan(pos_, n);
  pos_ += n;
  return s;
}

void ByteReader::expect_tag(const char (&magic)[5]) {
  const auto at = pos_;
  auto got = raw(4);
  if (std::memcmp(got.data(), magic, 4) != 0)
    throw Error(Errc::format, std::string("bad magic at offset ") + std::to_string(at) +
                                  ", expected \"" + magic + "\"");
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::format, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::format, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::format, "short write to " + path);
}

}  // namespace nsp
