#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nsp {

// MSB-first bit sink.
class BitWriter {
public:
  void write(std::uint32_t value, unsigned nbits);
  void write_bit(bool bit);
  void write_ones(std::uint32_t count);

  std::uint64_t bit_count() const { return bits_; }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  std::vector<std::uint8_t> take() { bits_ = 0; return std::move(buf_); }

private:
  std::vector<std::uint8_t> buf_;
  std::uint64_t bits_ = 0;
};

// MSB-first bit source over a borrowed buffer. Reading past `limit_bits` throws
// Errc::truncated_stream.
class BitReader {
public:
  explicit BitReader(std::span<const std::uint8_t> data);
  BitReader(std::span<const std::uint8_t> data, std::uint64_t limit_bits);

  std::uint32_t read(unsigned nbits);
  bool read_bit();

  std::uint64_t position() const { return pos_; }
  std::uint64_t remaining() const { return limit_ - pos_; }

private:
  std::span<const std::uint8_t> data_;
  std::uint64_t limit_;
  std::uint64_t pos_ = 0;
};

// Little-endian byte serialization used by the file formats.
class ByteWriter {
public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v);
  void raw(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }
  void tag(const char (&magic)[5]) { buf_.insert(buf_.end(), magic, magic + 4); }

  std::vector<std::uint8_t>& buffer() { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
  std::vector<std::uint8_t> buf_;
};

// Truncation throws Errc::format with the failing offset.
class ByteReader {
public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int16_t i16() { return static_cast<std::int16_t>(u16()); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64();
  std::span<const std::uint8_t> raw(std::size_t n);
  void expect_tag(const char (&magic)[5]);

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

private:
  void need(std::size_t n) const;

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace nsp
