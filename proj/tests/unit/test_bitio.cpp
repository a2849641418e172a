#include <random>

#include "doctest.h"
#include "nsp/bitio.hpp"
#include "nsp/core.hpp"

using namespace nsp;

TEST_CASE("bit round trips") {
  BitWriter w;
  w.write(0b101, 3);
  w.write(0, 32);
  w.write(0xFFFFFFFFu, 32);
  w.write_ones(5);
  w.write_bit(false);
  CHECK(w.bit_count() == 3 + 32 + 32 + 6);
  BitReader r(w.bytes());
  CHECK(r.read(3) == 0b101);
  CHECK(r.read(32) == 0);
  CHECK(r.read(32) == 0xFFFFFFFFu);
  for (int i = 0; i < 5; ++i) CHECK(r.read_bit());
  CHECK_FALSE(r.read_bit());
}

TEST_CASE("random write log replays") {
  std::mt19937_64 rng(11);
  std::vector<std::pair<std::uint32_t, unsigned>> log;
  BitWriter w;
  for (int i = 0; i < 10000; ++i) {
    const unsigned n = 1 + rng() % 32;
    const auto v = static_cast<std::uint32_t>(rng()) & (n == 32 ? 0xFFFFFFFFu : ((1u << n) - 1));
    log.emplace_back(v, n);
    w.write(v, n);
  }
  BitReader r(w.bytes(), w.bit_count());
  for (auto [v, n] : log) REQUIRE(r.read(n) == v);
  CHECK(r.remaining() == 0);
}

TEST_CASE("reading past the limit throws") {
  BitWriter w;
  w.write(3, 2);
  BitReader r(w.bytes(), 2);
  r.read(2);
  CHECK_THROWS_AS(r.read_bit(), Error);
}

TEST_CASE("byte writer and reader") {
  ByteWriter w;
  w.tag("ABCD");
  w.u8(7);
  w.u16(0xBEEF);
  w.u32(0xDEADBEEF);
  w.u64(0x0123456789ABCDEFull);
  w.i16(-2);
  w.f64(-1.25);
  const auto bytes = w.take();
  CHECK(bytes[5] == 0xEF);  // little-endian
  ByteReader r(bytes);
  r.expect_tag("ABCD");
  CHECK(r.u8() == 7);
  CHECK(r.u16() == 0xBEEF);
  CHECK(r.u32() == 0xDEADBEEFu);
  CHECK(r.u64() == 0x0123456789ABCDEFull);
  CHECK(r.i16() == -2);
  CHECK(r.f64() == -1.25);
  CHECK(r.remaining() == 0);
  CHECK_THROWS_AS(r.u8(), Error);

  ByteReader bad(bytes);
  CHECK_THROWS_AS(bad.expect_tag("WXYZ"), Error);
}
