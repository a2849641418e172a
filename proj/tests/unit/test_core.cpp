#include "doctest.h"
#include "nsp/core.hpp"

using namespace nsp;

TEST_CASE("quantize rounds and clamps") {
  CHECK(quantize(0.0, 3.0) == 0);
  CHECK(quantize(1e9, 1.0) == 255);
  CHECK(quantize(-1e9, 1.0) == -256);
  CHECK(quantize(-0.7, 0.01) == -70);
  CHECK(quantize(0.5, 1.0) == 1);
  CHECK(quantize(-0.5, 1.0) == -1);
  CHECK_THROWS_AS(quantize(1.0, 0.0), Error);
}

TEST_CASE("ssr") {
  CHECK(ssr(900, 900) == doctest::Approx(0.0));
  CHECK(ssr(900, 333) == doctest::Approx(0.63));
  CHECK(ssr(1000, 90) == doctest::Approx(0.91));
  CHECK(ssr(900, 1000) < 0.0);
  CHECK_THROWS_AS(ssr(0, 1), Error);
  CHECK(original_bits(100) == 900);
}

TEST_CASE("recording validation") {
  Recording r;
  CHECK_THROWS_AS(r.validate(), Error);
  r.channels = {{1, 2, 3}, {4, 5, 6}};
  CHECK_NOTHROW(r.validate());
  CHECK(r.sample_count() == 6);

  r.channels[1].push_back(0);
  CHECK_THROWS_AS(r.validate(), Error);
  r.channels[1].pop_back();

  r.channels[0][0] = 256;
  CHECK_THROWS_AS(r.validate(), Error);
  r.bits_per_sample = 16;
  CHECK_NOTHROW(r.validate());
  r.bits_per_sample = 12;
  CHECK_THROWS_AS(r.validate(), Error);

  Recording wide;
  wide.channels.assign(kMaxChannels, std::vector<Sample>(4, 0));
  CHECK_NOTHROW(wide.validate());
  wide.channels.emplace_back(4, 0);
  CHECK_THROWS_AS(wide.validate(), Error);
}

TEST_CASE("extract_spike window bounds") {
  std::vector<Sample> x(100);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<Sample>(i);
  const auto e = extract_spike(x, 3, 31);
  CHECK(e.channel == 3);
  CHECK(e.waveform.front() == 0);
  CHECK(e.waveform.back() == 63);
  CHECK(extract_spike(x, 0, 67).waveform.back() == 99);
  CHECK_THROWS_AS(extract_spike(x, 0, 30), Error);
  CHECK_THROWS_AS(extract_spike(x, 0, 68), Error);
}

TEST_CASE("error carries its code") {
  try {
    throw Error(Errc::truncated_stream, "x");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::truncated_stream);
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
  }
}
