#include <optional>

#include "../util.hpp"
#include "doctest.h"
#include "nsp/ap_codec.hpp"
#include "nsp/arith.hpp"
#include "nsp/bitio.hpp"

using namespace nsp;

namespace {

std::vector<Sample> round_trip_lossless(const std::vector<Sample>& x, CoderKind coder) {
  ApCodecConfig cfg;
  cfg.coder = coder;
  std::optional<FrequencyTable> table;
  if (coder == CoderKind::ac) {
    // Training rejects an empty sequence; any table decodes an empty stream.
    const auto syms = lossless_symbols(x);
    table = FrequencyTable::train(syms.empty() ? std::vector<std::uint32_t>{0} : syms);
  }
  BitWriter w;
  encode_lossless(cfg, x, table ? &*table : nullptr, w);
  BitReader r(w.bytes(), w.bit_count());
  return decode_lossless(cfg, table ? &*table : nullptr, r, x.size());
}

struct NllRun {
  NearLosslessEncoded enc;
  NearLosslessDecoded dec;
  std::uint64_t bits;
};

NllRun round_trip_nll(const std::vector<Sample>& x, const TriggerPlan& plan, CoderKind coder, ChunkMode chunks) {
  ApCodecConfig cfg;
  cfg.mode = ApMode::near_lossless;
  cfg.coder = coder;
  cfg.chunks = chunks;
  std::optional<FrequencyTable> table;
  if (coder == CoderKind::ac) table = FrequencyTable::train(near_lossless_symbols(x, plan, chunks));
  BitWriter w;
  auto enc = encode_near_lossless(cfg, x, plan, table ? &*table : nullptr, w);
  BitReader r(w.bytes(), w.bit_count());
  auto dec = decode_near_lossless(cfg, table ? &*table : nullptr, r, x.size(), plan.padded_tail);
  return {enc, dec, w.bit_count()};
}

}  // namespace

TEST_CASE("lossless round trip, both coders") {
  for (auto coder : {CoderKind::ac, CoderKind::gc}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto rnd = testutil::random_samples(20000, seed);
      CHECK(round_trip_lossless(rnd, coder) == rnd);
      const auto walk = testutil::walk_samples(20000, seed);
      CHECK(round_trip_lossless(walk, coder) == walk);
    }
    CHECK(round_trip_lossless({}, coder).empty());
    const std::vector<Sample> rails{255, -256, 255, -256, 255, 255, -256};
    CHECK(round_trip_lossless(rails, coder) == rails);
  }
}

TEST_CASE("lossless GC on silence") {
  const std::vector<Sample> zeros(20000, 0);
  ApCodecConfig cfg;
  BitWriter w;
  const auto bits = encode_lossless(cfg, zeros, nullptr, w);
  CHECK(ssr(original_bits(zeros.size()), bits) > 0.85);
}

TEST_CASE("AC coder requires a table") {
  ApCodecConfig cfg;
  cfg.coder = CoderKind::ac;
  BitWriter w;
  const std::vector<Sample> x{1, 2, 3};
  CHECK_THROWS_AS(encode_lossless(cfg, x, nullptr, w), Error);
}

TEST_CASE("trigger planning") {
  const std::vector<std::int64_t> t{10, 100, 120, 163, 164, 500};
  const auto plan = plan_triggers(std::span<const std::int64_t>(t), 1000);
  CHECK(plan.triggers == std::vector<std::int64_t>{100, 164, 500});
  CHECK(plan.dropped == 1);  // t=10 has no room for the pre-trigger samples
  CHECK_FALSE(plan.padded_tail);

  const std::vector<std::int64_t> tail{980};
  CHECK(plan_triggers(std::span<const std::int64_t>(tail), 1000).padded_tail);

  std::vector<std::uint8_t> flags(300, 0);
  flags[100] = flags[101] = flags[250] = 1;
  CHECK(plan_triggers(std::span<const std::uint8_t>(flags), 300).triggers == std::vector<std::int64_t>{100, 250});
}

TEST_CASE("near-lossless hand-traced placement") {
  // Window [t-31, t+32] for t=100 covers samples 69..132; the tail run is
  // 200 - 133 = 67.
  const auto x = testutil::walk_samples(200, 4);
  const std::vector<std::int64_t> t{100};
  const auto plan = plan_triggers(std::span<const std::int64_t>(t), x.size());
  const auto run = round_trip_nll(x, plan, CoderKind::gc, ChunkMode::two);
  CHECK(run.enc.runs == std::vector<std::uint32_t>{69, 67});
  CHECK(run.dec.runs == run.enc.runs);
  CHECK(run.dec.window_starts == std::vector<std::int64_t>{69});
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool in = i >= 69 && i <= 132;
    REQUIRE(run.dec.samples[i] == (in ? x[i] : 0));
  }
}

TEST_CASE("near-lossless with no detections is a single run") {
  const auto x = testutil::random_samples(5000, 8);
  const auto run = round_trip_nll(x, TriggerPlan{}, CoderKind::gc, ChunkMode::two);
  CHECK(run.enc.runs == std::vector<std::uint32_t>{5000});
  CHECK(run.dec.samples == std::vector<Sample>(5000, 0));
  CHECK(run.dec.window_starts.empty());
}

TEST_CASE("near-lossless groups are 66 or 67 symbols") {
  const auto x = testutil::walk_samples(40000, 9, 20);
  std::vector<std::int64_t> t;
  for (std::int64_t v = 200; v < 39000; v += 333) t.push_back(v);
  const auto plan = plan_triggers(std::span<const std::int64_t>(t), x.size());
  for (auto chunks : {ChunkMode::two, ChunkMode::three}) {
    for (auto coder : {CoderKind::ac, CoderKind::gc}) {
      const auto run = round_trip_nll(x, plan, coder, chunks);
      REQUIRE(run.dec.group_symbols.size() == plan.triggers.size());
      for (auto g : run.dec.group_symbols) REQUIRE(g == 64 + chunk_count(chunks));
      for (std::size_t w = 0; w < plan.triggers.size(); ++w)
        REQUIRE(run.dec.window_starts[w] == plan.triggers[w] - static_cast<std::int64_t>(kPreTrigger));
      std::vector<Sample> want(x.size(), 0);
      for (auto tr : plan.triggers)
        for (std::int64_t i = tr - 31; i <= tr + 32; ++i) want[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
      CHECK(run.dec.samples == want);
    }
  }
}

TEST_CASE("near-lossless long gaps use the continuation sentinel") {
  const std::vector<Sample> x(300000, 5);
  const std::vector<std::int64_t> t{270000};
  const auto plan = plan_triggers(std::span<const std::int64_t>(t), x.size());
  const auto run = round_trip_nll(x, plan, CoderKind::gc, ChunkMode::two);
  const auto s = run_sentinel(ChunkMode::two);
  CHECK(s == 262143);
  CHECK(run.enc.runs.front() == s);
  CHECK(run.dec.window_starts == std::vector<std::int64_t>{269969});
  CHECK(run.dec.samples[269969] == 5);
  CHECK(run.dec.samples[269968] == 0);
}

TEST_CASE("near-lossless padded tail") {
  const auto x = testutil::walk_samples(1000, 10);
  const std::vector<std::int64_t> t{990};
  const auto plan = plan_triggers(std::span<const std::int64_t>(t), x.size());
  REQUIRE(plan.padded_tail);
  const auto run = round_trip_nll(x, plan, CoderKind::ac, ChunkMode::three);
  for (std::size_t i = 959; i < 1000; ++i) REQUIRE(run.dec.samples[i] == x[i]);
  CHECK(run.dec.samples[958] == 0);
}

TEST_CASE("near-lossless decode rejects a short declared length") {
  const auto x = testutil::walk_samples(1000, 11);
  const std::vector<std::int64_t> t{500};
  const auto plan = plan_triggers(std::span<const std::int64_t>(t), x.size());
  ApCodecConfig cfg;
  cfg.mode = ApMode::near_lossless;
  BitWriter w;
  encode_near_lossless(cfg, x, plan, nullptr, w);
  BitReader r(w.bytes(), w.bit_count());
  CHECK_THROWS_AS(decode_near_lossless(cfg, nullptr, r, 400, false), Error);
}

TEST_CASE("near-lossless training symbols count one ESC per chunk") {
  const auto x = testutil::walk_samples(2000, 12);
  const std::vector<std::int64_t> t{100, 400};
  const auto plan = plan_triggers(std::span<const std::int64_t>(t), x.size());
  const auto syms = near_lossless_symbols(x, plan, ChunkMode::three);
  CHECK(syms.size() == 3 * 3 + 2 * 64);
  CHECK(std::count(syms.begin(), syms.end(), kAcEsc) >= 9);
}

TEST_CASE("spike window buffer keeps the latest 32 samples") {
  SpikeWindowBuffer b;
  for (int i = 0; i < 40; ++i) b.push(static_cast<Sample>(i));
  CHECK(b.size() == 32);
  CHECK(b.at(0) == 8);
  CHECK(b.at(31) == 39);
}
