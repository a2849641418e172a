#include "doctest.h"
#include "nsp/commands.hpp"
#include "nsp/nrec.hpp"
#include "nsp/raster.hpp"
#include "nsp/synth.hpp"
#include "../util.hpp"

using namespace nsp;

namespace {

// Three channels with real spikes, short enough for unit tests.
Recording spiky(std::size_t channels = 3) {
  Recording rec;
  for (std::size_t c = 0; c < channels; ++c) {
    synth::ApSimConfig cfg;
    cfg.seconds = 2.0;
    cfg.seed = 50 + c;
    rec.channels.push_back(synth::simulate_ap(cfg).rec.channels[0]);
  }
  return rec;
}

}  // namespace

TEST_CASE("channel lists") {
  CHECK(parse_channel_list("0-3,7") == std::vector<std::uint8_t>{0, 1, 2, 3, 7});
  CHECK(parse_channel_list("67") == std::vector<std::uint8_t>{67});
  CHECK(parse_channel_list("5,2") == std::vector<std::uint8_t>{5, 2});
  for (const char* bad : {"68", "-1", "3-1", "1,,2", "1,1", "0-3,2", "a", "1-", ""})
    CHECK_THROWS_AS(parse_channel_list(bad), Error);
}

TEST_CASE("live selection picks rows in order") {
  const auto rec = testutil::recording({{1}, {2}, {3}});
  const auto s = live_source(rec, {2, 0});
  CHECK(s.ids == std::vector<std::uint8_t>{2, 0});
  CHECK(s.rec.channels == std::vector<std::vector<Sample>>{{3}, {1}});
  CHECK(live_source(rec, {}).ids == std::vector<std::uint8_t>{0, 1, 2});
  CHECK_THROWS_AS(live_source(rec, {3}), Error);
}

TEST_CASE("spike file round trip") {
  std::vector<SpikeEvent> ev(3);
  for (std::size_t i = 0; i < ev.size(); ++i) {
    ev[i].channel = static_cast<std::uint16_t>(60 + i);
    ev[i].t = 1000 * static_cast<std::int64_t>(i) + 31;
    for (std::size_t j = 0; j < kSpikeWindow; ++j) ev[i].waveform[j] = static_cast<Sample>(j * 4 - 128 + i);
  }
  const auto bytes = encode_spikes(ev);
  CHECK(bytes.size() == 9 + 3 * (1 + 8 + 128));
  const auto back = decode_spikes(bytes);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].channel == ev[i].channel);
    CHECK(back[i].t == ev[i].t);
    CHECK(back[i].waveform == ev[i].waveform);
  }
  auto bad = bytes;
  bad.pop_back();
  CHECK_THROWS_AS(decode_spikes(bad), Error);
  bad = bytes;
  bad[4] = 2;
  CHECK_THROWS_AS(decode_spikes(bad), Error);
  CHECK(decode_spikes(encode_spikes({})).empty());
}

TEST_CASE("record then debug reads the same samples") {
  testutil::TempDir dir("store");
  const auto live = live_source(spiky(), {0, 2});
  const Config cfg;
  const auto r = record_to_store(live, cfg, dir.path.string());
  CHECK(r.channels == 2);
  CHECK(r.samples == live.rec.sample_count());
  CHECK(r.window_bytes == r.windows * 128);
  CHECK(r.fits == (r.window_bytes <= kSramBytes));
  CHECK(r.windows > 0);

  const auto stored = store_source(dir.path.string(), {});
  CHECK(stored == live);
  CHECK(read_spikes(store_spikes_path(dir.path.string())).size() == r.windows);
  CHECK(store_source(dir.path.string(), {2}).ids == std::vector<std::uint8_t>{2});
  CHECK_THROWS_AS(store_source(dir.path.string(), {1}), Error);

  // Every command gives byte-identical output from either source.
  CHECK(stream_raw(stored) == stream_raw(live));
  ApCommandOptions nll{ApMode::near_lossless, CoderKind::ac, ChunkMode::three};
  CHECK(run_encode_ap(stored, nll, cfg) == run_encode_ap(live, nll, cfg));
  CHECK(run_raster(stored, cfg) == run_raster(live, cfg));
  CHECK(run_ate_report(stored, cfg) == run_ate_report(live, cfg));

  const auto tiny = record_to_store(live, cfg, dir.file("tiny"), 128);
  CHECK(tiny.fits == (tiny.windows <= 1));
}

TEST_CASE("raw frames") {
  const auto src = live_source(testutil::recording({{1, -2}, {255, -256}}), {1, 0});
  const auto bytes = stream_raw(src);
  const std::vector<std::uint8_t> want{1, 0xFF, 0x00, 0, 1, 0, 1, 0x00, 0xFF, 0, 0xFE, 0xFF};
  CHECK(bytes == want);
  CHECK(parse_raw_frames(bytes) == src);
  auto bad = bytes;
  bad.pop_back();
  CHECK_THROWS_AS(parse_raw_frames(bad), Error);
  bad = bytes;
  bad[6] = 0;  // second tick swaps the channel order
  bad[9] = 1;
  CHECK_THROWS_AS(parse_raw_frames(bad), Error);
  CHECK_THROWS_AS(parse_raw_frames(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 9)), Error);
}

TEST_CASE("ap command verifies and decodes") {
  const auto src = live_source(spiky(2), {});
  const Config cfg;
  for (auto mode : {ApMode::lossless, ApMode::near_lossless})
    for (auto coder : {CoderKind::ac, CoderKind::gc}) {
      const auto bytes = run_encode_ap(src, {mode, coder, ChunkMode::two}, cfg);
      const auto back = run_decode_ap(bytes);
      CHECK(back.ids == src.ids);
      if (mode == ApMode::lossless) CHECK(back.rec.channels == src.rec.channels);
    }
}

TEST_CASE("lfp command needs eight channels") {
  synth::LfpSimConfig lc;
  lc.seconds = 4;
  const auto rec = synth::simulate_lfp(lc);
  const auto src = live_source(rec, {});
  const auto bytes = run_encode_lfp(src, {});
  CHECK(run_decode_lfp(bytes) == src);
  CHECK_THROWS_AS(run_encode_lfp(live_source(rec, {0, 1, 2}), {}), Error);
}

TEST_CASE("fir command") {
  std::vector<Sample> impulse(40, 0);
  impulse[3] = 255;
  const auto src = live_source(testutil::recording({impulse, std::vector<Sample>(40, 7)}), {});
  FirCoeffBank bank{};
  for (std::size_t i = 0; i < kFirTaps; ++i) bank[0][i] = static_cast<std::int16_t>(1000 * (i + 1));
  const auto out = run_fir(src, bank, Config::parse("fir.out_shift=0\n"));
  CHECK(out.rec.bits_per_sample == 16);
  CHECK(out.ids == src.ids);
  for (std::size_t n = 0; n < 40; ++n) {
    // (c * 255) >> 2 with no output shift.
    const int want = (n >= 3 && n < 3 + kFirTaps) ? (1000 * static_cast<int>(n - 2) * 255) >> 2 : 0;
    CHECK(out.rec.channels[0][n] == std::clamp(want, -32768, 32767));
    CHECK(out.rec.channels[1][n] == 0);
  }
  CHECK_THROWS_AS(run_fir(src, bank, Config::parse("fir.out_shift=26\n")), Error);
  std::vector<std::vector<Sample>> many(17, std::vector<Sample>(4, 0));
  CHECK_THROWS_AS(run_fir(live_source(testutil::recording(many), {}), bank, {}), Error);
}

TEST_CASE("raster on a silent input is all empty packets") {
  const auto src = live_source(testutil::recording(std::vector<std::vector<Sample>>(68, std::vector<Sample>(500, 0))), {});
  const auto bytes = run_raster(src, {});
  CHECK(bytes == std::vector<std::uint8_t>(500, kRasterEmpty));
}

TEST_CASE("raster slots follow channel ids") {
  const auto rec = spiky(1);
  const auto src = live_source(testutil::recording({rec.channels[0]}), {});
  const auto flags = detect_spikes(rec.channels[0], DetectorConfig{});
  Source moved = src;
  moved.ids = {42};
  const auto packets = parse_raster(run_raster(moved, {}));
  REQUIRE(packets.size() == rec.length());
  std::size_t fired = 0;
  for (std::size_t t = 0; t < packets.size(); ++t) {
    CHECK(packets[t].firing == (flags[t] != 0));
    if (packets[t].firing) {
      ++fired;
      CHECK(packets[t].channel(42));
      CHECK(packets[t].tick == t);
    }
  }
  CHECK(fired > 0);
}

TEST_CASE("ate report and apply pin thresholds") {
  const auto src = live_source(spiky(2), {});
  Config cfg;
  const auto report = run_ate_report(src, cfg);
  REQUIRE(report.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    SpikeDetector det(DetectorConfig{});
    for (auto x : src.rec.channels[i]) det.step(x);
    CHECK(report[i].thr_neo == det.ate().thr_neo);
    CHECK(report[i].thr_amp == det.ate().thr_amp);
    CHECK(report[i].detections == detection_times(detect_spikes(src.rec.channels[i], {})).size());
  }
  CHECK(format_ate_report(report).find("thr_neo") != std::string::npos);

  apply_ate(report, cfg);
  CHECK(cfg.get_int(ate_key(1, "thr_neo"), -1) == report[1].thr_neo);
  // With pinned thresholds the detector no longer adapts.
  const auto pinned = run_ate_report(src, cfg);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(pinned[i].thr_neo == report[i].thr_neo);
    CHECK(pinned[i].thr_amp == report[i].thr_amp);
  }
}
