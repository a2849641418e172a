#include "nsp/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsp/bench.hpp"
#include "nsp/bitio.hpp"
#include "nsp/detect.hpp"
#include "nsp/nrec.hpp"
#include "nsp/raster.hpp"

namespace nsp {

namespace {

constexpr std::uint8_t kSpikeFileVersion = 1;

int parse_id(const std::string& s) {
  int v = -1;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v < 0 || v >= static_cast<int>(kMaxChannels))
    throw Error(Errc::invalid_argument, "bad channel id '" + s + "' (expected 0..67)");
  return v;
}

// Rows of `src` whose ids appear in `select`, in selection order.
Source pick(const Source& src, const std::vector<std::uint8_t>& select) {
  if (select.empty()) return src;
  Source out;
  out.rec.rate_hz = src.rec.rate_hz;
  out.rec.bits_per_sample = src.rec.bits_per_sample;
  for (auto id : select) {
    const auto it = std::find(src.ids.begin(), src.ids.end(), id);
    if (it == src.ids.end())
      throw Error(Errc::invalid_argument, "channel " + std::to_string(id) + " is not present in the input");
    out.rec.channels.push_back(src.rec.channels[static_cast<std::size_t>(it - src.ids.begin())]);
    out.ids.push_back(id);
  }
  return out;
}

void verify(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::verification, what);
}

}  // namespace

std::vector<std::uint8_t> parse_channel_list(const std::string& text) {
  if (text.empty()) throw Error(Errc::invalid_argument, "empty channel list");
  std::vector<std::uint8_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw Error(Errc::invalid_argument, "empty entry in channel list '" + text + "'");
    const auto dash = item.find('-');
    int lo = 0, hi = 0;
    if (dash == std::string::npos) {
      lo = hi = parse_id(item);
    } else {
      lo = parse_id(item.substr(0, dash));
      hi = parse_id(item.substr(dash + 1));
      if (hi < lo) throw Error(Errc::invalid_argument, "descending range '" + item + "'");
    }
    for (int v = lo; v <= hi; ++v) {
      if (std::find(out.begin(), out.end(), v) != out.end())
        throw Error(Errc::invalid_argument, "channel " + std::to_string(v) + " selected twice");
      out.push_back(static_cast<std::uint8_t>(v));
    }
  }
  return out;
}

Recording ingest(const std::string& path) {
  auto rec = read_nrec(path);
  rec.validate();
  return rec;
}

Source live_source(const Recording& rec, const std::vector<std::uint8_t>& select) {
  rec.validate();
  Source all{rec, {}};
  for (std::size_t i = 0; i < rec.channel_count(); ++i) all.ids.push_back(static_cast<std::uint8_t>(i));
  return pick(all, select);
}

Source store_source(const std::string& dir, const std::vector<std::uint8_t>& select) {
  const std::filesystem::path d(dir);
  Source s;
  s.rec = ingest((d / "store.nrec").string());
  std::ifstream f(d / "store.ids");
  if (!f) throw Error(Errc::format, "store " + dir + " has no store.ids");
  std::string line;
  while (std::getline(f, line))
    if (!line.empty()) s.ids.push_back(static_cast<std::uint8_t>(parse_id(line)));
  if (s.ids.size() != s.rec.channel_count())
    throw Error(Errc::format, "store " + dir + ": id count does not match the channel count");
  return pick(s, select);
}

void write_store(const std::string& dir, const Source& src) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  write_nrec((d / "store.nrec").string(), src.rec);
  std::ofstream f(d / "store.ids", std::ios::trunc);
  for (auto id : src.ids) f << static_cast<int>(id) << "\n";
  if (!f) throw Error(Errc::format, "cannot write ids into store " + dir);
}

std::string store_spikes_path(const std::string& dir) { return (std::filesystem::path(dir) / "spikes.nspk").string(); }

std::vector<std::uint8_t> encode_spikes(const std::vector<SpikeEvent>& events) {
  ByteWriter w;
  w.tag("NSPK");
  w.u8(kSpikeFileVersion);
  w.u32(static_cast<std::uint32_t>(events.size()));
  for (const auto& e : events) {
    w.u8(static_cast<std::uint8_t>(e.channel));
    w.u64(static_cast<std::uint64_t>(e.t));
    for (auto s : e.waveform) w.i16(s);
  }
  return w.take();
}

std::vector<SpikeEvent> decode_spikes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_tag("NSPK");
  const auto at = r.offset();
  if (const auto v = r.u8(); v != kSpikeFileVersion)
    throw Error(Errc::format, "unsupported spike file version " + std::to_string(v) + " at offset " +
                                  std::to_string(at));
  const auto n = r.u32();
  constexpr std::size_t kRecord = 1 + 8 + 2 * kSpikeWindow;
  if (r.remaining() != static_cast<std::size_t>(n) * kRecord)
    throw Error(Errc::format, "spike file length does not match its count of " + std::to_string(n));
  std::vector<SpikeEvent> out(n);
  for (auto& e : out) {
    e.channel = r.u8();
    e.t = static_cast<std::int64_t>(r.u64());
    for (auto& s : e.waveform) s = r.i16();
  }
  return out;
}

void write_spikes(const std::string& path, const std::vector<SpikeEvent>& events) {
  write_file(path, encode_spikes(events));
}

std::vector<SpikeEvent> read_spikes(const std::string& path) { return decode_spikes(read_file(path)); }

std::vector<SpikeEvent> source_events(const Source& src, const Config& config) {
  std::vector<SpikeEvent> out;
  for (std::size_t i = 0; i < src.ids.size(); ++i) {
    auto ev = detect_events(src.rec.channels[i], src.ids[i], detector_config(config, src.ids[i]));
    out.insert(out.end(), ev.begin(), ev.end());
  }
  return out;
}

RecordReport record_to_store(const Source& src, const Config& config, const std::string& dir,
                             std::uint64_t sram_budget) {
  const auto events = source_events(src, config);
  write_store(dir, src);
  write_spikes(store_spikes_path(dir), events);
  RecordReport r;
  r.channels = src.ids.size();
  r.samples = src.rec.sample_count();
  r.windows = events.size();
  r.window_bytes = static_cast<std::uint64_t>(events.size()) * kSpikeWindow * 2;
  r.sram_budget = sram_budget;
  r.fits = r.window_bytes <= sram_budget;
  return r;
}

std::vector<std::uint8_t> stream_raw(const Source& src) {
  ByteWriter w;
  const auto len = src.rec.length();
  w.buffer().reserve(len * src.ids.size() * 3);
  for (std::size_t t = 0; t < len; ++t)
    for (std::size_t c = 0; c < src.ids.size(); ++c) {
      w.u8(src.ids[c]);
      w.i16(src.rec.channels[c][t]);
    }
  return w.take();
}

Source parse_raw_frames(std::span<const std::uint8_t> bytes, std::uint32_t rate_hz) {
  if (bytes.size() % 3 != 0) throw Error(Errc::format, "raw stream length is not a multiple of 3");
  const auto frames = bytes.size() / 3;
  Source s;
  s.rec.rate_hz = rate_hz;
  // The first tick lists each channel once; it ends where an id repeats.
  for (std::size_t f = 0; f < frames; ++f) {
    const auto id = bytes[3 * f];
    if (std::find(s.ids.begin(), s.ids.end(), id) != s.ids.end()) break;
    if (id >= kMaxChannels) throw Error(Errc::format, "channel id out of range at offset " + std::to_string(3 * f));
    s.ids.push_back(id);
  }
  if (s.ids.empty()) return s;
  if (frames % s.ids.size() != 0) throw Error(Errc::format, "raw stream ends mid-tick");
  s.rec.channels.assign(s.ids.size(), {});
  ByteReader r(bytes);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto at = r.offset();
    const auto c = f % s.ids.size();
    if (r.u8() != s.ids[c]) throw Error(Errc::format, "unexpected channel id at offset " + std::to_string(at));
    s.rec.channels[c].push_back(r.i16());
  }
  s.rec.validate();
  return s;
}

std::vector<std::uint8_t> run_encode_ap(const Source& src, const ApCommandOptions& options, const Config& config) {
  EncodeApOptions opt;
  opt.mode = options.mode;
  opt.coder = options.coder;
  opt.chunks = options.chunks;
  std::vector<TriggerPlan> plans;
  if (options.mode == ApMode::near_lossless) {
    for (std::size_t i = 0; i < src.ids.size(); ++i) {
      const auto flags = detect_spikes(src.rec.channels[i], detector_config(config, src.ids[i]));
      opt.triggers.push_back(detection_times(flags));
      plans.push_back(plan_triggers(std::span<const std::int64_t>(opt.triggers.back()), src.rec.length()));
    }
  }
  auto bytes = serialize(encode_ap(src.rec, opt, src.ids));
  const auto back = run_decode_ap(bytes);
  verify(back.ids == src.ids && back.rec.channel_count() == src.rec.channel_count(), "AP container channel mismatch");
  for (std::size_t i = 0; i < src.ids.size(); ++i) {
    const auto& want =
        options.mode == ApMode::lossless ? src.rec.channels[i] : near_lossless_reference(src.rec.channels[i], plans[i]);
    verify(back.rec.channels[i] == want, "AP decode differs on channel " + std::to_string(src.ids[i]));
  }
  return bytes;
}

Source run_decode_ap(std::span<const std::uint8_t> bytes) {
  const auto c = parse_ap_container(bytes);
  return {decode_ap(c).rec, c.channel_ids};
}

std::vector<std::uint8_t> run_encode_lfp(const Source& src, const Config& config) {
  if (src.ids.size() != kLfpChannels)
    throw Error(Errc::invalid_argument, "LFP encoding needs exactly 8 channels, got " + std::to_string(src.ids.size()));
  auto bytes = serialize(encode_lfp(src.rec, cce_config(config), src.ids));
  const auto back = run_decode_lfp(bytes);
  verify(back.ids == src.ids && back.rec.channels == src.rec.channels, "LFP decode differs from the input");
  return bytes;
}

Source run_decode_lfp(std::span<const std::uint8_t> bytes) {
  const auto c = parse_lfp_container(bytes);
  return {decode_lfp(c), c.channel_ids};
}

Source run_fir(const Source& src, const FirCoeffBank& bank, const Config& config) {
  if (src.ids.size() > kFirChannels)
    throw Error(Errc::invalid_argument, "the FIR bank has 16 channels, got " + std::to_string(src.ids.size()));
  const auto shift = config.get_int("fir.out_shift", 12);
  if (shift < 0 || shift > 25) throw Error(Errc::invalid_argument, "fir.out_shift must be in 0..25");
  FirBank fir(static_cast<unsigned>(shift));
  fir.load_bank(bank);
  Source out;
  out.ids = src.ids;
  out.rec.rate_hz = src.rec.rate_hz;
  out.rec.bits_per_sample = 16;
  for (std::size_t c = 0; c < src.ids.size(); ++c) {
    auto& y = out.rec.channels.emplace_back();
    y.reserve(src.rec.length());
    for (auto x : src.rec.channels[c]) y.push_back(fir.step(c, x));
  }
  return out;
}

std::vector<std::uint8_t> run_raster(const Source& src, const Config& config) {
  std::vector<std::vector<std::uint8_t>> flags;
  for (std::size_t i = 0; i < src.ids.size(); ++i)
    flags.push_back(detect_spikes(src.rec.channels[i], detector_config(config, src.ids[i])));
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> tick(kRasterChannels, 0);
  const auto len = src.rec.length();
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t i = 0; i < src.ids.size(); ++i) tick[src.ids[i]] = flags[i][t];
    raster_tick(tick, static_cast<std::uint32_t>(t)).append_to(out);
  }
  return out;
}

std::vector<AteChannelReport> run_ate_report(const Source& src, const Config& config) {
  std::vector<AteChannelReport> out;
  for (std::size_t i = 0; i < src.ids.size(); ++i) {
    SpikeDetector det(detector_config(config, src.ids[i]));
    std::size_t hits = 0;
    for (auto x : src.rec.channels[i])
      if (auto f = det.step(x); f && *f) ++hits;
    for (auto f : det.finish()) hits += f != 0;
    const auto& a = det.ate();
    out.push_back({src.ids[i], a.ne_level(), a.zc_log, a.thr_neo, a.thr_amp, hits});
  }
  return out;
}

std::string format_ate_report(const std::vector<AteChannelReport>& report) {
  std::string out = "channel  ne_level  zc_log     thr_neo  thr_amp  detections\n";
  char buf[128];
  for (const auto& r : report) {
    std::snprintf(buf, sizeof buf, "%7d  %8llu  %6d  %10lld  %7lld  %10zu\n", r.channel,
                  static_cast<unsigned long long>(r.ne_level), r.zc_log, static_cast<long long>(r.thr_neo),
                  static_cast<long long>(r.thr_amp), r.detections);
    out += buf;
  }
  return out;
}

void apply_ate(const std::vector<AteChannelReport>& report, Config& config) {
  for (const auto& r : report) {
    config.set(ate_key(r.channel, "thr_neo"), r.thr_neo);
    config.set(ate_key(r.channel, "thr_amp"), r.thr_amp);
  }
}

}  // namespace nsp
