#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsp/ap_codec.hpp"
#include "nsp/config.hpp"
#include "nsp/container.hpp"
#include "nsp/core.hpp"
#include "nsp/fir.hpp"

namespace nsp {

inline constexpr std::uint64_t kSramBytes = 128 * 1024;
inline constexpr std::size_t kLfpChannels = 8;

// "0-3,7" -> {0, 1, 2, 3, 7}. Ids must lie in 0..67 and appear once.
std::vector<std::uint8_t> parse_channel_list(const std::string& text);

// Validated .nrec load.
Recording ingest(const std::string& path);

// Samples plus the physical channel id of each row.
struct Source {
  Recording rec;
  std::vector<std::uint8_t> ids;
  bool operator==(const Source&) const = default;
};

// Live input: row i of `rec` is physical channel i. Empty selection = all rows.
Source live_source(const Recording& rec, const std::vector<std::uint8_t>& select);

// The debug store is a directory holding store.nrec (raw samples), store.ids
// (one channel id per line) and, after a record, spikes.nspk.
Source store_source(const std::string& dir, const std::vector<std::uint8_t>& select);
void write_store(const std::string& dir, const Source& src);
std::string store_spikes_path(const std::string& dir);

// Spike window file:
//   "NSPK" | version u8 = 1 | count u32 | per event: channel u8, t i64, 64 x i16
std::vector<std::uint8_t> encode_spikes(const std::vector<SpikeEvent>& events);
std::vector<SpikeEvent> decode_spikes(std::span<const std::uint8_t> bytes);
void write_spikes(const std::string& path, const std::vector<SpikeEvent>& events);
std::vector<SpikeEvent> read_spikes(const std::string& path);

// Detection + peak-aligned window extraction on every row, using each
// channel's detector settings from the config.
std::vector<SpikeEvent> source_events(const Source& src, const Config& config);

// C1: raw samples and spike windows into the store.
struct RecordReport {
  std::size_t channels = 0;
  std::uint64_t samples = 0;
  std::size_t windows = 0;
  std::uint64_t window_bytes = 0;  // 64 x i16 per window
  std::uint64_t sram_budget = kSramBytes;
  bool fits = false;
};
RecordReport record_to_store(const Source& src, const Config& config, const std::string& dir,
                             std::uint64_t sram_budget = kSramBytes);

// C2: for every tick, one frame per selected channel: id u8 | sample i16 LE.
std::vector<std::uint8_t> stream_raw(const Source& src);
// Inverse of stream_raw; the channel order of the first tick must repeat.
Source parse_raw_frames(std::span<const std::uint8_t> bytes, std::uint32_t rate_hz = kDefaultRateHz);

struct ApCommandOptions {
  ApMode mode = ApMode::lossless;
  CoderKind coder = CoderKind::gc;
  ChunkMode chunks = ChunkMode::two;
};

// C3. The container is decoded again before it is returned; a mismatch
// against the input (or the near-lossless reference) throws Errc::verification.
std::vector<std::uint8_t> run_encode_ap(const Source& src, const ApCommandOptions& options, const Config& config);
Source run_decode_ap(std::span<const std::uint8_t> bytes);

// C4: exactly eight channels, verified like C3.
std::vector<std::uint8_t> run_encode_lfp(const Source& src, const Config& config);
Source run_decode_lfp(std::span<const std::uint8_t> bytes);

// C5/C6: row i runs through filter i of the bank (at most 16 rows). The
// result is a 16-bit recording with the same ids. out_shift comes from
// fir.out_shift (default 12).
Source run_fir(const Source& src, const FirCoeffBank& bank, const Config& config);

// C7: one raster packet per tick over all 68 channel slots.
std::vector<std::uint8_t> run_raster(const Source& src, const Config& config);

// C8: detector state at end of stream per channel.
struct AteChannelReport {
  std::uint8_t channel = 0;
  std::uint64_t ne_level = 0;
  std::uint8_t zc_log = 0;
  std::int64_t thr_neo = 0;
  std::int64_t thr_amp = 0;
  std::size_t detections = 0;
  bool operator==(const AteChannelReport&) const = default;
};
std::vector<AteChannelReport> run_ate_report(const Source& src, const Config& config);
std::string format_ate_report(const std::vector<AteChannelReport>& report);

// C9: pins each channel's thresholds as ate.ch<id>.thr_neo / thr_amp.
void apply_ate(const std::vector<AteChannelReport>& report, Config& config);

}  // namespace nsp
