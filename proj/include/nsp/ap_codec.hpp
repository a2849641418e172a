#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nsp/arith.hpp"
#include "nsp/bitio.hpp"
#include "nsp/core.hpp"

namespace nsp {

enum class ApMode : std::uint8_t { lossless = 0, near_lossless = 1 };
enum class CoderKind : std::uint8_t { ac = 0, gc = 1 };
enum class ChunkMode : std::uint8_t { two = 2, three = 3 };

struct ApCodecConfig {
  ApMode mode = ApMode::lossless;
  CoderKind coder = CoderKind::gc;
  std::uint8_t slot_id = 0;           // AC table slot
  ChunkMode chunks = ChunkMode::two;  // near-lossless only
  bool operator==(const ApCodecConfig&) const = default;
};

inline constexpr unsigned kRleChunkBits = 9;
inline constexpr std::size_t kRefractory = kSpikeWindow;

constexpr unsigned chunk_count(ChunkMode m) { return static_cast<unsigned>(m); }
// Largest run value; reserved as the "no window follows" continuation sentinel.
constexpr std::uint32_t run_sentinel(ChunkMode m) { return (1u << (kRleChunkBits * chunk_count(m))) - 1u; }

// Fixed-capacity history of the most recent samples of one channel; a
// detection can reach back into it for the pre-trigger part of a window.
class SpikeWindowBuffer {
public:
  static constexpr std::size_t kCapacity = 32;

  void push(Sample x);
  // i = 0 is the oldest retained sample.
  Sample at(std::size_t i) const;
  std::size_t size() const { return size_; }

private:
  std::array<Sample, kCapacity> ring_{};
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

// `table` must be non-null when config.coder is CoderKind::ac.
std::uint64_t encode_lossless(const ApCodecConfig& config, std::span<const Sample> samples,
                              const FrequencyTable* table, BitWriter& out);
std::vector<Sample> decode_lossless(const ApCodecConfig& config, const FrequencyTable* table, BitReader& in,
                                    std::size_t count);

// Mapped DPCM2 residues of a lossless stream, for AC table training.
std::vector<std::uint32_t> lossless_symbols(std::span<const Sample> samples);

// Trigger selection: first trigger wins, later ones within the refractory
// period are merged; triggers whose window would start before sample 0 are dropped.
struct TriggerPlan {
  std::vector<std::int64_t> triggers;
  std::size_t dropped = 0;
  bool padded_tail = false;  // last window runs past the end of the stream
};

TriggerPlan plan_triggers(std::span<const std::uint8_t> detections, std::size_t length);
TriggerPlan plan_triggers(std::span<const std::int64_t> trigger_times, std::size_t length);

// AC training symbols of a near-lossless stream: mapped window residues plus
// one ESC per RLE chunk.
std::vector<std::uint32_t> near_lossless_symbols(std::span<const Sample> samples, const TriggerPlan& plan,
                                                 ChunkMode chunks);

struct NearLosslessEncoded {
  std::uint64_t bits = 0;
  TriggerPlan plan;
  std::vector<std::uint32_t> runs;  // run values as emitted, sentinels included
};

NearLosslessEncoded encode_near_lossless(const ApCodecConfig& config, std::span<const Sample> samples,
                                         const TriggerPlan& plan, const FrequencyTable* table, BitWriter& out);

struct NearLosslessDecoded {
  std::vector<Sample> samples;
  std::vector<std::int64_t> window_starts;
  std::vector<std::uint32_t> runs;
  // Entropy-coded symbols consumed per spike group (RLE chunks + window).
  std::vector<std::size_t> group_symbols;
  std::size_t total_symbols = 0;
};

NearLosslessDecoded decode_near_lossless(const ApCodecConfig& config, const FrequencyTable* table,
                                         BitReader& in, std::size_t total_samples, bool padded_tail);

}  // namespace nsp
