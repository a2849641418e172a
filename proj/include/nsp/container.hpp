#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nsp/ap_codec.hpp"
#include "nsp/arith.hpp"
#include "nsp/core.hpp"
#include "nsp/detect.hpp"
#include "nsp/lfp_codec.hpp"

namespace nsp {

enum class CommandId : std::uint8_t {
  record = 1,
  stream_raw = 2,
  encode_ap = 3,
  encode_lfp = 4,
  fir_stream = 5,
  fir_store = 6,
  raster = 7,
  ate_report = 8,
  ate_apply = 9,
};

const char* to_string(CommandId id);

inline constexpr std::uint8_t kContainerVersion = 1;
inline constexpr std::uint8_t kPaddedTailFlag = 0x80;

// Compressed stream layout (little-endian):
//   "NCS1" | version u8 | command u8 | rate_hz u32 | total_samples u64 |
//   channel count u16 | channel ids u8...
// AP (command 3):  slot count u8 | per slot 257 x u16 counts |
//                  per channel: codec u8 | mode u8 (bit 7 = padded tail) |
//                  chunk_mode u8 | slot u8 | payload_bits u32 | payload
// LFP (command 4): root u8 | per non-root: channel u8, parent u8, gamma i16 |
//                  window_n u16 | payload_bits u32 | payload
// Chain entries use positions within the channel id list.
struct ApChannelSection {
  ApCodecConfig config;
  bool padded_tail = false;
  std::uint64_t payload_bits = 0;
  std::vector<std::uint8_t> payload;
  bool operator==(const ApChannelSection&) const = default;
};

struct ApContainer {
  std::uint32_t rate_hz = kDefaultRateHz;
  std::uint64_t total_samples = 0;
  std::vector<std::uint8_t> channel_ids;
  std::vector<FrequencyTable> tables;
  std::vector<ApChannelSection> sections;
  bool operator==(const ApContainer&) const = default;
};

struct LfpContainer {
  std::uint32_t rate_hz = kDefaultRateHz;
  std::uint64_t total_samples = 0;
  std::vector<std::uint8_t> channel_ids;
  ChannelChain chain;
  std::uint16_t window_n = 0;
  std::uint64_t payload_bits = 0;
  std::vector<std::uint8_t> payload;
  bool operator==(const LfpContainer&) const = default;
};

std::vector<std::uint8_t> serialize(const ApContainer& c);
std::vector<std::uint8_t> serialize(const LfpContainer& c);
// Throws Errc::format (with the byte offset) on malformed input.
ApContainer parse_ap_container(std::span<const std::uint8_t> bytes);
LfpContainer parse_lfp_container(std::span<const std::uint8_t> bytes);
CommandId peek_command(std::span<const std::uint8_t> bytes);

struct EncodeApOptions {
  ApMode mode = ApMode::lossless;
  CoderKind coder = CoderKind::gc;
  ChunkMode chunks = ChunkMode::two;
  // Near-lossless trigger times per encoded channel. When empty the detector
  // supplies them.
  std::vector<std::vector<std::int64_t>> triggers;
  DetectorConfig detector;
};

// Encodes every channel of `rec`; channel_ids label them in the container
// (defaults to 0..n-1). AC channels share up to four trained table slots,
// assigned round-robin.
ApContainer encode_ap(const Recording& rec, const EncodeApOptions& options,
                      std::vector<std::uint8_t> channel_ids = {});

struct DecodedAp {
  Recording rec;
  std::vector<NearLosslessDecoded> near_lossless;  // per channel, near-lossless only
};

DecodedAp decode_ap(const ApContainer& c);

// What a near-lossless decode must return: the input inside each planned
// window (zero beyond the end of the stream), zero elsewhere.
std::vector<Sample> near_lossless_reference(std::span<const Sample> samples, const TriggerPlan& plan);

LfpContainer encode_lfp(const Recording& rec, const CceTrainingConfig& training,
                        std::vector<std::uint8_t> channel_ids = {});
Recording decode_lfp(const LfpContainer& c);

}  // namespace nsp
