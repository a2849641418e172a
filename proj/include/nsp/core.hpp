#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsp {

enum class Errc {
  invalid_argument,
  truncated_stream,
  corrupt_stream,
  format,
  undefined_accuracy,
  verification,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

// 9-bit two's complement ADC code, held in an i16.
using Sample = std::int16_t;

inline constexpr int kSampleBits = 9;
inline constexpr int kSampleMin = -256;
inline constexpr int kSampleMax = 255;
inline constexpr std::size_t kMaxChannels = 68;
inline constexpr std::uint32_t kDefaultRateHz = 20000;

constexpr bool in_sample_range(long v) { return v >= kSampleMin && v <= kSampleMax; }

struct Recording {
  std::uint32_t rate_hz = kDefaultRateHz;
  // 9 for ADC data; 16 for FIR output stored back into the recording format.
  std::uint8_t bits_per_sample = kSampleBits;
  std::vector<std::vector<Sample>> channels;

  std::size_t channel_count() const { return channels.size(); }
  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
  std::uint64_t sample_count() const { return channel_count() * static_cast<std::uint64_t>(length()); }

  // Throws Errc::invalid_argument when any invariant is broken.
  void validate() const;

  bool operator==(const Recording&) const = default;
};

inline constexpr std::size_t kSpikeWindow = 64;
inline constexpr std::size_t kPreTrigger = 31;
inline constexpr std::size_t kPostTrigger = 32;

struct SpikeEvent {
  std::uint16_t channel = 0;
  std::int64_t t = 0;  // trigger sample index, window spans [t-31, t+32]
  std::array<Sample, kSpikeWindow> waveform{};
};

// Copies the 64-sample window around trigger t; throws if the window leaves the signal.
SpikeEvent extract_spike(const std::vector<Sample>& signal, std::uint16_t channel, std::int64_t t);

// round(raw/scale) clamped to the 9-bit range. Rounds half away from zero.
Sample quantize(double raw, double scale);

// 1 - compressed/original.
double ssr(std::uint64_t original_bits, std::uint64_t compressed_bits);

inline std::uint64_t original_bits(std::uint64_t samples) { return samples * kSampleBits; }

}  // namespace nsp
