#include "nsp/core.hpp"

#include <algorithm>
#include <cmath>

namespace nsp {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::truncated_stream: return "truncated stream";
    case Errc::corrupt_stream: return "corrupt stream";
    case Errc::format: return "format error";
    case Errc::undefined_accuracy: return "undefined accuracy";
    case Errc::verification: return "verification failure";
  }
  return "unknown error";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void Recording::validate() const {
  if (rate_hz == 0) throw Error(Errc::invalid_argument, "rate_hz must be positive");
  if (channels.empty()) throw Error(Errc::invalid_argument, "recording has no channels");
  if (channels.size() > kMaxChannels)
    throw Error(Errc::invalid_argument, "recording has more than 68 channels");
  if (bits_per_sample != kSampleBits && bits_per_sample != 16)
    throw Error(Errc::invalid_argument, "bits_per_sample must be 9 or 16");
  const auto n = channels.front().size();
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].size() != n)
      throw Error(Errc::invalid_argument,
                  "channel " + std::to_string(c) + " length differs from channel 0");
    if (bits_per_sample == kSampleBits) {
      for (auto v : channels[c])
        if (!in_sample_range(v))
          throw Error(Errc::invalid_argument,
                      "channel " + std::to_string(c) + " holds a sample outside the 9-bit range");
    }
  }
}

SpikeEvent extract_spike(const std::vector<Sample>& signal, std::uint16_t channel, std::int64_t t) {
  if (t < static_cast<std::int64_t>(kPreTrigger) ||
      t + static_cast<std::int64_t>(kPostTrigger) >= static_cast<std::int64_t>(signal.size()))
    throw Error(Errc::invalid_argument, "spike window leaves the signal at t=" + std::to_string(t));
  SpikeEvent ev;
  ev.channel = channel;
  ev.t = t;
  std::copy_n(signal.begin() + (t - static_cast<std::int64_t>(kPreTrigger)), kSpikeWindow,
              ev.waveform.begin());
  return ev;
}

Sample quantize(double raw, double scale) {
  if (!(scale > 0.0)) throw Error(Errc::invalid_argument, "quantization scale must be positive");
  const double q = std::round(raw / scale);
  if (std::isnan(q)) return 0;
  return static_cast<Sample>(std::clamp(q, double(kSampleMin), double(kSampleMax)));
}

double ssr(std::uint64_t original_bits, std::uint64_t compressed_bits) {
  if (original_bits == 0) throw Error(Errc::invalid_argument, "original size is zero");
  return 1.0 - static_cast<double>(compressed_bits) / static_cast<double>(original_bits);
}

}  // namespace nsp
