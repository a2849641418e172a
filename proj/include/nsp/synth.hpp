#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nsp/core.hpp"
#include "nsp/nrec.hpp"

namespace nsp::synth {

// Single-channel extracellular simulation: three spike classes firing as
// Poisson processes over background made of many attenuated random spikes.
// Class spikes never overlap (at least kMinSeparation samples apart).
struct ApSimConfig {
  std::string name = "sim";
  bool difficult = false;       // similar-shaped templates
  double noise_level = 0.05;    // background std relative to unit template peak
  double spikes_per_second = 60.0;  // summed over the three classes
  double seconds = 60.0;
  std::uint32_t rate_hz = kDefaultRateHz;
  double background_rate = 4000.0;  // background spikes per second
  std::uint64_t seed = 1;
};

inline constexpr std::int64_t kMinSeparation = 64;

struct ApDataset {
  std::string name;
  Recording rec;     // one channel, 9-bit
  GroundTruth gt;    // times at the template peak sample
  double scale = 0;  // quantization scale, max|x| / 255
};

ApDataset simulate_ap(const ApSimConfig& config);

// Easy1, Easy2, Difficult1, Difficult2 at fixed noise levels and seeds.
std::vector<ApSimConfig> quiroga_like_configs();

// Loads <name>.nrec and <name>.gt from `dir` when both exist for all four
// sets; otherwise simulates them.
std::vector<ApDataset> quiroga_suite(const std::string& dir = "");

// Channels sharing one LFP-band source (1/f^2 background with theta and
// gamma rhythms), each with its own gain in [0.7, 1.2] and white electrode
// noise. The noise level is set from the source's DPCM2 residual variance so
// that every channel pair's residuals correlate at least at
// residual_correlation before quantization.
struct LfpSimConfig {
  std::size_t channels = 8;
  double seconds = 60.0;
  std::uint32_t rate_hz = 1250;
  double residual_correlation = 0.95;
  std::uint64_t seed = 7;
};

Recording simulate_lfp(const LfpSimConfig& config);

// Pearson correlation of two equal-length sequences.
double correlation(const std::vector<Sample>& a, const std::vector<Sample>& b);

// Uniform i.i.d. 9-bit samples.
Recording uniform_noise(std::size_t channels, std::size_t length, std::uint64_t seed);

}  // namespace nsp::synth
