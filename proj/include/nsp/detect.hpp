#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nsp/core.hpp"

namespace nsp {

inline constexpr std::int64_t kNeoFloor = -(1 << 20);
inline constexpr std::uint32_t kZcWindow = 1u << 14;
inline constexpr unsigned kNoiseFracBits = 8;
inline constexpr unsigned kNoiseShift = 4;  // low-pass alpha = 1/16

struct DetectorConfig {
  std::int64_t c0 = 8;
  std::int64_t c1 = 0;
  std::int64_t amp_mult = 4;
  std::uint32_t refractory = 64;
  std::uint32_t verify_window = 4;
  // Samples at stream start during which detections are suppressed while the
  // noise estimate settles.
  std::uint32_t warmup = 256;
  // Thresholds pinned by an ATE apply; when set they replace the adaptive value.
  std::optional<std::int64_t> fixed_thr_neo;
  std::optional<std::int64_t> fixed_thr_amp;

  void validate() const;
};

// Causal nonlinear energy operator: fed x(n), yields psi(n-1).
struct NeoState {
  int x1 = 0;  // x(n-1)
  int x2 = 0;  // x(n-2)
  std::uint8_t seen = 0;
};

std::int64_t neo(NeoState& state, int x);

struct AteState {
  std::uint32_t zc_count = 0;
  std::uint32_t zc_window = 0;
  std::uint8_t zc_log = 0;
  std::int64_t psi_prev = 0;
  std::uint64_t ne_acc = 0;  // noise level with kNoiseFracBits fraction bits
  std::int64_t thr_neo = 0;
  std::int64_t thr_amp = 0;

  std::uint64_t ne_level() const { return ne_acc >> kNoiseFracBits; }
};

// Counts sign changes between consecutive nonzero psi values; every kZcWindow
// samples returns floor(log2(count + 1)) and starts a new window.
std::optional<std::uint8_t> zero_crossing_update(AteState& ate, std::int64_t psi);

// Clipped first-order low-pass of the rectified psi; returns the integer level.
std::uint64_t noise_update(AteState& ate, std::int64_t psi);

void threshold_calc(AteState& ate, const DetectorConfig& config);

std::uint64_t isqrt(std::uint64_t v);

// Two-stage detector for one channel: an amplitude test against thr_amp,
// confirmed by psi >= thr_neo within +-verify_window samples. The decision
// for a sample is available latency() samples after it was pushed.
class SpikeDetector {
public:
  explicit SpikeDetector(DetectorConfig config = {});

  // Pushes x(n); returns the detection flag for sample n - latency(), or
  // nothing while fewer than latency() samples have been seen.
  std::optional<bool> step(Sample x);
  // Decides the samples still pending at end of stream.
  std::vector<std::uint8_t> finish();

  std::uint32_t latency() const { return config_.verify_window + 1; }
  const AteState& ate() const { return ate_; }
  const DetectorConfig& config() const { return config_; }
  // zc_log values emitted so far, one per completed window.
  const std::vector<std::uint8_t>& zc_history() const { return zc_history_; }

private:
  static constexpr std::size_t kRing = 64;
  bool decide(std::int64_t m, std::int64_t last_psi_index);

  DetectorConfig config_;
  NeoState neo_;
  AteState ate_;
  std::array<std::uint8_t, kRing> stage1_{};
  std::array<std::uint8_t, kRing> neo_hit_{};
  std::int64_t n_ = 0;          // samples pushed
  std::int64_t decided_ = 0;    // samples decided
  std::int64_t last_detection_ = -1;
  std::vector<std::uint8_t> zc_history_;
};

// Detection flags aligned with the input samples.
std::vector<std::uint8_t> detect_spikes(std::span<const Sample> samples, const DetectorConfig& config = {});
std::vector<std::int64_t> detection_times(std::span<const std::uint8_t> flags);

inline constexpr std::int64_t kPeakSearch = 16;

// +1 when most detections reach further above zero than below within
// [t, t + search), else -1.
int dominant_polarity(std::span<const Sample> samples, std::span<const std::int64_t> times,
                      std::int64_t search = kPeakSearch);

// Moves each trigger to the extreme of the given polarity in [t, t + search);
// the first extreme wins.
std::vector<std::int64_t> align_to_peak(std::span<const Sample> samples, std::span<const std::int64_t> times,
                                        int polarity, std::int64_t search = kPeakSearch);

// Windows around each time; times whose window leaves the signal are skipped.
std::vector<SpikeEvent> extract_events(const std::vector<Sample>& samples, std::uint16_t channel,
                                       std::span<const std::int64_t> times);

}  // namespace nsp
