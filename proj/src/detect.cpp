#include "nsp/detect.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>

namespace nsp {

void DetectorConfig::validate() const {
  if (c0 <= 0) throw Error(Errc::invalid_argument, "detector c0 must be positive");
  if (c1 < 0) throw Error(Errc::invalid_argument, "detector c1 must be non-negative");
  if (amp_mult <= 0) throw Error(Errc::invalid_argument, "detector amp_mult must be positive");
  if (refractory < 64) throw Error(Errc::invalid_argument, "detector refractory must be at least 64 samples");
  if (verify_window > 16) throw Error(Errc::invalid_argument, "detector verify_window must be at most 16");
  if (fixed_thr_neo && *fixed_thr_neo < 0) throw Error(Errc::invalid_argument, "fixed thr_neo must be non-negative");
  if (fixed_thr_amp && *fixed_thr_amp < 0) throw Error(Errc::invalid_argument, "fixed thr_amp must be non-negative");
}

std::int64_t neo(NeoState& s, int x) {
  std::int64_t psi = 0;
  if (s.seen >= 2) {
    psi = static_cast<std::int64_t>(s.x1) * s.x1 - static_cast<std::int64_t>(s.x2) * x;
    psi = std::max(psi, kNeoFloor);
  } else {
    ++s.seen;
  }
  s.x2 = s.x1;
  s.x1 = x;
  return psi;
}

std::optional<std::uint8_t> zero_crossing_update(AteState& ate, std::int64_t psi) {
  if (ate.zc_window > 0 && psi != 0 && ate.psi_prev != 0 && ((psi < 0) != (ate.psi_prev < 0))) ++ate.zc_count;
  ate.psi_prev = psi;
  if (++ate.zc_window < kZcWindow) return std::nullopt;
  ate.zc_log = static_cast<std::uint8_t>(std::bit_width(ate.zc_count + 1) - 1);
  ate.zc_count = 0;
  ate.zc_window = 0;
  ate.psi_prev = 0;
  return ate.zc_log;
}

std::uint64_t noise_update(AteState& ate, std::int64_t psi) {
  const std::uint64_t rectified = psi > 0 ? static_cast<std::uint64_t>(psi) : 0;
  const std::uint64_t clipped = std::min<std::uint64_t>(rectified, 4 * ate.ne_level() + 64);
  const auto target = static_cast<std::int64_t>(clipped << kNoiseFracBits);
  const auto acc = static_cast<std::int64_t>(ate.ne_acc);
  ate.ne_acc = static_cast<std::uint64_t>(acc + ((target - acc) >> kNoiseShift));
  return ate.ne_level();
}

std::uint64_t isqrt(std::uint64_t v) {
  std::uint64_t r = 0;
  for (std::uint64_t bit = std::uint64_t{1} << 62; bit != 0; bit >>= 2) {
    if (v >= r + bit) {
      v -= r + bit;
      r = (r >> 1) + bit;
    } else {
      r >>= 1;
    }
  }
  return r;
}

void threshold_calc(AteState& ate, const DetectorConfig& config) {
  const auto ne = static_cast<std::int64_t>(ate.ne_level());
  ate.thr_neo = ne * (config.c0 + config.c1 * ate.zc_log);
  ate.thr_amp = config.amp_mult * static_cast<std::int64_t>(isqrt(std::max<std::uint64_t>(ate.ne_level(), 1)));
  if (config.fixed_thr_neo) ate.thr_neo = *config.fixed_thr_neo;
  if (config.fixed_thr_amp) ate.thr_amp = *config.fixed_thr_amp;
}

SpikeDetector::SpikeDetector(DetectorConfig config) : config_(config) {
  config_.validate();
  threshold_calc(ate_, config_);
}

bool SpikeDetector::decide(std::int64_t m, std::int64_t last_psi_index) {
  if (!stage1_[static_cast<std::size_t>(m) % kRing]) return false;
  if (m < static_cast<std::int64_t>(config_.warmup)) return false;
  if (last_detection_ >= 0 && m < last_detection_ + static_cast<std::int64_t>(config_.refractory)) return false;
  const auto v = static_cast<std::int64_t>(config_.verify_window);
  const std::int64_t lo = std::max<std::int64_t>(0, m - v);
  const std::int64_t hi = std::min(m + v, last_psi_index);
  for (std::int64_t j = lo; j <= hi; ++j)
    if (neo_hit_[static_cast<std::size_t>(j) % kRing]) {
      last_detection_ = m;
      return true;
    }
  return false;
}

std::optional<bool> SpikeDetector::step(Sample x) {
  const std::int64_t n = n_++;
  const auto psi = neo(neo_, x);
  if (n >= 1) {
    // psi belongs to sample n-1.
    if (auto zc = zero_crossing_update(ate_, psi)) zc_history_.push_back(*zc);
    noise_update(ate_, psi);
    threshold_calc(ate_, config_);
    neo_hit_[static_cast<std::size_t>(n - 1) % kRing] = n >= 2 && psi >= ate_.thr_neo;
  }
  stage1_[static_cast<std::size_t>(n) % kRing] = std::abs(static_cast<std::int64_t>(x)) >= ate_.thr_amp;

  const std::int64_t m = n - static_cast<std::int64_t>(latency());
  if (m < 0) return std::nullopt;
  decided_ = m + 1;
  return decide(m, n - 1);
}

std::vector<std::uint8_t> SpikeDetector::finish() {
  std::vector<std::uint8_t> out;
  for (; decided_ < n_; ++decided_) out.push_back(decide(decided_, n_ - 2));
  return out;
}

std::vector<std::uint8_t> detect_spikes(std::span<const Sample> samples, const DetectorConfig& config) {
  SpikeDetector det(config);
  std::vector<std::uint8_t> flags;
  flags.reserve(samples.size());
  for (auto x : samples)
    if (auto f = det.step(x)) flags.push_back(*f);
  const auto tail = det.finish();
  flags.insert(flags.end(), tail.begin(), tail.end());
  return flags;
}

std::vector<std::int64_t> detection_times(std::span<const std::uint8_t> flags) {
  std::vector<std::int64_t> t;
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i]) t.push_back(static_cast<std::int64_t>(i));
  return t;
}

int dominant_polarity(std::span<const Sample> samples, std::span<const std::int64_t> times, std::int64_t search) {
  const auto n = static_cast<std::int64_t>(samples.size());
  std::int64_t votes = 0;
  for (auto t : times) {
    int hi = 0, lo = 0;
    for (std::int64_t k = t; k < t + search && k < n; ++k) {
      hi = std::max<int>(hi, samples[static_cast<std::size_t>(k)]);
      lo = std::min<int>(lo, samples[static_cast<std::size_t>(k)]);
    }
    votes += hi >= -lo ? 1 : -1;
  }
  return votes >= 0 ? 1 : -1;
}

std::vector<std::int64_t> align_to_peak(std::span<const Sample> samples, std::span<const std::int64_t> times,
                                        int polarity, std::int64_t search) {
  if (polarity != 1 && polarity != -1) throw Error(Errc::invalid_argument, "polarity must be +1 or -1");
  std::vector<std::int64_t> out;
  out.reserve(times.size());
  const auto n = static_cast<std::int64_t>(samples.size());
  for (auto t : times) {
    std::int64_t best = t;
    for (std::int64_t k = t; k < t + search && k < n; ++k)
      if (polarity * samples[static_cast<std::size_t>(k)] > polarity * samples[static_cast<std::size_t>(best)]) best = k;
    out.push_back(best);
  }
  return out;
}

std::vector<SpikeEvent> extract_events(const std::vector<Sample>& samples, std::uint16_t channel,
                                       std::span<const std::int64_t> times) {
  std::vector<SpikeEvent> out;
  const auto n = static_cast<std::int64_t>(samples.size());
  for (auto t : times)
    if (t >= static_cast<std::int64_t>(kPreTrigger) && t + static_cast<std::int64_t>(kPostTrigger) < n)
      out.push_back(extract_spike(samples, channel, t));
  return out;
}

}  // namespace nsp
