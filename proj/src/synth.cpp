#include "nsp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

namespace nsp::synth {

namespace {

// Positive peak at t = 0 followed by an after-hyperpolarization trough and
// an optional small pre-peak dip.
struct SpikeShape {
  double width = 3.0;
  double trough = 0.45;
  double trough_delay = 8.0;
  double trough_width = 6.0;
  double dip = 0.0;

  double raw(double t) const {
    auto g = [](double u, double s) { return std::exp(-0.5 * (u / s) * (u / s)); };
    return g(t, width) - trough * g(t - trough_delay, trough_width) - dip * g(t + 2.5 * width, width);
  }
  double operator()(double t) const { return raw(t) / raw(0.0); }
};

std::array<SpikeShape, 3> templates(bool difficult) {
  if (!difficult)
    return {SpikeShape{2.6, 0.40, 7.0, 5.0, 0.0}, SpikeShape{4.0, 0.20, 12.0, 10.0, 0.12},
            SpikeShape{2.0, 0.75, 5.0, 3.5, 0.0}};
  return {SpikeShape{2.8, 0.45, 8.0, 6.0, 0.05}, SpikeShape{3.4, 0.60, 9.0, 7.0, 0.10},
          SpikeShape{2.5, 0.30, 7.0, 5.0, 0.15}};
}

void add_spike(std::vector<double>& x, const SpikeShape& s, double peak_time, double amplitude) {
  const auto first = static_cast<std::int64_t>(std::floor(peak_time)) - 20;
  const auto last = static_cast<std::int64_t>(std::ceil(peak_time)) + 44;
  for (auto n = std::max<std::int64_t>(first, 0); n <= last && n < static_cast<std::int64_t>(x.size()); ++n)
    x[static_cast<std::size_t>(n)] += amplitude * s(static_cast<double>(n) - peak_time);
}

double stddev(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double acc = 0.0;
  for (double a : v) acc += (a - mean) * (a - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

std::vector<Sample> quantize_all(const std::vector<double>& x, double scale) {
  std::vector<Sample> q(x.size());
  std::transform(x.begin(), x.end(), q.begin(), [scale](double v) { return quantize(v, scale); });
  return q;
}

}  // namespace

ApDataset simulate_ap(const ApSimConfig& config) {
  if (!(config.seconds > 0.0) || !(config.spikes_per_second > 0.0) || config.rate_hz == 0)
    throw Error(Errc::invalid_argument, "simulation needs positive duration, firing and sample rates");
  const auto n = static_cast<std::size_t>(config.seconds * config.rate_hz);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> background(n, 0.0);
  {
    std::vector<SpikeShape> pool;
    for (int i = 0; i < 64; ++i)
      pool.push_back({1.8 + 3.0 * unit(rng), 0.1 + 0.7 * unit(rng), 4.0 + 8.0 * unit(rng), 3.0 + 7.0 * unit(rng),
                      0.3 * unit(rng)});
    std::exponential_distribution<double> gap(config.background_rate / config.rate_hz);
    for (double t = gap(rng); t < static_cast<double>(n); t += gap(rng))
      add_spike(background, pool[rng() % pool.size()], t, 0.2 + 0.8 * unit(rng));
    const double mean = std::accumulate(background.begin(), background.end(), 0.0) / static_cast<double>(n);
    const double sd = stddev(background);
    for (auto& v : background) v = (v - mean) * (config.noise_level / sd);
  }

  ApDataset ds;
  ds.name = config.name;
  const auto shapes = templates(config.difficult);
  const double mean_gap = static_cast<double>(config.rate_hz) / config.spikes_per_second;
  std::exponential_distribution<double> extra(1.0 / std::max(mean_gap - kMinSeparation, 1.0));
  std::vector<double> x = background;
  for (double t = 300.0 + extra(rng); t < static_cast<double>(n) - 2.0 * kMinSeparation;
       t += static_cast<double>(kMinSeparation) + extra(rng)) {
    const int label = static_cast<int>(rng() % shapes.size());
    add_spike(x, shapes[static_cast<std::size_t>(label)], t, 1.0);
    ds.gt.times.push_back(std::llround(t));
    ds.gt.labels.push_back(label);
  }

  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  ds.scale = peak / kSampleMax;
  ds.rec.rate_hz = config.rate_hz;
  ds.rec.channels.push_back(quantize_all(x, ds.scale));
  return ds;
}

std::vector<ApSimConfig> quiroga_like_configs() {
  std::vector<ApSimConfig> c(4);
  c[0].name = "Easy1";
  c[0].noise_level = 0.05;
  c[0].seed = 101;
  c[1].name = "Easy2";
  c[1].noise_level = 0.10;
  c[1].seed = 202;
  c[2].name = "Difficult1";
  c[2].difficult = true;
  c[2].noise_level = 0.10;
  c[2].seed = 303;
  c[3].name = "Difficult2";
  c[3].difficult = true;
  c[3].noise_level = 0.15;
  c[3].seed = 404;
  return c;
}

std::vector<ApDataset> quiroga_suite(const std::string& dir) {
  namespace fs = std::filesystem;
  auto configs = quiroga_like_configs();
  if (!dir.empty()) {
    bool complete = true;
    for (const auto& c : configs)
      complete = complete && fs::exists(fs::path(dir) / (c.name + ".nrec")) && fs::exists(fs::path(dir) / (c.name + ".gt"));
    if (complete) {
      std::vector<ApDataset> out;
      for (const auto& c : configs) {
        ApDataset ds;
        ds.name = c.name;
        ds.rec = read_nrec((fs::path(dir) / (c.name + ".nrec")).string());
        ds.gt = read_ground_truth((fs::path(dir) / (c.name + ".gt")).string());
        ds.scale = 0.0;
        out.push_back(std::move(ds));
      }
      return out;
    }
  }
  std::vector<ApDataset> out;
  for (const auto& c : configs) out.push_back(simulate_ap(c));
  return out;
}

Recording simulate_lfp(const LfpSimConfig& config) {
  if (config.channels == 0 || config.channels > kMaxChannels)
    throw Error(Errc::invalid_argument, "channel count out of range");
  const auto n = static_cast<std::size_t>(config.seconds * config.rate_hz);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> white(0.0, 1.0);
  const double fs = config.rate_hz;
  const double pi = std::acos(-1.0);

  // Shared source: 1/f^2 background (1 Hz corner) plus theta and gamma resonators.
  std::vector<double> src(n);
  {
    auto resonator = [&](double f, double r) { return std::pair{2.0 * r * std::cos(2.0 * pi * f / fs), -r * r}; };
    const double pole = std::exp(-2.0 * pi * 1.0 / fs);
    const auto [t1, t2] = resonator(8.0, 0.995);
    const auto [g1, g2] = resonator(40.0, 0.98);
    double bg = 0, th1 = 0, th2 = 0, ga1 = 0, ga2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      bg = pole * bg + white(rng);
      const double th = t1 * th1 + t2 * th2 + 0.35 * white(rng);
      th2 = th1;
      th1 = th;
      const double ga = g1 * ga1 + g2 * ga2 + 0.15 * white(rng);
      ga2 = ga1;
      ga1 = ga;
      src[i] = bg + th + ga;
    }
  }
  // Electrode noise sized so the DPCM2 residuals of the weakest pair still
  // correlate at residual_correlation: white noise of variance s2 adds 6*s2
  // to the residual variance.
  double resid_var = 0.0;
  for (std::size_t i = 2; i < n; ++i) {
    const double e = src[i] - 2.0 * src[i - 1] + src[i - 2];
    resid_var += e * e;
  }
  resid_var /= static_cast<double>(n - 2);
  constexpr double kMinGain = 0.7;
  const double rho = config.residual_correlation;
  const double noise_sd = kMinGain * std::sqrt(resid_var * (1.0 - rho) / (6.0 * rho));

  std::vector<std::vector<double>> chans(config.channels, std::vector<double>(n));
  std::uniform_real_distribution<double> gain(kMinGain, 1.2);
  for (auto& ch : chans) {
    const double g = gain(rng);
    for (std::size_t i = 0; i < n; ++i) ch[i] = g * src[i] + noise_sd * white(rng);
  }
  double peak = 0.0;
  for (const auto& ch : chans)
    for (double v : ch) peak = std::max(peak, std::abs(v));
  Recording rec;
  rec.rate_hz = config.rate_hz;
  for (const auto& ch : chans) rec.channels.push_back(quantize_all(ch, peak / kSampleMax));
  return rec;
}

double correlation(const std::vector<Sample>& a, const std::vector<Sample>& b) {
  if (a.size() != b.size() || a.empty()) throw Error(Errc::invalid_argument, "correlation needs equal non-empty inputs");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return (saa > 0 && sbb > 0) ? sab / std::sqrt(saa * sbb) : 0.0;
}

Recording uniform_noise(std::size_t channels, std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Recording rec;
  rec.channels.assign(channels, std::vector<Sample>(length));
  for (auto& ch : rec.channels)
    for (auto& v : ch) v = static_cast<Sample>(static_cast<int>(rng() % 512) + kSampleMin);
  return rec;
}

}  // namespace nsp::synth
