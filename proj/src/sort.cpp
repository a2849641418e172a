#include "nsp/sort.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include "nsp/bitio.hpp"
#include "nsp/linalg.hpp"

namespace nsp {

std::int16_t quantize_q15(double v) {
  const double q = std::round(v * kQ15One);
  return static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
}

FeatureVector mac_project(const FeatureMatrix& f, std::span<const Sample> spike) {
  if (spike.size() != kSpikeWindow) throw Error(Errc::invalid_argument, "MAC input must hold 64 samples");
  FeatureVector out;
  out.reserve(f.rows.size());
  for (const auto& row : f.rows) {
    std::uint32_t acc = 0;
    for (std::size_t j = 0; j < kSpikeWindow; ++j)
      acc += static_cast<std::uint32_t>(static_cast<std::int32_t>(row[j]) * static_cast<std::int32_t>(spike[j]));
    out.push_back(static_cast<std::int32_t>(acc));
  }
  return out;
}

PcaResult pca_train(std::span<const Waveform> spikes, std::size_t p) {
  if (p == 0 || p > kSpikeWindow) throw Error(Errc::invalid_argument, "PCA dimension must be in 1..64");
  if (spikes.size() < p + 1) throw Error(Errc::invalid_argument, "PCA needs at least p+1 spikes");
  constexpr std::size_t n = kSpikeWindow;
  std::vector<double> mean(n, 0.0);
  for (const auto& s : spikes)
    for (std::size_t j = 0; j < n; ++j) mean[j] += s[j];
  for (auto& m : mean) m /= static_cast<double>(spikes.size());

  auto cov = linalg::zeros(n, n);
  std::vector<double> d(n);
  for (const auto& s : spikes) {
    for (std::size_t j = 0; j < n; ++j) d[j] = s[j] - mean[j];
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b) cov[a][b] += d[a] * d[b];
  }
  const double denom = static_cast<double>(spikes.size() - 1);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) cov[b][a] = cov[a][b] /= denom;

  const auto eig = linalg::jacobi_eigen(std::move(cov));
  PcaResult r;
  r.matrix.method = FeatureMethod::pca;
  r.eigenvalues = eig.values;
  const double top = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
  for (double v : eig.values)
    if (top > 0.0 && v > 1e-9 * top) ++r.rank;
  r.degenerate = r.rank < p;
  for (std::size_t i = 0; i < p; ++i) {
    std::array<std::int16_t, kSpikeWindow> row{};
    if (i < r.rank) {
      auto vec = eig.vectors[i];
      const auto big = std::max_element(vec.begin(), vec.end(),
                                        [](double a, double b) { return std::abs(a) < std::abs(b); });
      const double sign = *big < 0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n; ++j) row[j] = quantize_q15(sign * vec[j]);
    }
    r.matrix.rows.push_back(row);
  }
  return r;
}

namespace {

double sq_dist(std::span<const double> a, const Waveform& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < kSpikeWindow; ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

}  // namespace

FeatureMatrix af_train(std::span<const Waveform> spikes, std::size_t k_templates) {
  if (k_templates == 0) throw Error(Errc::invalid_argument, "AF needs at least one template");
  if (spikes.size() < k_templates) throw Error(Errc::invalid_argument, "AF needs at least k_templates spikes");

  std::vector<std::vector<double>> templates;
  templates.emplace_back(spikes[0].begin(), spikes[0].end());
  std::vector<double> nearest(spikes.size(), std::numeric_limits<double>::infinity());
  while (templates.size() < k_templates) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < spikes.size(); ++i) {
      nearest[i] = std::min(nearest[i], sq_dist(templates.back(), spikes[i]));
      if (nearest[i] > nearest[best]) best = i;
    }
    templates.emplace_back(spikes[best].begin(), spikes[best].end());
  }

  for (const auto& s : spikes) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < templates.size(); ++t) {
      const double dd = sq_dist(templates[t], s);
      if (dd < best_d) {
        best_d = dd;
        best = t;
      }
    }
    for (std::size_t j = 0; j < kSpikeWindow; ++j) templates[best][j] += (s[j] - templates[best][j]) / 16.0;
  }

  FeatureMatrix f;
  f.method = FeatureMethod::af;
  for (const auto& t : templates) {
    const double norm = std::sqrt(std::inner_product(t.begin(), t.end(), t.begin(), 0.0));
    std::array<std::int16_t, kSpikeWindow> row{};
    if (norm > 0.0)
      for (std::size_t j = 0; j < kSpikeWindow; ++j) row[j] = quantize_q15(t[j] / norm);
    f.rows.push_back(row);
  }
  return f;
}

namespace {

double sq_dist(std::span<const double> c, std::span<const std::int32_t> f) {
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double d = static_cast<double>(f[j]) - c[j];
    s += d * d;
  }
  return s;
}

// Uniform double in [0,1) from raw engine output, independent of the
// standard library's distribution implementations.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

KMeansResult kmeans_train(std::span<const FeatureVector> features, std::size_t k, std::uint64_t seed, Metric metric) {
  if (k == 0) throw Error(Errc::invalid_argument, "k must be positive");
  if (k > features.size()) throw Error(Errc::invalid_argument, "k exceeds the number of points");
  const std::size_t n = features.size();
  const std::size_t dim = features[0].size();
  for (const auto& f : features)
    if (f.size() != dim) throw Error(Errc::invalid_argument, "feature vectors differ in dimension");

  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> centers;
  auto add_center = [&](std::size_t i) { centers.emplace_back(features[i].begin(), features[i].end()); };
  add_center(static_cast<std::size_t>(rng() % n));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(centers.back(), features[i]));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = unit_draw(rng) * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (target < d2[i]) {
          pick = i;
          break;
        }
        target -= d2[i];
      }
    } else {
      pick = static_cast<std::size_t>(rng() % n);
    }
    add_center(pick);
  }

  KMeansResult res;
  res.labels.assign(n, -1);
  std::vector<double> own(n, 0.0);
  for (res.iterations = 0; res.iterations < kKMeansMaxIterations; ++res.iterations) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = sq_dist(centers[c], features[i]);
        if (dd < best_d) {
          best_d = dd;
          best = c;
        }
      }
      own[i] = best_d;
      objective += best_d;
      if (res.labels[i] != static_cast<int>(best)) {
        res.labels[i] = static_cast<int>(best);
        changed = true;
      }
    }
    res.objective.push_back(objective);
    if (!changed && res.iterations > 0) break;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(res.labels[i]);
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += features[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Empty cluster: move it onto the point farthest from its own centre.
        const auto far = static_cast<std::size_t>(std::max_element(own.begin(), own.end()) - own.begin());
        centers[c].assign(features[far].begin(), features[far].end());
        own[far] = 0.0;
        ++res.reseeds;
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
  }

  res.model.metric = metric;
  for (const auto& c : centers) {
    std::vector<std::int32_t> ci(dim);
    for (std::size_t j = 0; j < dim; ++j)
      ci[j] = static_cast<std::int32_t>(std::clamp(std::round(c[j]), -2147483648.0, 2147483647.0));
    res.model.centroids.push_back(std::move(ci));
  }

  if (metric == Metric::mahalanobis) {
    for (std::size_t c = 0; c < k; ++c) {
      auto cov = linalg::zeros(dim, dim);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (res.labels[i] != static_cast<int>(c)) continue;
        ++count;
        for (std::size_t a = 0; a < dim; ++a)
          for (std::size_t b = 0; b < dim; ++b)
            cov[a][b] += (features[i][a] - centers[c][a]) * (features[i][b] - centers[c][b]);
      }
      double trace = 0.0;
      for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = 0; b < dim; ++b) cov[a][b] /= static_cast<double>(std::max<std::size_t>(count, 1));
        trace += cov[a][a];
      }
      const double eps = trace > 0.0 ? 1e-3 * trace / static_cast<double>(dim) : 1.0;
      for (std::size_t a = 0; a < dim; ++a) cov[a][a] += eps;
      const auto inv = linalg::invert_spd(cov);
      std::vector<double> flat;
      for (const auto& row : inv) flat.insert(flat.end(), row.begin(), row.end());
      res.model.inv_cov.push_back(std::move(flat));
    }
  }
  return res;
}

double cluster_distance(const ClusterModel& model, std::size_t cluster, std::span<const std::int32_t> f) {
  const auto& c = model.centroids[cluster];
  const std::size_t dim = c.size();
  if (model.metric == Metric::mahalanobis) {
    const auto& inv = model.inv_cov[cluster];
    std::vector<double> d(dim);
    for (std::size_t j = 0; j < dim; ++j) d[j] = static_cast<double>(f[j]) - c[j];
    double s = 0.0;
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) s += d[a] * inv[a * dim + b] * d[b];
    return s;
  }
  // Exact in 128-bit integers, then converted once.
  unsigned __int128 acc = 0;
  for (std::size_t j = 0; j < dim; ++j) {
    const std::int64_t d = static_cast<std::int64_t>(f[j]) - c[j];
    acc += static_cast<unsigned __int128>(static_cast<__int128>(d) * d);
  }
  return static_cast<double>(acc);
}

std::size_t classify(const ClusterModel& model, std::span<const std::int32_t> f) {
  if (model.k() == 0) throw Error(Errc::invalid_argument, "cluster model is empty");
  if (f.size() != model.dim()) throw Error(Errc::invalid_argument, "feature dimension does not match model");
  if (model.metric == Metric::euclidean) {
    // Integer comparison keeps ties exact.
    std::size_t best = 0;
    unsigned __int128 best_d = 0;
    for (std::size_t c = 0; c < model.k(); ++c) {
      unsigned __int128 acc = 0;
      for (std::size_t j = 0; j < f.size(); ++j) {
        const std::int64_t d = static_cast<std::int64_t>(f[j]) - model.centroids[c][j];
        acc += static_cast<unsigned __int128>(static_cast<__int128>(d) * d);
      }
      if (c == 0 || acc < best_d) {
        best_d = acc;
        best = c;
      }
    }
    return best;
  }
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.k(); ++c) {
    const double dd = cluster_distance(model, c, f);
    if (dd < best_d) {
      best_d = dd;
      best = c;
    }
  }
  return best;
}

std::vector<std::pair<std::size_t, std::size_t>> match_events(std::span<const std::int64_t> det_times,
                                                              std::span<const std::int64_t> gt_times,
                                                              std::int64_t tolerance) {
  std::vector<std::tuple<std::int64_t, std::size_t, std::size_t>> cand;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < det_times.size(); ++i) {
    while (lo < gt_times.size() && gt_times[lo] < det_times[i] - tolerance) ++lo;
    for (std::size_t j = lo; j < gt_times.size() && gt_times[j] <= det_times[i] + tolerance; ++j)
      cand.emplace_back(std::abs(gt_times[j] - det_times[i]), i, j);
  }
  std::sort(cand.begin(), cand.end());
  std::vector<bool> det_used(det_times.size(), false), gt_used(gt_times.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [dt, i, j] : cand) {
    if (det_used[i] || gt_used[j]) continue;
    det_used[i] = gt_used[j] = true;
    pairs.emplace_back(i, j);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

AccuracyReport accuracy_eval(std::span<const std::int64_t> det_times, std::span<const int> det_labels,
                             const GroundTruth& gt, std::int64_t tolerance) {
  if (det_times.size() != det_labels.size())
    throw Error(Errc::invalid_argument, "detection times and labels differ in length");
  AccuracyReport rep;
  rep.detections = det_times.size();
  rep.ground_truth = gt.times.size();
  const auto pairs = match_events(det_times, gt.times, tolerance);
  rep.matched = pairs.size();
  if (pairs.empty()) throw Error(Errc::undefined_accuracy, "no detection matched the ground truth");

  int max_cluster = 0, max_class = 0;
  for (auto [i, j] : pairs) {
    if (det_labels[i] < 0) throw Error(Errc::invalid_argument, "negative cluster label");
    max_cluster = std::max(max_cluster, det_labels[i]);
    max_class = std::max(max_class, gt.labels[j]);
  }
  auto confusion = linalg::zeros(static_cast<std::size_t>(max_cluster) + 1, static_cast<std::size_t>(max_class) + 1);
  for (auto [i, j] : pairs) confusion[static_cast<std::size_t>(det_labels[i])][static_cast<std::size_t>(gt.labels[j])] += 1.0;
  rep.cluster_to_class = linalg::max_weight_assignment(confusion);
  for (std::size_t c = 0; c < confusion.size(); ++c)
    if (rep.cluster_to_class[c] >= 0)
      rep.correct += static_cast<std::size_t>(confusion[c][static_cast<std::size_t>(rep.cluster_to_class[c])]);
  rep.accuracy = static_cast<double>(rep.correct) / static_cast<double>(rep.matched);
  return rep;
}

std::vector<std::uint8_t> encode_sort_model(const SortModel& m) {
  const auto p = m.features.dim();
  const auto k = m.clusters.k();
  if (p == 0 || p > 255 || k == 0 || k > 255) throw Error(Errc::invalid_argument, "model dimensions out of range");
  if (m.clusters.dim() != p) throw Error(Errc::invalid_argument, "centroid dimension does not match feature matrix");
  ByteWriter w;
  w.tag("NSRT");
  w.u8(static_cast<std::uint8_t>(m.features.method));
  w.u8(static_cast<std::uint8_t>(p));
  w.u8(static_cast<std::uint8_t>(k));
  w.u8(static_cast<std::uint8_t>(m.clusters.metric));
  for (const auto& row : m.features.rows)
    for (auto v : row) w.i16(v);
  for (const auto& c : m.clusters.centroids)
    for (auto v : c) w.i32(v);
  if (m.clusters.metric == Metric::mahalanobis) {
    if (m.clusters.inv_cov.size() != k) throw Error(Errc::invalid_argument, "missing inverse covariances");
    for (const auto& ic : m.clusters.inv_cov) {
      if (ic.size() != p * p) throw Error(Errc::invalid_argument, "inverse covariance has wrong size");
      for (double v : ic) w.f64(v);
    }
  }
  return w.take();
}

SortModel decode_sort_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_tag("NSRT");
  SortModel m;
  const auto method = r.u8();
  if (method > 1) throw Error(Errc::format, "unknown feature method at offset 4");
  m.features.method = static_cast<FeatureMethod>(method);
  const std::size_t p = r.u8();
  const std::size_t k = r.u8();
  const auto metric = r.u8();
  if (metric > 1) throw Error(Errc::format, "unknown metric at offset 7");
  if (p == 0 || k == 0) throw Error(Errc::format, "empty model dimensions");
  m.clusters.metric = static_cast<Metric>(metric);
  m.features.rows.resize(p);
  for (auto& row : m.features.rows)
    for (auto& v : row) v = r.i16();
  m.clusters.centroids.assign(k, std::vector<std::int32_t>(p));
  for (auto& c : m.clusters.centroids)
    for (auto& v : c) v = r.i32();
  if (m.clusters.metric == Metric::mahalanobis) {
    m.clusters.inv_cov.assign(k, std::vector<double>(p * p));
    for (auto& ic : m.clusters.inv_cov)
      for (auto& v : ic) v = r.f64();
  }
  if (r.remaining() != 0) throw Error(Errc::format, "trailing bytes at offset " + std::to_string(r.offset()));
  return m;
}

}  // namespace nsp
