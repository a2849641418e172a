#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "nsp/linalg.hpp"
#include "nsp/sort.hpp"

using namespace nsp;
using boost::multiprecision::cpp_int;

namespace {

Waveform class_wave(int cls, std::mt19937_64& rng, double noise) {
  std::normal_distribution<double> g(0.0, noise);
  Waveform w{};
  for (std::size_t j = 0; j < kSpikeWindow; ++j) {
    const double t = static_cast<double>(j) - 31.0;
    double v = 0;
    if (cls == 0) v = 150 * std::exp(-t * t / 8.0);
    if (cls == 1) v = -120 * std::exp(-t * t / 30.0);
    if (cls == 2) v = 100 * std::exp(-(t - 6) * (t - 6) / 4.0) - 60 * std::exp(-(t + 4) * (t + 4) / 6.0);
    w[j] = static_cast<Sample>(std::clamp<long>(std::lround(v + g(rng)), kSampleMin, kSampleMax));
  }
  return w;
}

double angle_deg(const std::array<std::int16_t, kSpikeWindow>& row, const std::vector<double>& v) {
  double dot = 0, a = 0, b = 0;
  for (std::size_t j = 0; j < kSpikeWindow; ++j) {
    dot += row[j] * v[j];
    a += double(row[j]) * row[j];
    b += v[j] * v[j];
  }
  return std::acos(std::clamp(dot / std::sqrt(a * b), -1.0, 1.0)) * 180.0 / M_PI;
}

}  // namespace

TEST_CASE("q15 quantization saturates") {
  CHECK(quantize_q15(0.5) == 16384);
  CHECK(quantize_q15(1.0) == 32767);
  CHECK(quantize_q15(-1.0) == -32768);
  CHECK(quantize_q15(-2.0) == -32768);
}

TEST_CASE("mac projection") {
  FeatureMatrix f;
  f.rows.resize(1);
  Waveform s{};
  CHECK(mac_project(f, s) == FeatureVector{0});
  f.rows[0][5] = 32767;
  s[5] = 2;
  CHECK(mac_project(f, s) == FeatureVector{65534});
  CHECK_THROWS_AS(mac_project(f, std::vector<Sample>(10, 0)), Error);
}

TEST_CASE("mac projection matches a big-integer oracle mod 2^32") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 2000; ++trial) {
    FeatureMatrix f;
    f.rows.resize(1 + trial % 9);
    for (auto& r : f.rows)
      for (auto& v : r) v = static_cast<std::int16_t>(rng());
    std::vector<Sample> s(kSpikeWindow);
    // Full i16 range so the 32-bit accumulator actually wraps.
    for (auto& v : s) v = static_cast<Sample>(rng());
    const auto got = mac_project(f, s);
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
      cpp_int acc = 0;
      for (std::size_t j = 0; j < kSpikeWindow; ++j) acc += cpp_int(f.rows[i][j]) * cpp_int(s[j]);
      cpp_int mod = acc % (cpp_int(1) << 32);
      if (mod < 0) mod += cpp_int(1) << 32;
      REQUIRE(static_cast<std::uint32_t>(got[i]) == mod.convert_to<std::uint32_t>());
    }
  }
}

TEST_CASE("pca on a rank-one set finds the line") {
  std::mt19937_64 rng(1);
  std::vector<double> dir(kSpikeWindow);
  for (std::size_t j = 0; j < kSpikeWindow; ++j) dir[j] = std::sin(0.2 * j) + 0.3;
  std::vector<Waveform> spikes;
  for (int i = 0; i < 200; ++i) {
    const double a = static_cast<double>(rng() % 101) - 50.0;
    Waveform w{};
    for (std::size_t j = 0; j < kSpikeWindow; ++j) w[j] = static_cast<Sample>(std::lround(a * dir[j] / 3.0) * 3);
    spikes.push_back(w);
  }
  const auto r = pca_train(spikes, 3);
  CHECK(std::cos(angle_deg(r.matrix.rows[0], dir) * M_PI / 180) > 0.999);
  CHECK(r.rank >= 1);
  // Sign rule: the largest-magnitude entry is positive.
  const auto& row = r.matrix.rows[0];
  const auto it = std::max_element(row.begin(), row.end(), [](auto a, auto b) { return std::abs(a) < std::abs(b); });
  CHECK(*it > 0);
}

TEST_CASE("pca with p = 64 is orthonormal within quantization") {
  std::mt19937_64 rng(2);
  std::vector<Waveform> spikes(400);
  for (auto& w : spikes)
    for (auto& v : w) v = static_cast<Sample>(static_cast<int>(rng() % 401) - 200);
  const auto r = pca_train(spikes, 64);
  CHECK_FALSE(r.degenerate);
  for (std::size_t a = 0; a < 64; ++a)
    for (std::size_t b = 0; b < 64; ++b) {
      double dot = 0;
      for (std::size_t j = 0; j < 64; ++j) dot += (r.matrix.rows[a][j] / 32768.0) * (r.matrix.rows[b][j] / 32768.0);
      if (a == b) REQUIRE(std::abs(dot - 1.0) < 1e-3);
      else REQUIRE(std::abs(dot) < 1.0 / 1024);
    }
  for (std::size_t i = 1; i < r.eigenvalues.size(); ++i) CHECK(r.eigenvalues[i] <= r.eigenvalues[i - 1]);
}

TEST_CASE("pca on identical spikes is degenerate") {
  std::mt19937_64 rng(3);
  const auto w = class_wave(0, rng, 0.0);
  const std::vector<Waveform> spikes(20, w);
  const auto r = pca_train(spikes, 3);
  CHECK(r.degenerate);
  CHECK(r.rank == 0);
  for (const auto& row : r.matrix.rows)
    for (auto v : row) REQUIRE(v == 0);
  CHECK_THROWS_AS(pca_train(std::vector<Waveform>(3, w), 3), Error);
}

TEST_CASE("af templates converge to class means") {
  std::mt19937_64 rng(4);
  std::vector<Waveform> spikes;
  std::vector<std::vector<double>> means(2, std::vector<double>(kSpikeWindow, 0.0));
  for (int i = 0; i < 600; ++i) {
    const int c = i % 2;
    spikes.push_back(class_wave(c, rng, 5.0));
    for (std::size_t j = 0; j < kSpikeWindow; ++j) means[c][j] += spikes.back()[j] / 300.0;
  }
  const auto f = af_train(spikes, 2);
  REQUIRE(f.dim() == 2);
  for (const auto& m : means) {
    const double best = std::min(angle_deg(f.rows[0], m), angle_deg(f.rows[1], m));
    CHECK(best < 10.0);
  }
}

TEST_CASE("af fixed point and surplus templates") {
  std::mt19937_64 rng(5);
  const auto w = class_wave(2, rng, 0.0);
  const std::vector<Waveform> same(50, w);
  const auto f = af_train(same, 1);
  const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
  for (std::size_t j = 0; j < kSpikeWindow; ++j) REQUIRE(std::abs(f.rows[0][j] - quantize_q15(w[j] / norm)) <= 1);

  std::vector<Waveform> two;
  for (int i = 0; i < 100; ++i) two.push_back(class_wave(i % 2, rng, 2.0));
  const auto g = af_train(two, 4);
  CHECK(g.dim() == 4);
  CHECK(g.method == FeatureMethod::af);
}

TEST_CASE("kmeans separated singletons and blobs") {
  const std::vector<FeatureVector> two{{0}, {10}};
  const auto r = kmeans_train(two, 2, 42);
  auto c = r.model.centroids;
  std::sort(c.begin(), c.end());
  CHECK(c == std::vector<std::vector<std::int32_t>>{{0}, {10}});

  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 50.0);
  const std::vector<std::array<double, 2>> centres{{0, 0}, {5000, 0}, {0, 5000}};
  std::vector<FeatureVector> pts;
  const int per = 300;
  for (int b = 0; b < 3; ++b)
    for (int i = 0; i < per; ++i)
      pts.push_back({static_cast<std::int32_t>(std::lround(centres[b][0] + g(rng))),
                     static_cast<std::int32_t>(std::lround(centres[b][1] + g(rng)))});
  const auto km = kmeans_train(pts, 3, 42);
  for (int b = 0; b < 3; ++b) {
    // Blob sample mean is the oracle; the centroid must be within 3 sigma / sqrt(n) of it.
    double mx = 0, my = 0;
    for (int i = 0; i < per; ++i) {
      mx += pts[b * per + i][0] / double(per);
      my += pts[b * per + i][1] / double(per);
    }
    const auto& ct = km.model.centroids[static_cast<std::size_t>(km.labels[b * per])];
    CHECK(std::abs(ct[0] - mx) <= 3 * 50 / std::sqrt(per) + 0.5);
    CHECK(std::abs(ct[1] - my) <= 3 * 50 / std::sqrt(per) + 0.5);
  }
  for (std::size_t i = 1; i < km.objective.size(); ++i) CHECK(km.objective[i] <= km.objective[i - 1] + 1e-6);
}

TEST_CASE("kmeans reseeds an empty cluster at the farthest point") {
  // Duplicate points leave k-means++ with nothing left to spread over, so a
  // centre lands on an occupied spot and its cluster starts empty.
  const std::vector<FeatureVector> pts{{0}, {0}, {0}, {0}, {10}};
  const auto r = kmeans_train(pts, 3, 1);
  CHECK(r.reseeds >= 1);
  for (const auto& c : r.model.centroids) CHECK((c[0] == 0 || c[0] == 10));
  CHECK_THROWS_AS(kmeans_train(pts, 6, 1), Error);
}

TEST_CASE("kmeans is reproducible for a seed") {
  std::mt19937_64 rng(7);
  std::vector<FeatureVector> pts(500);
  for (auto& p : pts) p = {static_cast<std::int32_t>(rng() % 1000), static_cast<std::int32_t>(rng() % 1000)};
  CHECK(kmeans_train(pts, 4, 9).model == kmeans_train(pts, 4, 9).model);
}

TEST_CASE("classify ties and centroids") {
  ClusterModel m;
  m.centroids = {{0, 0}, {10, 0}};
  CHECK(classify(m, std::vector<std::int32_t>{0, 0}) == 0);
  CHECK(classify(m, std::vector<std::int32_t>{10, 0}) == 1);
  CHECK(classify(m, std::vector<std::int32_t>{5, 3}) == 0);  // equidistant
  CHECK(classify(m, std::vector<std::int32_t>{6, 0}) == 1);
  // Large features where double rounding would lose the tie.
  m.centroids = {{2000000001, 0}, {-2000000001, 0}};
  CHECK(classify(m, std::vector<std::int32_t>{0, 7}) == 0);
}

TEST_CASE("mahalanobis disagrees with euclidean on an anisotropic pair") {
  // Cluster 0 is stretched along x (var 100), cluster 1 is round (var 1).
  ClusterModel m;
  m.metric = Metric::mahalanobis;
  m.centroids = {{0, 0}, {12, 0}};
  m.inv_cov = {{1.0 / 100, 0, 0, 1.0}, {1.0, 0, 0, 1.0}};
  const std::vector<std::int32_t> f{8, 0};
  // Direct d^2: cluster 0 -> 64/100 = 0.64, cluster 1 -> 16.
  CHECK(cluster_distance(m, 0, f) == doctest::Approx(0.64));
  CHECK(cluster_distance(m, 1, f) == doctest::Approx(16.0));
  CHECK(classify(m, f) == 0);
  m.metric = Metric::euclidean;
  CHECK(classify(m, f) == 1);
}

TEST_CASE("mahalanobis training regularizes and inverts") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<FeatureVector> pts;
  for (int i = 0; i < 400; ++i) {
    const double a = g(rng);
    pts.push_back({static_cast<std::int32_t>(std::lround(1000 * a)), static_cast<std::int32_t>(std::lround(1000 * a))});
  }
  const auto r = kmeans_train(pts, 1, 1, Metric::mahalanobis);
  REQUIRE(r.model.inv_cov.size() == 1);
  for (double v : r.model.inv_cov[0]) CHECK(std::isfinite(v));
}

TEST_CASE("hungarian matches brute force") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng() % 5, cols = 1 + rng() % 5;
    auto s = linalg::zeros(rows, cols);
    for (auto& r : s)
      for (auto& v : r) v = static_cast<double>(rng() % 50);
    const auto a = linalg::max_weight_assignment(s);
    double got = 0;
    std::vector<bool> used(cols, false);
    for (std::size_t r = 0; r < rows; ++r)
      if (a[r] >= 0) {
        REQUIRE_FALSE(used[static_cast<std::size_t>(a[r])]);
        used[static_cast<std::size_t>(a[r])] = true;
        got += s[r][static_cast<std::size_t>(a[r])];
      }
    // Brute force over injective maps from the smaller side.
    const std::size_t n = std::max(rows, cols);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0;
    do {
      double t = 0;
      for (std::size_t r = 0; r < rows; ++r)
        if (perm[r] < cols) t += s[r][perm[r]];
      best = std::max(best, t);
    } while (std::next_permutation(perm.begin(), perm.end()));
    REQUIRE(got == best);
  }
}

TEST_CASE("event matching is greedy by distance and one-to-one") {
  const std::vector<std::int64_t> det{100, 104, 300, 500};
  const std::vector<std::int64_t> gt{103, 290, 515};
  const auto p = match_events(det, gt, 10);
  const std::vector<std::pair<std::size_t, std::size_t>> want{{1, 0}, {2, 1}};
  CHECK(p == want);
}

TEST_CASE("accuracy evaluation") {
  GroundTruth gt;
  std::vector<std::int64_t> t;
  std::vector<int> perfect, shuffled;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 3000; ++i) {
    gt.times.push_back(100 * i + 50);
    gt.labels.push_back(i % 3);
    t.push_back(100 * i + 50 + static_cast<int>(rng() % 7) - 3);
    perfect.push_back((i % 3 + 1) % 3);  // relabelled clusters
    shuffled.push_back(static_cast<int>(rng() % 3));
  }
  const auto r = accuracy_eval(t, perfect, gt);
  CHECK(r.accuracy == 1.0);
  CHECK(r.matched == 3000);
  CHECK(r.cluster_to_class == std::vector<int>{2, 0, 1});

  const auto n = accuracy_eval(t, shuffled, gt);
  CHECK(n.accuracy == doctest::Approx(1.0 / 3).epsilon(0.02 * 3));
  CHECK(std::abs(n.accuracy - 1.0 / 3) <= 0.02);

  // Hungarian is at least as good as every fixed permutation.
  std::vector<int> perm{0, 1, 2};
  do {
    std::size_t correct = 0;
    for (int i = 0; i < 3000; ++i) correct += perm[static_cast<std::size_t>(shuffled[i])] == gt.labels[i];
    CHECK(n.correct >= correct);
  } while (std::next_permutation(perm.begin(), perm.end()));

  // A surplus cluster gets no class; its matched spikes count as wrong.
  std::vector<int> extra = perfect;
  for (int i = 0; i < 30; ++i) extra[i] = 3;
  CHECK(accuracy_eval(t, extra, gt).correct == 2970);

  const std::vector<std::int64_t> far{1};
  CHECK_THROWS_AS(accuracy_eval(far, std::vector<int>{0}, gt), Error);
  try {
    accuracy_eval(far, std::vector<int>{0}, gt);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::undefined_accuracy);
  }
}

TEST_CASE("sort model file round trip") {
  SortModel m;
  m.features.method = FeatureMethod::pca;
  m.features.rows.resize(3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < kSpikeWindow; ++j) m.features.rows[i][j] = static_cast<std::int16_t>(i * 1000 - j * 7);
  m.clusters.centroids = {{1, 2, 3}, {-4, 5, -6}};
  CHECK(decode_sort_model(encode_sort_model(m)) == m);

  m.clusters.metric = Metric::mahalanobis;
  m.clusters.inv_cov = {std::vector<double>(9, 0.5), std::vector<double>(9, -1.25)};
  const auto bytes = encode_sort_model(m);
  CHECK(decode_sort_model(bytes) == m);

  auto extra = bytes;
  extra.push_back(0);
  CHECK_THROWS_AS(decode_sort_model(extra), Error);
  for (std::size_t cut = 0; cut < bytes.size(); cut += 37) {
    std::vector<std::uint8_t> b(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    CHECK_THROWS_AS(decode_sort_model(b), Error);
  }
}

TEST_CASE("linear algebra helpers") {
  linalg::Matrix a{{4, 1}, {1, 3}};
  const auto e = linalg::jacobi_eigen(a);
  CHECK(e.converged);
  CHECK(e.values[0] == doctest::Approx((7 + std::sqrt(5.0)) / 2));
  CHECK(e.values[1] == doctest::Approx((7 - std::sqrt(5.0)) / 2));
  const auto inv = linalg::invert_spd(a);
  CHECK(inv[0][0] == doctest::Approx(3.0 / 11));
  CHECK(inv[0][1] == doctest::Approx(-1.0 / 11));
  CHECK_THROWS_AS(linalg::invert_spd({{1, 2}, {2, 1}}), Error);
}
