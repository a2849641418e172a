#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsp/core.hpp"
#include "nsp/nrec.hpp"

namespace nsp {

using Waveform = std::array<Sample, kSpikeWindow>;
using FeatureVector = std::vector<std::int32_t>;

enum class FeatureMethod : std::uint8_t { pca = 0, af = 1 };
enum class Metric : std::uint8_t { euclidean = 0, mahalanobis = 1 };

inline constexpr std::int32_t kQ15One = 32768;

// P rows of 64 Q1.15 coefficients, consumed by the MAC unit.
struct FeatureMatrix {
  FeatureMethod method = FeatureMethod::pca;
  std::vector<std::array<std::int16_t, kSpikeWindow>> rows;

  std::size_t dim() const { return rows.size(); }
  bool operator==(const FeatureMatrix&) const = default;
};

std::int16_t quantize_q15(double v);

// Per row: sum_j F[i][j] * s[j] in a wrapping 32-bit accumulator, ascending j.
FeatureVector mac_project(const FeatureMatrix& f, std::span<const Sample> spike);

struct PcaResult {
  FeatureMatrix matrix;
  std::vector<double> eigenvalues;  // descending, all 64
  std::size_t rank = 0;             // numerically nonzero eigenvalues
  bool degenerate = false;          // rank < p; missing rows are zero
};

// Top-p principal directions of the mean-centred spike covariance, quantized
// to Q1.15. Each vector's largest-magnitude coefficient is made positive.
PcaResult pca_train(std::span<const Waveform> spikes, std::size_t p);

// Adaptive template features: farthest-first initialization, then each spike
// pulls its nearest template by 1/16 of the difference. Rows are the
// L2-normalized templates.
FeatureMatrix af_train(std::span<const Waveform> spikes, std::size_t k_templates);

struct ClusterModel {
  Metric metric = Metric::euclidean;
  std::vector<std::vector<std::int32_t>> centroids;  // k x P
  std::vector<std::vector<double>> inv_cov;          // k x (P*P), row-major; Mahalanobis only

  std::size_t k() const { return centroids.size(); }
  std::size_t dim() const { return centroids.empty() ? 0 : centroids.front().size(); }
  bool operator==(const ClusterModel&) const = default;
};

struct KMeansResult {
  ClusterModel model;
  std::vector<int> labels;
  std::vector<double> objective;  // within-cluster sum of squares after each assignment
  std::size_t iterations = 0;
  std::size_t reseeds = 0;
};

inline constexpr std::size_t kKMeansMaxIterations = 100;

KMeansResult kmeans_train(std::span<const FeatureVector> features, std::size_t k, std::uint64_t seed,
                          Metric metric = Metric::euclidean);

// Squared distance to one cluster under the model's metric.
double cluster_distance(const ClusterModel& model, std::size_t cluster, std::span<const std::int32_t> f);

// argmin distance; ties go to the lowest cluster index.
std::size_t classify(const ClusterModel& model, std::span<const std::int32_t> f);

struct AccuracyReport {
  double accuracy = 0.0;
  std::size_t matched = 0;
  std::size_t correct = 0;
  std::size_t detections = 0;
  std::size_t ground_truth = 0;
  std::vector<int> cluster_to_class;  // Hungarian assignment, -1 if unassigned
};

inline constexpr std::int64_t kMatchTolerance = 10;

// Greedy nearest one-to-one matching within +-tolerance samples, then the
// cluster -> class assignment maximizing correct matches. Throws
// Errc::undefined_accuracy when nothing matches.
AccuracyReport accuracy_eval(std::span<const std::int64_t> det_times, std::span<const int> det_labels,
                             const GroundTruth& gt, std::int64_t tolerance = kMatchTolerance);

// Pairs (detection index, gt index), greedily matched by increasing |dt|.
std::vector<std::pair<std::size_t, std::size_t>> match_events(std::span<const std::int64_t> det_times,
                                                              std::span<const std::int64_t> gt_times,
                                                              std::int64_t tolerance);

// Model file: "NSRT" | method u8 | P u8 | k u8 | metric u8 | P x 64 i16 |
// k x P i32 centroids | (Mahalanobis) k x P x P f64, all little-endian.
struct SortModel {
  FeatureMatrix features;
  ClusterModel clusters;
  bool operator==(const SortModel&) const = default;
};

std::vector<std::uint8_t> encode_sort_model(const SortModel& model);
SortModel decode_sort_model(std::span<const std::uint8_t> bytes);

}  // namespace nsp
