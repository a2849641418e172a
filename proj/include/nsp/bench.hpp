#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsp/ap_codec.hpp"
#include "nsp/detect.hpp"
#include "nsp/lfp_codec.hpp"
#include "nsp/nrec.hpp"
#include "nsp/sort.hpp"

namespace nsp {

struct BenchDataset {
  std::string name;
  Recording rec;
  std::optional<GroundTruth> gt;
};

// Each path is an .nrec file; a sibling with the extension replaced by .gt is
// loaded as ground truth when present.
std::vector<BenchDataset> load_datasets(const std::vector<std::string>& paths);

struct SsrConfig {
  ApMode mode = ApMode::lossless;
  CoderKind coder = CoderKind::gc;
  ChunkMode chunks = ChunkMode::two;
};

struct SsrRow {
  std::string dataset;
  std::string mode;   // LL, NLL, CCE
  std::string coder;  // AC, GC
  std::uint64_t original_bits = 0;
  std::uint64_t compressed_bits = 0;  // whole serialized container
  double ssr = 0.0;
  bool verified = false;
  std::string note;
};

// Encodes, serializes, parses and fully decodes every dataset under every
// config. A row is verified only if the decode is exact (lossless) or matches
// the window/zero-gap reference (near-lossless). Near-lossless triggers come
// from ground truth when available, otherwise from the detector.
std::vector<SsrRow> bench_ssr(const std::vector<BenchDataset>& datasets, const std::vector<SsrConfig>& configs,
                              const DetectorConfig& detector = {});

// CCE over all channels of one recording, plus the per-channel lossless GC
// baseline over the same samples.
struct LfpBench {
  SsrRow cce;
  SsrRow gc_baseline;
};

LfpBench bench_lfp(const BenchDataset& dataset, const CceTrainingConfig& training = {});

// Mean SSR over verified rows matching mode/coder; nullopt when none match or
// any matching row failed verification.
std::optional<double> mean_ssr(const std::vector<SsrRow>& rows, const std::string& mode, const std::string& coder);

std::string format_ssr_table(const std::vector<SsrRow>& rows);

struct SortOptions {
  FeatureMethod method = FeatureMethod::pca;
  std::size_t p = 3;          // feature dimension (template count for AF)
  std::size_t k = 0;          // clusters; 0 takes the ground-truth class count
  // When k is taken from ground truth, add one cluster to soak up detector
  // false positives. Matched spikes landing there count as errors.
  bool noise_cluster = true;
  std::uint64_t seed = 42;
  Metric metric = Metric::euclidean;
  DetectorConfig detector;
};

SortModel train_sort_model(const std::vector<SpikeEvent>& events, std::size_t k, const SortOptions& options);
std::vector<int> infer_labels(const SortModel& model, const std::vector<SpikeEvent>& events);

// Detection, peak alignment and window extraction on one channel.
std::vector<SpikeEvent> detect_events(const std::vector<Sample>& samples, std::uint16_t channel,
                                      const DetectorConfig& detector);

struct AccuracyRow {
  std::string dataset;
  std::size_t events = 0;
  AccuracyReport report;
};

struct AccuracyBench {
  std::vector<AccuracyRow> rows;
  double mean = 0.0;
};

// Per dataset (first channel): detect -> align -> extract -> train -> infer
// -> accuracy_eval against the ground truth.
AccuracyBench bench_accuracy(const std::vector<BenchDataset>& datasets, const SortOptions& options);

std::string format_accuracy_table(const AccuracyBench& bench);

}  // namespace nsp
