#include "nsp/bench.hpp"

#include <cstdio>
#include <filesystem>
#include <set>

#include "nsp/container.hpp"

namespace nsp {

std::vector<BenchDataset> load_datasets(const std::vector<std::string>& paths) {
  std::vector<BenchDataset> out;
  for (const auto& p : paths) {
    BenchDataset d;
    const std::filesystem::path path(p);
    d.name = path.stem().string();
    d.rec = read_nrec(p);
    auto gt_path = path;
    gt_path.replace_extension(".gt");
    if (std::filesystem::exists(gt_path)) d.gt = read_ground_truth(gt_path.string());
    out.push_back(std::move(d));
  }
  return out;
}

namespace {

const char* mode_name(ApMode m) { return m == ApMode::lossless ? "LL" : "NLL"; }
const char* coder_name(CoderKind c) { return c == CoderKind::ac ? "AC" : "GC"; }

}  // namespace

std::vector<SsrRow> bench_ssr(const std::vector<BenchDataset>& datasets, const std::vector<SsrConfig>& configs,
                              const DetectorConfig& detector) {
  std::vector<SsrRow> rows;
  for (const auto& ds : datasets) {
    for (const auto& cfg : configs) {
      SsrRow row;
      row.dataset = ds.name;
      row.mode = mode_name(cfg.mode);
      row.coder = coder_name(cfg.coder);
      row.original_bits = original_bits(ds.rec.sample_count());
      try {
        EncodeApOptions opt;
        opt.mode = cfg.mode;
        opt.coder = cfg.coder;
        opt.chunks = cfg.chunks;
        opt.detector = detector;
        if (cfg.mode == ApMode::near_lossless && ds.gt && ds.rec.channel_count() == 1) opt.triggers = {ds.gt->times};
        const auto bytes = serialize(encode_ap(ds.rec, opt));
        row.compressed_bits = bytes.size() * 8ull;
        const auto decoded = decode_ap(parse_ap_container(bytes));
        bool ok = decoded.rec.channel_count() == ds.rec.channel_count();
        for (std::size_t c = 0; ok && c < ds.rec.channel_count(); ++c) {
          if (cfg.mode == ApMode::lossless) {
            ok = decoded.rec.channels[c] == ds.rec.channels[c];
          } else {
            TriggerPlan plan;
            if (!opt.triggers.empty()) {
              plan = plan_triggers(std::span<const std::int64_t>(opt.triggers[c]), ds.rec.length());
            } else {
              const auto flags = detect_spikes(ds.rec.channels[c], detector);
              plan = plan_triggers(std::span<const std::uint8_t>(flags), ds.rec.length());
            }
            ok = decoded.rec.channels[c] == near_lossless_reference(ds.rec.channels[c], plan);
          }
        }
        row.verified = ok;
        if (!ok) row.note = "decoded stream differs from the reference";
      } catch (const Error& e) {
        row.verified = false;
        row.note = e.what();
      }
      row.ssr = row.verified ? ssr(row.original_bits, row.compressed_bits) : 0.0;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

LfpBench bench_lfp(const BenchDataset& ds, const CceTrainingConfig& training) {
  LfpBench b;
  b.cce.dataset = b.gc_baseline.dataset = ds.name;
  b.cce.mode = "CCE";
  b.gc_baseline.mode = "LL";
  b.cce.coder = b.gc_baseline.coder = "GC";
  b.cce.original_bits = b.gc_baseline.original_bits = original_bits(ds.rec.sample_count());
  try {
    const auto bytes = serialize(encode_lfp(ds.rec, training));
    b.cce.compressed_bits = bytes.size() * 8ull;
    b.cce.verified = decode_lfp(parse_lfp_container(bytes)).channels == ds.rec.channels;
  } catch (const Error& e) {
    b.cce.note = e.what();
  }
  try {
    EncodeApOptions opt;
    const auto bytes = serialize(encode_ap(ds.rec, opt));
    b.gc_baseline.compressed_bits = bytes.size() * 8ull;
    b.gc_baseline.verified = decode_ap(parse_ap_container(bytes)).rec.channels == ds.rec.channels;
  } catch (const Error& e) {
    b.gc_baseline.note = e.what();
  }
  for (auto* r : {&b.cce, &b.gc_baseline}) {
    if (r->verified) r->ssr = ssr(r->original_bits, r->compressed_bits);
    else if (r->note.empty()) r->note = "decoded stream differs from the input";
  }
  return b;
}

std::optional<double> mean_ssr(const std::vector<SsrRow>& rows, const std::string& mode, const std::string& coder) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.mode != mode || r.coder != coder) continue;
    if (!r.verified) return std::nullopt;
    sum += r.ssr;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::string format_ssr_table(const std::vector<SsrRow>& rows) {
  std::string out = "dataset              mode  coder  original_bits  compressed_bits  ssr\n";
  char buf[256];
  for (const auto& r : rows) {
    if (r.verified)
      std::snprintf(buf, sizeof buf, "%-20s %-5s %-6s %14llu %16llu  %.4f\n", r.dataset.c_str(), r.mode.c_str(),
                    r.coder.c_str(), static_cast<unsigned long long>(r.original_bits),
                    static_cast<unsigned long long>(r.compressed_bits), r.ssr);
    else
      std::snprintf(buf, sizeof buf, "%-20s %-5s %-6s %14llu %16s  FAILED (%s)\n", r.dataset.c_str(), r.mode.c_str(),
                    r.coder.c_str(), static_cast<unsigned long long>(r.original_bits), "-", r.note.c_str());
    out += buf;
  }
  return out;
}

std::vector<SpikeEvent> detect_events(const std::vector<Sample>& samples, std::uint16_t channel,
                                      const DetectorConfig& detector) {
  const auto flags = detect_spikes(samples, detector);
  const auto times = detection_times(flags);
  const auto aligned = align_to_peak(samples, times, dominant_polarity(samples, times));
  return extract_events(samples, channel, aligned);
}

SortModel train_sort_model(const std::vector<SpikeEvent>& events, std::size_t k, const SortOptions& options) {
  std::vector<Waveform> waves;
  waves.reserve(events.size());
  for (const auto& e : events) waves.push_back(e.waveform);
  SortModel m;
  m.features = options.method == FeatureMethod::pca ? pca_train(waves, options.p).matrix : af_train(waves, options.p);
  std::vector<FeatureVector> feats;
  feats.reserve(waves.size());
  for (const auto& w : waves) feats.push_back(mac_project(m.features, w));
  m.clusters = kmeans_train(feats, k, options.seed, options.metric).model;
  return m;
}

std::vector<int> infer_labels(const SortModel& model, const std::vector<SpikeEvent>& events) {
  std::vector<int> labels;
  labels.reserve(events.size());
  for (const auto& e : events)
    labels.push_back(static_cast<int>(classify(model.clusters, mac_project(model.features, e.waveform))));
  return labels;
}

AccuracyBench bench_accuracy(const std::vector<BenchDataset>& datasets, const SortOptions& options) {
  AccuracyBench b;
  for (const auto& ds : datasets) {
    if (!ds.gt) throw Error(Errc::invalid_argument, "dataset " + ds.name + " has no ground truth");
    if (ds.rec.channel_count() == 0) throw Error(Errc::invalid_argument, "dataset " + ds.name + " has no channels");
    const auto events = detect_events(ds.rec.channels[0], 0, options.detector);
    std::size_t k = options.k;
    if (k == 0)
      k = std::set<int>(ds.gt->labels.begin(), ds.gt->labels.end()).size() + (options.noise_cluster ? 1 : 0);
    const auto model = train_sort_model(events, k, options);
    const auto labels = infer_labels(model, events);
    std::vector<std::int64_t> times;
    for (const auto& e : events) times.push_back(e.t);
    AccuracyRow row;
    row.dataset = ds.name;
    row.events = events.size();
    row.report = accuracy_eval(times, labels, *ds.gt);
    b.mean += row.report.accuracy;
    b.rows.push_back(std::move(row));
  }
  if (!b.rows.empty()) b.mean /= static_cast<double>(b.rows.size());
  return b;
}

std::string format_accuracy_table(const AccuracyBench& bench) {
  std::string out = "dataset              events  ground_truth  matched  correct  accuracy\n";
  char buf[256];
  for (const auto& r : bench.rows) {
    std::snprintf(buf, sizeof buf, "%-20s %6zu  %12zu  %7zu  %7zu  %.4f\n", r.dataset.c_str(), r.events,
                  r.report.ground_truth, r.report.matched, r.report.correct, r.report.accuracy);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "mean accuracy %.4f\n", bench.mean);
  return out + buf;
}

}  // namespace nsp
