// nsp: command-line front end for the recording, codec, detection and sorting
// pipelines. Input is either a live .nrec file (--input) or the debug store
// written by `record` (--debug).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "nsp/bench.hpp"
#include "nsp/bitio.hpp"
#include "nsp/commands.hpp"
#include "nsp/nrec.hpp"
#include "nsp/synth.hpp"

using json = nlohmann::json;

namespace {

struct Globals {
  std::string input;
  bool debug = false;
  std::string store = "store";
  std::string channels;
  std::uint64_t seed = 42;
  std::string config_path;
};

// "-" writes to stdout.
void write_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  if (path == "-") {
    std::fwrite(bytes.data(), 1, bytes.size(), stdout);
    return;
  }
  nsp::write_file(path, bytes);
}

nsp::Config load_config(const Globals& g) {
  return g.config_path.empty() ? nsp::Config{} : nsp::Config::load(g.config_path);
}

nsp::Source load_source(const Globals& g) {
  const auto select = g.channels.empty() ? std::vector<std::uint8_t>{} : nsp::parse_channel_list(g.channels);
  if (g.debug) return nsp::store_source(g.store, select);
  if (g.input.empty()) throw nsp::Error(nsp::Errc::invalid_argument, "--input is required unless --debug is given");
  return nsp::live_source(nsp::ingest(g.input), select);
}

void print_ids(const nsp::Source& s) {
  std::fprintf(stderr, "channels:");
  for (auto id : s.ids) std::fprintf(stderr, " %d", id);
  std::fprintf(stderr, "\n");
}

std::vector<nsp::SpikeEvent> load_events(const Globals& g, const std::string& spikes) {
  if (!spikes.empty()) return nsp::read_spikes(spikes);
  if (g.debug && g.input.empty() && std::filesystem::exists(nsp::store_spikes_path(g.store)))
    return nsp::read_spikes(nsp::store_spikes_path(g.store));
  return nsp::source_events(load_source(g), load_config(g));
}

// Benchmark inputs: explicit .nrec paths, or the simulated Quiroga-like suite.
std::vector<nsp::BenchDataset> bench_inputs(const std::vector<std::string>& paths, const std::string& data_dir) {
  if (!paths.empty()) return nsp::load_datasets(paths);
  std::vector<nsp::BenchDataset> out;
  for (auto& d : nsp::synth::quiroga_suite(data_dir)) out.push_back({d.name, std::move(d.rec), std::move(d.gt)});
  return out;
}

json row_json(const nsp::SsrRow& r) {
  json j{{"dataset", r.dataset}, {"mode", r.mode},          {"coder", r.coder},
         {"original_bits", r.original_bits}, {"compressed_bits", r.compressed_bits}, {"verified", r.verified}};
  if (r.verified) j["ssr"] = r.ssr;
  else j["error"] = r.note;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural recording signal chain: codecs, detection, FIR, raster and spike sorting"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--input", g.input, "Live input recording (.nrec)");
  app.add_flag("--debug", g.debug, "Read samples from the store instead of --input");
  app.add_option("--store", g.store, "Store directory used by record and --debug")->capture_default_str();
  app.add_option("--channels", g.channels, "Channel selection, e.g. 0-3,7");
  app.add_option("--seed", g.seed, "Seed for k-means")->capture_default_str();
  app.add_option("--config", g.config_path, "key=value config file");

  std::string out = "-";
  std::uint64_t sram_budget = nsp::kSramBytes;
  auto* record = app.add_subcommand("record", "C1: store raw samples and spike windows");
  record->add_option("--sram-budget", sram_budget, "Report whether the windows fit this many bytes")
      ->capture_default_str();

  auto* stream_raw = app.add_subcommand("stream-raw", "C2: emit framed raw samples");
  stream_raw->add_option("-o,--output", out, "Output file, - for stdout");

  std::string mode = "ll", coder = "gc";
  int chunks = 2;
  auto* encode_ap = app.add_subcommand("encode-ap", "C3: compress action-potential channels");
  encode_ap->add_option("--mode", mode, "ll or nll")->check(CLI::IsMember({"ll", "nll"}))->capture_default_str();
  encode_ap->add_option("--coder", coder, "ac or gc")->check(CLI::IsMember({"ac", "gc"}))->capture_default_str();
  encode_ap->add_option("--chunks", chunks, "Near-lossless run split: 2 or 3")
      ->check(CLI::IsMember({2, 3}))
      ->capture_default_str();
  encode_ap->add_option("-o,--output", out, "Container file, - for stdout");

  std::string container;
  auto* decode_ap = app.add_subcommand("decode-ap", "Decode an AP container to .nrec");
  decode_ap->add_option("container", container)->required();
  decode_ap->add_option("-o,--output", out, "Output .nrec")->required();

  auto* encode_lfp = app.add_subcommand("encode-lfp", "C4: cross-channel compression of 8 LFP channels");
  encode_lfp->add_option("-o,--output", out, "Container file, - for stdout");

  auto* decode_lfp = app.add_subcommand("decode-lfp", "Decode an LFP container to .nrec");
  decode_lfp->add_option("container", container)->required();
  decode_lfp->add_option("-o,--output", out, "Output .nrec")->required();

  std::string coeffs;
  bool fir_to_store = false;
  auto* fir = app.add_subcommand("fir", "C5/C6: 16-tap FIR bank");
  fir->add_option("--coeffs", coeffs, "16 lines of 16 coefficients")->required();
  fir->add_option("-o,--output", out, "Filtered 16-bit .nrec (C5)");
  fir->add_flag("--to-store", fir_to_store, "Write fir.nrec into the store instead (C6)");

  auto* raster = app.add_subcommand("raster", "C7: spike raster packets");
  raster->add_option("-o,--output", out, "Packet file, - for stdout");

  bool apply = false;
  auto* ate = app.add_subcommand("ate", "C8: report adaptive thresholds; C9 with --apply");
  ate->add_flag("--apply", apply, "Pin the reported thresholds into the --config file");

  std::string method = "pca", metric = "euclidean", spikes, model_path;
  std::size_t p = 3, k = 3;
  auto* sort_train = app.add_subcommand("sort-train", "Train a feature matrix and k-means model");
  sort_train->add_option("--spikes", spikes, "Spike window file (default: the store, else detect on input)");
  sort_train->add_option("--method", method, "pca or af")->check(CLI::IsMember({"pca", "af"}))->capture_default_str();
  sort_train->add_option("--metric", metric, "euclidean or mahalanobis")
      ->check(CLI::IsMember({"euclidean", "mahalanobis"}))
      ->capture_default_str();
  sort_train->add_option("-p", p, "Feature count")->capture_default_str();
  sort_train->add_option("-k", k, "Cluster count")->capture_default_str();
  sort_train->add_option("-o,--output", model_path, "Model file")->required();

  auto* sort_infer = app.add_subcommand("sort-infer", "Label spikes with a trained model");
  sort_infer->add_option("--spikes", spikes, "Spike window file (default: the store, else detect on input)");
  sort_infer->add_option("--model", model_path, "Model file")->required();
  sort_infer->add_option("-o,--output", out, "Labels: channel time label per line");

  std::vector<std::string> datasets;
  std::string data_dir, lfp_path;
  bool as_json = false;
  auto* bench_ssr = app.add_subcommand("bench-ssr", "Space-saving ratio table with full decode checks");
  bench_ssr->add_option("datasets", datasets, ".nrec files (default: Quiroga-like suite)");
  bench_ssr->add_option("--data-dir", data_dir, "Directory holding Easy1/Easy2/Difficult1/Difficult2 .nrec+.gt");
  bench_ssr->add_option("--lfp", lfp_path, "8-channel LFP .nrec (default: simulated)");
  bench_ssr->add_flag("--json", as_json);

  std::size_t bench_k = 0;
  bool no_noise_cluster = false;
  auto* bench_acc = app.add_subcommand("bench-accuracy", "Sorting accuracy against ground truth");
  bench_acc->add_option("datasets", datasets, ".nrec files with .gt sidecars (default: Quiroga-like suite)");
  bench_acc->add_option("--data-dir", data_dir, "Directory holding Easy1/Easy2/Difficult1/Difficult2 .nrec+.gt");
  bench_acc->add_option("--method", method)->check(CLI::IsMember({"pca", "af"}))->capture_default_str();
  bench_acc->add_option("--metric", metric)->check(CLI::IsMember({"euclidean", "mahalanobis"}))->capture_default_str();
  bench_acc->add_option("-p", p)->capture_default_str();
  bench_acc->add_option("-k", bench_k, "Cluster count, 0 = ground-truth classes")->capture_default_str();
  bench_acc->add_flag("--no-noise-cluster", no_noise_cluster, "Do not add a cluster for false positives");
  bench_acc->add_flag("--json", as_json);

  auto* simulate = app.add_subcommand("simulate", "Write the simulated datasets used by the benchmarks");
  simulate->add_option("-o,--output", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*record) {
      const auto r = nsp::record_to_store(load_source(g), load_config(g), g.store, sram_budget);
      std::printf("stored %zu channels, %llu samples, %zu spike windows (%llu bytes) in %s\n", r.channels,
                  static_cast<unsigned long long>(r.samples), r.windows, static_cast<unsigned long long>(r.window_bytes),
                  g.store.c_str());
      std::printf("sram budget %llu bytes: %s\n", static_cast<unsigned long long>(r.sram_budget),
                  r.fits ? "fits" : "exceeds");
    } else if (*stream_raw) {
      write_bytes(out, nsp::stream_raw(load_source(g)));
    } else if (*encode_ap) {
      nsp::ApCommandOptions o;
      o.mode = mode == "ll" ? nsp::ApMode::lossless : nsp::ApMode::near_lossless;
      o.coder = coder == "ac" ? nsp::CoderKind::ac : nsp::CoderKind::gc;
      o.chunks = chunks == 2 ? nsp::ChunkMode::two : nsp::ChunkMode::three;
      const auto src = load_source(g);
      const auto bytes = nsp::run_encode_ap(src, o, load_config(g));
      write_bytes(out, bytes);
      std::fprintf(stderr, "verified; ssr %.4f\n",
                   nsp::ssr(nsp::original_bits(src.rec.sample_count()), bytes.size() * 8ull));
    } else if (*decode_ap) {
      const auto s = nsp::run_decode_ap(nsp::read_file(container));
      nsp::write_nrec(out, s.rec);
      print_ids(s);
    } else if (*encode_lfp) {
      const auto src = load_source(g);
      const auto bytes = nsp::run_encode_lfp(src, load_config(g));
      write_bytes(out, bytes);
      std::fprintf(stderr, "verified; ssr %.4f\n",
                   nsp::ssr(nsp::original_bits(src.rec.sample_count()), bytes.size() * 8ull));
    } else if (*decode_lfp) {
      const auto s = nsp::run_decode_lfp(nsp::read_file(container));
      nsp::write_nrec(out, s.rec);
      print_ids(s);
    } else if (*fir) {
      const auto y = nsp::run_fir(load_source(g), nsp::read_fir_coeffs(coeffs), load_config(g));
      if (fir_to_store) {
        std::filesystem::create_directories(g.store);
        nsp::write_nrec((std::filesystem::path(g.store) / "fir.nrec").string(), y.rec);
      } else {
        write_bytes(out, nsp::encode_nrec(y.rec));
      }
    } else if (*raster) {
      write_bytes(out, nsp::run_raster(load_source(g), load_config(g)));
    } else if (*ate) {
      auto config = load_config(g);
      const auto report = nsp::run_ate_report(load_source(g), config);
      std::fputs(nsp::format_ate_report(report).c_str(), stdout);
      if (apply) {
        if (g.config_path.empty()) throw nsp::Error(nsp::Errc::invalid_argument, "--apply needs --config");
        nsp::apply_ate(report, config);
        config.save(g.config_path);
      }
    } else if (*sort_train) {
      const auto events = load_events(g, spikes);
      nsp::SortOptions o;
      o.method = method == "pca" ? nsp::FeatureMethod::pca : nsp::FeatureMethod::af;
      o.metric = metric == "euclidean" ? nsp::Metric::euclidean : nsp::Metric::mahalanobis;
      o.p = p;
      o.seed = g.seed;
      write_bytes(model_path, nsp::encode_sort_model(nsp::train_sort_model(events, k, o)));
      std::fprintf(stderr, "trained on %zu spikes\n", events.size());
    } else if (*sort_infer) {
      const auto model = nsp::decode_sort_model(nsp::read_file(model_path));
      const auto events = load_events(g, spikes);
      const auto labels = nsp::infer_labels(model, events);
      std::string text;
      for (std::size_t i = 0; i < events.size(); ++i)
        text += std::to_string(events[i].channel) + " " + std::to_string(events[i].t) + " " +
                std::to_string(labels[i]) + "\n";
      write_bytes(out, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    } else if (*bench_ssr) {
      const auto config = load_config(g);
      const auto ds = bench_inputs(datasets, data_dir);
      std::vector<nsp::SsrConfig> configs;
      for (auto m : {nsp::ApMode::lossless, nsp::ApMode::near_lossless})
        for (auto c : {nsp::CoderKind::ac, nsp::CoderKind::gc}) configs.push_back({m, c, nsp::ChunkMode::two});
      auto rows = nsp::bench_ssr(ds, configs, nsp::detector_config(config));
      nsp::BenchDataset lfp;
      if (lfp_path.empty()) {
        lfp.name = "lfp-sim";
        lfp.rec = nsp::synth::simulate_lfp({});
      } else {
        lfp = nsp::load_datasets({lfp_path}).front();
      }
      const auto lb = nsp::bench_lfp(lfp, nsp::cce_config(config));
      rows.push_back(lb.cce);
      rows.push_back(lb.gc_baseline);
      bool ok = true;
      for (const auto& r : rows) ok = ok && r.verified;
      if (as_json) {
        json j{{"rows", json::array()}};
        for (const auto& r : rows) j["rows"].push_back(row_json(r));
        for (const auto& [m, c] : {std::pair{"LL", "AC"}, {"LL", "GC"}, {"NLL", "AC"}, {"NLL", "GC"}}) {
          std::vector<nsp::SsrRow> ap(rows.begin(), rows.end() - 2);
          if (const auto mean = nsp::mean_ssr(ap, m, c)) j["mean"][std::string(m) + "-" + c] = *mean;
        }
        std::cout << j.dump(2) << "\n";
      } else {
        std::fputs(nsp::format_ssr_table(rows).c_str(), stdout);
      }
      if (!ok) return 2;
    } else if (*bench_acc) {
      nsp::SortOptions o;
      o.method = method == "pca" ? nsp::FeatureMethod::pca : nsp::FeatureMethod::af;
      o.metric = metric == "euclidean" ? nsp::Metric::euclidean : nsp::Metric::mahalanobis;
      o.p = p;
      o.k = bench_k;
      o.noise_cluster = !no_noise_cluster;
      o.seed = g.seed;
      o.detector = nsp::detector_config(load_config(g));
      const auto b = nsp::bench_accuracy(bench_inputs(datasets, data_dir), o);
      if (as_json) {
        json j{{"rows", json::array()}, {"mean", b.mean}};
        for (const auto& r : b.rows)
          j["rows"].push_back({{"dataset", r.dataset},
                               {"events", r.events},
                               {"ground_truth", r.report.ground_truth},
                               {"matched", r.report.matched},
                               {"correct", r.report.correct},
                               {"accuracy", r.report.accuracy}});
        std::cout << j.dump(2) << "\n";
      } else {
        std::fputs(nsp::format_accuracy_table(b).c_str(), stdout);
      }
    } else if (*simulate) {
      std::filesystem::create_directories(out);
      const std::filesystem::path dir(out);
      for (auto cfg : nsp::synth::quiroga_like_configs()) {
        const auto d = nsp::synth::simulate_ap(cfg);
        nsp::write_nrec((dir / (d.name + ".nrec")).string(), d.rec);
        nsp::write_ground_truth((dir / (d.name + ".gt")).string(), d.gt);
      }
      const nsp::synth::LfpSimConfig lc;
      nsp::write_nrec((dir / "lfp8.nrec").string(), nsp::synth::simulate_lfp(lc));
      std::printf("wrote Easy1, Easy2, Difficult1, Difficult2 and lfp8 into %s\n", out.c_str());
    }
  } catch (const nsp::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", nsp::to_string(e.code()), e.what());
    return e.code() == nsp::Errc::verification ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
