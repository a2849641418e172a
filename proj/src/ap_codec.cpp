#include "nsp/ap_codec.hpp"

#include <memory>
#include <string>

#include "nsp/decorrelate.hpp"
#include "nsp/rice.hpp"

namespace nsp {

void SpikeWindowBuffer::push(Sample x) {
  ring_[head_] = x;
  head_ = (head_ + 1) % kCapacity;
  if (size_ < kCapacity) ++size_;
}

Sample SpikeWindowBuffer::at(std::size_t i) const {
  if (i >= size_) throw Error(Errc::invalid_argument, "spike buffer index out of range");
  return ring_[(head_ + kCapacity - size_ + i) % kCapacity];
}

namespace {

const FrequencyTable& require_table(const ApCodecConfig& config, const FrequencyTable* table) {
  if (config.coder == CoderKind::ac && table == nullptr)
    throw Error(Errc::invalid_argument, "AC coder selected without a frequency table");
  return *table;
}

// One entropy back end behind the two symbol kinds the ICE emits.
class SymbolWriter {
public:
  virtual ~SymbolWriter() = default;
  virtual void residue(std::uint32_t m) = 0;
  virtual void chunk(std::uint32_t v) = 0;
  virtual void finish() {}
};

class SymbolReader {
public:
  virtual ~SymbolReader() = default;
  virtual std::uint32_t residue() = 0;
  virtual std::uint32_t chunk() = 0;
};

class AcWriter final : public SymbolWriter {
public:
  AcWriter(const FrequencyTable& t, BitWriter& out) : enc_(t, out) {}
  void residue(std::uint32_t m) override { enc_.put(m); }
  void chunk(std::uint32_t v) override { enc_.put_escaped(v, kRleChunkBits); }
  void finish() override { enc_.finish(); }

private:
  AcEncoder enc_;
};

class AcReader final : public SymbolReader {
public:
  AcReader(const FrequencyTable& t, BitReader& in) : dec_(t, in) {}
  std::uint32_t residue() override { return dec_.get(); }
  std::uint32_t chunk() override { return dec_.get_escaped(kRleChunkBits); }

private:
  AcDecoder dec_;
};

class GcWriter final : public SymbolWriter {
public:
  explicit GcWriter(BitWriter& out) : out_(out) {}
  void residue(std::uint32_t m) override { gc_encode(state_, m, out_); }
  void chunk(std::uint32_t v) override { rice_encode_fixed(v, kRiceChunkK, out_); }

private:
  BitWriter& out_;
  RiceState state_;
};

class GcReader final : public SymbolReader {
public:
  explicit GcReader(BitReader& in) : in_(in) {}
  std::uint32_t residue() override { return gc_decode(state_, in_); }
  std::uint32_t chunk() override {
    const auto v = rice_decode_fixed(kRiceChunkK, in_);
    if (v >= (1u << kRleChunkBits)) throw Error(Errc::corrupt_stream, "RLE chunk exceeds 9 bits");
    return v;
  }

private:
  BitReader& in_;
  RiceState state_;
};

std::unique_ptr<SymbolWriter> make_writer(const ApCodecConfig& config, const FrequencyTable* table,
                                          BitWriter& out) {
  if (config.coder == CoderKind::ac) return std::make_unique<AcWriter>(require_table(config, table), out);
  return std::make_unique<GcWriter>(out);
}

std::unique_ptr<SymbolReader> make_reader(const ApCodecConfig& config, const FrequencyTable* table,
                                          BitReader& in) {
  if (config.coder == CoderKind::ac) return std::make_unique<AcReader>(require_table(config, table), in);
  return std::make_unique<GcReader>(in);
}

std::uint32_t read_residue_checked(SymbolReader& r) {
  const auto m = r.residue();
  if (m > zigzag_map(kResidualMax))
    throw Error(Errc::corrupt_stream, "residue symbol " + std::to_string(m) + " out of range");
  return m;
}

}  // namespace

std::uint64_t encode_lossless(const ApCodecConfig& config, std::span<const Sample> samples,
                              const FrequencyTable* table, BitWriter& out) {
  if (config.mode != ApMode::lossless) throw Error(Errc::invalid_argument, "config is not lossless");
  const auto start = out.bit_count();
  auto writer = make_writer(config, table, out);
  Dpcm2 dpcm;
  for (auto x : samples) writer->residue(zigzag_map(dpcm.forward(x)));
  writer->finish();
  return out.bit_count() - start;
}

std::vector<Sample> decode_lossless(const ApCodecConfig& config, const FrequencyTable* table, BitReader& in,
                                    std::size_t count) {
  auto reader = make_reader(config, table, in);
  Dpcm2 dpcm;
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(static_cast<Sample>(dpcm.inverse(zigzag_unmap(read_residue_checked(*reader)))));
  return out;
}

std::vector<std::uint32_t> lossless_symbols(std::span<const Sample> samples) {
  std::vector<std::uint32_t> out;
  out.reserve(samples.size());
  Dpcm2 dpcm;
  for (auto x : samples) out.push_back(zigzag_map(dpcm.forward(x)));
  return out;
}

TriggerPlan plan_triggers(std::span<const std::int64_t> trigger_times, std::size_t length) {
  TriggerPlan plan;
  const auto len = static_cast<std::int64_t>(length);
  for (auto t : trigger_times) {
    if (t < 0 || t >= len) {
      ++plan.dropped;
      continue;
    }
    if (!plan.triggers.empty() && t < plan.triggers.back() + static_cast<std::int64_t>(kRefractory)) continue;
    if (t < static_cast<std::int64_t>(kPreTrigger)) {
      ++plan.dropped;
      continue;
    }
    plan.triggers.push_back(t);
    if (t + static_cast<std::int64_t>(kPostTrigger) >= len) {
      plan.padded_tail = true;
      break;
    }
  }
  return plan;
}

TriggerPlan plan_triggers(std::span<const std::uint8_t> detections, std::size_t length) {
  std::vector<std::int64_t> times;
  for (std::size_t n = 0; n < detections.size() && n < length; ++n)
    if (detections[n]) times.push_back(static_cast<std::int64_t>(n));
  return plan_triggers(std::span<const std::int64_t>(times), length);
}

namespace {

template <typename Fn>
void for_each_window_sample(std::span<const Sample> samples, std::int64_t start, Fn&& fn) {
  for (std::int64_t i = start; i < start + static_cast<std::int64_t>(kSpikeWindow); ++i)
    fn(i < static_cast<std::int64_t>(samples.size()) ? samples[static_cast<std::size_t>(i)] : Sample{0});
}

}  // namespace

std::vector<std::uint32_t> near_lossless_symbols(std::span<const Sample> samples, const TriggerPlan& plan,
                                                 ChunkMode chunks) {
  std::vector<std::uint32_t> out;
  // RLE chunks travel as ESC + raw bits: one ESC per chunk, final run included.
  out.insert(out.end(), chunk_count(chunks) * (plan.triggers.size() + 1), kAcEsc);
  for (auto t : plan.triggers) {
    Dpcm2 dpcm;
    for_each_window_sample(samples, t - static_cast<std::int64_t>(kPreTrigger),
                           [&](Sample x) { out.push_back(zigzag_map(dpcm.forward(x))); });
  }
  return out;
}

NearLosslessEncoded encode_near_lossless(const ApCodecConfig& config, std::span<const Sample> samples,
                                         const TriggerPlan& plan, const FrequencyTable* table, BitWriter& out) {
  if (config.mode != ApMode::near_lossless) throw Error(Errc::invalid_argument, "config is not near-lossless");
  NearLosslessEncoded result;
  result.plan = plan;
  const auto start_bits = out.bit_count();
  auto writer = make_writer(config, table, out);
  const unsigned nchunks = chunk_count(config.chunks);
  const std::uint32_t sentinel = run_sentinel(config.chunks);

  auto emit_run = [&](std::uint64_t run) {
    while (run >= sentinel) {
      result.runs.push_back(sentinel);
      for (unsigned c = nchunks; c-- > 0;) writer->chunk((sentinel >> (c * kRleChunkBits)) & 0x1FFu);
      run -= sentinel;
    }
    const auto r = static_cast<std::uint32_t>(run);
    result.runs.push_back(r);
    for (unsigned c = nchunks; c-- > 0;) writer->chunk((r >> (c * kRleChunkBits)) & 0x1FFu);
  };

  std::int64_t pos = 0;
  for (auto t : plan.triggers) {
    const std::int64_t start = t - static_cast<std::int64_t>(kPreTrigger);
    if (start < pos) throw Error(Errc::invalid_argument, "trigger plan has overlapping windows");
    emit_run(static_cast<std::uint64_t>(start - pos));
    Dpcm2 dpcm;
    for_each_window_sample(samples, start, [&](Sample x) { writer->residue(zigzag_map(dpcm.forward(x))); });
    pos = start + static_cast<std::int64_t>(kSpikeWindow);
  }
  if (!plan.padded_tail) emit_run(static_cast<std::uint64_t>(static_cast<std::int64_t>(samples.size()) - pos));
  writer->finish();
  result.bits = out.bit_count() - start_bits;
  return result;
}

NearLosslessDecoded decode_near_lossless(const ApCodecConfig& config, const FrequencyTable* table,
                                         BitReader& in, std::size_t total_samples, bool padded_tail) {
  auto reader = make_reader(config, table, in);
  const unsigned nchunks = chunk_count(config.chunks);
  const std::uint32_t sentinel = run_sentinel(config.chunks);
  NearLosslessDecoded d;
  d.samples.assign(total_samples, 0);
  const auto total = static_cast<std::uint64_t>(total_samples);
  std::uint64_t pos = 0;
  std::size_t group = 0;

  for (;;) {
    std::uint32_t run = 0;
    for (unsigned c = 0; c < nchunks; ++c) run = (run << kRleChunkBits) | reader->chunk();
    group += nchunks;
    d.runs.push_back(run);
    pos += run;
    if (pos > total) throw Error(Errc::corrupt_stream, "run lengths exceed the declared sample count");
    if (run == sentinel) continue;
    if (pos == total) break;

    d.window_starts.push_back(static_cast<std::int64_t>(pos));
    const bool partial = pos + kSpikeWindow > total;
    if (partial && !padded_tail) throw Error(Errc::corrupt_stream, "spike window exceeds the declared sample count");
    Dpcm2 dpcm;
    for (std::size_t i = 0; i < kSpikeWindow; ++i) {
      const auto x = static_cast<Sample>(dpcm.inverse(zigzag_unmap(read_residue_checked(*reader))));
      if (pos + i < total) d.samples[pos + i] = x;
    }
    group += kSpikeWindow;
    d.group_symbols.push_back(group);
    d.total_symbols += group;
    group = 0;
    pos += kSpikeWindow;
    if (partial) break;
  }
  d.total_symbols += group;
  return d;
}

}  // namespace nsp
