#include "nsp/container.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "nsp/bitio.hpp"

namespace nsp {

const char* to_string(CommandId id) {
  switch (id) {
    case CommandId::record: return "C1 record";
    case CommandId::stream_raw: return "C2 stream-raw";
    case CommandId::encode_ap: return "C3 encode-ap";
    case CommandId::encode_lfp: return "C4 encode-lfp";
    case CommandId::fir_stream: return "C5 fir-stream";
    case CommandId::fir_store: return "C6 fir-store";
    case CommandId::raster: return "C7 raster";
    case CommandId::ate_report: return "C8 ate-report";
    case CommandId::ate_apply: return "C9 ate-apply";
  }
  return "unknown";
}

namespace {

struct Header {
  CommandId command{};
  std::uint32_t rate_hz = 0;
  std::uint64_t total_samples = 0;
  std::vector<std::uint8_t> channel_ids;
};

void write_header(ByteWriter& w, CommandId cmd, std::uint32_t rate, std::uint64_t total,
                  const std::vector<std::uint8_t>& ids) {
  if (ids.empty() || ids.size() > kMaxChannels) throw Error(Errc::invalid_argument, "channel count out of range");
  w.tag("NCS1");
  w.u8(kContainerVersion);
  w.u8(static_cast<std::uint8_t>(cmd));
  w.u32(rate);
  w.u64(total);
  w.u16(static_cast<std::uint16_t>(ids.size()));
  for (auto id : ids) w.u8(id);
}

Header read_header(ByteReader& r) {
  r.expect_tag("NCS1");
  const auto version = r.u8();
  if (version != kContainerVersion)
    throw Error(Errc::format, "unsupported container version " + std::to_string(version) + " at offset 4");
  Header h;
  const auto cmd = r.u8();
  if (cmd < 1 || cmd > 9) throw Error(Errc::format, "unknown command id at offset 5");
  h.command = static_cast<CommandId>(cmd);
  h.rate_hz = r.u32();
  if (h.rate_hz == 0) throw Error(Errc::format, "zero sample rate at offset 6");
  h.total_samples = r.u64();
  const auto at = r.offset();
  const auto n = r.u16();
  if (n == 0 || n > kMaxChannels) throw Error(Errc::format, "channel count out of range at offset " + std::to_string(at));
  for (std::uint16_t i = 0; i < n; ++i) {
    const auto id_at = r.offset();
    const auto id = r.u8();
    if (id >= kMaxChannels) throw Error(Errc::format, "channel id out of range at offset " + std::to_string(id_at));
    h.channel_ids.push_back(id);
  }
  return h;
}

std::vector<std::uint8_t> default_ids(std::size_t n) {
  std::vector<std::uint8_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::uint8_t{0});
  return ids;
}

void write_payload(ByteWriter& w, std::uint64_t bits, const std::vector<std::uint8_t>& payload) {
  if (bits > 0xFFFFFFFFull) throw Error(Errc::invalid_argument, "payload exceeds 2^32 bits");
  w.u32(static_cast<std::uint32_t>(bits));
  w.raw(payload);
}

std::pair<std::uint64_t, std::vector<std::uint8_t>> read_payload(ByteReader& r) {
  const std::uint64_t bits = r.u32();
  const auto bytes = r.raw(static_cast<std::size_t>((bits + 7) / 8));
  return {bits, {bytes.begin(), bytes.end()}};
}

}  // namespace

std::vector<std::uint8_t> serialize(const ApContainer& c) {
  if (c.sections.size() != c.channel_ids.size()) throw Error(Errc::invalid_argument, "one section per channel required");
  if (c.tables.size() > kAcTableSlots) throw Error(Errc::invalid_argument, "at most four table slots");
  ByteWriter w;
  write_header(w, CommandId::encode_ap, c.rate_hz, c.total_samples, c.channel_ids);
  w.u8(static_cast<std::uint8_t>(c.tables.size()));
  for (const auto& t : c.tables)
    for (auto v : t.counts()) w.u16(v);
  for (const auto& s : c.sections) {
    w.u8(static_cast<std::uint8_t>(s.config.coder));
    w.u8(static_cast<std::uint8_t>(static_cast<std::uint8_t>(s.config.mode) | (s.padded_tail ? kPaddedTailFlag : 0)));
    w.u8(static_cast<std::uint8_t>(s.config.chunks));
    w.u8(s.config.slot_id);
    write_payload(w, s.payload_bits, s.payload);
  }
  return w.take();
}

ApContainer parse_ap_container(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto h = read_header(r);
  if (h.command != CommandId::encode_ap) throw Error(Errc::format, "container does not hold an AP stream");
  ApContainer c;
  c.rate_hz = h.rate_hz;
  c.total_samples = h.total_samples;
  c.channel_ids = h.channel_ids;
  const auto slots_at = r.offset();
  const auto slots = r.u8();
  if (slots > kAcTableSlots) throw Error(Errc::format, "too many table slots at offset " + std::to_string(slots_at));
  for (unsigned s = 0; s < slots; ++s) {
    const auto at = r.offset();
    FrequencyTable::Counts counts{};
    for (auto& v : counts) v = r.u16();
    try {
      c.tables.push_back(FrequencyTable::from_counts(counts));
    } catch (const Error& e) {
      throw Error(Errc::format, std::string("invalid frequency table at offset ") + std::to_string(at) + ": " + e.what());
    }
  }
  for (std::size_t i = 0; i < h.channel_ids.size(); ++i) {
    const auto at = r.offset();
    ApChannelSection s;
    const auto coder = r.u8();
    const auto mode = r.u8();
    const auto chunks = r.u8();
    s.config.slot_id = r.u8();
    if (coder > 1 || (mode & 0x7F) > 1 || (chunks != 2 && chunks != 3))
      throw Error(Errc::format, "invalid channel section header at offset " + std::to_string(at));
    s.config.coder = static_cast<CoderKind>(coder);
    s.config.mode = static_cast<ApMode>(mode & 0x7F);
    s.padded_tail = (mode & kPaddedTailFlag) != 0;
    s.config.chunks = static_cast<ChunkMode>(chunks);
    if (s.config.coder == CoderKind::ac && s.config.slot_id >= c.tables.size())
      throw Error(Errc::format, "table slot out of range at offset " + std::to_string(at + 3));
    std::tie(s.payload_bits, s.payload) = read_payload(r);
    c.sections.push_back(std::move(s));
  }
  if (r.remaining() != 0) throw Error(Errc::format, "trailing bytes at offset " + std::to_string(r.offset()));
  return c;
}

std::vector<std::uint8_t> serialize(const LfpContainer& c) {
  ByteWriter w;
  write_header(w, CommandId::encode_lfp, c.rate_hz, c.total_samples, c.channel_ids);
  if (c.chain.channel_count() != c.channel_ids.size())
    throw Error(Errc::invalid_argument, "chain does not cover the channel list");
  w.u8(c.chain.root);
  for (const auto& l : c.chain.links) {
    w.u8(l.child);
    w.u8(l.parent);
    w.i16(l.gamma_q);
  }
  w.u16(c.window_n);
  write_payload(w, c.payload_bits, c.payload);
  return w.take();
}

LfpContainer parse_lfp_container(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto h = read_header(r);
  if (h.command != CommandId::encode_lfp) throw Error(Errc::format, "container does not hold an LFP stream");
  LfpContainer c;
  c.rate_hz = h.rate_hz;
  c.total_samples = h.total_samples;
  c.channel_ids = h.channel_ids;
  const auto chain_at = r.offset();
  c.chain.root = r.u8();
  for (std::size_t i = 1; i < h.channel_ids.size(); ++i) {
    ChainLink l;
    l.child = r.u8();
    l.parent = r.u8();
    l.gamma_q = r.i16();
    c.chain.links.push_back(l);
  }
  try {
    c.chain.validate(h.channel_ids.size());
  } catch (const Error& e) {
    throw Error(Errc::format, std::string("invalid channel chain at offset ") + std::to_string(chain_at) + ": " + e.what());
  }
  c.window_n = r.u16();
  std::tie(c.payload_bits, c.payload) = read_payload(r);
  if (r.remaining() != 0) throw Error(Errc::format, "trailing bytes at offset " + std::to_string(r.offset()));
  return c;
}

CommandId peek_command(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  return read_header(r).command;
}

ApContainer encode_ap(const Recording& rec, const EncodeApOptions& options, std::vector<std::uint8_t> channel_ids) {
  rec.validate();
  if (rec.bits_per_sample != kSampleBits) throw Error(Errc::invalid_argument, "AP coding needs 9-bit samples");
  if (channel_ids.empty()) channel_ids = default_ids(rec.channel_count());
  if (channel_ids.size() != rec.channel_count()) throw Error(Errc::invalid_argument, "channel id list size mismatch");
  if (!options.triggers.empty() && options.triggers.size() != rec.channel_count())
    throw Error(Errc::invalid_argument, "trigger lists must match the channel count");

  const std::size_t n = rec.channel_count();
  const bool nll = options.mode == ApMode::near_lossless;
  std::vector<TriggerPlan> plans(n);
  if (nll) {
    for (std::size_t c = 0; c < n; ++c) {
      if (!options.triggers.empty()) {
        plans[c] = plan_triggers(std::span<const std::int64_t>(options.triggers[c]), rec.length());
      } else {
        const auto flags = detect_spikes(rec.channels[c], options.detector);
        plans[c] = plan_triggers(std::span<const std::uint8_t>(flags), rec.length());
      }
    }
  }

  ApContainer out;
  out.rate_hz = rec.rate_hz;
  out.total_samples = rec.length();
  out.channel_ids = channel_ids;
  const std::size_t slots = options.coder == CoderKind::ac ? std::min(n, kAcTableSlots) : 0;
  if (slots > 0) {
    std::vector<std::vector<std::uint32_t>> training(slots);
    for (std::size_t c = 0; c < n; ++c) {
      const auto sym = nll ? near_lossless_symbols(rec.channels[c], plans[c], options.chunks)
                           : lossless_symbols(rec.channels[c]);
      auto& dst = training[c % slots];
      dst.insert(dst.end(), sym.begin(), sym.end());
    }
    for (auto& t : training) {
      if (t.empty()) t.push_back(0);
      out.tables.push_back(FrequencyTable::train(t));
    }
  }

  for (std::size_t c = 0; c < n; ++c) {
    ApChannelSection s;
    s.config = {options.mode, options.coder, static_cast<std::uint8_t>(slots ? c % slots : 0), options.chunks};
    const FrequencyTable* table = slots ? &out.tables[c % slots] : nullptr;
    BitWriter w;
    if (nll) {
      const auto enc = encode_near_lossless(s.config, rec.channels[c], plans[c], table, w);
      s.padded_tail = enc.plan.padded_tail;
    } else {
      encode_lossless(s.config, rec.channels[c], table, w);
    }
    s.payload_bits = w.bit_count();
    s.payload = w.take();
    out.sections.push_back(std::move(s));
  }
  return out;
}

DecodedAp decode_ap(const ApContainer& c) {
  DecodedAp out;
  out.rec.rate_hz = c.rate_hz;
  const auto total = static_cast<std::size_t>(c.total_samples);
  for (const auto& s : c.sections) {
    const FrequencyTable* table = nullptr;
    if (s.config.coder == CoderKind::ac) {
      if (s.config.slot_id >= c.tables.size()) throw Error(Errc::corrupt_stream, "missing frequency table");
      table = &c.tables[s.config.slot_id];
    }
    BitReader r(s.payload, s.payload_bits);
    if (s.config.mode == ApMode::near_lossless) {
      auto d = decode_near_lossless(s.config, table, r, total, s.padded_tail);
      out.rec.channels.push_back(d.samples);
      out.near_lossless.push_back(std::move(d));
    } else {
      out.rec.channels.push_back(decode_lossless(s.config, table, r, total));
    }
  }
  return out;
}

std::vector<Sample> near_lossless_reference(std::span<const Sample> samples, const TriggerPlan& plan) {
  std::vector<Sample> ref(samples.size(), 0);
  for (auto t : plan.triggers) {
    const auto start = t - static_cast<std::int64_t>(kPreTrigger);
    for (std::int64_t i = start; i < start + static_cast<std::int64_t>(kSpikeWindow); ++i)
      if (i >= 0 && i < static_cast<std::int64_t>(samples.size()))
        ref[static_cast<std::size_t>(i)] = samples[static_cast<std::size_t>(i)];
  }
  return ref;
}

LfpContainer encode_lfp(const Recording& rec, const CceTrainingConfig& training, std::vector<std::uint8_t> channel_ids) {
  rec.validate();
  if (rec.bits_per_sample != kSampleBits) throw Error(Errc::invalid_argument, "LFP coding needs 9-bit samples");
  if (channel_ids.empty()) channel_ids = default_ids(rec.channel_count());
  if (channel_ids.size() != rec.channel_count()) throw Error(Errc::invalid_argument, "channel id list size mismatch");
  if (training.window_n > 0xFFFF) throw Error(Errc::invalid_argument, "training window must fit 16 bits");
  LfpContainer c;
  c.rate_hz = rec.rate_hz;
  c.total_samples = rec.length();
  c.channel_ids = std::move(channel_ids);
  c.window_n = static_cast<std::uint16_t>(training.window_n);
  c.chain = train_chain(rec, training);
  BitWriter w;
  cce_encode(rec, c.chain, w);
  c.payload_bits = w.bit_count();
  c.payload = w.take();
  return c;
}

Recording decode_lfp(const LfpContainer& c) {
  BitReader r(c.payload, c.payload_bits);
  return cce_decode(r, c.chain, static_cast<std::size_t>(c.total_samples), c.rate_hz);
}

}  // namespace nsp
