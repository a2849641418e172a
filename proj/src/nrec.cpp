#include "nsp/nrec.hpp"

#include <fstream>
#include <sstream>

#include "nsp/bitio.hpp"

namespace nsp {

std::vector<std::uint8_t> encode_nrec(const Recording& rec) {
  rec.validate();
  ByteWriter w;
  w.tag("NREC");
  w.u8(kNrecVersion);
  w.u16(static_cast<std::uint16_t>(rec.channel_count()));
  w.u32(rec.rate_hz);
  w.u8(rec.bits_per_sample);
  w.u64(rec.length());
  w.buffer().reserve(w.buffer().size() + rec.sample_count() * 2);
  for (std::size_t n = 0; n < rec.length(); ++n)
    for (const auto& ch : rec.channels) w.i16(ch[n]);
  return w.take();
}

Recording decode_nrec(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_tag("NREC");
  const auto version = r.u8();
  if (version != kNrecVersion)
    throw Error(Errc::format, "unsupported NREC version " + std::to_string(version) + " at offset 4");
  Recording rec;
  const auto channels = r.u16();
  rec.rate_hz = r.u32();
  rec.bits_per_sample = r.u8();
  const auto length = r.u64();
  if (channels == 0 || channels > kMaxChannels)
    throw Error(Errc::format, "channel count " + std::to_string(channels) + " out of range at offset 5");
  if (rec.rate_hz == 0) throw Error(Errc::format, "zero sample rate at offset 7");
  if (rec.bits_per_sample != kSampleBits && rec.bits_per_sample != 16)
    throw Error(Errc::format, "unsupported bits_per_sample at offset 11");
  if (r.remaining() / 2 / channels < length)
    throw Error(Errc::format, "sample data truncated at offset " + std::to_string(r.offset()) +
                                  ": header declares " + std::to_string(length) + " samples per channel");
  rec.channels.assign(channels, std::vector<Sample>(length));
  for (std::uint64_t n = 0; n < length; ++n)
    for (auto& ch : rec.channels) {
      const auto at = r.offset();
      const auto v = r.i16();
      if (rec.bits_per_sample == kSampleBits && !in_sample_range(v))
        throw Error(Errc::format, "sample outside 9-bit range at offset " + std::to_string(at));
      ch[n] = v;
    }
  if (r.remaining() != 0)
    throw Error(Errc::format, "trailing bytes after sample data at offset " + std::to_string(r.offset()));
  return rec;
}

void write_nrec(const std::string& path, const Recording& rec) { write_file(path, encode_nrec(rec)); }

Recording read_nrec(const std::string& path) {
  const auto bytes = read_file(path);
  try {
    return decode_nrec(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

GroundTruth read_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::format, "cannot open " + path);
  GroundTruth gt;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::int64_t t;
    int label;
    if (!(ss >> t >> label))
      throw Error(Errc::format, path + ":" + std::to_string(lineno) + ": expected \"time label\"");
    if (!gt.times.empty() && t <= gt.times.back())
      throw Error(Errc::format, path + ":" + std::to_string(lineno) + ": times must be strictly increasing");
    if (label < 0) throw Error(Errc::format, path + ":" + std::to_string(lineno) + ": negative label");
    gt.times.push_back(t);
    gt.labels.push_back(label);
  }
  return gt;
}

void write_ground_truth(const std::string& path, const GroundTruth& gt) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::format, "cannot write " + path);
  for (std::size_t i = 0; i < gt.times.size(); ++i) out << gt.times[i] << ' ' << gt.labels[i] << '\n';
}

}  // namespace nsp
