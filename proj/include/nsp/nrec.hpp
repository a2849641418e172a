#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsp/core.hpp"

namespace nsp {

// Canonical recording file:
//   "NREC" | version u8 = 1 | channels u16 | rate_hz u32 | bits_per_sample u8 |
//   samples_per_channel u64 | channel-interleaved i16 LE samples
inline constexpr std::uint8_t kNrecVersion = 1;

std::vector<std::uint8_t> encode_nrec(const Recording& rec);
Recording decode_nrec(std::span<const std::uint8_t> bytes);

void write_nrec(const std::string& path, const Recording& rec);
Recording read_nrec(const std::string& path);

// Ground-truth sidecar: one "time label" pair per line.
struct GroundTruth {
  std::vector<std::int64_t> times;
  std::vector<int> labels;
};

GroundTruth read_ground_truth(const std::string& path);
void write_ground_truth(const std::string& path, const GroundTruth& gt);

}  // namespace nsp
