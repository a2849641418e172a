#pragma once

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "nsp/core.hpp"

namespace testutil {

inline std::vector<nsp::Sample> random_samples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(nsp::kSampleMin, nsp::kSampleMax);
  std::vector<nsp::Sample> v(n);
  for (auto& s : v) s = static_cast<nsp::Sample>(d(rng));
  return v;
}

// Smooth-ish signal: random walk with small steps, clamped to 9 bits.
inline std::vector<nsp::Sample> walk_samples(std::size_t n, std::uint64_t seed, int step = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(-step, step);
  std::vector<nsp::Sample> v(n);
  int x = 0;
  for (auto& s : v) {
    x = std::clamp(x + d(rng), nsp::kSampleMin, nsp::kSampleMax);
    s = static_cast<nsp::Sample>(x);
  }
  return v;
}

inline nsp::Recording recording(std::vector<std::vector<nsp::Sample>> ch, std::uint32_t rate = nsp::kDefaultRateHz) {
  nsp::Recording r;
  r.rate_hz = rate;
  r.channels = std::move(ch);
  return r;
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           (tag + "-" + std::to_string(std::random_device{}()) + "-" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testutil
