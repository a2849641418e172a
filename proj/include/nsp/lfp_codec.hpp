#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nsp/bitio.hpp"
#include "nsp/core.hpp"

namespace nsp {

inline constexpr int kGammaFracBits = 14;
inline constexpr std::int16_t kGammaMaxQ = 32767;  // 2 - 2^-14 in Q2.14
inline constexpr std::size_t kCceChannels = 8;

struct CceTrainingConfig {
  std::uint32_t window_n = 2000;
  std::uint32_t n0 = 3;  // 1-based start index of the gamma sums

  void validate() const;
};

struct ChainLink {
  std::uint8_t child = 0;
  std::uint8_t parent = 0;
  std::int16_t gamma_q = 0;  // Q2.14
  bool operator==(const ChainLink&) const = default;
};

// Spatial prediction tree over a channel group. Links are stored in root-first
// topological order, so a parent always precedes its children.
struct ChannelChain {
  std::uint8_t root = 0;
  std::vector<ChainLink> links;

  std::size_t channel_count() const { return links.size() + 1; }
  // parent[root] == -1.
  std::vector<int> parents() const;
  // Throws Errc::invalid_argument unless the chain is a rooted spanning tree
  // over channels [0, channels) in topological order.
  void validate(std::size_t channels) const;

  bool operator==(const ChannelChain&) const = default;
};

std::uint64_t residual_energy(std::span<const int> e);

struct GammaEstimate {
  std::int16_t gamma_q = 0;
  bool degenerate = false;  // zero reference energy; gamma forced to 0
};

// Least-squares gamma over the 1-based index range [n0, N], rounded half away
// from zero to Q2.14 and clamped to +-(2 - 2^-14).
GammaEstimate estimate_gamma(std::span<const int> e_child, std::span<const int> e_ref,
                             const CceTrainingConfig& config);

// (gamma_q * e) / 2^14 rounded half away from zero.
int gamma_predict(std::int16_t gamma_q, int e);

// Prim's algorithm from vertex 0 over a dense symmetric weight matrix; lowest
// index wins ties. Returns the parent of each vertex (-1 for vertex 0).
std::vector<int> minimum_spanning_tree(const std::vector<std::vector<double>>& weights);

// DPCM2 residuals for each channel.
std::vector<std::vector<int>> temporal_residuals(const Recording& rec);

// Edge weight 1 - rho^2 over the training window, MST rooted at channel 0,
// gamma per edge with child/parent roles.
ChannelChain train_chain(const Recording& rec, const CceTrainingConfig& config);

std::uint64_t cce_encode(const Recording& rec, const ChannelChain& chain, BitWriter& out);
Recording cce_decode(BitReader& in, const ChannelChain& chain, std::size_t total_samples,
                     std::uint32_t rate_hz = kDefaultRateHz);

}  // namespace nsp
