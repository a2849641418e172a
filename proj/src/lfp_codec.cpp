#include "nsp/lfp_codec.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <string>

#include "nsp/decorrelate.hpp"
#include "nsp/rice.hpp"

namespace nsp {

void CceTrainingConfig::validate() const {
  if (n0 < 1 || n0 >= window_n)
    throw Error(Errc::invalid_argument, "CCE training requires 1 <= n0 < window_n");
}

std::vector<int> ChannelChain::parents() const {
  std::vector<int> p(channel_count(), -2);
  if (root < p.size()) p[root] = -1;
  for (const auto& l : links)
    if (l.child < p.size()) p[l.child] = l.parent;
  return p;
}

void ChannelChain::validate(std::size_t channels) const {
  if (channel_count() != channels)
    throw Error(Errc::invalid_argument, "chain covers " + std::to_string(channel_count()) + " channels, expected " +
                                            std::to_string(channels));
  if (root >= channels) throw Error(Errc::invalid_argument, "chain root out of range");
  std::vector<bool> placed(channels, false);
  placed[root] = true;
  for (const auto& l : links) {
    if (l.child >= channels || l.parent >= channels)
      throw Error(Errc::invalid_argument, "chain link references an unknown channel");
    if (placed[l.child]) throw Error(Errc::invalid_argument, "channel has more than one parent or is the root");
    // Parent-before-child ordering rules out cycles.
    if (!placed[l.parent]) throw Error(Errc::invalid_argument, "chain link precedes its parent");
    placed[l.child] = true;
  }
}

std::uint64_t residual_energy(std::span<const int> e) {
  std::uint64_t acc = 0;
  for (int v : e) acc += static_cast<std::uint64_t>(static_cast<std::int64_t>(v) * v);
  return acc;
}

namespace {

struct WindowSums {
  std::int64_t cross = 0;
  std::int64_t ref = 0;
  std::int64_t child = 0;
};

WindowSums window_sums(std::span<const int> a, std::span<const int> b, const CceTrainingConfig& config) {
  config.validate();
  if (a.size() < config.window_n || b.size() < config.window_n)
    throw Error(Errc::invalid_argument, "residual sequences shorter than the training window");
  WindowSums s;
  for (std::size_t n = config.n0 - 1; n < config.window_n; ++n) {
    s.cross += static_cast<std::int64_t>(a[n]) * b[n];
    s.ref += static_cast<std::int64_t>(b[n]) * b[n];
    s.child += static_cast<std::int64_t>(a[n]) * a[n];
  }
  return s;
}

// num/den scaled by 2^14, rounded half away from zero.
std::int64_t rounded_ratio_q14(std::int64_t num, std::int64_t den) {
  const bool negative = (num < 0) != (den < 0);
  const auto a = static_cast<unsigned __int128>(num < 0 ? -static_cast<__int128>(num) : num) << kGammaFracBits;
  const auto b = static_cast<unsigned __int128>(den < 0 ? -static_cast<__int128>(den) : den);
  const auto q = (2 * a + b) / (2 * b);
  const auto capped = static_cast<std::int64_t>(std::min<unsigned __int128>(q, 1u << 20));
  return negative ? -capped : capped;
}

std::vector<std::size_t> children_order(std::size_t n, std::uint8_t root, const std::vector<int>& parent) {
  std::vector<std::size_t> order{root};
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t v = 0; v < n; ++v)
      if (parent[v] == static_cast<int>(order[i])) order.push_back(v);
  return order;
}

}  // namespace

GammaEstimate estimate_gamma(std::span<const int> e_child, std::span<const int> e_ref,
                             const CceTrainingConfig& config) {
  const auto s = window_sums(e_child, e_ref, config);
  if (s.ref == 0) return {0, true};
  const auto q = std::clamp<std::int64_t>(rounded_ratio_q14(s.cross, s.ref), -kGammaMaxQ, kGammaMaxQ);
  return {static_cast<std::int16_t>(q), false};
}

int gamma_predict(std::int16_t gamma_q, int e) {
  const std::int64_t p = static_cast<std::int64_t>(gamma_q) * e;
  const std::int64_t mag = (std::llabs(p) + (1 << (kGammaFracBits - 1))) >> kGammaFracBits;
  return static_cast<int>(p < 0 ? -mag : mag);
}

std::vector<int> minimum_spanning_tree(const std::vector<std::vector<double>>& weights) {
  const std::size_t n = weights.size();
  std::vector<int> parent(n, -1);
  if (n == 0) return parent;
  std::vector<bool> in_tree(n, false);
  std::vector<double> key(n, std::numeric_limits<double>::infinity());
  key[0] = 0.0;
  for (std::size_t iter = 0; iter < n; ++iter) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v)
      if (!in_tree[v] && (u == n || key[v] < key[u])) u = v;
    in_tree[u] = true;
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      if (weights[u][v] < key[v]) {
        key[v] = weights[u][v];
        parent[v] = static_cast<int>(u);
      }
    }
  }
  return parent;
}

std::vector<std::vector<int>> temporal_residuals(const Recording& rec) {
  std::vector<std::vector<int>> out(rec.channel_count());
  for (std::size_t c = 0; c < rec.channel_count(); ++c) {
    Dpcm2 dpcm;
    out[c].reserve(rec.length());
    for (auto x : rec.channels[c]) out[c].push_back(dpcm.forward(x));
  }
  return out;
}

ChannelChain train_chain(const Recording& rec, const CceTrainingConfig& config) {
  rec.validate();
  const std::size_t n = rec.channel_count();
  if (n < 2) throw Error(Errc::invalid_argument, "chain training needs at least 2 channels");
  if (n > kCceChannels) throw Error(Errc::invalid_argument, "chain training takes at most 8 channels");
  const auto e = temporal_residuals(rec);

  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto s = window_sums(e[i], e[j], config);
      double rho2 = 0.0;
      if (s.ref > 0 && s.child > 0)
        rho2 = static_cast<double>(s.cross) * static_cast<double>(s.cross) /
               (static_cast<double>(s.child) * static_cast<double>(s.ref));
      w[i][j] = w[j][i] = 1.0 - rho2;
    }

  const auto parent = minimum_spanning_tree(w);
  ChannelChain chain;
  chain.root = 0;
  for (auto v : children_order(n, 0, parent)) {
    if (v == 0) continue;
    const auto p = static_cast<std::size_t>(parent[v]);
    const auto g = estimate_gamma(e[v], e[p], config);
    chain.links.push_back({static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(p), g.gamma_q});
  }
  return chain;
}

std::uint64_t cce_encode(const Recording& rec, const ChannelChain& chain, BitWriter& out) {
  rec.validate();
  chain.validate(rec.channel_count());
  const auto start = out.bit_count();
  const std::size_t channels = rec.channel_count();
  std::vector<Dpcm2> dpcm(channels);
  std::vector<RiceState> rice(channels);
  std::vector<int> e(channels, 0);

  for (std::size_t n = 0; n < rec.length(); ++n) {
    e[chain.root] = dpcm[chain.root].forward(rec.channels[chain.root][n]);
    gc_encode(rice[chain.root], zigzag_map(e[chain.root]), out);
    for (const auto& l : chain.links) {
      e[l.child] = dpcm[l.child].forward(rec.channels[l.child][n]);
      const int spatial = e[l.child] - gamma_predict(l.gamma_q, e[l.parent]);
      gc_encode(rice[l.child], zigzag_map(spatial), out);
    }
  }
  return out.bit_count() - start;
}

Recording cce_decode(BitReader& in, const ChannelChain& chain, std::size_t total_samples, std::uint32_t rate_hz) {
  const std::size_t channels = chain.channel_count();
  chain.validate(channels);
  Recording rec;
  rec.rate_hz = rate_hz;
  rec.channels.assign(channels, std::vector<Sample>(total_samples));
  std::vector<Dpcm2> dpcm(channels);
  std::vector<RiceState> rice(channels);
  std::vector<int> e(channels, 0);

  for (std::size_t n = 0; n < total_samples; ++n) {
    e[chain.root] = zigzag_unmap(gc_decode(rice[chain.root], in));
    rec.channels[chain.root][n] = static_cast<Sample>(dpcm[chain.root].inverse(e[chain.root]));
    for (const auto& l : chain.links) {
      const int spatial = zigzag_unmap(gc_decode(rice[l.child], in));
      e[l.child] = spatial + gamma_predict(l.gamma_q, e[l.parent]);
      if (std::abs(e[l.child]) > kResidualMax)
        throw Error(Errc::corrupt_stream, "reconstructed residual out of range");
      rec.channels[l.child][n] = static_cast<Sample>(dpcm[l.child].inverse(e[l.child]));
    }
  }
  return rec;
}

}  // namespace nsp
