#include <random>
#include <set>

#include "../util.hpp"
#include "doctest.h"
#include "nsp/bitio.hpp"
#include "nsp/lfp_codec.hpp"
#include "nsp/synth.hpp"

using namespace nsp;

namespace {

CceTrainingConfig cfg(std::uint32_t n, std::uint32_t n0 = 1) {
  CceTrainingConfig c;
  c.window_n = n;
  c.n0 = n0;
  return c;
}

// Checks the chain is a spanning tree rooted at `root` by walking parents.
void check_tree(const ChannelChain& chain, std::size_t n) {
  REQUIRE(chain.links.size() == n - 1);
  const auto parent = chain.parents();
  REQUIRE(parent[chain.root] == -1);
  std::set<int> seen_child;
  for (const auto& l : chain.links) REQUIRE(seen_child.insert(l.child).second);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t hops = 0;
    int u = static_cast<int>(v);
    while (u != chain.root) {
      u = parent[static_cast<std::size_t>(u)];
      REQUIRE(u >= 0);
      REQUIRE(++hops < n);
    }
  }
}

Recording mixed(std::size_t channels, std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> mix(channels, std::vector<double>(3));
  for (auto& row : mix)
    for (auto& m : row) m = u(rng);
  Recording r;
  r.channels.assign(channels, {});
  std::vector<double> src(3, 0.0);
  for (std::size_t n = 0; n < length; ++n) {
    for (auto& s : src) s = 0.98 * s + g(rng);
    for (std::size_t c = 0; c < channels; ++c) {
      double v = 4.0 * g(rng);
      for (std::size_t k = 0; k < 3; ++k) v += 6.0 * mix[c][k] * src[k];
      r.channels[c].push_back(static_cast<Sample>(std::clamp<long>(std::lround(v), kSampleMin, kSampleMax)));
    }
  }
  return r;
}

}  // namespace

TEST_CASE("residual energy") {
  CHECK(residual_energy(std::vector<int>{0, 0, 0}) == 0);
  CHECK(residual_energy(std::vector<int>{3, 4}) == 25);
}

TEST_CASE("gamma examples") {
  const std::vector<int> a{5, -3, 2, 7, -1};
  auto g = estimate_gamma(a, a, cfg(5));
  CHECK(g.gamma_q == 1 << 14);
  CHECK_FALSE(g.degenerate);

  g = estimate_gamma(std::vector<int>{2, 4, 6}, std::vector<int>{1, 2, 3}, cfg(3));
  CHECK(g.gamma_q == kGammaMaxQ);

  g = estimate_gamma(std::vector<int>{1, -1, 1, -1}, std::vector<int>{1, 1, 1, 1}, cfg(4));
  CHECK(g.gamma_q == 0);

  g = estimate_gamma(std::vector<int>{1, 2, 3}, std::vector<int>{0, 0, 0}, cfg(3));
  CHECK(g.degenerate);
  CHECK(g.gamma_q == 0);

  // n0 skips the leading samples.
  g = estimate_gamma(std::vector<int>{100, 1, 2}, std::vector<int>{-100, 1, 2}, cfg(3, 2));
  CHECK(g.gamma_q == 1 << 14);

  CHECK_THROWS_AS(estimate_gamma(std::vector<int>{1}, std::vector<int>{1}, cfg(3)), Error);
  CHECK_THROWS_AS(cfg(3, 3).validate(), Error);
}

TEST_CASE("gamma minimizes the windowed energy over the Q2.14 grid") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 30.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double true_gamma = -1.9 + 3.8 * (trial / 19.0);
    std::vector<int> c(400), r(400);
    for (std::size_t i = 0; i < c.size(); ++i) {
      r[i] = static_cast<int>(std::lround(g(rng)));
      c[i] = static_cast<int>(std::lround(true_gamma * r[i] + 0.3 * g(rng)));
    }
    const auto est = estimate_gamma(c, r, cfg(400)).gamma_q;
    // Sum (c - g r)^2 over the whole window (n0 = 1), expanded once.
    long double cc = 0, cr = 0, rr = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      cc += static_cast<long double>(c[i]) * c[i];
      cr += static_cast<long double>(c[i]) * r[i];
      rr += static_cast<long double>(r[i]) * r[i];
    }
    auto energy = [&](int q) {
      const long double g = q / 16384.0L;
      return cc - 2 * g * cr + g * g * rr;
    };
    int best = -32767;
    for (int q = -32767; q <= 32767; q += 1)
      if (energy(q) < energy(best)) best = q;
    CHECK(std::abs(best - est) <= 1);
  }
}

TEST_CASE("gamma_predict rounds half away from zero") {
  CHECK(gamma_predict(1 << 14, 37) == 37);
  CHECK(gamma_predict(1 << 13, 3) == 2);
  CHECK(gamma_predict(1 << 13, -3) == -2);
  CHECK(gamma_predict(-(1 << 13), 3) == -2);
  CHECK(gamma_predict(0, 1000) == 0);
}

TEST_CASE("minimum spanning tree matches brute force on three channels") {
  const std::vector<std::vector<double>> w{{0, 0.1, 0.9}, {0.1, 0, 0.2}, {0.9, 0.2, 0}};
  const auto parent = minimum_spanning_tree(w);
  CHECK(parent == std::vector<int>{-1, 0, 1});
  // Brute force: the three spanning trees of K3.
  const double trees[3] = {w[0][1] + w[1][2], w[0][1] + w[0][2], w[0][2] + w[1][2]};
  CHECK(trees[0] == doctest::Approx(*std::min_element(trees, trees + 3)));
}

TEST_CASE("chain training on correlated and identical channels") {
  const auto rec = mixed(8, 3000, 3);
  const auto chain = train_chain(rec, {});
  CHECK_NOTHROW(chain.validate(8));
  check_tree(chain, 8);

  Recording same;
  same.channels.assign(4, testutil::walk_samples(2500, 5, 10));
  const auto c2 = train_chain(same, {});
  check_tree(c2, 4);
  for (const auto& l : c2.links) CHECK(l.gamma_q == 1 << 14);

  Recording one;
  one.channels = {testutil::walk_samples(2500, 1)};
  CHECK_THROWS_AS(train_chain(one, {}), Error);
}

TEST_CASE("independent channels give small gammas") {
  Recording r;
  for (int c = 0; c < 8; ++c) r.channels.push_back(testutil::random_samples(2000, 100 + c));
  const auto chain = train_chain(r, {});
  check_tree(chain, 8);
  for (const auto& l : chain.links) CHECK(std::abs(l.gamma_q / 16384.0) < 0.1);
}

TEST_CASE("chain validation rejects bad trees") {
  ChannelChain c;
  c.root = 0;
  c.links = {{1, 0, 0}, {2, 1, 0}};
  CHECK_NOTHROW(c.validate(3));
  auto cyc = c;
  cyc.links = {{1, 2, 0}, {2, 1, 0}};
  CHECK_THROWS_AS(cyc.validate(3), Error);
  auto order = c;
  order.links = {{2, 1, 0}, {1, 0, 0}};
  CHECK_THROWS_AS(order.validate(3), Error);
  CHECK_THROWS_AS(c.validate(4), Error);
}

TEST_CASE("CCE round trip") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto rec = mixed(8, 4000, seed);
    const auto chain = train_chain(rec, {});
    BitWriter w;
    cce_encode(rec, chain, w);
    BitReader r(w.bytes(), w.bit_count());
    CHECK(cce_decode(r, chain, rec.length()).channels == rec.channels);
  }
  Recording rnd;
  for (int c = 0; c < 8; ++c) rnd.channels.push_back(testutil::random_samples(3000, 40 + c));
  const auto chain = train_chain(rnd, {});
  BitWriter w;
  cce_encode(rnd, chain, w);
  BitReader r(w.bytes(), w.bit_count());
  CHECK(cce_decode(r, chain, rnd.length()).channels == rnd.channels);
}

TEST_CASE("CCE with a perfect copy compresses the child to near nothing") {
  Recording rec;
  const auto base = testutil::walk_samples(5000, 7, 30);
  rec.channels = {base, base};
  ChannelChain chain;
  chain.links = {{1, 0, 1 << 14}};
  BitWriter both;
  cce_encode(rec, chain, both);
  Recording solo;
  solo.channels = {base};
  BitWriter one;
  cce_encode(solo, ChannelChain{}, one);
  // The copy costs about one bit per sample once its Rice parameter reaches 0.
  CHECK(both.bit_count() - one.bit_count() < base.size() * 6 / 5);
}

TEST_CASE("simulated LFP channels are strongly correlated") {
  const auto rec = synth::simulate_lfp({});
  CHECK(rec.channel_count() == 8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = i + 1; j < 8; ++j) CHECK(synth::correlation(rec.channels[i], rec.channels[j]) >= 0.9);
}
