#include <catch_amalgamated.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "noisort/derand.hpp"
#include "noisort/referee.hpp"

using namespace noisort;

namespace {

std::shared_ptr<const Universe> identity_universe(std::uint32_t n) {
  std::vector<std::uint32_t> r(n);
  for (std::uint32_t i = 0; i < n; ++i) r[i] = i;
  return std::make_shared<const Universe>(std::move(r), 0);
}

std::uint64_t distance(std::uint64_t a, std::uint64_t b) { return a > b ? a - b : b - a; }

/// Probability of each chosen-set mask when every bit string is weighted
/// 2^-length, explored up to `depth` bits; `open` collects the mass of
/// strings still undecided at the cap.
void enumerate_subsets(const Sequence& pool, std::vector<bool>& prefix, std::size_t depth,
                       std::map<std::uint32_t, double>& mass, double& open) {
  BitPool bits(prefix);
  try {
    const auto split = unbiased_subset(pool, bits);
    std::uint32_t mask = 0;
    for (const auto& e : split.chosen) mask |= 1u << e.id;
    mass[mask] += std::ldexp(1.0, -static_cast<int>(prefix.size()));
  } catch (const coins_exhausted&) {
    if (prefix.size() == depth) {
      open += std::ldexp(1.0, -static_cast<int>(prefix.size()));
      return;
    }
    for (bool b : {false, true}) {
      prefix.push_back(b);
      enumerate_subsets(pool, prefix, depth, mass, open);
      prefix.pop_back();
    }
  }
}

}  // namespace

TEST_CASE("coin bias closed form", "[derand]") {
  REQUIRE(xor_coin_bias(0.0, 5) == Catch::Approx(0.5));
  REQUIRE(0.5 + xor_coin_bias(1.0 / 32, 8) == Catch::Approx(0.7984).epsilon(1e-4));
  REQUIRE(xor_coin_bias(1.0 / 32, 1) == Catch::Approx(15.0 / 32));
}

TEST_CASE("error-free coins are XORs of the true relations", "[derand]") {
  auto w = make_universe(60, 14, 0.0);
  const auto all = identity_sequence(60);
  const std::span<const Element> s(all);
  const auto bits = extract_coins(w.oracle, s.first(10), s.subspan(10), 4, 100);
  REQUIRE(bits.size() == 100);
  REQUIRE(w.oracle.comparisons() == 400);
  // Recompute block by block, row-major over reserved x rest.
  std::size_t idx = 0;
  bool acc = false;
  int filled = 0;
  for (std::uint32_t a = 0; a < 10 && idx < 100; ++a) {
    for (std::uint32_t y = 10; y < 60 && idx < 100; ++y) {
      acc ^= w.universe->truly_less(Element::real(y), Element::real(a));
      if (++filled == 4) {
        REQUIRE(bits[idx++] == acc);
        acc = false;
        filled = 0;
      }
    }
  }
}

TEST_CASE("coin extraction checks its budget", "[derand]") {
  auto w = make_universe(20, 1, 0.1);
  const auto all = identity_sequence(20);
  const std::span<const Element> s(all);
  REQUIRE_THROWS_AS(extract_coins(w.oracle, s.first(2), s.subspan(2), 4, 10), usage_error);
  REQUIRE_NOTHROW(extract_coins(w.oracle, s.first(2), s.subspan(2), 4, 9));
  REQUIRE_THROWS_AS(extract_coins(w.oracle, s.first(2), s.subspan(2), 0, 1), usage_error);
}

TEST_CASE("Monte Carlo coin frequency matches the closed form", "[derand]") {
  const double p = 1.0 / 32;
  auto w = make_universe(4000, 23, p);
  Referee ref(w.universe);
  const auto sorted = ref.brute_force_sorted();
  const std::span<const Element> s(sorted);
  const auto bits = extract_coins(w.oracle, s.first(100), s.subspan(100), 8, 40000);
  double zeros = 0;
  for (bool b : bits) zeros += !b;
  const double expect = 0.5 + xor_coin_bias(p, 8);
  const double sigma = std::sqrt(expect * (1 - expect) / 40000.0);
  REQUIRE(std::abs(zeros / 40000.0 - expect) <= 3 * sigma);
}

TEST_CASE("block size from the bias formula reaches n^-4", "[derand]") {
  auto k = AlgoConstants::paper();
  for (std::uint64_t n : {1u << 20, 1u << 24}) {
    const double p = 1.0 / 32;
    const auto b = coin_block_size(n, p, k);
    REQUIRE(b < n / 18);  // uncapped at these sizes
    REQUIRE(xor_coin_bias(p, b) <= std::pow(static_cast<double>(n), -4.0));
    // Least such k: one block fewer misses (1-2p)^k <= n^-4.
    REQUIRE(std::pow(1 - 2 * p, b - 1) > std::pow(static_cast<double>(n), -4.0));
  }
  // Capped so the reserved set stays within half of the input.
  REQUIRE(coin_block_size(1000, 1.0 / 32, k) == 1000 / 18);
  REQUIRE(coin_block_size(4096, 1.0 / 32, AlgoConstants::practical()) == 12);
}

TEST_CASE("subset selection is exactly uniform for small pools", "[derand]") {
  for (std::uint32_t N : {1u, 2u, 3u}) {
    const auto pool = identity_sequence(2 * N);
    std::map<std::uint32_t, double> mass;
    double open = 0;
    std::vector<bool> prefix;
    enumerate_subsets(pool, prefix, N == 3 ? 20 : 22, mass, open);
    const double outcomes = N == 1 ? 2 : N == 2 ? 6 : 20;
    REQUIRE(mass.size() == static_cast<std::size_t>(outcomes));
    INFO("N=" << N << " undecided mass " << open);
    REQUIRE(open < 0.05);
    // Each subset has probability 1/C(2N,N); the decided mass may only fall
    // short of it by what is still undecided.
    for (const auto& [m, pr] : mass) {
      REQUIRE(std::popcount(m) == static_cast<int>(N));
      REQUIRE(pr <= 1.0 / outcomes + 1e-12);
      REQUIRE(pr + open >= 1.0 / outcomes);
    }
  }
}

TEST_CASE("one pair: each side chosen with probability one half", "[derand]") {
  // Coins 00 and 11 are resolved by a third bit, 01 and 10 directly.
  const auto pool = identity_sequence(2);
  std::map<std::uint32_t, double> mass;
  double open = 0;
  std::vector<bool> prefix;
  enumerate_subsets(pool, prefix, 3, mass, open);
  REQUIRE(open == 0.0);
  REQUIRE(mass[1] == 0.5);
  REQUIRE(mass[2] == 0.5);
}

TEST_CASE("all heads keeps C = A and trims uniformly", "[derand]") {
  std::vector<bool> bits(4, true);
  for (int i = 0; i < 64; ++i) bits.push_back((i * 37 % 5) & 1);
  BitPool pool(bits);
  const auto split = unbiased_subset(identity_sequence(4), pool);
  REQUIRE(split.chosen.size() == 2);
  REQUIRE(split.rest.size() == 2);
  REQUIRE_THROWS_AS(unbiased_subset(identity_sequence(3), pool), usage_error);
  BitPool empty;
  REQUIRE_THROWS_AS(unbiased_subset(identity_sequence(4), empty), coins_exhausted);
}

TEST_CASE("mismatch counts", "[derand]") {
  auto u = identity_universe(1001);
  ComparisonOracle oracle(u, 0.0, 1);
  Sequence seq;
  for (std::uint32_t i = 0; i <= 1000; ++i)
    if (i != 500) seq.push_back(Element::real(i));
  const auto x = Element::real(500);
  const std::uint64_t d = 5;
  const double c = 8;
  REQUIRE(mismatch_count(seq, x, 500, d, c, oracle) == 0);
  // Off by cd: every position between the guess and the rank mismatches.
  REQUIRE(mismatch_count(seq, x, 540, d, c, oracle) == 40);
  REQUIRE(mismatch_count(seq, x, 540, d, c, oracle) > 40 / 3);
  REQUIRE(mismatch_count(seq, x, 460, d, c, oracle) == 40);
  // Clipped window at position 0: positions 0..39 exist, all below x.
  REQUIRE(mismatch_count(seq, x, 0, d, c, oracle) == 40);
}

TEST_CASE("scan estimates are within 2d without errors", "[derand]") {
  auto u = identity_universe(2001);
  ComparisonOracle oracle(u, 0.0, 1);
  for (std::uint32_t missing : {0u, 1u, 777u, 1000u, 1999u, 2000u}) {
    Sequence seq;
    for (std::uint32_t i = 0; i <= 2000; ++i)
      if (i != missing) seq.push_back(Element::real(i));
    REQUIRE(distance(estimate_rank_by_scan(seq, Element::real(missing), 6, 8, oracle), missing) <= 12);
  }
  Sequence tiny{Element::real(3), Element::real(4)};
  REQUIRE(estimate_rank_by_scan(tiny, Element::real(5), 1, 8, oracle) == 0);
  REQUIRE(estimate_rank_by_scan(tiny, Element::real(5), 4, 8, oracle) == 0);
  REQUIRE_THROWS_AS(estimate_rank_by_scan(tiny, Element::real(5), 0, 8, oracle), usage_error);
}

TEST_CASE("noisy scan estimates rarely miss by more than cd", "[derand]") {
  const std::uint32_t n = 4096;
  const std::uint64_t d = 8;
  const double c = 8;
  auto u = identity_universe(n + 1);
  std::mt19937_64 eng(5);
  int failures = 0;
  for (int t = 0; t < 1000; ++t) {
    ComparisonOracle oracle(u, 1.0 / 32, 1000 + t);
    const auto missing = static_cast<std::uint32_t>(eng() % (n + 1));
    Sequence seq;
    for (std::uint32_t i = 0; i <= n; ++i)
      if (i != missing) seq.push_back(Element::real(i));
    for (std::size_t i = 0; i < seq.size(); i += d + 1)
      std::shuffle(seq.begin() + i, seq.begin() + std::min<std::size_t>(seq.size(), i + d + 1), eng);
    const auto r = estimate_rank_by_scan(seq, Element::real(missing), d, c, oracle);
    failures += distance(r, missing) > static_cast<std::uint64_t>(c * d);
  }
  REQUIRE(failures < 10);
}

TEST_CASE("error-free derandomized sort is exact", "[derand]") {
  // Sizes whose coin pool suffices; below ~100 elements it may run dry.
  const auto k = AlgoConstants::practical();
  for (std::uint32_t n : {1u, 2u, 100u, 256u, 3000u}) {
    auto w = make_universe(n, 2 * n + 1, 0.0);
    Referee ref(w.universe);
    FailingBitSource audit;
    DerandStats st;
    const auto out = derandomized_riffle_sort(identity_sequence(n), w.oracle, k, &audit, &st);
    REQUIRE(out == ref.brute_force_sorted());
    REQUIRE(audit.calls() == 0);
    REQUIRE_FALSE(st.fell_back);
  }
}

TEST_CASE("derandomized sort reports its coin budget", "[derand]") {
  auto w = make_universe(4096, 3, 1.0 / 32);
  DerandStats st;
  (void)derandomized_riffle_sort(identity_sequence(4096), w.oracle, AlgoConstants::practical(), nullptr, &st);
  REQUIRE(st.block == 12);
  REQUIRE(st.reserved == 108);
  REQUIRE(st.coins == 108 * (4096 - 108) / 12);
  REQUIRE(st.coins_used <= st.coins);
  REQUIRE(st.coins_used > 0);
}

TEST_CASE("coin shortage falls back to the input order", "[derand]") {
  auto w = make_universe(64, 3, 0.0);
  BitPool none;
  REQUIRE_THROWS_AS(riffle_sort(identity_sequence(64), w.oracle, AlgoConstants::practical(), none), coins_exhausted);
  // Tiny inputs leave only a handful of coins; whenever they run out the
  // input comes back unchanged.
  int fallbacks = 0;
  for (std::uint32_t n = 2; n <= 24; ++n) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto wn = make_universe(n, seed, 0.2);
      DerandStats st;
      const auto in = identity_sequence(n);
      const auto out = derandomized_riffle_sort(in, wn.oracle, AlgoConstants::practical(), nullptr, &st);
      REQUIRE(Referee::is_permutation_of(out, in));
      if (st.fell_back) {
        ++fallbacks;
        REQUIRE(out == in);
      }
    }
  }
  INFO("fallbacks: " << fallbacks);
  SUCCEED();
}

TEST_CASE("derandomized and randomized sorts agree within a factor 2", "[derand]") {
  const auto k = AlgoConstants::practical();
  double rmax = 0, rtot = 0, dmax = 0, dtot = 0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    auto w1 = make_universe(4096, 500 + t, 1.0 / 32);
    auto w2 = make_universe(4096, 500 + t, 1.0 / 32);
    Referee ref(w1.universe);
    const auto a = ref.dislocation_report(riffle_sort(identity_sequence(4096), w1.oracle, k, t));
    FailingBitSource audit;
    const auto b = ref.dislocation_report(derandomized_riffle_sort(identity_sequence(4096), w2.oracle, k, &audit));
    REQUIRE(audit.calls() == 0);
    rmax += static_cast<double>(a.max_dislocation);
    rtot += static_cast<double>(a.total_dislocation);
    dmax += static_cast<double>(b.max_dislocation);
    dtot += static_cast<double>(b.total_dislocation);
  }
  INFO("mean max " << rmax / 50 << " vs " << dmax / 50 << ", mean total " << rtot / 50 << " vs " << dtot / 50);
  REQUIRE(dmax <= 2 * rmax);
  REQUIRE(rmax <= 2 * dmax);
  REQUIRE(dtot <= 2 * rtot);
  REQUIRE(rtot <= 2 * dtot);
}
