#pragma once

// RiffleSort without external randomness: partition bits are extracted from
// the comparison outcomes themselves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bit_source.hpp"
#include "constants.hpp"
#include "element.hpp"
#include "oracle.hpp"
#include "rifflesort.hpp"
#include "subset.hpp"
#include "windowsort.hpp"

namespace noisort {

/// |P(coin = 0) - 1/2| for the XOR of k outcomes that each err with probability p.
inline double xor_coin_bias(double p, std::uint32_t k) { return std::pow(1.0 - 2.0 * p, k) / 2.0; }

/// Block size k. The bias formula picks the least k with (1-2p)^k / 2 <= n^-4;
/// otherwise k = coin_factor * ceil(log2 n). Capped so the reserved set of
/// 9k elements stays below half of the input.
inline std::uint32_t coin_block_size(std::uint64_t n, double p, const AlgoConstants& k) {
  double want;
  if (k.coin_factor > 0) {
    want = std::ceil(k.coin_factor * ceil_log2(n));
  } else if (p > 0) {
    want = std::ceil(4.0 * std::log(static_cast<double>(n)) / std::log(1.0 / (1.0 - 2.0 * p)));
  } else {
    want = std::numeric_limits<double>::infinity();
  }
  const double cap = std::max<double>(1.0, static_cast<double>(n / 18));
  return static_cast<std::uint32_t>(std::clamp(want, 1.0, cap));
}

/// XORs consecutive blocks of k fresh comparisons taken row-major over
/// reserved x rest. A comparison contributes 1 when the reserved element is
/// observed above the other one.
inline std::vector<bool> extract_coins(ComparisonOracle& oracle, std::span<const Element> reserved,
                                       std::span<const Element> rest, std::uint32_t k, std::uint64_t count) {
  if (k == 0) throw usage_error("extract_coins: block size must be positive");
  if (static_cast<unsigned __int128>(reserved.size()) * rest.size() < static_cast<unsigned __int128>(k) * count)
    throw usage_error("extract_coins: not enough comparisons for the requested coins");
  std::vector<bool> coins;
  coins.reserve(count);
  bool acc = false;
  std::uint32_t filled = 0;
  for (const auto& a : reserved) {
    for (const auto& y : rest) {
      if (coins.size() == count) return coins;
      acc ^= oracle.compare(a, y) == Observed::above;
      if (++filled == k) {
        coins.push_back(acc);
        acc = false;
        filled = 0;
      }
    }
  }
  return coins;
}

/// Elements in the window [guess - cd, guess + cd - 1] of seq that sit on the
/// wrong observed side of x relative to the guessed boundary.
inline std::uint64_t mismatch_count(std::span<const Element> seq, const Element& x, std::uint64_t guess,
                                    std::uint64_t d, double c, ComparisonOracle& oracle) {
  const auto half = static_cast<std::int64_t>(std::max(1.0, std::ceil(c * static_cast<double>(d))));
  const auto g = static_cast<std::int64_t>(guess);
  const std::int64_t lo = std::max<std::int64_t>(0, g - half);
  const std::int64_t hi = std::min<std::int64_t>(static_cast<std::int64_t>(seq.size()) - 1, g + half - 1);
  std::uint64_t m = 0;
  for (std::int64_t pos = lo; pos <= hi; ++pos) {
    const bool y_below_x = oracle.compare(seq[static_cast<std::size_t>(pos)], x) == Observed::below;
    if (pos < g ? !y_below_x : y_below_x) ++m;
  }
  return m;
}

/// Guess in {0, 2d, 4d, ...} below |seq| with the fewest mismatches
/// (smallest guess on ties). A sequence of at most 2d elements has the
/// single guess 0.
inline std::uint64_t estimate_rank_by_scan(std::span<const Element> seq, const Element& x, std::uint64_t d, double c,
                                           ComparisonOracle& oracle) {
  if (d == 0) throw usage_error("estimate_rank_by_scan: d must be positive");
  std::uint64_t best = 0;
  std::uint64_t best_m = std::numeric_limits<std::uint64_t>::max();
  for (std::uint64_t g = 0; g == 0 || g < seq.size(); g += 2 * d) {
    const auto m = mismatch_count(seq, x, g, d, c, oracle);
    if (m < best_m) {
      best_m = m;
      best = g;
    }
  }
  return best;
}

struct DerandStats {
  std::uint32_t block = 0;        // k
  std::size_t reserved = 0;       // |A|
  std::size_t coins = 0;          // extracted
  std::size_t coins_used = 0;
  bool fell_back = false;         // pool ran dry; input returned unchanged
  RiffleStats riffle;
};

/// Derandomized RiffleSort: reserves the first 9k elements, turns their
/// comparisons with everything else into coins, sorts the remainder with
/// those coins, and reinserts the reserved elements by mismatch scans. A
/// final WindowSort pass cleans up the O(d) placement error of the scans.
///
/// `external` is never read; pass an audit source to prove it.
inline Sequence derandomized_riffle_sort(std::span<const Element> s, ComparisonOracle& oracle,
                                         const AlgoConstants& k, BitSource* external = nullptr,
                                         DerandStats* stats = nullptr) {
  (void)external;
  k.validate();
  DerandStats local;
  DerandStats& st = stats ? *stats : local;
  st = DerandStats{};
  if (s.size() <= 1) return Sequence(s.begin(), s.end());

  const std::uint64_t n = s.size();
  st.block = coin_block_size(n, oracle.error_probability(), k);
  st.reserved = std::min<std::size_t>(std::size_t{9} * st.block, n / 2);
  const auto reserved = s.first(st.reserved);
  const auto rest = s.subspan(st.reserved);

  BitPool pool(extract_coins(oracle, reserved, rest, st.block, reserved.size() * rest.size() / st.block));
  st.coins = pool.size();
  Sequence sorted_rest;
  try {
    sorted_rest = riffle_sort(rest, oracle, k, pool, &st.riffle);
  } catch (const coins_exhausted&) {
    st.fell_back = true;
    st.coins_used = pool.consumed();
    return Sequence(s.begin(), s.end());
  }
  st.coins_used = pool.consumed();

  const auto d = k.merge_dislocation(n);
  Sequence out = merge(sorted_rest, reserved, [&](std::span<const Element> seq, const Element& x) {
    return estimate_rank_by_scan(seq, x, d, k.group_factor, oracle);
  });
  return window_sort(std::move(out), k.merge_window(n), oracle);
}

}  // namespace noisort
