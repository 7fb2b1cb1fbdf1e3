#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <unordered_set>
#include <vector>

#include "bit_source.hpp"
#include "constants.hpp"
#include "element.hpp"
#include "noisy_search.hpp"
#include "oracle.hpp"
#include "subset.hpp"
#include "windowsort.hpp"

namespace noisort {

/// T_0, T_1, ..., T_k with |T_0| = sqrt(n) and |T_i| = 2^(i-1) sqrt(n).
struct Partition {
  std::vector<Sequence> sets;
  [[nodiscard]] std::size_t k() const noexcept { return sets.empty() ? 0 : sets.size() - 1; }
};

/// Smallest power of four that is at least n.
inline std::uint64_t even_power_of_two_at_least(std::uint64_t n) {
  std::uint64_t p = 1;
  while (p < n) p <<= 2;
  return p;
}

inline bool is_even_power_of_two(std::uint64_t n) { return n != 0 && even_power_of_two_at_least(n) == n; }

/// Draws T_k, T_(k-1), ..., T_1 in turn, each as an unbiased half of the
/// remaining pool; the leftover is T_0.
inline Partition random_partition(std::span<const Element> s, BitSource& bits) {
  if (!is_even_power_of_two(s.size())) throw usage_error("random_partition: size must be an even power of two");
  const std::uint32_t k = ceil_log2(s.size()) / 2;
  Partition part;
  part.sets.resize(k + 1);
  Sequence pool(s.begin(), s.end());
  for (std::uint32_t i = k; i >= 1; --i) {
    auto split = unbiased_subset(pool, bits);
    part.sets[i] = std::move(split.chosen);
    pool = std::move(split.rest);
  }
  part.sets[0] = std::move(pool);
  return part;
}

/// Rank estimator used by merge: (sequence, element) -> insertion position.
using RankEstimator = std::function<std::uint64_t(std::span<const Element>, const Element&)>;

/// Inserts every element of b into a at its estimated position, all at once.
/// Equal positions are ordered by ascending element id; a keeps its order.
inline Sequence merge(std::span<const Element> a, std::span<const Element> b, const RankEstimator& estimate) {
  {
    std::unordered_set<std::uint64_t> ids;
    ids.reserve(a.size() * 2);
    auto key = [](const Element& e) { return (static_cast<std::uint64_t>(e.sentinel) << 32) | e.id; };
    for (const auto& e : a) ids.insert(key(e));
    for (const auto& e : b)
      if (ids.count(key(e))) throw usage_error("merge: inputs overlap at " + to_string(e));
  }
  std::vector<std::pair<std::uint64_t, Element>> placed;
  placed.reserve(b.size());
  for (const auto& x : b) placed.emplace_back(std::min<std::uint64_t>(estimate(a, x), a.size()), x);
  std::sort(placed.begin(), placed.end());
  Sequence out;
  out.reserve(a.size() + b.size());
  std::size_t next = 0;
  for (std::size_t q = 0; q <= a.size(); ++q) {
    while (next < placed.size() && placed[next].first == q) out.push_back(placed[next++].second);
    if (q < a.size()) out.push_back(a[q]);
  }
  return out;
}

/// Merge with the noisy-search estimator for dislocation bound d.
inline Sequence merge(std::span<const Element> a, std::span<const Element> b, std::uint64_t d,
                      ComparisonOracle& oracle, const AlgoConstants& k) {
  return merge(a, b, [&](std::span<const Element> seq, const Element& x) {
    return detail::approximate_rank_unchecked(seq, d, x, oracle, k, nullptr).position;
  });
}

struct RiffleStats {
  std::uint64_t padded_size = 0;
  std::vector<std::size_t> stage_sizes;  // |S_0|, |S_1|, ..., |S_k|
};

/// Approximately sorts s. The input is padded with noiseless +inf sentinels
/// up to a power of four, which are removed again before returning.
inline Sequence riffle_sort(std::span<const Element> s, ComparisonOracle& oracle, const AlgoConstants& k,
                            BitSource& bits, RiffleStats* stats = nullptr) {
  k.validate();
  if (s.empty()) return {};
  const std::uint64_t n = even_power_of_two_at_least(s.size());
  Sequence padded(s.begin(), s.end());
  std::uint32_t next_sentinel = 0;
  for (const auto& e : s)
    if (e.sentinel == Sentinel::plus_infinity) next_sentinel = std::max(next_sentinel, e.id + 1);
  const std::uint32_t first_pad = next_sentinel;
  while (padded.size() < n) padded.push_back(Element::plus_inf(next_sentinel++));

  const Partition part = random_partition(padded, bits);
  const auto root = static_cast<std::uint64_t>(1) << (ceil_log2(n) / 2);
  const auto d = k.merge_dislocation(n);
  const auto window = k.merge_window(n);

  Sequence cur = window_sort(part.sets[0], root, oracle);
  if (stats) {
    stats->padded_size = n;
    stats->stage_sizes = {cur.size()};
  }
  for (std::size_t i = 1; i <= part.k(); ++i) {
    cur = window_sort(merge(cur, part.sets[i], d, oracle, k), window, oracle);
    if (stats) stats->stage_sizes.push_back(cur.size());
  }
  std::erase_if(cur, [&](const Element& e) { return e.sentinel == Sentinel::plus_infinity && e.id >= first_pad; });
  return cur;
}

/// Randomized variant drawing partition bits from a seeded engine.
inline Sequence riffle_sort(std::span<const Element> s, ComparisonOracle& oracle, const AlgoConstants& k,
                            std::uint64_t seed, RiffleStats* stats = nullptr) {
  RngBitSource bits(seed);
  return riffle_sort(s, oracle, k, bits, stats);
}

}  // namespace noisort
