#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "element.hpp"
#include "oracle.hpp"

namespace noisort {

/// Intermediate arrangements of one WindowSort run: (w, S_w) for
/// w = 2d, d, ..., 2, followed by (1, S_1).
struct WindowTrace {
  std::vector<std::pair<std::uint64_t, Sequence>> phases;
};

/// max(0, i - w) plus the number of neighbours within distance w observed
/// below seq[i]. Issues one comparison per in-range neighbour.
inline std::uint64_t score(std::span<const Element> seq, std::size_t i, std::uint64_t w, ComparisonOracle& oracle) {
  if (i >= seq.size()) throw usage_error("score: position out of range");
  if (w == 0) throw usage_error("score: window must be positive");
  const std::size_t lo = i > w ? i - w : 0;
  const std::size_t hi = std::min<std::uint64_t>(seq.size() - 1, i + w);
  std::uint64_t s = i > w ? i - w : 0;
  for (std::size_t j = lo; j <= hi; ++j)
    if (j != i && oracle.less(seq[j], seq[i])) ++s;
  return s;
}

namespace detail {

inline std::uint64_t next_pow2(std::uint64_t v) {
  std::uint64_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

/// Starting bound of the halving schedule. Bounds of n and above are capped:
/// once the window spans the whole sequence every further phase reproduces
/// the same arrangement.
inline std::uint64_t schedule_start(std::uint64_t d, std::size_t n) {
  return std::min(next_pow2(std::max<std::uint64_t>(d, 1)), next_pow2(std::max<std::size_t>(n, 1)));
}

/// One phase: scores every element for window w and returns the arrangement
/// sorted by non-decreasing score, ties kept in current order. Each window
/// pair is queried once; the answer is credited to whichever side it favours.
inline Sequence window_phase(const Sequence& cur, std::uint64_t w, ComparisonOracle& oracle) {
  const std::size_t n = cur.size();
  std::vector<std::uint64_t> sc(n);
  for (std::size_t i = 0; i < n; ++i) sc[i] = i > w ? i - w : 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t hi = std::min<std::uint64_t>(n - 1, i + w);
    for (std::size_t j = i + 1; j <= hi; ++j) {
      if (oracle.less(cur[j], cur[i])) ++sc[i];
      else ++sc[j];
    }
  }
  // Stable counting sort; scores are below n + w.
  const std::uint64_t range = n + std::min<std::uint64_t>(w, n) + 1;
  std::vector<std::uint32_t> bucket(range + 1, 0);
  for (auto s : sc) ++bucket[s + 1];
  for (std::size_t b = 1; b < bucket.size(); ++b) bucket[b] += bucket[b - 1];
  Sequence next(n);
  for (std::size_t i = 0; i < n; ++i) next[bucket[sc[i]]++] = cur[i];
  return next;
}

template <class Observer>
Sequence window_sort_impl(Sequence seq, std::uint64_t d, ComparisonOracle& oracle, Observer&& observe) {
  if (seq.size() <= 1) {
    observe(std::uint64_t{1}, seq);
    return seq;
  }
  for (std::uint64_t w = 2 * schedule_start(d, seq.size()); w >= 2; w /= 2) {
    observe(w, seq);
    seq = window_phase(seq, w, oracle);
  }
  observe(std::uint64_t{1}, seq);
  return seq;
}

}  // namespace detail

/// Approximately sorts `seq`, assumed to have dislocation at most d. d is
/// rounded up to a power of two; windows run 2d, d, ..., 2.
inline Sequence window_sort(Sequence seq, std::uint64_t d, ComparisonOracle& oracle) {
  return detail::window_sort_impl(std::move(seq), d, oracle, [](std::uint64_t, const Sequence&) {});
}

/// As window_sort, also returning every intermediate arrangement.
inline WindowTrace window_sort_trace(Sequence seq, std::uint64_t d, ComparisonOracle& oracle) {
  WindowTrace trace;
  detail::window_sort_impl(std::move(seq), d, oracle,
                           [&](std::uint64_t w, const Sequence& s) { trace.phases.emplace_back(w, s); });
  return trace;
}

}  // namespace noisort
