#pragma once

#include <span>
#include <utility>
#include <vector>

#include "bit_source.hpp"
#include "element.hpp"

namespace noisort {

struct SubsetSplit {
  Sequence chosen;
  Sequence rest;
};

namespace detail {

/// Marks `count` distinct entries of [0, size) uniformly (partial Fisher-Yates).
inline std::vector<bool> pick_uniform(std::size_t size, std::size_t count, BitSource& bits) {
  std::vector<std::size_t> idx(size);
  for (std::size_t i = 0; i < size; ++i) idx[i] = i;
  std::vector<bool> picked(size, false);
  for (std::size_t t = 0; t < count; ++t) {
    const auto j = t + static_cast<std::size_t>(bits.uniform_below(size - t));
    std::swap(idx[t], idx[j]);
    picked[idx[t]] = true;
  }
  return picked;
}

}  // namespace detail

/// Picks half of `pool` (which must have even size 2N): one coin per
/// element decides a tentative set C, which is then topped up from the
/// complement or trimmed down to exactly N by uniform choices. With fair
/// bits every N-subset is equally likely. Both halves keep pool order.
inline SubsetSplit unbiased_subset(std::span<const Element> pool, BitSource& bits) {
  if (pool.size() % 2 != 0) throw usage_error("unbiased_subset: pool size must be even");
  const std::size_t half = pool.size() / 2;
  std::vector<bool> in_c(pool.size());
  std::size_t c_size = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    in_c[i] = bits.next_bit();
    c_size += in_c[i];
  }
  if (c_size < half) {
    std::vector<std::size_t> outside;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (!in_c[i]) outside.push_back(i);
    const auto add = detail::pick_uniform(outside.size(), half - c_size, bits);
    for (std::size_t t = 0; t < outside.size(); ++t)
      if (add[t]) in_c[outside[t]] = true;
  } else if (c_size > half) {
    std::vector<std::size_t> inside;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (in_c[i]) inside.push_back(i);
    const auto drop = detail::pick_uniform(inside.size(), c_size - half, bits);
    for (std::size_t t = 0; t < inside.size(); ++t)
      if (drop[t]) in_c[inside[t]] = false;
  }
  SubsetSplit out;
  out.chosen.reserve(half);
  out.rest.reserve(half);
  for (std::size_t i = 0; i < pool.size(); ++i) (in_c[i] ? out.chosen : out.rest).push_back(pool[i]);
  return out;
}

}  // namespace noisort
