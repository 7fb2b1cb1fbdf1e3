#pragma once

// Approximate rank of an element in a sequence of bounded dislocation, using
// two noisy binary search trees whose test intervals widen on every visit.
//
// Positions of the searched sequence run from 0 to n_raw-1. Positions below
// zero behave as -inf and positions at or beyond n_raw as +inf; neither is
// sent to the oracle. Ranks live in {0, ..., n} where n is the padded length.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "constants.hpp"
#include "element.hpp"
#include "oracle.hpp"

namespace noisort {

struct Interval {
  std::int64_t lo = 0;  // inclusive
  std::int64_t hi = 0;  // inclusive
  [[nodiscard]] bool contains(std::int64_t v) const noexcept { return lo <= v && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct SearchLayout {
  std::uint64_t n_raw = 0;        // real sequence length
  std::uint64_t n = 0;            // padded length, 2 * width * 2^h - 1
  std::uint64_t d = 0;            // assumed dislocation bound
  std::uint64_t group_width = 0;  // c * d (times the majority size)
  std::uint32_t h = 0;
  std::uint32_t eta = 0;          // path length below depth h
  std::uint64_t tau = 0;          // step budget per walk
  std::uint32_t majority = 1;

  [[nodiscard]] std::uint64_t group_count() const noexcept { return std::uint64_t{2} << h; }
  [[nodiscard]] std::uint64_t leaf_count() const noexcept { return std::uint64_t{1} << h; }
  [[nodiscard]] std::uint32_t height() const noexcept { return h + eta; }
  [[nodiscard]] Interval group(std::uint64_t i) const noexcept {
    const auto w = static_cast<std::int64_t>(group_width);
    const auto ii = static_cast<std::int64_t>(i);
    return {w * ii, w * (ii + 1) - 1};
  }
};

/// Smallest layout whose padded length 2 * c * d * 2^h - 1 reaches n_raw.
inline SearchLayout pad_layout(std::uint64_t n_raw, std::uint64_t d, double group_factor, double step_factor = 240,
                               double path_factor = 2, std::uint32_t majority = 1) {
  if (n_raw == 0) throw usage_error("pad_layout: empty sequence");
  if (d == 0) throw usage_error("pad_layout: dislocation bound must be positive");
  if (majority == 0) throw usage_error("pad_layout: majority must be positive");
  SearchLayout L;
  L.n_raw = n_raw;
  L.d = d;
  L.majority = majority;
  L.group_width = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(group_factor * d * majority)));
  while (2 * L.group_width * (std::uint64_t{1} << L.h) - 1 < n_raw) ++L.h;
  L.n = 2 * L.group_width * (std::uint64_t{1} << L.h) - 1;
  L.eta = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(path_factor * ceil_log2(L.n))));
  L.tau = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(step_factor * floor_log2(L.n))));
  return L;
}

inline SearchLayout pad_layout(std::uint64_t n_raw, std::uint64_t d, const AlgoConstants& k) {
  return pad_layout(n_raw, d, k.group_factor, k.step_factor, k.path_factor, k.majority);
}

/// A vertex is named by its depth and, above the paths, its index within the
/// level; on the paths (depth > h) the index is the leaf index of the path.
struct Vertex {
  std::uint32_t depth = 0;
  std::uint64_t index = 0;
  friend bool operator==(const Vertex&, const Vertex&) = default;
};

/// One of T_0 / T_1. Shape and intervals are implicit in the layout; only the
/// shared pointer cells are stored, created on first use. Cells belong to
/// leaves: every vertex borrows L from its leftmost leaf and R from its
/// rightmost leaf, which realizes the sharing along paths and left/right
/// spines.
class SearchTree {
public:
  SearchTree(const SearchLayout& layout, std::uint32_t side) : layout_(&layout), side_(side) {
    if (side > 1) throw usage_error("tree side must be 0 or 1");
  }

  [[nodiscard]] const SearchLayout& layout() const noexcept { return *layout_; }
  [[nodiscard]] std::uint32_t side() const noexcept { return side_; }

  [[nodiscard]] static Vertex root() noexcept { return {0, 0}; }
  [[nodiscard]] bool is_leaf(const Vertex& v) const noexcept { return v.depth == layout_->height(); }
  [[nodiscard]] bool is_path_vertex(const Vertex& v) const noexcept { return v.depth >= layout_->h; }

  [[nodiscard]] std::optional<Vertex> parent(const Vertex& v) const noexcept {
    if (v.depth == 0) return std::nullopt;
    if (v.depth > layout_->h) return Vertex{v.depth - 1, v.index};
    return Vertex{v.depth - 1, v.index / 2};
  }

  /// Children in left-to-right order (none for a leaf).
  [[nodiscard]] std::vector<Vertex> children(const Vertex& v) const {
    if (is_leaf(v)) return {};
    if (v.depth >= layout_->h) return {Vertex{v.depth + 1, v.index}};
    return {Vertex{v.depth + 1, 2 * v.index}, Vertex{v.depth + 1, 2 * v.index + 1}};
  }

  /// Leaf indices [first, last] below v.
  [[nodiscard]] std::pair<std::uint64_t, std::uint64_t> leaf_span(const Vertex& v) const noexcept {
    if (v.depth >= layout_->h) return {v.index, v.index};
    const auto shift = layout_->h - v.depth;
    return {v.index << shift, ((v.index + 1) << shift) - 1};
  }

  [[nodiscard]] Interval leaf_interval(std::uint64_t leaf) const noexcept { return layout_->group(2 * leaf + side_); }

  [[nodiscard]] Interval interval(const Vertex& v) const noexcept {
    const auto [a, b] = leaf_span(v);
    return {leaf_interval(a).lo, leaf_interval(b).hi};
  }

  /// Cell ids: 2 * leaf for L, 2 * leaf + 1 for R.
  [[nodiscard]] std::uint64_t left_cell(const Vertex& v) const noexcept { return 2 * leaf_span(v).first; }
  [[nodiscard]] std::uint64_t right_cell(const Vertex& v) const noexcept { return 2 * leaf_span(v).second + 1; }

  /// Current position addressed by a cell.
  std::int64_t& cell(std::uint64_t id) {
    auto it = cells_.find(id);
    if (it != cells_.end()) return it->second;
    const auto leaf = id / 2;
    const auto iv = leaf_interval(leaf);
    const auto d = static_cast<std::int64_t>(layout_->d);
    const std::int64_t init = (id % 2 == 0) ? iv.lo - d - 1 : iv.hi + d;
    return cells_.emplace(id, init).first->second;
  }

  [[nodiscard]] const std::unordered_map<std::uint64_t, std::int64_t>& cells() const noexcept { return cells_; }

  void note_visit(const Vertex& v) { visited_.insert(v.depth * (layout_->group_count() + 1) + v.index); }
  [[nodiscard]] std::size_t visited_count() const noexcept { return visited_.size(); }

private:
  const SearchLayout* layout_;
  std::uint32_t side_;
  std::unordered_map<std::uint64_t, std::int64_t> cells_;
  std::unordered_set<std::uint64_t> visited_;
};

/// Optional instrumentation hooks for tests and experiments.
struct SearchObserver {
  /// Called after every test with the tree side, vertex, its interval and outcome.
  std::function<void(std::uint32_t side, const Vertex&, const Interval&, bool success)> on_test;
  /// Called for every probe of a pointer cell, before the cell moves.
  std::function<void(std::uint32_t side, std::uint64_t cell, std::int64_t position)> on_probe;
  /// Called after every walk step with the vertex left and the vertex reached.
  std::function<void(std::uint32_t side, const Vertex& from, const Vertex& to)> on_step;
};

namespace detail {

/// Observed "x above seq[pos]", with out-of-range positions as sentinels.
inline bool observed_above(const Element& x, std::span<const Element> seq, std::int64_t pos,
                           ComparisonOracle& oracle) {
  if (pos < 0) return true;
  if (pos >= static_cast<std::int64_t>(seq.size())) return false;
  return oracle.compare(x, seq[static_cast<std::size_t>(pos)]) == Observed::above;
}

}  // namespace detail

/// Tests x against the boundary elements addressed by L(v) and R(v), then
/// widens both pointers. Succeeds iff x is observed above the left boundary
/// and below the right one (by majority over `majority` probes each).
inline bool test(const Element& x, SearchTree& tree, const Vertex& v, std::span<const Element> seq,
                 ComparisonOracle& oracle, const SearchObserver* obs = nullptr) {
  const auto k = tree.layout().majority;
  auto& lpos = tree.cell(tree.left_cell(v));
  std::uint32_t left_votes = 0;
  for (std::uint32_t t = 0; t < k; ++t) {
    if (obs && obs->on_probe) obs->on_probe(tree.side(), tree.left_cell(v), lpos);
    if (detail::observed_above(x, seq, lpos, oracle)) ++left_votes;
    --lpos;
  }
  auto& rpos = tree.cell(tree.right_cell(v));
  std::uint32_t right_votes = 0;
  for (std::uint32_t t = 0; t < k; ++t) {
    if (obs && obs->on_probe) obs->on_probe(tree.side(), tree.right_cell(v), rpos);
    if (!detail::observed_above(x, seq, rpos, oracle)) ++right_votes;
    ++rpos;
  }
  const bool ok = 2 * left_votes > k && 2 * right_votes > k;
  if (obs && obs->on_test) obs->on_test(tree.side(), v, tree.interval(v), ok);
  return ok;
}

struct WalkOutcome {
  std::optional<Vertex> leaf;  // set on success
  std::uint64_t steps = 0;
  [[nodiscard]] bool success() const noexcept { return leaf.has_value(); }
};

/// Random walk from the root: move to the unique child whose test succeeds,
/// to the parent when every test fails, otherwise stay. Stops at a leaf or
/// after tau steps.
inline WalkOutcome walk(SearchTree& tree, const Element& x, std::span<const Element> seq, ComparisonOracle& oracle,
                        std::uint64_t tau, const SearchObserver* obs = nullptr) {
  Vertex cur = SearchTree::root();
  tree.note_visit(cur);
  WalkOutcome out;
  while (out.steps < tau) {
    const auto kids = tree.children(cur);
    std::size_t successes = 0;
    Vertex chosen{};
    for (const auto& c : kids) {
      if (test(x, tree, c, seq, oracle, obs)) {
        ++successes;
        chosen = c;
      }
    }
    const Vertex from = cur;
    if (successes == 1) {
      cur = chosen;
    } else if (successes == 0) {
      if (auto p = tree.parent(cur)) cur = *p;
    }
    ++out.steps;
    tree.note_visit(cur);
    if (obs && obs->on_step) obs->on_step(tree.side(), from, cur);
    if (tree.is_leaf(cur)) {
      out.leaf = cur;
      return out;
    }
  }
  return out;
}

struct RankEstimate {
  std::uint64_t position = 0;
  WalkOutcome walks[2];
  int winner = -1;  // tree side whose leaf was used, -1 on double timeout
  SearchLayout layout;
};

namespace detail {

inline RankEstimate approximate_rank_unchecked(std::span<const Element> seq, std::uint64_t d, const Element& x,
                                               ComparisonOracle& oracle, const AlgoConstants& k,
                                               const SearchObserver* obs) {
  RankEstimate est;
  if (seq.empty()) return est;
  est.layout = pad_layout(seq.size(), d, k);
  for (std::uint32_t side = 0; side < 2; ++side) {
    SearchTree tree(est.layout, side);
    est.walks[side] = walk(tree, x, seq, oracle, est.layout.tau, obs);
    if (est.winner < 0 && est.walks[side].success()) {
      est.winner = static_cast<int>(side);
      const auto lo = tree.interval(*est.walks[side].leaf).lo;
      est.position = static_cast<std::uint64_t>(std::clamp<std::int64_t>(lo, 0, static_cast<std::int64_t>(seq.size())));
    }
  }
  if (est.winner < 0) est.position = seq.size() / 2;
  return est;
}

}  // namespace detail

/// Position r_x in [0, |seq|] close to the rank of x in seq, assuming seq has
/// dislocation at most d. Runs the walk on T_0, then on T_1; a T_0 leaf takes
/// precedence, and a double timeout yields |seq| / 2.
inline RankEstimate approximate_rank(std::span<const Element> seq, std::uint64_t d, const Element& x,
                                     ComparisonOracle& oracle, const AlgoConstants& k = AlgoConstants::paper(),
                                     const SearchObserver* obs = nullptr) {
  for (const auto& e : seq)
    if (e == x) throw usage_error("approximate_rank: query element already in the sequence");
  k.validate();
  return detail::approximate_rank_unchecked(seq, d, x, oracle, k, obs);
}

}  // namespace noisort
