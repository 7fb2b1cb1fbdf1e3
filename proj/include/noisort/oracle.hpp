#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <unordered_map>
#include <utility>
#include <vector>

#include "element.hpp"
#include "random.hpp"

namespace noisort {

/// Hidden ground truth: a bijection from element id to true rank.
class Universe {
public:
  Universe(std::vector<std::uint32_t> rank_of_id, std::uint64_t seed)
      : rank_of_(std::move(rank_of_id)), seed_(seed) {
    std::vector<bool> seen(rank_of_.size(), false);
    for (auto r : rank_of_) {
      if (r >= rank_of_.size() || seen[r]) throw usage_error("universe ranks must form a permutation");
      seen[r] = true;
    }
  }

  [[nodiscard]] std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(rank_of_.size()); }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint32_t rank_of(std::uint32_t id) const { return rank_of_.at(id); }
  [[nodiscard]] const std::vector<std::uint32_t>& ranks() const noexcept { return rank_of_; }

  /// True strict order, sentinel-aware: -inf < reals < +inf, sentinels of
  /// the same sign ordered by id.
  [[nodiscard]] bool truly_less(const Element& x, const Element& y) const {
    if (x.sentinel != y.sentinel) {
      return sentinel_rank(x.sentinel) < sentinel_rank(y.sentinel);
    }
    if (x.is_real()) return rank_of_[x.id] < rank_of_[y.id];
    return x.id < y.id;
  }

private:
  static constexpr int sentinel_rank(Sentinel s) noexcept {
    switch (s) {
      case Sentinel::minus_infinity: return 0;
      case Sentinel::none: return 1;
      default: return 2;
    }
  }

  std::vector<std::uint32_t> rank_of_;
  std::uint64_t seed_;
};

enum class Observed : std::uint8_t { below, above };

constexpr Observed flip(Observed o) noexcept {
  return o == Observed::below ? Observed::above : Observed::below;
}

/// The only source of order information for algorithms. Outcomes between two
/// real elements are wrong with probability p, decided once and for all by a
/// keyed hash of (seed, min id, max id); asking again gives the same answer.
/// Pairs involving a sentinel are always answered truthfully.
///
/// The ledger always counts calls. Per-pair counts are kept only when pair
/// tracking is enabled, since long runs issue tens of millions of queries.
class ComparisonOracle {
public:
  ComparisonOracle(std::shared_ptr<const Universe> universe, double p, std::uint64_t seed)
      : universe_(std::move(universe)), p_(p), seed_(seed) {
    if (!universe_) throw usage_error("oracle needs a universe");
    if (!(p >= 0.0 && p < 0.5)) throw usage_error("error probability must lie in [0, 1/2)");
    // p * 2^64, saturating just below 2^63 since p < 1/2.
    threshold_ = static_cast<std::uint64_t>(std::ldexp(p, 64));
  }

  /// Observed relation of x with respect to y.
  Observed compare(const Element& x, const Element& y) {
    if (x == y) throw usage_error("cannot compare an element with itself: " + to_string(x));
    ++total_;
    if (track_pairs_) ++pair_counts_[pair_key(x, y)];
    const bool truly_below = universe_->truly_less(x, y);
    bool below = truly_below;
    if (x.is_real() && y.is_real() && pair_flipped(x.id, y.id)) below = !below;
    return below ? Observed::below : Observed::above;
  }

  /// True iff x is observed below y.
  bool less(const Element& x, const Element& y) { return compare(x, y) == Observed::below; }

  [[nodiscard]] double error_probability() const noexcept { return p_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint32_t universe_size() const noexcept { return universe_->size(); }

  [[nodiscard]] std::uint64_t comparisons() const noexcept { return total_; }

  void track_pairs(bool on) { track_pairs_ = on; }
  [[nodiscard]] bool tracking_pairs() const noexcept { return track_pairs_; }

  /// Number of times the unordered pair {x, y} was queried while tracking.
  [[nodiscard]] std::uint32_t times_queried(const Element& x, const Element& y) const {
    auto it = pair_counts_.find(pair_key(x, y));
    return it == pair_counts_.end() ? 0 : it->second;
  }

  /// Largest per-pair count seen while tracking.
  [[nodiscard]] std::uint32_t max_pair_count() const {
    std::uint32_t m = 0;
    for (const auto& [k, v] : pair_counts_) m = std::max(m, v);
    return m;
  }

  [[nodiscard]] std::uint64_t tracked_total() const {
    std::uint64_t t = 0;
    for (const auto& [k, v] : pair_counts_) t += v;
    return t;
  }

  void reset_ledger() {
    total_ = 0;
    pair_counts_.clear();
  }

  /// Whether the stored outcome for a real pair is an error. Exposed for
  /// statistical tests of the error model; algorithms must not call this.
  [[nodiscard]] bool pair_flipped(std::uint32_t a, std::uint32_t b) const noexcept {
    if (a > b) std::swap(a, b);
    return keyed_hash(seed_, a, b) < threshold_;
  }

private:
  struct PairKey {
    std::uint64_t lo, hi;
    friend bool operator==(const PairKey&, const PairKey&) = default;
  };
  struct PairHash {
    std::size_t operator()(const PairKey& k) const noexcept {
      return static_cast<std::size_t>(splitmix64(k.lo * 0x9E3779B97F4A7C15ULL ^ k.hi));
    }
  };

  static std::uint64_t element_key(const Element& e) noexcept {
    return (static_cast<std::uint64_t>(e.sentinel) << 32) | e.id;
  }
  static PairKey pair_key(const Element& x, const Element& y) noexcept {
    auto a = element_key(x), b = element_key(y);
    if (a > b) std::swap(a, b);
    return {a, b};
  }

  std::shared_ptr<const Universe> universe_;
  double p_;
  std::uint64_t seed_;
  std::uint64_t threshold_ = 0;
  std::uint64_t total_ = 0;
  bool track_pairs_ = false;
  std::unordered_map<PairKey, std::uint32_t, PairHash> pair_counts_;
};

/// A universe together with an oracle over it.
struct World {
  std::shared_ptr<const Universe> universe;
  ComparisonOracle oracle;
};

/// Builds a universe of n real elements whose true order is a pseudo-random
/// permutation derived from `seed`, and an oracle with error probability p.
inline World make_universe(std::uint32_t n, std::uint64_t seed, double p = 0.0) {
  if (n == 0) throw usage_error("universe must contain at least one element");
  std::vector<std::uint32_t> ranks(n);
  std::iota(ranks.begin(), ranks.end(), 0u);
  std::mt19937_64 eng(splitmix64(seed));
  fisher_yates(std::span<std::uint32_t>(ranks), eng);
  auto universe = std::make_shared<const Universe>(std::move(ranks), seed);
  ComparisonOracle oracle(universe, p, splitmix64(seed ^ 0xA5A5A5A5DEADBEEFULL));
  return World{universe, std::move(oracle)};
}

}  // namespace noisort
