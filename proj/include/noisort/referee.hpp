#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_set>
#include <vector>

#include "element.hpp"
#include "oracle.hpp"

namespace noisort {

struct DislocationReport {
  std::vector<std::uint32_t> per_element;  // indexed by position
  std::uint64_t max_dislocation = 0;
  std::uint64_t total_dislocation = 0;
};

/// Ground-truth metrics. Only experiment and test code holds a Referee;
/// algorithms see the oracle alone.
class Referee {
public:
  explicit Referee(std::shared_ptr<const Universe> universe) : universe_(std::move(universe)) {}

  [[nodiscard]] const Universe& universe() const noexcept { return *universe_; }

  [[nodiscard]] bool truly_less(const Element& x, const Element& y) const {
    return universe_->truly_less(x, y);
  }

  /// |{ y in collection : y truly below x }|.
  [[nodiscard]] std::uint64_t true_rank(const Element& x, std::span<const Element> collection) const {
    std::uint64_t r = 0;
    for (const auto& y : collection)
      if (y != x && universe_->truly_less(y, x)) ++r;
    return r;
  }

  /// Per-position |pos - rank| together with its maximum and sum.
  [[nodiscard]] DislocationReport dislocation_report(std::span<const Element> seq) const {
    check_distinct(seq);
    std::vector<std::uint32_t> order(seq.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return universe_->truly_less(seq[a], seq[b]); });
    DislocationReport rep;
    rep.per_element.resize(seq.size());
    for (std::uint32_t rank = 0; rank < order.size(); ++rank) {
      const std::uint32_t pos = order[rank];
      const std::uint32_t d = pos > rank ? pos - rank : rank - pos;
      rep.per_element[pos] = d;
      rep.max_dislocation = std::max<std::uint64_t>(rep.max_dislocation, d);
      rep.total_dislocation += d;
    }
    return rep;
  }

  /// The real elements of the universe in true order.
  [[nodiscard]] Sequence brute_force_sorted() const {
    Sequence s(universe_->size());
    for (std::uint32_t id = 0; id < universe_->size(); ++id) s[universe_->rank_of(id)] = Element::real(id);
    return s;
  }

  /// `seq` rearranged into true order.
  [[nodiscard]] Sequence sorted_copy(std::span<const Element> seq) const {
    Sequence s(seq.begin(), seq.end());
    std::sort(s.begin(), s.end(), [&](const Element& a, const Element& b) { return universe_->truly_less(a, b); });
    return s;
  }

  [[nodiscard]] bool is_sorted(std::span<const Element> seq) const {
    for (std::size_t i = 1; i < seq.size(); ++i)
      if (!universe_->truly_less(seq[i - 1], seq[i])) return false;
    return true;
  }

  /// True iff `a` and `b` hold the same elements.
  [[nodiscard]] static bool is_permutation_of(std::span<const Element> a, std::span<const Element> b) {
    if (a.size() != b.size()) return false;
    Sequence x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    return x == y;
  }

private:
  static void check_distinct(std::span<const Element> seq) {
    Sequence s(seq.begin(), seq.end());
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw usage_error("sequence contains duplicate elements");
  }

  std::shared_ptr<const Universe> universe_;
};

}  // namespace noisort
