#include <catch_amalgamated.hpp>
#include <map>
#include <set>

#include "noisort/noisy_search.hpp"
#include "noisort/referee.hpp"

using namespace noisort;

namespace {

/// Sorted sequence of ids 0..n (rank = id) with `missing` removed; the
/// removed element is the query and its rank in the sequence is `missing`.
struct Fixture {
  std::shared_ptr<const Universe> universe;
  ComparisonOracle oracle;
  Sequence seq;
  Element x;

  Fixture(std::uint32_t n, std::uint32_t missing, double p, std::uint64_t seed)
      : universe(make_identity(n + 1)), oracle(universe, p, seed), x(Element::real(missing)) {
    for (std::uint32_t i = 0; i <= n; ++i)
      if (i != missing) seq.push_back(Element::real(i));
  }
  static std::shared_ptr<const Universe> make_identity(std::uint32_t n) {
    std::vector<std::uint32_t> r(n);
    for (std::uint32_t i = 0; i < n; ++i) r[i] = i;
    return std::make_shared<const Universe>(std::move(r), 0);
  }
};

std::uint64_t distance(std::uint64_t a, std::uint64_t b) { return a > b ? a - b : b - a; }

}  // namespace

TEST_CASE("layout padding", "[noisy_search]") {
  const auto a = pad_layout(29999, 15, 1000);
  REQUIRE(a.h == 0);
  REQUIRE(a.n == 29999);
  const auto b = pad_layout(30000, 15, 1000);
  REQUIRE(b.h == 1);
  REQUIRE(b.n == 59999);
  const auto c = pad_layout(2 * 8 * 5 - 1, 5, 8);
  REQUIRE(c.h == 0);
  REQUIRE(c.n == 79);
  // tau and eta scale with log n.
  REQUIRE(a.tau == 240 * 14);
  REQUIRE(a.eta == 2 * 15);
  REQUIRE_THROWS_AS(pad_layout(0, 3, 8), usage_error);
  REQUIRE_THROWS_AS(pad_layout(10, 0, 8), usage_error);
}

TEST_CASE("tree shape: leaf intervals interleave and levels are disjoint", "[noisy_search]") {
  const auto L = pad_layout(5000, 4, 8);  // width 32, h = 7
  REQUIRE(L.h == 7);
  for (std::uint32_t side = 0; side < 2; ++side) {
    SearchTree t(L, side);
    for (std::uint32_t depth = 0; depth <= L.h; ++depth) {
      std::int64_t prev_hi = -1;
      for (std::uint64_t i = 0; i < (std::uint64_t{1} << depth); ++i) {
        const auto iv = t.interval({depth, i});
        REQUIRE(iv.lo > prev_hi);
        prev_hi = iv.hi;
      }
    }
    for (std::uint64_t leaf = 0; leaf < L.leaf_count(); ++leaf) {
      const auto iv = t.leaf_interval(leaf);
      REQUIRE(iv.lo == static_cast<std::int64_t>((2 * leaf + side) * L.group_width));
      REQUIRE(iv.hi - iv.lo + 1 == static_cast<std::int64_t>(L.group_width));
    }
    // Paths below depth h keep the leaf interval and have one child.
    const Vertex v{L.h + 3, 5};
    REQUIRE(t.interval(v) == t.leaf_interval(5));
    REQUIRE(t.children(v).size() == 1);
    REQUIRE(t.parent(v)->depth == L.h + 2);
    REQUIRE(t.is_leaf({L.height(), 5}));
  }
}

TEST_CASE("pointers start outside their interval and move outward", "[noisy_search]") {
  const auto L = pad_layout(3000, 6, 8);
  Fixture f(3000, 1234, 0.2, 9);
  std::map<std::pair<std::uint32_t, std::uint64_t>, std::int64_t> last;
  std::uint64_t probes = 0;
  bool monotone = true;
  SearchObserver obs;
  obs.on_probe = [&](std::uint32_t side, std::uint64_t cell, std::int64_t pos) {
    ++probes;
    SearchTree t(L, side);
    const auto iv = t.leaf_interval(cell / 2);
    auto key = std::make_pair(side, cell);
    auto it = last.find(key);
    if (it == last.end()) {
      const std::int64_t start = cell % 2 == 0 ? iv.lo - 6 - 1 : iv.hi + 6;
      if (pos != start) monotone = false;
    } else {
      const std::int64_t expect = cell % 2 == 0 ? it->second - 1 : it->second + 1;
      if (pos != expect) monotone = false;
    }
    last[key] = pos;
  };
  for (std::uint32_t side = 0; side < 2; ++side) {
    SearchTree t(L, side);
    (void)walk(t, f.x, f.seq, f.oracle, L.tau, &obs);
  }
  REQUIRE(probes > 0);
  REQUIRE(monotone);
}

TEST_CASE("error-free walk on the owning tree reaches the good leaf in h + eta steps", "[noisy_search]") {
  const std::uint64_t d = 5;
  for (std::uint32_t missing : {0u, 17u, 400u, 999u, 1500u, 2000u}) {
    Fixture f(2000, missing, 0.0, 1);
    const auto L = pad_layout(f.seq.size(), d, 8);
    const auto side = static_cast<std::uint32_t>((missing / L.group_width) % 2);
    SearchTree t(L, side);
    const auto out = walk(t, f.x, f.seq, f.oracle, L.tau);
    REQUIRE(out.success());
    REQUIRE(out.steps == L.h + L.eta);
    REQUIRE(t.interval(*out.leaf).contains(missing));
  }
}

TEST_CASE("error-free walk on the other tree never returns a bad leaf", "[noisy_search]") {
  const std::uint64_t d = 5;
  for (std::uint32_t missing : {3u, 100u, 700u, 1999u}) {
    Fixture f(2000, missing, 0.0, 1);
    const auto L = pad_layout(f.seq.size(), d, 8);
    const auto side = 1 - static_cast<std::uint32_t>((missing / L.group_width) % 2);
    SearchTree t(L, side);
    const auto out = walk(t, f.x, f.seq, f.oracle, L.tau);
    REQUIRE(out.steps <= L.tau);
    if (out.success()) {
      const auto iv = t.interval(*out.leaf);
      const auto cd = static_cast<std::int64_t>(L.group_width);
      REQUIRE(static_cast<std::int64_t>(missing) >= iv.lo - cd);
      REQUIRE(static_cast<std::int64_t>(missing) <= iv.hi + cd);
    }
  }
}

TEST_CASE("error-free tests: good vertices succeed, bad vertices fail", "[noisy_search]") {
  Fixture f(4000, 2222, 0.0, 1);
  const auto L = pad_layout(f.seq.size(), 4, 8);
  const auto cd = static_cast<std::int64_t>(L.group_width);
  const std::int64_t istar = 2222;
  for (std::uint32_t side = 0; side < 2; ++side) {
    for (std::uint32_t depth = 1; depth <= L.h; ++depth) {
      for (std::uint64_t i = 0; i < (std::uint64_t{1} << depth); ++i) {
        SearchTree t(L, side);  // fresh pointers
        const Vertex v{depth, i};
        const auto iv = t.interval(v);
        const bool ok = test(f.x, t, v, f.seq, f.oracle);
        if (iv.contains(istar)) REQUIRE(ok);
        if (istar < iv.lo - cd || istar > iv.hi + cd) REQUIRE_FALSE(ok);
      }
    }
  }
}

TEST_CASE("walk step budget is enforced", "[noisy_search]") {
  Fixture f(3000, 1500, 0.3, 4);
  const auto L = pad_layout(f.seq.size(), 3, 8, 1);
  for (std::uint32_t side = 0; side < 2; ++side) {
    SearchTree t(L, side);
    std::uint64_t seen = 0;
    SearchObserver obs;
    obs.on_step = [&](std::uint32_t, const Vertex&, const Vertex&) { ++seen; };
    const auto out = walk(t, f.x, f.seq, f.oracle, 7, &obs);
    REQUIRE(out.steps <= 7);
    REQUIRE(seen == out.steps);
  }
}

TEST_CASE("error-free rank estimates are within 2cd", "[noisy_search]") {
  const auto k = AlgoConstants::practical();
  for (std::uint32_t missing : {0u, 1u, 250u, 2047u, 3000u, 4095u, 4096u}) {
    Fixture f(4096, missing, 0.0, 1);
    const auto est = approximate_rank(f.seq, 12, f.x, f.oracle, k);
    REQUIRE(est.winner >= 0);
    REQUIRE(distance(est.position, missing) <= 2 * est.layout.group_width);
    REQUIRE(est.position <= f.seq.size());
  }
}

TEST_CASE("smallest element is placed near the front", "[noisy_search]") {
  Fixture f(29999, 0, 0.0, 1);
  const auto est = approximate_rank(f.seq, 15, f.x, f.oracle, AlgoConstants::paper());
  REQUIRE(est.position <= 2 * est.layout.group_width);
}

TEST_CASE("noisy estimates within 2cd at practical constants", "[noisy_search]") {
  const auto k = AlgoConstants::practical();
  int far = 0;
  for (std::uint32_t t = 0; t < 200; ++t) {
    const std::uint32_t missing = (t * 7919u) % 8193u;
    Fixture f(8192, missing, 1.0 / 32, 100 + t);
    const auto est = approximate_rank(f.seq, 13, f.x, f.oracle, k);
    far += distance(est.position, missing) > 2 * est.layout.group_width;
  }
  REQUIRE(far <= 2);
}

TEST_CASE("one call compares the query with each element at most once", "[noisy_search]") {
  const auto k = AlgoConstants::paper();
  for (std::uint32_t t = 0; t < 20; ++t) {
    Fixture f(29999, (t * 1543u) % 30000u, 1.0 / 32, 50 + t);
    f.oracle.track_pairs(true);
    (void)approximate_rank(f.seq, 15, f.x, f.oracle, k);
    REQUIRE(f.oracle.max_pair_count() <= 1);
    REQUIRE(f.oracle.tracked_total() == f.oracle.comparisons());
  }
}

TEST_CASE("majority tests probe each pointer k times", "[noisy_search]") {
  auto k = AlgoConstants::practical();
  k.majority = 3;
  Fixture f(5000, 2500, 0.0, 1);
  const auto est = approximate_rank(f.seq, 12, f.x, f.oracle, k);
  REQUIRE(est.layout.majority == 3);
  REQUIRE(distance(est.position, 2500) <= 2 * est.layout.group_width);
}

TEST_CASE("query already in the sequence is rejected", "[noisy_search]") {
  Fixture f(100, 50, 0.0, 1);
  REQUIRE_THROWS_AS(approximate_rank(f.seq, 3, f.seq[10], f.oracle), usage_error);
  const auto empty = approximate_rank(Sequence{}, 3, f.x, f.oracle);
  REQUIRE(empty.position == 0);
}
