#pragma once

// The acceptance battery: deterministic invariants plus Monte Carlo checks at
// fixed scales. Every criterion reports one pass/fail line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "../derand.hpp"
#include "../noisy_search.hpp"
#include "../referee.hpp"
#include "../rifflesort.hpp"
#include "../subset.hpp"
#include "../windowsort.hpp"
#include "stats.hpp"
#include "urn.hpp"

namespace noisort::lab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

struct SortRun {
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t max_disl = 0;
  std::uint64_t total_disl = 0;
  std::uint64_t comparisons = 0;
  std::uint64_t audit_calls = 0;  // derandomized runs only
  bool fell_back = false;
  bool permutation = true;
};

namespace detail {

inline std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

inline SortRun sort_run(std::uint64_t n, std::uint64_t seed, double p, bool derand, const AlgoConstants& k) {
  auto world = make_universe(static_cast<std::uint32_t>(n), seed, p);
  Referee ref(world.universe);
  const auto input = identity_sequence(static_cast<std::uint32_t>(n));
  SortRun r;
  r.n = n;
  r.seed = seed;
  Sequence out;
  if (derand) {
    FailingBitSource audit;
    DerandStats st;
    try {
      out = derandomized_riffle_sort(input, world.oracle, k, &audit, &st);
    } catch (const std::logic_error&) {
      out = input;  // only reachable if the audit source was read
    }
    r.audit_calls = audit.calls();
    r.fell_back = st.fell_back;
  } else {
    out = riffle_sort(input, world.oracle, k, seed);
  }
  r.permutation = Referee::is_permutation_of(out, input);
  const auto rep = ref.dislocation_report(out);
  r.max_disl = rep.max_dislocation;
  r.total_disl = rep.total_dislocation;
  r.comparisons = world.oracle.comparisons();
  return r;
}

}  // namespace detail

/// Runs the criteria; expensive sort batches are cached so criteria sharing
/// a configuration (1 and 11, 6 7 and 11) run it once.
class AcceptanceSuite {
public:
  explicit AcceptanceSuite(std::uint64_t base_seed = 1) : seed_(base_seed) {}

  struct Entry {
    int id;
    std::string name;
    std::vector<std::string> algorithms;  // CLI --algo filter tags
    std::function<CriterionResult(AcceptanceSuite&)> run;
  };

  static const std::vector<Entry>& entries() {
    static const std::vector<Entry> list = {
        {1, "error-free exactness", {"rifflesort", "rifflesort-derand"}, &AcceptanceSuite::exactness},
        {2, "windowsort move bound", {"windowsort"}, &AcceptanceSuite::move_bound},
        {3, "search comparison uniqueness", {"noisy-search"}, &AcceptanceSuite::uniqueness},
        {4, "noisy-search accuracy", {"noisy-search"}, &AcceptanceSuite::search_accuracy},
        {5, "test success probabilities", {"noisy-search"}, &AcceptanceSuite::test_probabilities},
        {6, "dislocation scaling", {"rifflesort"}, &AcceptanceSuite::dislocation_scaling},
        {7, "comparison-count scaling", {"rifflesort"}, &AcceptanceSuite::comparison_scaling},
        {8, "xor coin bias", {"coins", "rifflesort-derand"}, &AcceptanceSuite::coin_bias},
        {9, "unbiased subset", {"subset"}, &AcceptanceSuite::subset_uniformity},
        {10, "urn sparse windows", {"urn"}, &AcceptanceSuite::urn_windows},
        {11, "derandomization purity", {"rifflesort-derand"}, &AcceptanceSuite::purity},
    };
    return list;
  }

  /// Criteria tagged with `algorithm`, or all of them when it is empty.
  std::vector<CriterionResult> run(const std::string& algorithm = "",
                                   const std::function<void(const CriterionResult&)>& on_result = {}) {
    std::vector<CriterionResult> out;
    for (const auto& e : entries()) {
      if (!algorithm.empty() && std::find(e.algorithms.begin(), e.algorithms.end(), algorithm) == e.algorithms.end())
        continue;
      const auto t0 = std::chrono::steady_clock::now();
      auto r = e.run(*this);
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      r.id = e.id;
      r.name = e.name;
      if (on_result) on_result(r);
      out.push_back(std::move(r));
    }
    return out;
  }

  CriterionResult run_one(int id) {
    for (const auto& e : entries()) {
      if (e.id != id) continue;
      auto r = e.run(*this);
      r.id = e.id;
      r.name = e.name;
      return r;
    }
    throw usage_error("no criterion " + std::to_string(id));
  }

  // 1. p = 0: both sorts return the sorted order, 20 seeds at each size.
  CriterionResult exactness() {
    CriterionResult r;
    const auto t0 = std::chrono::steady_clock::now();
    std::uint64_t bad = 0, runs = 0;
    for (bool derand : {false, true}) {
      for (auto n : exact_sizes()) {
        for (const auto& run : exact_runs(n, derand)) {
          ++runs;
          if (run.max_disl != 0 || !run.permutation) ++bad;
        }
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.passed = bad == 0 && secs < 120.0;
    r.detail = std::to_string(runs) + " runs, " + std::to_string(bad) + " not exactly sorted, " + detail::fmt(secs) + " s";
    return r;
  }

  // 2. Every window pair of 100 traced runs respects the move bound.
  CriterionResult move_bound() {
    CriterionResult r;
    const std::uint32_t n = 4096;
    std::uint64_t violations = 0, checks = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
      auto world = make_universe(n, seed_ + 2000 + t, 1.0 / 32);
      const auto trace = window_sort_trace(identity_sequence(n), n, world.oracle);
      std::vector<std::vector<std::uint32_t>> pos(trace.phases.size(), std::vector<std::uint32_t>(n));
      for (std::size_t ph = 0; ph < trace.phases.size(); ++ph)
        for (std::uint32_t i = 0; i < n; ++i) pos[ph][trace.phases[ph].second[i].id] = i;
      for (std::size_t a = 0; a < pos.size(); ++a) {
        for (std::size_t b = a + 1; b < pos.size(); ++b) {
          const auto wa = trace.phases[a].first, wb = trace.phases[b].first;
          const auto bound = 4 * (wa > wb ? wa - wb : wb - wa);
          for (std::uint32_t id = 0; id < n; ++id) {
            const auto pa = pos[a][id], pb = pos[b][id];
            ++checks;
            if ((pa > pb ? pa - pb : pb - pa) > bound) ++violations;
          }
        }
      }
    }
    r.passed = violations == 0;
    r.detail = std::to_string(checks) + " element/window-pair checks, " + std::to_string(violations) + " violations";
    return r;
  }

  // 3. Within one call no (query, sequence element) pair is compared twice.
  CriterionResult uniqueness() {
    CriterionResult r;
    const auto k = AlgoConstants::paper();
    std::uint32_t worst = 0;
    std::uint64_t calls = 0, repeated = 0;
    // Alternate between a one-leaf layout and a three-level tree.
    for (const auto& [n_raw, d] : {std::pair<std::uint32_t, std::uint64_t>{29999, 15}, {287999, 19}}) {
      SearchBench bench(n_raw, 500, seed_ + 3000 + n_raw, 1.0 / 32);
      bench.world.oracle.track_pairs(true);
      for (std::uint64_t t = 0; t < 500; ++t) {
        bench.world.oracle.reset_ledger();
        (void)noisort::detail::approximate_rank_unchecked(bench.seq, d, bench.query(t), bench.world.oracle, k, nullptr);
        const auto m = bench.world.oracle.max_pair_count();
        worst = std::max(worst, m);
        repeated += m > 1;
        ++calls;
      }
    }
    r.passed = worst <= 1;
    r.detail = std::to_string(calls) + " calls, " + std::to_string(repeated) + " with a repeated pair, worst count " +
               std::to_string(worst);
    return r;
  }

  // 4. Paper constants: at most one estimate off by more than 2cd; fast calls.
  CriterionResult search_accuracy() {
    CriterionResult r;
    const auto k = AlgoConstants::paper();
    const std::uint32_t n_raw = 29999;
    const std::uint64_t d = ceil_log2(n_raw);
    SearchBench bench(n_raw, 1000, seed_ + 4000, 1.0 / 32);
    std::uint64_t far = 0, timeouts = 0;
    std::vector<double> ms;
    std::uint64_t radius = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
      const auto x = bench.query(t);
      const auto t0 = std::chrono::steady_clock::now();
      const auto est = noisort::detail::approximate_rank_unchecked(bench.seq, d, x, bench.world.oracle, k, nullptr);
      ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
      radius = 2 * est.layout.group_width;
      const auto truth = bench.rank(x);
      const auto err = est.position > truth ? est.position - truth : truth - est.position;
      far += err > radius;
      timeouts += est.winner < 0;
    }
    const double med = quantile(ms, 0.5);
    r.passed = far <= 1 && med < 10.0;
    r.detail = "1000 calls (n=" + std::to_string(n_raw) + ", d=" + std::to_string(d) + "), " + std::to_string(far) +
               " beyond 2cd=" + std::to_string(radius) + ", " + std::to_string(timeouts) + " double timeouts, median " +
               detail::fmt(med) + " ms";
    return r;
  }

  // 5. Labeled tests on T*: good succeed w.p. >= 1-2p, bad w.p. <= p.
  CriterionResult test_probabilities() {
    CriterionResult r;
    const double p = 1.0 / 32;
    const auto k = AlgoConstants::paper();
    const std::uint32_t n_raw = 287999;
    const std::uint64_t d = 19;
    constexpr std::uint32_t kMaxLabelCalls = 20000;
    SearchBench bench(n_raw, kMaxLabelCalls, seed_ + 5000, p);
    std::uint64_t good = 0, good_ok = 0, bad = 0, bad_ok = 0;
    std::int64_t istar = 0, cd = 0;
    std::uint32_t tstar = 0;
    SearchObserver obs;
    obs.on_test = [&](std::uint32_t side, const Vertex&, const Interval& iv, bool ok) {
      if (side != tstar) return;
      if (iv.contains(istar)) {
        ++good;
        good_ok += ok;
      } else if (istar < iv.lo - cd || istar > iv.hi + cd) {
        ++bad;
        bad_ok += ok;
      }
    };
    for (std::uint64_t t = 0; t < kMaxLabelCalls && (good < 10000 || bad < 10000); ++t) {
      const auto x = bench.query(t);
      const auto layout = pad_layout(n_raw, d, k);
      istar = static_cast<std::int64_t>(bench.rank(x));
      cd = static_cast<std::int64_t>(layout.group_width);
      tstar = static_cast<std::uint32_t>((istar / cd) % 2);  // the tree owning the group of i*
      (void)noisort::detail::approximate_rank_unchecked(bench.seq, d, x, bench.world.oracle, k, &obs);
    }
    const double fg = good ? static_cast<double>(good_ok) / static_cast<double>(good) : 0.0;
    const double fb = bad ? static_cast<double>(bad_ok) / static_cast<double>(bad) : 1.0;
    const double lo = 1 - 2 * p - 3 * binomial_sigma(1 - 2 * p, static_cast<double>(good));
    const double hi = p + 3 * binomial_sigma(p, static_cast<double>(bad));
    r.passed = good >= 10000 && bad >= 10000 && fg >= lo && fb <= hi;
    r.detail = "good " + detail::fmt(fg) + " over " + std::to_string(good) + " (need >= " + detail::fmt(lo) + "), bad " +
               detail::fmt(fb) + " over " + std::to_string(bad) + " (need <= " + detail::fmt(hi) + ")";
    return r;
  }

  // 6. max_disl grows at most 2x from 2^10 to 2^14; total_disl / n stays flat.
  CriterionResult dislocation_scaling() {
    CriterionResult r;
    std::vector<double> maxes, per_n;
    std::ostringstream os;
    for (auto n : scaling_sizes()) {
      std::uint64_t mx = 0;
      double tot = 0;
      const auto& runs = scaling_runs(n, false);
      for (const auto& run : runs) {
        mx = std::max(mx, run.max_disl);
        tot += static_cast<double>(run.total_disl);
      }
      maxes.push_back(static_cast<double>(mx));
      per_n.push_back(tot / static_cast<double>(runs.size()) / static_cast<double>(n));
      os << "n=" << n << " max " << mx << " total/n " << detail::fmt(per_n.back()) << "; ";
    }
    const double ratio = maxes.front() > 0 ? maxes.back() / maxes.front() : (maxes.back() > 0 ? INFINITY : 1.0);
    const auto [mn, mxv] = std::minmax_element(per_n.begin(), per_n.end());
    const double spread = *mn > 0 ? *mxv / *mn : (*mxv > 0 ? INFINITY : 1.0);
    r.passed = ratio <= 2.0 && spread <= 2.0;
    os << "max ratio " << detail::fmt(ratio) << " (<= 2), total/n spread " << detail::fmt(spread) << " (<= 2)";
    r.detail = os.str();
    return r;
  }

  // 7. Mean comparisons grow like n log n between consecutive sizes.
  CriterionResult comparison_scaling() {
    CriterionResult r;
    std::vector<double> means;
    for (auto n : scaling_sizes()) {
      const auto& runs = scaling_runs(n, false);
      double s = 0;
      for (const auto& run : runs) s += static_cast<double>(run.comparisons);
      means.push_back(s / static_cast<double>(runs.size()));
    }
    std::ostringstream os;
    bool ok = true;
    const auto sizes = scaling_sizes();
    for (std::size_t i = 1; i < sizes.size(); ++i) {
      const double n = static_cast<double>(sizes[i - 1]);
      const double limit = 4.0 * (std::log2(4 * n) / std::log2(n)) * 1.15;
      const double ratio = means[i] / means[i - 1];
      ok = ok && ratio <= limit;
      os << sizes[i - 1] << "->" << sizes[i] << " ratio " << detail::fmt(ratio) << " (<= " << detail::fmt(limit) << "); ";
    }
    r.passed = ok;
    r.detail = os.str();
    return r;
  }

  // 8. Monte Carlo frequency of zero coins against the closed form.
  CriterionResult coin_bias() {
    CriterionResult r;
    const double p = 1.0 / 32;
    const std::uint32_t n = 1u << 14;
    const std::size_t reserved = 300;
    const std::uint64_t coins = 100000;
    std::ostringstream os;
    bool ok = true;
    for (std::uint32_t k : {1u, 8u, 43u}) {
      auto world = make_universe(n, seed_ + 8000 + k, p);
      Referee ref(world.universe);
      const auto sorted = ref.brute_force_sorted();
      const std::span<const Element> all(sorted);
      const auto bits = extract_coins(world.oracle, all.first(reserved), all.subspan(reserved), k, coins);
      double zeros = 0;
      for (bool b : bits) zeros += !b;
      const double f = zeros / static_cast<double>(bits.size());
      const double expect = 0.5 + xor_coin_bias(p, k);
      const double sigma = binomial_sigma(expect, static_cast<double>(bits.size()));
      const double z = (f - expect) / sigma;
      ok = ok && bits.size() == coins && std::abs(z) <= 3.0;
      os << "k=" << k << " freq " << detail::fmt(f, 5) << " vs " << detail::fmt(expect, 5) << " (z=" << detail::fmt(z, 3)
         << "); ";
    }
    r.passed = ok;
    r.detail = os.str();
    return r;
  }

  // 9. Uniformity of the subset cascade.
  CriterionResult subset_uniformity() {
    CriterionResult r;
    RngBitSource bits(seed_ + 9000);
    const auto four = identity_sequence(4);
    std::map<std::uint32_t, std::uint64_t> counts;
    for (int t = 0; t < 60000; ++t) {
      const auto split = unbiased_subset(four, bits);
      std::uint32_t mask = 0;
      for (const auto& e : split.chosen) mask |= 1u << e.id;
      ++counts[mask];
    }
    std::vector<std::uint64_t> obs;
    for (const auto& [m, c] : counts) obs.push_back(c);
    obs.resize(6, 0);
    const double stat = chi_square_uniform(obs);
    const double pv = chi_square_pvalue(stat, 5);

    const auto two = identity_sequence(2);
    std::uint64_t first = 0;
    for (int t = 0; t < 100000; ++t) first += unbiased_subset(two, bits).chosen.front().id == 0;
    const double f = static_cast<double>(first) / 100000.0;
    r.passed = counts.size() == 6 && pv > 0.001 && f >= 0.49 && f <= 0.51;
    r.detail = "N=2: " + std::to_string(counts.size()) + " outcomes, chi2 " + detail::fmt(stat) + ", p-value " +
               detail::fmt(pv) + "; N=1: freq " + detail::fmt(f, 5);
    return r;
  }

  // 10. No sparse window in 1000 draws of a 4096-ball urn.
  CriterionResult urn_windows() {
    CriterionResult r;
    const auto res = urn_simulation(4096, 108, 1000, seed_ + 10000);
    r.passed = res.violations == 0;
    r.detail = std::to_string(res.trials) + " trials, window " + std::to_string(res.window) + ", " +
               std::to_string(res.violations) + " violations";
    return r;
  }

  // 11. The derandomized sort never reads the external bit source.
  CriterionResult purity() {
    CriterionResult r;
    std::uint64_t runs = 0, calls = 0, fallbacks = 0;
    auto tally = [&](const std::vector<SortRun>& batch) {
      for (const auto& run : batch) {
        ++runs;
        calls += run.audit_calls;
        fallbacks += run.fell_back;
      }
    };
    for (auto n : exact_sizes()) tally(exact_runs(n, true));
    for (auto n : scaling_sizes()) tally(scaling_runs(n, true));
    r.passed = calls == 0;
    r.detail = std::to_string(runs) + " runs, " + std::to_string(calls) + " external bit requests, " +
               std::to_string(fallbacks) + " coin-pool fallbacks";
    return r;
  }

  static std::vector<std::uint64_t> exact_sizes() { return {256, 4096, 16384}; }
  static std::vector<std::uint64_t> scaling_sizes() { return {1u << 10, 1u << 12, 1u << 14}; }

  const std::vector<SortRun>& exact_runs(std::uint64_t n, bool derand) {
    return cached(exact_, n, derand, 20, 0.0, 1000);
  }
  const std::vector<SortRun>& scaling_runs(std::uint64_t n, bool derand) {
    return cached(scaling_, n, derand, 50, 1.0 / 32, 6000);
  }

private:
  /// Sorted sequence of a universe with a random set of ranks held back as
  /// query elements, so queries land anywhere in the sequence.
  struct SearchBench {
    World world;
    Sequence seq;
    std::vector<Element> queries;
    std::unordered_map<std::uint32_t, std::uint32_t> rank_in_seq;  // by query id

    SearchBench(std::uint32_t n_raw, std::uint32_t count, std::uint64_t seed, double p)
        : world(make_universe(n_raw + count, seed, p)) {
      Referee ref(world.universe);
      std::mt19937_64 eng(splitmix64(seed ^ 0xBE4C4ULL));
      std::vector<std::uint32_t> ranks(n_raw + count);
      std::iota(ranks.begin(), ranks.end(), 0u);
      fisher_yates(std::span<std::uint32_t>(ranks), eng);
      std::vector<char> is_query(ranks.size(), 0);
      for (std::uint32_t i = 0; i < count; ++i) is_query[ranks[i]] = 1;
      const auto sorted = ref.brute_force_sorted();
      std::uint32_t below = 0;
      for (std::uint32_t r = 0; r < sorted.size(); ++r) {
        if (is_query[r]) {
          rank_in_seq[sorted[r].id] = below;
        } else {
          seq.push_back(sorted[r]);
          ++below;
        }
      }
      for (std::uint32_t i = 0; i < count; ++i) queries.push_back(sorted[ranks[i]]);
    }

    [[nodiscard]] const Element& query(std::uint64_t t) const { return queries.at(t); }
    [[nodiscard]] std::uint64_t rank(const Element& x) const { return rank_in_seq.at(x.id); }
  };

  using Cache = std::map<std::pair<std::uint64_t, bool>, std::vector<SortRun>>;

  const std::vector<SortRun>& cached(Cache& cache, std::uint64_t n, bool derand, int trials, double p,
                                     std::uint64_t offset) {
    auto key = std::make_pair(n, derand);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<SortRun> runs;
    const auto k = AlgoConstants::practical();
    for (int t = 0; t < trials; ++t) runs.push_back(detail::sort_run(n, seed_ + offset + t, p, derand, k));
    return cache.emplace(key, std::move(runs)).first->second;
  }

  std::uint64_t seed_;
  Cache exact_;
  Cache scaling_;
};

}  // namespace noisort::lab
