#pragma once

// Batch trial runner behind the lab CLI. Trial t of a run uses seed
// `seed + t`, so a whole table is reproducible from one number.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../derand.hpp"
#include "../noisy_search.hpp"
#include "../referee.hpp"
#include "../rifflesort.hpp"
#include "../subset.hpp"
#include "../windowsort.hpp"
#include "stats.hpp"
#include "urn.hpp"

namespace noisort::lab {

enum class Algorithm { windowsort, rifflesort, rifflesort_derand, noisy_search, urn, coins, subset };
enum class OutputFormat { csv, json };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::windowsort: return "windowsort";
    case Algorithm::rifflesort: return "rifflesort";
    case Algorithm::rifflesort_derand: return "rifflesort-derand";
    case Algorithm::noisy_search: return "noisy-search";
    case Algorithm::urn: return "urn";
    case Algorithm::coins: return "coins";
    case Algorithm::subset: return "subset";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  for (auto a : {Algorithm::windowsort, Algorithm::rifflesort, Algorithm::rifflesort_derand, Algorithm::noisy_search,
                 Algorithm::urn, Algorithm::coins, Algorithm::subset})
    if (s == algorithm_name(a)) return a;
  throw usage_error("unknown algorithm: " + s);
}

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::rifflesort;
  std::uint64_t n = 1024;
  double p = 1.0 / 32;
  std::optional<std::uint64_t> d;  // dislocation bound (windowsort input, noisy-search)
  std::optional<std::uint64_t> k;  // urn threshold / coin block size
  std::uint64_t trials = 1;
  std::uint64_t seed = 1;
  AlgoConstants constants = AlgoConstants::practical();
  OutputFormat format = OutputFormat::csv;
  bool timing = false;  // wall time is recorded only on request so output stays replayable

  void validate() const {
    if (trials < 1) throw usage_error("trials must be >= 1");
    if (!(p >= 0.0 && p < 0.5)) throw usage_error("p must lie in [0, 1/2)");
    if (n < 1) throw usage_error("n must be >= 1");
    if (n > (std::uint64_t{1} << 30)) throw usage_error("n too large");
    if (d && *d == 0) throw usage_error("d must be >= 1");
    if (k && *k == 0) throw usage_error("k must be >= 1");
    if ((algorithm == Algorithm::urn || algorithm == Algorithm::subset) && n % 2 != 0)
      throw usage_error(std::string(algorithm_name(algorithm)) + " needs an even n");
    if (algorithm == Algorithm::subset && n > 64) throw usage_error("subset experiments support n <= 64");
    constants.validate();
  }
};

struct TrialRecord {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  double p = 0;
  std::string algorithm;
  std::uint64_t max_disl = 0;
  std::uint64_t total_disl = 0;
  std::uint64_t comparisons = 0;
  double ms = 0;
  std::string extra;  // "key=value;key=value"
};

struct ColumnSummary {
  double mean = 0, max = 0, p50 = 0, p90 = 0, p99 = 0;
};

struct ExperimentSummary {
  std::uint64_t trials = 0;
  ColumnSummary max_disl, total_disl, comparisons;
  std::map<std::string, double> extras;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialRecord> records;
  ExperimentSummary summary;
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline ColumnSummary summarize(std::vector<double> xs) {
  ColumnSummary s;
  if (xs.empty()) return s;
  s.mean = mean(xs);
  s.max = *std::max_element(xs.begin(), xs.end());
  s.p50 = quantile(xs, 0.5);
  s.p90 = quantile(xs, 0.9);
  s.p99 = quantile(xs, 0.99);
  return s;
}

/// Sorted order with every block of d+1 consecutive elements shuffled, so
/// that no element ends up more than d positions from its rank.
template <class Engine>
Sequence locally_shuffled(const Referee& ref, std::uint64_t d, Engine& eng) {
  Sequence s = ref.brute_force_sorted();
  for (std::size_t start = 0; start < s.size(); start += d + 1) {
    const auto len = std::min<std::size_t>(d + 1, s.size() - start);
    fisher_yates(std::span<Element>(s.data() + start, len), eng);
  }
  return s;
}

struct TrialContext {
  const ExperimentConfig& cfg;
  std::uint64_t seed;
  std::map<std::string, double>& acc;  // per-run counters feeding the summary
  std::map<std::string, std::uint64_t>& subsets;
};

inline void run_windowsort(TrialRecord& rec, TrialContext& ctx) {
  auto world = make_universe(static_cast<std::uint32_t>(ctx.cfg.n), ctx.seed, ctx.cfg.p);
  Referee ref(world.universe);
  std::mt19937_64 eng(splitmix64(ctx.seed ^ 0xD15C0ULL));
  const auto d = ctx.cfg.d.value_or(ctx.cfg.n);
  Sequence input = d >= ctx.cfg.n ? identity_sequence(static_cast<std::uint32_t>(ctx.cfg.n)) : locally_shuffled(ref, d, eng);
  const auto in_rep = ref.dislocation_report(input);
  const auto out = window_sort(input, d, world.oracle);
  const auto rep = ref.dislocation_report(out);
  rec.max_disl = rep.max_dislocation;
  rec.total_disl = rep.total_dislocation;
  rec.comparisons = world.oracle.comparisons();
  rec.extra = "d=" + std::to_string(d) + ";input_max_disl=" + std::to_string(in_rep.max_dislocation);
}

inline void run_rifflesort(TrialRecord& rec, TrialContext& ctx, bool derand) {
  auto world = make_universe(static_cast<std::uint32_t>(ctx.cfg.n), ctx.seed, ctx.cfg.p);
  Referee ref(world.universe);
  const auto input = identity_sequence(static_cast<std::uint32_t>(ctx.cfg.n));
  Sequence out;
  if (derand) {
    FailingBitSource audit;
    DerandStats st;
    out = derandomized_riffle_sort(input, world.oracle, ctx.cfg.constants, &audit, &st);
    rec.extra = "block=" + std::to_string(st.block) + ";reserved=" + std::to_string(st.reserved) +
                ";coins=" + std::to_string(st.coins) + ";coins_used=" + std::to_string(st.coins_used) +
                ";fallback=" + std::to_string(st.fell_back ? 1 : 0) + ";external_calls=" + std::to_string(audit.calls());
    ctx.acc["fallbacks"] += st.fell_back ? 1 : 0;
    ctx.acc["external_calls"] += static_cast<double>(audit.calls());
  } else {
    RiffleStats st;
    out = riffle_sort(input, world.oracle, ctx.cfg.constants, ctx.seed, &st);
    rec.extra = "padded=" + std::to_string(st.padded_size) + ";stages=" + std::to_string(st.stage_sizes.size());
  }
  if (!Referee::is_permutation_of(out, input)) throw std::logic_error("sorting output is not a permutation of the input");
  const auto rep = ref.dislocation_report(out);
  rec.max_disl = rep.max_dislocation;
  rec.total_disl = rep.total_dislocation;
  rec.comparisons = world.oracle.comparisons();
  ctx.acc["unsorted_trials"] += rep.max_dislocation > 0 ? 1 : 0;
}

inline void run_noisy_search(TrialRecord& rec, TrialContext& ctx) {
  const auto n = static_cast<std::uint32_t>(ctx.cfg.n);
  auto world = make_universe(n + 1, ctx.seed, ctx.cfg.p);
  Referee ref(world.universe);
  std::mt19937_64 eng(splitmix64(ctx.seed ^ 0x5EA4C4ULL));
  const auto x = Element::real(static_cast<std::uint32_t>(uniform_below(eng, n + 1)));
  Sequence seq;
  seq.reserve(n);
  for (const auto& e : ref.brute_force_sorted())
    if (e != x) seq.push_back(e);
  const auto d = ctx.cfg.d.value_or(std::max<std::uint64_t>(1, ceil_log2(n)));
  const auto est = approximate_rank(seq, d, x, world.oracle, ctx.cfg.constants);
  const auto truth = world.universe->rank_of(x.id);
  const auto err = est.position > truth ? est.position - truth : truth - est.position;
  Sequence inserted = seq;
  inserted.insert(inserted.begin() + static_cast<std::ptrdiff_t>(est.position), x);
  const auto rep = ref.dislocation_report(inserted);
  rec.max_disl = rep.max_dislocation;
  rec.total_disl = rep.total_dislocation;
  rec.comparisons = world.oracle.comparisons();
  const bool failure = err > 2 * est.layout.group_width;
  rec.extra = "err=" + std::to_string(err) + ";winner=" + std::to_string(est.winner) +
              ";steps0=" + std::to_string(est.walks[0].steps) + ";steps1=" + std::to_string(est.walks[1].steps) +
              ";failure=" + std::to_string(failure ? 1 : 0);
  ctx.acc["failures"] += failure ? 1 : 0;
  ctx.acc["double_timeouts"] += est.winner < 0 ? 1 : 0;
  ctx.acc["sum_err"] += static_cast<double>(err);
  ctx.acc["radius"] = static_cast<double>(2 * est.layout.group_width);
}

inline void run_urn(TrialRecord& rec, TrialContext& ctx) {
  const auto k = ctx.cfg.k.value_or(static_cast<std::uint64_t>(std::ceil(9 * std::log2(static_cast<double>(ctx.cfg.n)))));
  const auto r = urn_simulation(ctx.cfg.n, k, 1, ctx.seed);
  rec.extra = "k=" + std::to_string(k) + ";window=" + std::to_string(r.window) +
              ";violation=" + std::to_string(r.violations) + ";in_regime=" + std::to_string(r.in_regime ? 1 : 0);
  ctx.acc["violations"] += static_cast<double>(r.violations);
  ctx.acc["in_regime"] = r.in_regime ? 1 : 0;
}

inline void run_coins(TrialRecord& rec, TrialContext& ctx) {
  const auto k = static_cast<std::uint32_t>(ctx.cfg.k.value_or(8));
  const auto coins = ctx.cfg.n;
  const auto side = static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(k) * static_cast<double>(coins)))) + 1;
  auto world = make_universe(2 * side, ctx.seed, ctx.cfg.p);
  Referee ref(world.universe);
  // Reserved = the truly smallest half, so each outcome errs with probability p.
  const auto sorted = ref.brute_force_sorted();
  const std::span<const Element> all(sorted);
  const auto bits = extract_coins(world.oracle, all.first(side), all.subspan(side), k, coins);
  std::uint64_t zeros = 0;
  for (bool b : bits) zeros += !b;
  rec.comparisons = world.oracle.comparisons();
  rec.extra = "k=" + std::to_string(k) + ";coins=" + std::to_string(bits.size()) + ";zeros=" + std::to_string(zeros);
  ctx.acc["zeros"] += static_cast<double>(zeros);
  ctx.acc["coins"] += static_cast<double>(bits.size());
  ctx.acc["expected_freq0"] = 0.5 + xor_coin_bias(ctx.cfg.p, k);
}

inline void run_subset(TrialRecord& rec, TrialContext& ctx) {
  const auto pool = identity_sequence(static_cast<std::uint32_t>(ctx.cfg.n));
  RngBitSource bits(ctx.seed);
  const auto split = unbiased_subset(pool, bits);
  std::string mask(pool.size(), '0');
  for (const auto& e : split.chosen) mask[e.id] = '1';
  rec.extra = "subset=" + mask + ";bits=" + std::to_string(bits.consumed());
  ++ctx.subsets[mask];
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.config = cfg;
  std::map<std::string, double> acc;
  std::map<std::string, std::uint64_t> subsets;
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    TrialRecord rec;
    rec.trial = t;
    rec.seed = cfg.seed + t;
    rec.n = cfg.n;
    rec.p = cfg.p;
    rec.algorithm = algorithm_name(cfg.algorithm);
    detail::TrialContext ctx{cfg, rec.seed, acc, subsets};
    const auto t0 = std::chrono::steady_clock::now();
    switch (cfg.algorithm) {
      case Algorithm::windowsort: detail::run_windowsort(rec, ctx); break;
      case Algorithm::rifflesort: detail::run_rifflesort(rec, ctx, false); break;
      case Algorithm::rifflesort_derand: detail::run_rifflesort(rec, ctx, true); break;
      case Algorithm::noisy_search: detail::run_noisy_search(rec, ctx); break;
      case Algorithm::urn: detail::run_urn(rec, ctx); break;
      case Algorithm::coins: detail::run_coins(rec, ctx); break;
      case Algorithm::subset: detail::run_subset(rec, ctx); break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    rec.ms = cfg.timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
    res.records.push_back(std::move(rec));
  }

  std::vector<double> mx, tot, cmp;
  for (const auto& r : res.records) {
    mx.push_back(static_cast<double>(r.max_disl));
    tot.push_back(static_cast<double>(r.total_disl));
    cmp.push_back(static_cast<double>(r.comparisons));
  }
  auto& s = res.summary;
  s.trials = cfg.trials;
  s.max_disl = detail::summarize(mx);
  s.total_disl = detail::summarize(tot);
  s.comparisons = detail::summarize(cmp);
  s.extras = acc;
  const double trials = static_cast<double>(cfg.trials);
  switch (cfg.algorithm) {
    case Algorithm::noisy_search:
      s.extras["mean_err"] = acc["sum_err"] / trials;
      s.extras.erase("sum_err");
      break;
    case Algorithm::urn: s.extras["frequency"] = acc["violations"] / trials; break;
    case Algorithm::coins: {
      const double f = acc["coins"] > 0 ? acc["zeros"] / acc["coins"] : 0.0;
      s.extras["freq0"] = f;
      const double sigma = binomial_sigma(acc["expected_freq0"], acc["coins"]);
      s.extras["z"] = sigma > 0 ? (f - acc["expected_freq0"]) / sigma : 0.0;
      break;
    }
    case Algorithm::subset: {
      // Chi-square over all C(n, n/2) outcomes when they are few enough to enumerate.
      double outcomes = 1;
      for (std::uint64_t i = 0; i < cfg.n / 2; ++i) outcomes = outcomes * static_cast<double>(cfg.n - i) / static_cast<double>(i + 1);
      s.extras["outcomes"] = outcomes;
      s.extras["observed_outcomes"] = static_cast<double>(subsets.size());
      if (outcomes <= 1e5 && outcomes >= 2) {
        std::vector<std::uint64_t> counts;
        for (const auto& [m, c] : subsets) counts.push_back(c);
        counts.resize(static_cast<std::size_t>(outcomes), 0);
        const double stat = chi_square_uniform(counts);
        s.extras["chi_square"] = stat;
        s.extras["p_value"] = chi_square_pvalue(stat, outcomes - 1);
      }
      break;
    }
    default: break;
  }
  return res;
}

inline constexpr const char* kCsvHeader = "trial,seed,n,p,algorithm,max_disl,total_disl,comparisons,ms,extra";

inline void write_csv(std::ostream& os, const ExperimentResult& res) {
  os << kCsvHeader << '\n';
  for (const auto& r : res.records) {
    os << r.trial << ',' << r.seed << ',' << r.n << ',' << detail::fmt_double(r.p) << ',' << r.algorithm << ','
       << r.max_disl << ',' << r.total_disl << ',' << r.comparisons << ',' << detail::fmt_double(r.ms) << ','
       << r.extra << '\n';
  }
}

inline nlohmann::ordered_json to_json(const ColumnSummary& c) {
  return {{"mean", c.mean}, {"max", c.max}, {"p50", c.p50}, {"p90", c.p90}, {"p99", c.p99}};
}

inline nlohmann::ordered_json to_json(const ExperimentResult& res) {
  nlohmann::ordered_json j;
  const auto& c = res.config;
  j["config"] = {{"algorithm", algorithm_name(c.algorithm)}, {"n", c.n},         {"p", c.p},
                 {"trials", c.trials},                       {"seed", c.seed},
                 {"mode", c.constants.mode == ConstantsMode::paper ? "paper" : "practical"}};
  if (c.d) j["config"]["d"] = *c.d;
  if (c.k) j["config"]["k"] = *c.k;
  auto& recs = j["records"] = nlohmann::ordered_json::array();
  for (const auto& r : res.records) {
    recs.push_back({{"trial", r.trial},
                    {"seed", r.seed},
                    {"n", r.n},
                    {"p", r.p},
                    {"algorithm", r.algorithm},
                    {"max_disl", r.max_disl},
                    {"total_disl", r.total_disl},
                    {"comparisons", r.comparisons},
                    {"ms", r.ms},
                    {"extra", r.extra}});
  }
  auto& s = j["summary"];
  s["trials"] = res.summary.trials;
  s["max_disl"] = to_json(res.summary.max_disl);
  s["total_disl"] = to_json(res.summary.total_disl);
  s["comparisons"] = to_json(res.summary.comparisons);
  for (const auto& [k, v] : res.summary.extras) s["extras"][k] = v;
  return j;
}

inline void write_summary_text(std::ostream& os, const ExperimentResult& res) {
  const auto& s = res.summary;
  os << "# " << algorithm_name(res.config.algorithm) << " n=" << res.config.n << " p=" << detail::fmt_double(res.config.p)
     << " trials=" << s.trials << '\n';
  auto line = [&](const char* name, const ColumnSummary& c) {
    os << "# " << name << ": mean=" << detail::fmt_double(c.mean) << " max=" << detail::fmt_double(c.max)
       << " p50=" << detail::fmt_double(c.p50) << " p90=" << detail::fmt_double(c.p90)
       << " p99=" << detail::fmt_double(c.p99) << '\n';
  };
  line("max_disl", s.max_disl);
  line("total_disl", s.total_disl);
  line("comparisons", s.comparisons);
  for (const auto& [k, v] : s.extras) os << "# " << k << "=" << detail::fmt_double(v) << '\n';
}

}  // namespace noisort::lab
