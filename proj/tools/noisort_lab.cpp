// noisort-lab: batch experiments and the acceptance check.
//
//   noisort-lab --algo rifflesort --n 4096 --p 0.03125 --trials 20 --seed 7
//   noisort-lab --check [--algo noisy-search]
//
// Exit codes: 0 success, 2 usage error, 3 acceptance threshold violated.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noisort/lab/acceptance.hpp"
#include "noisort/lab/experiment.hpp"

namespace {

constexpr int kUsage = 2;
constexpr int kViolation = 3;

int run_check(const std::string& algo, std::uint64_t seed) {
  noisort::lab::AcceptanceSuite suite(seed);
  bool all = true;
  const auto results = suite.run(algo, [&](const noisort::lab::CriterionResult& r) {
    std::printf("[%s] %2d %-30s %s (%.1f s)\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(),
                r.seconds);
    std::fflush(stdout);
    all = all && r.passed;
  });
  if (results.empty()) {
    std::fprintf(stderr, "no criteria tagged for algorithm %s\n", algo.c_str());
    return kUsage;
  }
  return all ? 0 : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on sorting with persistent comparison errors"};
  std::string algo = "rifflesort";
  std::string mode = "practical";
  std::string format = "csv";
  std::string out_path;
  std::vector<std::string> overrides;
  noisort::lab::ExperimentConfig cfg;
  std::uint64_t d = 0, k = 0;
  bool check = false;
  bool quiet = false;

  auto* algo_opt = app.add_option("--algo", algo, "windowsort | rifflesort | rifflesort-derand | noisy-search | urn | coins | subset")
                       ->check(CLI::IsMember({"windowsort", "rifflesort", "rifflesort-derand", "noisy-search", "urn",
                                              "coins", "subset"}));
  app.add_option("--n", cfg.n, "input size (balls for urn, coins per trial for coins, pool size for subset)");
  app.add_option("--p", cfg.p, "comparison error probability in [0, 1/2)");
  app.add_option("--d", d, "dislocation bound (windowsort input shuffle, noisy-search)");
  app.add_option("--k", k, "urn threshold or coin block size");
  app.add_option("--trials", cfg.trials, "number of trials");
  app.add_option("--seed", cfg.seed, "base seed; trial t uses seed + t");
  app.add_option("--mode", mode, "constant preset")->check(CLI::IsMember({"paper", "practical"}));
  app.add_option("--set", overrides, "override a constant, name=value (repeatable)");
  app.add_option("--format", format, "record format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", out_path, "write records here instead of stdout");
  app.add_flag("--timing", cfg.timing, "fill the ms column with wall time");
  app.add_flag("--quiet", quiet, "no summary on stderr");
  app.add_flag("--check", check, "run the acceptance suite instead of an experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (check) return run_check(algo_opt->count() ? algo : "", cfg.seed);

    cfg.algorithm = noisort::lab::parse_algorithm(algo);
    cfg.constants = mode == "paper" ? noisort::AlgoConstants::paper() : noisort::AlgoConstants::practical();
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw noisort::usage_error("--set expects name=value, got " + kv);
      double v = 0;
      try {
        std::size_t used = 0;
        v = std::stod(kv.substr(eq + 1), &used);
        if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
      } catch (const std::logic_error&) {
        throw noisort::usage_error("--set value is not a number: " + kv);
      }
      cfg.constants.set(kv.substr(0, eq), v);
    }
    if (app.count("--d")) cfg.d = d;
    if (app.count("--k")) cfg.k = k;
    cfg.format = format == "json" ? noisort::lab::OutputFormat::json : noisort::lab::OutputFormat::csv;

    const auto res = noisort::lab::run_experiment(cfg);

    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) throw noisort::usage_error("cannot open " + out_path);
    }
    std::ostream& os = out_path.empty() ? std::cout : file;
    if (cfg.format == noisort::lab::OutputFormat::json)
      os << noisort::lab::to_json(res).dump(2) << '\n';
    else
      noisort::lab::write_csv(os, res);
    if (!quiet) noisort::lab::write_summary_text(std::cerr, res);
    if (cfg.algorithm == noisort::lab::Algorithm::urn && res.summary.extras.count("in_regime") &&
        res.summary.extras.at("in_regime") == 0)
      std::cerr << "warning: k outside 9 log2 N <= k <= N/16; the urn bound does not apply\n";
  } catch (const noisort::usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  }
  return 0;
}
