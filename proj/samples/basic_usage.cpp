// Sort 4096 elements whose comparisons err persistently with probability
// 1/32, then report how far the result is from sorted.

#include <cstdio>

#include "noisort/noisort.hpp"

int main() {
  using namespace noisort;
  const std::uint32_t n = 4096;
  auto world = make_universe(n, /*seed=*/42, /*p=*/1.0 / 32);
  Referee referee(world.universe);
  const auto input = identity_sequence(n);
  const auto k = AlgoConstants::practical();

  const auto randomized = riffle_sort(input, world.oracle, k, /*seed=*/7);
  const auto r1 = referee.dislocation_report(randomized);
  std::printf("rifflesort:        max %llu  total %llu  comparisons %llu\n",
              static_cast<unsigned long long>(r1.max_dislocation),
              static_cast<unsigned long long>(r1.total_dislocation),
              static_cast<unsigned long long>(world.oracle.comparisons()));

  // Same universe, fresh oracle: no random bits are used at all.
  ComparisonOracle oracle(world.universe, 1.0 / 32, world.oracle.seed());
  const auto derandomized = derandomized_riffle_sort(input, oracle, k);
  const auto r2 = referee.dislocation_report(derandomized);
  std::printf("rifflesort-derand: max %llu  total %llu  comparisons %llu\n",
              static_cast<unsigned long long>(r2.max_dislocation),
              static_cast<unsigned long long>(r2.total_dislocation),
              static_cast<unsigned long long>(oracle.comparisons()));

  // Rank of a new element in the result.
  const auto sorted = referee.brute_force_sorted();
  Sequence without(sorted.begin() + 1, sorted.end());
  const auto est = approximate_rank(without, 12, sorted.front(), oracle, k);
  std::printf("smallest element estimated at position %llu (true 0)\n",
              static_cast<unsigned long long>(est.position));
}
