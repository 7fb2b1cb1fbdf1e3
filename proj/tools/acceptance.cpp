// Runs every acceptance criterion and prints one line per criterion.
// Exit status 0 iff all pass.

#include <cstdio>
#include <cstdlib>

#include "noisort/lab/acceptance.hpp"

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  noisort::lab::AcceptanceSuite suite(seed);
  int failed = 0;
  suite.run("", [&](const noisort::lab::CriterionResult& r) {
    std::printf("[%s] %2d %-30s %s (%.1f s)\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(),
                r.seconds);
    std::fflush(stdout);
    failed += !r.passed;
  });
  std::printf("%d of %zu criteria failed\n", failed, noisort::lab::AcceptanceSuite::entries().size());
  return failed == 0 ? 0 : 1;
}
