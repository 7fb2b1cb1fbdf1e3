#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "../constants.hpp"
#include "../element.hpp"
#include "../random.hpp"

namespace noisort::lab {

/// True iff some run of exactly `window` consecutive draws holds at most k
/// white balls. `window` is clipped to the sequence length.
inline bool has_sparse_window(std::span<const std::uint8_t> white, std::size_t window, std::uint64_t k) {
  if (white.empty() || window == 0) return false;
  window = std::min(window, white.size());
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < window; ++i) count += white[i];
  if (count <= k) return true;
  for (std::size_t i = window; i < white.size(); ++i) {
    count += white[i];
    count -= white[i - window];
    if (count <= k) return true;
  }
  return false;
}

/// N/2 white (1) and N/2 black (0) balls in uniformly random draw order.
template <class Engine>
std::vector<std::uint8_t> draw_urn(std::uint64_t balls, Engine& eng) {
  std::vector<std::uint8_t> order(balls, 0);
  for (std::uint64_t i = 0; i < balls / 2; ++i) order[i] = 1;
  fisher_yates(std::span<std::uint8_t>(order), eng);
  return order;
}

struct UrnResult {
  std::uint64_t trials = 0;
  std::uint64_t violations = 0;
  std::size_t window = 0;
  bool in_regime = true;  // 9 log2 N <= k <= N / 16
  [[nodiscard]] double frequency() const noexcept {
    return trials ? static_cast<double>(violations) / static_cast<double>(trials) : 0.0;
  }
};

/// Fraction of draw orders in which some window of min(100k, N) consecutive
/// balls contains k or fewer white balls.
inline UrnResult urn_simulation(std::uint64_t balls, std::uint64_t k, std::uint64_t trials, std::uint64_t seed) {
  if (balls == 0 || balls % 2 != 0) throw usage_error("urn_simulation: ball count must be positive and even");
  UrnResult r;
  r.trials = trials;
  r.window = static_cast<std::size_t>(std::min<std::uint64_t>(100 * k, balls));
  r.in_regime = 9.0 * std::log2(static_cast<double>(balls)) <= static_cast<double>(k) && 16 * k <= balls;
  std::mt19937_64 eng(splitmix64(seed ^ 0x0123456789ULL));
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto draws = draw_urn(balls, eng);
    if (has_sparse_window(draws, r.window, k)) ++r.violations;
  }
  return r;
}

}  // namespace noisort::lab
