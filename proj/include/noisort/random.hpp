#pragma once

// Portable seeded randomness. Everything here produces identical streams on
// every standard library, so a run is fully identified by its 64-bit seed.

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace noisort {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Keyed hash of an ordered pair of 64-bit words.
constexpr std::uint64_t keyed_hash(std::uint64_t key, std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(splitmix64(key ^ splitmix64(a)) ^ (b * 0xD6E8FEB86659FD93ULL));
}

/// Unbiased integer in [0, bound) (Lemire's multiply-shift with rejection).
template <class Engine>
std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
  static_assert(Engine::min() == 0 && Engine::max() == ~std::uint64_t{0});
  if (bound <= 1) return 0;
  unsigned __int128 m = static_cast<unsigned __int128>(eng()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(eng()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

template <class T, class Engine>
void fisher_yates(std::span<T> items, Engine& eng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(eng, i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Uniform double in [0, 1) with 53 random bits.
template <class Engine>
double uniform_unit(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace noisort
