#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "random.hpp"

namespace noisort {

/// Raised when a finite bit supply runs dry.
class coins_exhausted : public std::runtime_error {
public:
  coins_exhausted() : std::runtime_error("coin source exhausted") {}
};

/// Source of random bits for the partitioning step.
class BitSource {
public:
  virtual ~BitSource() = default;
  virtual bool next_bit() = 0;

  /// Uniform integer in [0, bound) by rejection over ceil(log2 bound) bits.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    std::uint32_t bits = 0;
    while ((std::uint64_t{1} << bits) < bound) ++bits;
    for (;;) {
      std::uint64_t v = 0;
      for (std::uint32_t b = 0; b < bits; ++b) v = (v << 1) | static_cast<std::uint64_t>(next_bit());
      if (v < bound) return v;
    }
  }
};

/// Pseudo-random bits from a seeded engine.
class RngBitSource final : public BitSource {
public:
  explicit RngBitSource(std::uint64_t seed) : eng_(splitmix64(seed ^ 0x5EEDB175ULL)) {}
  bool next_bit() override {
    if (left_ == 0) {
      word_ = eng_();
      left_ = 64;
    }
    const bool b = word_ & 1u;
    word_ >>= 1;
    --left_;
    ++consumed_;
    return b;
  }
  [[nodiscard]] std::uint64_t consumed() const noexcept { return consumed_; }

private:
  std::mt19937_64 eng_;
  std::uint64_t word_ = 0;
  int left_ = 0;
  std::uint64_t consumed_ = 0;
};

/// A finite, pre-computed list of bits, consumed front to back.
class BitPool final : public BitSource {
public:
  BitPool() = default;
  explicit BitPool(std::vector<bool> bits) : bits_(std::move(bits)) {}
  bool next_bit() override {
    if (cursor_ >= bits_.size()) throw coins_exhausted();
    return bits_[cursor_++];
  }
  [[nodiscard]] std::size_t size() const noexcept { return bits_.size(); }
  [[nodiscard]] std::size_t consumed() const noexcept { return cursor_; }
  [[nodiscard]] std::size_t remaining() const noexcept { return bits_.size() - cursor_; }
  [[nodiscard]] const std::vector<bool>& bits() const noexcept { return bits_; }

private:
  std::vector<bool> bits_;
  std::size_t cursor_ = 0;
};

/// Audit hook: counts calls and refuses to produce bits.
class FailingBitSource final : public BitSource {
public:
  bool next_bit() override {
    ++calls_;
    throw std::logic_error("external randomness requested");
  }
  [[nodiscard]] std::uint64_t calls() const noexcept { return calls_; }

private:
  std::uint64_t calls_ = 0;
};

}  // namespace noisort
