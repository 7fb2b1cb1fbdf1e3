#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "element.hpp"

namespace noisort {

enum class ConstantsMode { paper, practical };

inline std::uint32_t ceil_log2(std::uint64_t n) {
  std::uint32_t r = 0;
  while ((std::uint64_t{1} << r) < n) ++r;
  return r;
}

inline std::uint32_t floor_log2(std::uint64_t n) {
  std::uint32_t r = 0;
  while (n >>= 1) ++r;
  return r;
}

/// Every tunable constant of the algorithms in one record.
///
/// The paper preset uses the analysed values (group factor 1000, step budget
/// 240 log n, merge window gamma * c_p * log n with gamma = 202 * 2c). These
/// are only workable for single noisy-search calls; the full sorting pipeline
/// needs the practical preset at desk-sized inputs.
struct AlgoConstants {
  ConstantsMode mode = ConstantsMode::practical;
  double group_factor = 8;        // c: group width is c * d positions
  double step_factor = 24;        // tau = step_factor * floor(log2 n)
  double path_factor = 2;         // eta = path_factor * ceil(log2 n)
  double merge_blowup = 8;        // gamma, used by the paper preset only
  double windowsort_factor = 1;    // c_p: dislocation bound handed to merge is c_p * log2 n
  double window_factor = 16;      // practical WindowSort bound a * ceil(log2 n); 2c covers the merge radius 2cd
  std::uint32_t majority = 1;     // comparisons per pointer in a test (k-majority)
  double coin_factor = 1;         // coin block k = coin_factor * ceil(log2 n); 0 selects the bias formula

  static AlgoConstants paper() {
    AlgoConstants k;
    k.mode = ConstantsMode::paper;
    k.group_factor = 1000;
    k.step_factor = 240;
    k.path_factor = 2;
    k.merge_blowup = std::max(202.0 * 2.0 * k.group_factor, 909.0);
    k.windowsort_factor = 1;
    k.window_factor = 0;
    k.majority = 1;
    k.coin_factor = 0;
    return k;
  }

  static AlgoConstants practical() { return AlgoConstants{}; }

  /// Overrides one constant by name; names match the struct fields plus the
  /// short aliases c, tau, eta, gamma, c_p, a, k_majority, coin. Leaves the
  /// record unchanged when the result would be invalid.
  void set(std::string_view name, double value) {
    if (!(value >= 0) || !std::isfinite(value)) throw usage_error("constant " + std::string(name) + " must be finite and >= 0");
    AlgoConstants k = *this;
    if (name == "c" || name == "group_factor") k.group_factor = value;
    else if (name == "tau" || name == "step_factor") k.step_factor = value;
    else if (name == "eta" || name == "path_factor") k.path_factor = value;
    else if (name == "gamma" || name == "merge_blowup") k.merge_blowup = value;
    else if (name == "c_p" || name == "windowsort_factor") k.windowsort_factor = value;
    else if (name == "a" || name == "window_factor") k.window_factor = value;
    else if (name == "k_majority" || name == "majority") k.majority = static_cast<std::uint32_t>(value);
    else if (name == "coin" || name == "coin_factor") k.coin_factor = value;
    else throw usage_error("unknown constant: " + std::string(name));
    k.validate();
    *this = k;
  }

  void validate() const {
    if (group_factor < 1) throw usage_error("group factor must be >= 1");
    if (step_factor <= 0 || path_factor <= 0) throw usage_error("step and path factors must be positive");
    if (windowsort_factor <= 0) throw usage_error("c_p must be positive");
    if (majority < 1) throw usage_error("majority must be >= 1");
    if (mode == ConstantsMode::paper && merge_blowup <= 0) throw usage_error("gamma must be positive");
    if (mode == ConstantsMode::practical && window_factor <= 0) throw usage_error("window factor must be positive");
  }

  /// Dislocation bound assumed for the sequence a merge inserts into.
  [[nodiscard]] std::uint64_t merge_dislocation(std::uint64_t n) const {
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(windowsort_factor * ceil_log2(n))));
  }

  /// WindowSort bound used after every merge.
  [[nodiscard]] std::uint64_t merge_window(std::uint64_t n) const {
    const double lg = ceil_log2(n);
    const double w = mode == ConstantsMode::paper ? merge_blowup * windowsort_factor * lg : window_factor * lg;
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(std::min(w, 1e18))));
  }
};

}  // namespace noisort
