#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace noisort {

/// Raised on contract violations by the caller (self-comparison, overlapping
/// merge inputs, malformed configuration, ...).
class usage_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class Sentinel : std::uint8_t { none = 0, minus_infinity = 1, plus_infinity = 2 };

/// An element of the universe. Real elements carry `Sentinel::none` and an id
/// in [0, n). Sentinels are noiseless padding; their ids only need to be
/// distinct among sentinels of the same sign.
struct Element {
  std::uint32_t id = 0;
  Sentinel sentinel = Sentinel::none;

  [[nodiscard]] constexpr bool is_real() const noexcept { return sentinel == Sentinel::none; }

  friend constexpr bool operator==(const Element&, const Element&) = default;
  friend constexpr auto operator<=>(const Element&, const Element&) = default;

  static constexpr Element real(std::uint32_t id) noexcept { return {id, Sentinel::none}; }
  static constexpr Element plus_inf(std::uint32_t id) noexcept { return {id, Sentinel::plus_infinity}; }
  static constexpr Element minus_inf(std::uint32_t id) noexcept { return {id, Sentinel::minus_infinity}; }
};

using Sequence = std::vector<Element>;

inline std::string to_string(const Element& e) {
  switch (e.sentinel) {
    case Sentinel::minus_infinity: return "-inf#" + std::to_string(e.id);
    case Sentinel::plus_infinity: return "+inf#" + std::to_string(e.id);
    default: return std::to_string(e.id);
  }
}

/// Sequence containing the real elements 0..n-1 in id order.
inline Sequence identity_sequence(std::uint32_t n) {
  Sequence s;
  s.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) s.push_back(Element::real(i));
  return s;
}

}  // namespace noisort
