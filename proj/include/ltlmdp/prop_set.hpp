#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace ltlmdp {

/// Dense index types. All identifiers are numbered in declaration order.
using VertexIndex = std::size_t;
using ActionIndex = std::size_t;
using PropIndex = std::size_t;
using StateIndex = std::size_t;

inline constexpr std::size_t kMaxPropositions = 64;

/// A set of atomic propositions, stored as a bit mask over proposition
/// indices. Doubles as an automaton input symbol.
class PropSet {
 public:
  constexpr PropSet() = default;
  constexpr explicit PropSet(std::uint64_t bits) : bits_(bits) {}

  static PropSet of(std::initializer_list<PropIndex> props) {
    PropSet s;
    for (auto p : props) s.insert(p);
    return s;
  }

  constexpr std::uint64_t bits() const noexcept { return bits_; }
  constexpr bool contains(PropIndex p) const noexcept { return (bits_ >> p) & 1U; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr std::size_t size() const noexcept {
    return static_cast<std::size_t>(std::popcount(bits_));
  }
  constexpr void insert(PropIndex p) noexcept { bits_ |= (std::uint64_t{1} << p); }
  constexpr void erase(PropIndex p) noexcept { bits_ &= ~(std::uint64_t{1} << p); }
  constexpr bool subset_of(PropSet other) const noexcept { return (bits_ & ~other.bits_) == 0; }

  /// Members in increasing index order.
  std::vector<PropIndex> members() const {
    std::vector<PropIndex> out;
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
      out.push_back(static_cast<PropIndex>(std::countr_zero(b)));
    }
    return out;
  }

  constexpr PropSet operator|(PropSet o) const noexcept { return PropSet(bits_ | o.bits_); }
  constexpr PropSet operator&(PropSet o) const noexcept { return PropSet(bits_ & o.bits_); }

  constexpr bool operator==(const PropSet&) const = default;
  constexpr auto operator<=>(const PropSet&) const = default;

 private:
  std::uint64_t bits_ = 0;
};

}  // namespace ltlmdp

template <>
struct std::hash<ltlmdp::PropSet> {
  std::size_t operator()(ltlmdp::PropSet s) const noexcept {
    return std::hash<std::uint64_t>{}(s.bits());
  }
};
