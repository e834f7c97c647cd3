#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>

namespace c4proc {

using Vertex = std::uint32_t;
using PairIndex = std::uint32_t;

/// Largest n for which every triangular pair index fits in a PairIndex.
inline constexpr std::uint32_t kMaxVertexCount = 92681;

/// Unordered vertex pair stored in canonical order (u < v).
struct Pair {
  Vertex u = 0;
  Vertex v = 0;

  constexpr Pair() = default;
  constexpr Pair(Vertex a, Vertex b) : u(a < b ? a : b), v(a < b ? b : a) {
    if (a == b) throw std::invalid_argument("Pair: loops are not pairs");
  }

  /// Position in the dense triangular layout: v(v-1)/2 + u.
  [[nodiscard]] constexpr PairIndex index() const {
    return static_cast<PairIndex>(static_cast<std::uint64_t>(v) * (v - 1) / 2 + u);
  }

  [[nodiscard]] static Pair from_index(PairIndex idx) {
    // Largest v with v(v-1)/2 <= idx.
    auto v = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(idx))) / 2.0);
    while (v * (v - 1) / 2 > idx) --v;
    while ((v + 1) * v / 2 <= idx) ++v;
    const auto u = idx - v * (v - 1) / 2;
    Pair p;
    p.u = static_cast<Vertex>(u);
    p.v = static_cast<Vertex>(v);
    return p;
  }

  [[nodiscard]] constexpr bool contains(Vertex w) const { return u == w || v == w; }

  /// The endpoint that is not `w`; `w` must be an endpoint.
  [[nodiscard]] constexpr Vertex other(Vertex w) const { return w == u ? v : u; }

  friend constexpr auto operator<=>(const Pair&, const Pair&) = default;
};

/// Triangular index of {a, b} without validation; a != b is the caller's job.
[[nodiscard]] constexpr PairIndex pair_index(Vertex a, Vertex b) {
  if (a > b) std::swap(a, b);
  return static_cast<PairIndex>(static_cast<std::uint64_t>(b) * (b - 1) / 2 + a);
}

[[nodiscard]] constexpr std::uint64_t pair_count(std::uint64_t n) { return n * (n - 1) / 2; }

enum class PairStatus : std::uint8_t { Open = 0, Edge = 1, Closed = 2 };

[[nodiscard]] constexpr const char* to_string(PairStatus s) {
  switch (s) {
    case PairStatus::Open: return "open";
    case PairStatus::Edge: return "edge";
    case PairStatus::Closed: return "closed";
  }
  return "?";
}

}  // namespace c4proc

template <>
struct std::hash<c4proc::Pair> {
  std::size_t operator()(const c4proc::Pair& p) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(p.u) << 32) | p.v);
  }
};
