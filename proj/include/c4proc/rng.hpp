#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace c4proc {

// Stream discipline: every consumer of randomness owns a named stream derived
// from (seed, tag, index). The edge-selection stream of a run is ("edges", 0);
// k-set trackers use ("kset", j); checkpoint pair sampling uses ("pairs", 0)
// and the final structural pair sample ("structure", 0).
// Streams never share state, so adding an observer does not perturb the
// edge sequence of a run.

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

using Engine = std::mt19937_64;

[[nodiscard]] inline Engine make_stream(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
  const std::uint64_t a = splitmix64(seed ^ fnv1a(tag));
  const std::uint64_t b = splitmix64(a ^ splitmix64(index + 1));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Engine(seq);
}

/// Uniform integer in [0, bound) by Lemire's multiply-shift rejection, so the
/// draw sequence does not depend on the standard library's distribution code.
__extension__ using uint128 = unsigned __int128;

[[nodiscard]] inline std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  std::uint64_t x = eng();
  uint128 m = static_cast<uint128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = eng();
      m = static_cast<uint128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace c4proc
