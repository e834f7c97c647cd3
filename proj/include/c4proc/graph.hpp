#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "c4proc/pair.hpp"

namespace c4proc {

/// Simple undirected graph on [0, n) as per-vertex neighbor lists.
/// Neighbor lists are in insertion order.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::uint32_t n) : adj_(n) {}
  Graph(std::uint32_t n, std::initializer_list<Pair> edges);

  [[nodiscard]] std::uint32_t vertex_count() const { return static_cast<std::uint32_t>(adj_.size()); }
  [[nodiscard]] std::uint64_t edge_count() const { return edges_; }

  [[nodiscard]] std::span<const Vertex> neighbors(Vertex v) const { return adj_[v]; }
  [[nodiscard]] std::uint32_t degree(Vertex v) const { return static_cast<std::uint32_t>(adj_[v].size()); }

  /// Linear in min degree; fine for sparse graphs and tests.
  [[nodiscard]] bool has_edge(Vertex a, Vertex b) const;

  /// Caller guarantees a != b and the edge is absent.
  void add_edge(Pair e);

  [[nodiscard]] std::vector<Pair> edges() const;

 private:
  std::vector<std::vector<Vertex>> adj_;
  std::uint64_t edges_ = 0;
};

/// Scratch membership mask over [0, n) that is cleared in time proportional to
/// what was set.
class VertexMarker {
 public:
  explicit VertexMarker(std::uint32_t n) : mark_(n, 0) {}

  void mark_all(std::span<const Vertex> vs) {
    for (Vertex v : vs) mark_[v] = 1;
  }
  void clear_all(std::span<const Vertex> vs) {
    for (Vertex v : vs) mark_[v] = 0;
  }
  void set(Vertex v) { mark_[v] = 1; }
  void reset(Vertex v) { mark_[v] = 0; }
  [[nodiscard]] bool operator[](Vertex v) const { return mark_[v] != 0; }

 private:
  std::vector<std::uint8_t> mark_;
};

}  // namespace c4proc
