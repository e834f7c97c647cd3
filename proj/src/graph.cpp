#include "c4proc/graph.hpp"

#include <algorithm>

namespace c4proc {

Graph::Graph(std::uint32_t n, std::initializer_list<Pair> edges) : adj_(n) {
  for (const Pair& e : edges) add_edge(e);
}

bool Graph::has_edge(Vertex a, Vertex b) const {
  const auto& small = adj_[a].size() <= adj_[b].size() ? adj_[a] : adj_[b];
  const Vertex target = adj_[a].size() <= adj_[b].size() ? b : a;
  return std::find(small.begin(), small.end(), target) != small.end();
}

void Graph::add_edge(Pair e) {
  adj_[e.u].push_back(e.v);
  adj_[e.v].push_back(e.u);
  ++edges_;
}

std::vector<Pair> Graph::edges() const {
  std::vector<Pair> out;
  out.reserve(edges_);
  for (Vertex u = 0; u < vertex_count(); ++u)
    for (Vertex w : adj_[u])
      if (u < w) out.emplace_back(u, w);
  return out;
}

}  // namespace c4proc
