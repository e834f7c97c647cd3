#include "c4proc/oracle.hpp"

#include <stdexcept>

namespace c4proc::oracle {

AdjacencyMatrix::AdjacencyMatrix(const Graph& g)
    : n_(g.vertex_count()), bits_(std::size_t{g.vertex_count()} * g.vertex_count(), 0) {
  for (Vertex a = 0; a < n_; ++a)
    for (Vertex b : g.neighbors(a)) bits_[std::size_t{a} * n_ + b] = 1;
}

bool has_three_path(const Graph& g, const AdjacencyMatrix& adj, Vertex u, Vertex v) {
  for (Vertex a : g.neighbors(u)) {
    if (a == v) continue;
    for (Vertex b : g.neighbors(a)) {
      if (b == u || b == v) continue;
      if (adj(b, v)) return true;
    }
  }
  return false;
}

std::vector<PairStatus> recompute_statuses(const Graph& g) {
  const std::uint32_t n = g.vertex_count();
  const AdjacencyMatrix adj(g);
  std::vector<PairStatus> out(pair_count(n), PairStatus::Open);
  for (Vertex v = 1; v < n; ++v) {
    for (Vertex u = 0; u < v; ++u) {
      const PairIndex idx = pair_index(u, v);
      if (adj(u, v))
        out[idx] = PairStatus::Edge;
      else if (has_three_path(g, adj, u, v))
        out[idx] = PairStatus::Closed;
    }
  }
  return out;
}

std::uint64_t c4_count(const Graph& g) {
  const std::uint32_t n = g.vertex_count();
  std::vector<std::uint32_t> codeg(n, 0);
  std::vector<Vertex> touched;
  std::uint64_t twice = 0;
  for (Vertex a = 0; a < n; ++a) {
    touched.clear();
    for (Vertex w : g.neighbors(a)) {
      for (Vertex b : g.neighbors(w)) {
        if (b <= a) continue;
        if (codeg[b]++ == 0) touched.push_back(b);
      }
    }
    for (Vertex b : touched) {
      const std::uint64_t c = codeg[b];
      twice += c * (c - 1) / 2;
      codeg[b] = 0;
    }
  }
  return twice / 2;
}

OracleReport compare(const ProcessState& state) {
  OracleReport rep;
  rep.step = state.step_count();
  const auto expected = recompute_statuses(state.graph());
  for (PairIndex idx = 0; idx < expected.size(); ++idx) {
    const Pair p = Pair::from_index(idx);
    const PairStatus engine = state.status(p);
    if (expected[idx] == PairStatus::Open) ++rep.q_oracle;
    if (engine != expected[idx]) rep.status_mismatches.push_back({p, engine, expected[idx]});
  }
  rep.c4_count = c4_count(state.graph());
  rep.q_engine = state.open_count();
  return rep;
}

std::vector<OracleReport> lockstep_check(std::uint32_t n, std::uint64_t seed, std::uint64_t max_steps,
                                         const LockstepOptions& options) {
  if (n > options.ceiling) throw std::invalid_argument("lockstep_check: n exceeds the oracle ceiling");
  ProcessState state(n, seed, options.process);
  std::vector<OracleReport> reports;
  reports.push_back(compare(state));
  while (!state.terminated() && state.step_count() < max_steps) {
    state.step();
    reports.push_back(compare(state));
  }
  return reports;
}

}  // namespace c4proc::oracle
