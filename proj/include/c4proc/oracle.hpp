#pragma once

#include <cstdint>
#include <vector>

#include "c4proc/graph.hpp"
#include "c4proc/pair.hpp"
#include "c4proc/process.hpp"

// Slow, direct recomputation of everything the engine maintains incrementally.
// Nothing here reads engine internals other than through the public status
// and graph accessors.
namespace c4proc::oracle {

/// Default largest n accepted by lockstep_check.
inline constexpr std::uint32_t kDefaultCeiling = 300;

/// Dense adjacency matrix for O(1) edge tests.
class AdjacencyMatrix {
 public:
  explicit AdjacencyMatrix(const Graph& g);
  [[nodiscard]] bool operator()(Vertex a, Vertex b) const { return bits_[std::size_t{a} * n_ + b] != 0; }

 private:
  std::uint32_t n_;
  std::vector<std::uint8_t> bits_;
};

/// True iff some path u-a-b-v with four distinct vertices exists.
[[nodiscard]] bool has_three_path(const Graph& g, const AdjacencyMatrix& adj, Vertex u, Vertex v);

/// Status of every pair, indexed by Pair::index(): Edge for edges, Closed for
/// non-edges whose endpoints are joined by a 3-path, Open otherwise.
[[nodiscard]] std::vector<PairStatus> recompute_statuses(const Graph& g);

/// Number of 4-cycles: sum over vertex pairs of C(codegree, 2), halved.
[[nodiscard]] std::uint64_t c4_count(const Graph& g);

struct StatusMismatch {
  Pair pair;
  PairStatus engine;
  PairStatus oracle;
};

struct OracleReport {
  std::uint64_t step = 0;
  std::vector<StatusMismatch> status_mismatches;
  std::uint64_t c4_count = 0;
  std::uint64_t q_oracle = 0;
  std::uint64_t q_engine = 0;

  [[nodiscard]] bool clean() const { return status_mismatches.empty() && c4_count == 0 && q_oracle == q_engine; }
};

/// Compares the engine state against a full recomputation.
[[nodiscard]] OracleReport compare(const ProcessState& state);

struct LockstepOptions {
  std::uint32_t ceiling = kDefaultCeiling;
  ProcessOptions process;
};

/// Runs the engine from the empty graph for at most max_steps steps (or to
/// termination), comparing after step 0 and after every step.
[[nodiscard]] std::vector<OracleReport> lockstep_check(std::uint32_t n, std::uint64_t seed,
                                                       std::uint64_t max_steps,
                                                       const LockstepOptions& options = {});

}  // namespace c4proc::oracle
