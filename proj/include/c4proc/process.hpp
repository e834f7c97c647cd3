#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "c4proc/graph.hpp"
#include "c4proc/pair.hpp"
#include "c4proc/rng.hpp"

namespace c4proc {

/// Thrown by ProcessState::step once no open pair remains.
class ProcessTerminated : public std::runtime_error {
 public:
  ProcessTerminated() : std::runtime_error("process terminated: no open pairs remain") {}
};

/// Dense 2-bit status per unordered pair, indexed by Pair::index().
/// Memory is n(n-1)/8 bytes (n = 8192 uses 8 MiB).
class PairStatusArray {
 public:
  PairStatusArray() = default;
  explicit PairStatusArray(std::uint32_t n) : words_((pair_count(n) + 31) / 32, 0) {}

  [[nodiscard]] PairStatus get(PairIndex i) const {
    return static_cast<PairStatus>((words_[i >> 5] >> ((i & 31U) * 2)) & 3U);
  }
  void set(PairIndex i, PairStatus s) {
    auto& w = words_[i >> 5];
    const unsigned shift = (i & 31U) * 2;
    w = (w & ~(std::uint64_t{3} << shift)) | (std::uint64_t{static_cast<std::uint8_t>(s)} << shift);
  }

 private:
  std::vector<std::uint64_t> words_;
};

/// The open pairs as a flat array plus inverse positions: O(1) uniform
/// sampling and O(1) swap-with-last removal.
class OpenPairSet {
 public:
  static constexpr std::uint32_t kAbsent = 0xFFFFFFFFU;

  OpenPairSet() = default;
  /// Starts with every pair open, in index order.
  explicit OpenPairSet(std::uint32_t n);

  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] bool empty() const { return items_.empty(); }
  [[nodiscard]] bool contains(PairIndex i) const { return position_[i] != kAbsent; }
  [[nodiscard]] PairIndex at(std::size_t slot) const { return items_[slot]; }
  [[nodiscard]] std::span<const PairIndex> items() const { return items_; }

  void remove(PairIndex i);

 private:
  std::vector<PairIndex> items_;
  std::vector<std::uint32_t> position_;
};

/// Fault injection for harness tests: MiddleEdgeOnly forgets 3-paths that use
/// the new edge as an end edge.
enum class ClosureRule : std::uint8_t { Exact, MiddleEdgeOnly };

struct ProcessOptions {
  /// Ceiling on n; the pair status array and open set use O(n^2) memory.
  std::uint32_t max_vertices = 65536;
  ClosureRule closure_rule = ClosureRule::Exact;
};

struct StepRecord {
  std::uint64_t step = 0;  // i+1, the index of the inserted edge
  Pair edge;
  std::uint64_t q_before = 0;
  std::uint64_t newly_closed = 0;
  double t = 0.0;  // (i+1) / n^{4/3}
  std::vector<Pair> closed;  // the pairs moved Open -> Closed, ascending

  [[nodiscard]] std::uint64_t q_after() const { return q_before - 1 - newly_closed; }
};

/// Full state of the C4-free process: G(i) together with the partition of all
/// pairs into edges, open pairs and closed pairs. Single-threaded; copies are
/// independent.
class ProcessState {
 public:
  ProcessState(std::uint32_t n, std::uint64_t seed, ProcessOptions options = {});

  [[nodiscard]] std::uint32_t n() const { return graph_.vertex_count(); }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t step_count() const { return edge_log_.size(); }
  [[nodiscard]] double time() const;  // t(i) = i / n^{4/3}
  [[nodiscard]] const Graph& graph() const { return graph_; }
  [[nodiscard]] std::uint32_t degree(Vertex v) const { return graph_.degree(v); }

  [[nodiscard]] PairStatus status(Pair p) const { return status_.get(p.index()); }
  [[nodiscard]] PairStatus status(Vertex a, Vertex b) const { return status_.get(Pair(a, b).index()); }
  [[nodiscard]] bool is_open(Vertex a, Vertex b) const { return status(a, b) == PairStatus::Open; }

  [[nodiscard]] std::uint64_t open_count() const { return open_.size(); }
  [[nodiscard]] std::uint64_t closed_count() const { return closed_; }
  [[nodiscard]] const OpenPairSet& open_pairs() const { return open_; }
  [[nodiscard]] bool terminated() const { return open_.empty(); }
  [[nodiscard]] std::span<const Pair> edge_log() const { return edge_log_; }

  /// Open pairs uv != xy that G(i) + xy joins by a path of length 3 through xy.
  /// Requires xy open; xy is not inserted. Result is ascending and duplicate-free.
  [[nodiscard]] std::vector<Pair> newly_closed_by(Pair xy) const;

  /// Inserts the open pair xy as edge e_{i+1} and closes every pair it closes.
  StepRecord insert(Pair xy);

  /// Samples e_{i+1} uniformly from the open pairs and inserts it.
  /// Throws ProcessTerminated when Q(i) = 0.
  StepRecord step();

  /// |C_uv(i)|: open pairs wz such that G(i) + uv + wz has a C4 through both.
  /// Requires uv not an edge.
  [[nodiscard]] std::uint64_t c_uv_size(Pair uv) const;

 private:
  template <typename Sink>
  void enumerate_closures(Pair xy, Sink&& sink) const;

  Graph graph_;
  PairStatusArray status_;
  OpenPairSet open_;
  std::uint64_t closed_ = 0;
  std::uint64_t seed_;
  Engine rng_;
  ProcessOptions options_;
  std::vector<Pair> edge_log_;
  std::vector<PairIndex> scratch_;
};

/// Builds the empty-graph state; n < 4 is rejected.
[[nodiscard]] ProcessState new_process(std::uint32_t n, std::uint64_t seed, ProcessOptions options = {});

/// Callbacks invoked while a process runs. `checkpoints` are step indices in
/// ascending order; on_checkpoint fires when the state reaches each of them
/// (step 0 included) and on_termination fires once Q = 0.
struct ObservationPlan {
  std::vector<std::uint64_t> checkpoints;
  std::function<void(const ProcessState&)> on_checkpoint;
  std::function<void(const ProcessState&, const StepRecord&)> on_step;
  std::function<void(const ProcessState&)> on_termination;
};

/// Steps until no open pair remains and returns M, the final edge count.
std::uint64_t run_until_terminated(ProcessState& state, const ObservationPlan& plan = {});

// ---------------------------------------------------------------------------
// Edge log: "i\tu\tv\tq_before\tnewly_closed\n" per step, optionally gzipped.

class EdgeLogWriter {
 public:
  /// Gzip is used when `path` ends in ".gz". Throws std::runtime_error on I/O failure.
  explicit EdgeLogWriter(const std::string& path);
  ~EdgeLogWriter();
  EdgeLogWriter(const EdgeLogWriter&) = delete;
  EdgeLogWriter& operator=(const EdgeLogWriter&) = delete;

  void write(const StepRecord& r);
  void close();

 private:
  void* gz_ = nullptr;
  std::FILE* file_ = nullptr;
  std::string path_;
};

struct EdgeLogLine {
  std::uint64_t step;
  Pair edge;
  std::uint64_t q_before;
  std::uint64_t newly_closed;
  friend bool operator==(const EdgeLogLine&, const EdgeLogLine&) = default;
};

/// Reads a plain or gzipped edge log. Throws std::runtime_error on malformed input.
[[nodiscard]] std::vector<EdgeLogLine> read_edge_log(const std::string& path);

}  // namespace c4proc
