#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "c4proc/analytics.hpp"
#include "c4proc/graph.hpp"
#include "c4proc/pair.hpp"
#include "c4proc/process.hpp"
#include "c4proc/rng.hpp"

namespace c4proc::obs {

inline constexpr const char* kSchema = "c4proc/v1";

// ---------------------------------------------------------------------------
// Counting primitives.

struct TripleCounts {
  std::uint64_t x = 0;  // open triples: uw, vw both open
  std::uint64_t y = 0;  // partial triples: one open, one an edge
  friend bool operator==(const TripleCounts&, const TripleCounts&) = default;
};

/// X_K = sum_{w not in K} C(o_w, 2) and Y_K = sum_{w not in K} o_w e_w, where
/// o_w and e_w count u in K with uw open, respectively an edge. O(n |K|).
/// K must hold at least 2 distinct vertices.
[[nodiscard]] TripleCounts xk_yk_counts(const ProcessState& state, std::span<const Vertex> K);

/// True iff some w in [n], inside K or not, has two neighbours in K.
[[nodiscard]] bool is_covered(const Graph& g, std::span<const Vertex> K);

/// Open pairs uw (u in K, w outside) lying in two or more partial triples of K.
[[nodiscard]] std::uint64_t partial_triple_uniqueness_violations(const ProcessState& state,
                                                                 std::span<const Vertex> K);

using ThreePath = std::array<Vertex, 4>;  // u, a, b, v

/// Reusable scratch for path enumeration on one graph.
class PathScanner {
 public:
  explicit PathScanner(const Graph& g) : g_(&g), marker_(g.vertex_count()) {}

  /// Every path u-a-b-v with four distinct vertices.
  [[nodiscard]] std::vector<ThreePath> paths(Vertex u, Vertex v);
  [[nodiscard]] std::uint64_t count(Vertex u, Vertex v);

 private:
  const Graph* g_;
  VertexMarker marker_;
};

[[nodiscard]] std::uint64_t three_path_count(const Graph& g, Vertex u, Vertex v);

struct DisjointnessViolation {
  Pair endpoints;
  ThreePath first;
  ThreePath second;
};

struct DisjointnessReport {
  std::uint64_t pairs_checked = 0;
  std::uint64_t paths_checked = 0;
  std::uint64_t max_paths = 0;  // largest number of 3-paths between one sampled pair
  std::vector<DisjointnessViolation> violations;
  [[nodiscard]] bool clean() const { return violations.empty(); }
};

/// Asserts that the 3-paths between each sampled pair are pairwise edge-disjoint.
[[nodiscard]] DisjointnessReport check_three_path_disjointness(const Graph& g, std::span<const Pair> pairs);

/// All n(n-1)/2 pairs, ascending.
[[nodiscard]] std::vector<Pair> all_pairs(std::uint32_t n);
/// `count` uniformly random pairs, with repetition.
[[nodiscard]] std::vector<Pair> random_pairs(std::uint32_t n, std::size_t count, Engine& rng);

/// The pair sample used for structural checks: exhaustive for n <= 200,
/// otherwise 10^4 random pairs.
[[nodiscard]] std::vector<Pair> structural_pair_sample(std::uint32_t n, Engine& rng);

[[nodiscard]] std::uint64_t triangle_count(const Graph& g);

/// Min-degree-first greedy: repeatedly takes a vertex of least remaining
/// degree and deletes its closed neighbourhood. Result is ascending.
[[nodiscard]] std::vector<Vertex> greedy_independent_set(const Graph& g);

/// Exact independence number by branching; n <= kExactIndependenceCeiling.
inline constexpr std::uint32_t kExactIndependenceCeiling = 40;
[[nodiscard]] std::uint32_t independence_number(const Graph& g);

// ---------------------------------------------------------------------------
// k-set trackers.

struct KSetSample {
  std::uint64_t step = 0;
  double t = 0.0;
  bool covered = false;
  TripleCounts counts;
  std::uint64_t uniqueness_violations = 0;
};

/// One sampled k-set K followed through a run. Coverage is detected on the
/// step that causes it; X_K and Y_K are recomputed at checkpoints.
class KSetTracker {
 public:
  KSetTracker(std::uint32_t n, std::vector<Vertex> K);

  [[nodiscard]] std::span<const Vertex> members() const { return K_; }
  [[nodiscard]] bool contains(Vertex v) const { return in_K_[v] != 0; }
  [[nodiscard]] bool covered() const { return cover_step_.has_value(); }
  [[nodiscard]] std::optional<std::uint64_t> cover_step() const { return cover_step_; }
  [[nodiscard]] const std::vector<KSetSample>& history() const { return history_; }

  /// Largest per-step loss of partial triples observed while uncovered.
  [[nodiscard]] std::uint64_t max_yk_decrease() const { return max_decrease_; }
  /// Steps where the loss exceeded 1 + newly_closed (never, on a correct engine).
  [[nodiscard]] std::uint64_t yk_bound_violations() const { return bound_violations_; }

  /// Called with the state after `record` was applied.
  void on_step(const ProcessState& state, const StepRecord& record);
  /// Appends a history sample at the current step.
  const KSetSample& sample(const ProcessState& state);

 private:
  std::vector<Vertex> K_;
  std::vector<std::uint8_t> in_K_;
  std::optional<std::uint64_t> cover_step_;
  std::vector<KSetSample> history_;
  std::uint64_t max_decrease_ = 0;
  std::uint64_t bound_violations_ = 0;
};

/// Partial triples of K destroyed by the step `record` (state is after it).
/// Requires K uncovered before the step.
[[nodiscard]] std::uint64_t yk_one_step_decrease(const KSetTracker& tracker, const StepRecord& record,
                                                 const ProcessState& state);

/// `count` independent uniform k-subsets of [n] with k = c.k(); tracker j
/// draws from stream ("kset", j) of `seed`. Throws if k > n or k < 2.
[[nodiscard]] std::vector<KSetTracker> sample_ksets(const analytics::TrajectoryConstants& c, std::uint32_t n,
                                                    std::size_t count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Records.

struct PredictedCenters {
  double Q = 0, degree = 0, c_uv = 0, x_k = 0, y_k = 0;
};

/// Trajectory centers at `step`; defined past m too, unlike predicted_value.
[[nodiscard]] PredictedCenters predicted_centers(std::uint64_t step, const analytics::TrajectoryConstants& c);

struct TrackerSnapshot {
  std::uint32_t id = 0;
  bool covered = false;
  std::uint64_t x = 0, y = 0;
  std::uint64_t uniqueness_violations = 0;
};

struct CheckpointRecord {
  std::uint64_t step = 0;
  double t = 0.0;
  bool terminal = false;
  bool scheduled = true;  // false for the extra record taken at termination
  std::uint64_t Q = 0;
  std::uint32_t degree_min = 0, degree_max = 0;
  double degree_mean = 0.0;
  std::uint64_t c_uv_samples = 0;
  double c_uv_mean = 0.0;
  std::uint64_t max_three_paths = 0;  // over the same sampled pairs
  std::vector<TrackerSnapshot> trackers;
  PredictedCenters predicted;

  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] static CheckpointRecord from_json(const nlohmann::json& j);
};

struct FinalGraphSummary {
  std::uint32_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t M = 0;
  double t_final = 0.0;
  std::uint32_t max_degree = 0, min_degree = 0;
  std::uint64_t triangles = 0;
  std::uint64_t c4_count = 0;
  std::uint64_t greedy_alpha = 0;
  double independence_bound = 0.0;  // (n/10d)(ln d - ln(h/n)/2) at mean degree d, h = max(triangles, 1)
  std::uint64_t disjointness_pairs = 0;
  std::uint64_t disjointness_violations = 0;
  std::uint64_t max_three_paths = 0;
  double runtime_seconds = 0.0;

  [[nodiscard]] nlohmann::json to_json(bool include_runtime = true) const;
  [[nodiscard]] static FinalGraphSummary from_json(const nlohmann::json& j);
};

/// Trajectory t-grid used when none is given; t_max is appended per run.
[[nodiscard]] std::vector<double> default_checkpoint_times();

/// Checkpoint steps round(t s) for the given times, ascending and unique.
[[nodiscard]] std::vector<std::uint64_t> checkpoint_steps(std::span<const double> times,
                                                          const analytics::TrajectoryConstants& c);

struct ObserverOptions {
  std::vector<double> checkpoint_times = default_checkpoint_times();
  std::size_t trackers = 0;
  std::size_t c_uv_sample = 256;
};

/// Measures a run: trackers follow every step, CheckpointRecords are taken at
/// the schedule and at termination.
class RunObserver {
 public:
  RunObserver(const analytics::TrajectoryConstants& c, std::uint64_t seed, ObserverOptions options = {});

  [[nodiscard]] ObservationPlan plan();
  [[nodiscard]] CheckpointRecord snapshot(const ProcessState& state, bool terminal);

  [[nodiscard]] const std::vector<CheckpointRecord>& records() const { return records_; }
  [[nodiscard]] const std::vector<KSetTracker>& trackers() const { return trackers_; }

 private:
  analytics::TrajectoryConstants constants_;
  ObserverOptions options_;
  std::vector<KSetTracker> trackers_;
  std::vector<CheckpointRecord> records_;
  Engine pair_rng_;
};

/// Runs `state` to termination under `plan` and summarizes the final graph.
[[nodiscard]] FinalGraphSummary run_to_completion(ProcessState& state, const ObservationPlan& plan = {});

/// Final-graph statistics for a terminated state (runtime left at 0).
[[nodiscard]] FinalGraphSummary summarize(const ProcessState& state);

}  // namespace c4proc::obs
