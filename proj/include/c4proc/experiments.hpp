#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "c4proc/analytics.hpp"
#include "c4proc/observables.hpp"

namespace c4proc::experiments {

/// Run r of an ensemble uses seed base_seed + r * kSeedStride.
inline constexpr std::uint64_t kSeedStride = 1000003;

/// C4PROC_JOBS if set to a positive integer, else the hardware concurrency.
[[nodiscard]] unsigned default_jobs();

struct ExperimentConfig {
  std::vector<std::uint32_t> n_values;
  std::size_t runs = 1;
  std::uint64_t base_seed = 1;
  analytics::ConstantInputs constants;  // mu = 1, beta = 1 at desk scale
  std::vector<double> checkpoint_times = obs::default_checkpoint_times();
  std::size_t trackers = 0;
  std::size_t c_uv_sample = 256;
  std::filesystem::path out_dir;  // empty keeps everything in memory
  unsigned jobs = 0;              // 0 selects default_jobs()
  bool edge_log = true;

  [[nodiscard]] std::uint64_t seed_for(std::size_t run) const { return base_seed + run * kSeedStride; }
  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] static ExperimentConfig from_json(const nlohmann::json& j);
};

/// One complete run with its observer output.
struct RunResult {
  obs::FinalGraphSummary summary;
  std::vector<obs::CheckpointRecord> checkpoints;
  std::vector<obs::KSetTracker> trackers;
};

/// Runs one member of the ensemble; writes nothing.
[[nodiscard]] RunResult run_single(std::uint32_t n, std::uint64_t seed, const ExperimentConfig& config,
                                   const std::string& edge_log_path = {});

struct RunOutcome {
  std::uint32_t n = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  bool resumed = false;  // outputs already existed and were reused
  std::string error;
  obs::FinalGraphSummary summary;
  std::vector<obs::CheckpointRecord> checkpoints;
};

struct EnsembleResult {
  std::vector<RunOutcome> runs;  // ordered by (n, run)
  nlohmann::json manifest;

  [[nodiscard]] std::vector<obs::FinalGraphSummary> summaries() const;
  [[nodiscard]] std::size_t failures() const;
};

/// Runs every (n, run) pair, in parallel across runs. With an output
/// directory each run writes <out>/n<N>/run<R>/{summary.json,
/// checkpoints.jsonl, edges.tsv.gz} through temporary files and renames;
/// runs whose summary.json already exists are loaded instead of rerun.
/// manifest.json lists every run once with status done or failed.
[[nodiscard]] EnsembleResult run_ensemble(const ExperimentConfig& config);

[[nodiscard]] std::filesystem::path run_directory(const std::filesystem::path& out, std::uint32_t n, std::size_t run);

/// Writes `text` to `path` via a sibling temporary file and a rename.
void write_atomically(const std::filesystem::path& path, const std::string& text);

/// Every summary.json below `dir`, ordered by (n, seed).
[[nodiscard]] std::vector<obs::FinalGraphSummary> load_summaries(const std::filesystem::path& dir);

struct RunCheckpoints {
  std::uint32_t n = 0;
  std::uint64_t seed = 0;
  std::vector<obs::CheckpointRecord> records;
};

[[nodiscard]] std::vector<RunCheckpoints> load_checkpoints(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for one value
};

[[nodiscard]] Stat mean_stddev(std::span<const double> v);

struct ScalingRow {
  std::uint32_t n = 0;
  std::size_t runs = 0;
  Stat M, max_degree, greedy_alpha;
  double ratio_M = 0.0;      // mean M / (n^{4/3} (ln n)^{1/3})
  double ratio_degree = 0.0; // mean max degree / (n ln n)^{1/3}
  double ratio_alpha = 0.0;  // mean greedy alpha / (n ln n)^{2/3}
};

struct ScalingFit {
  std::vector<ScalingRow> rows;  // ascending n
  double spread_M = 0.0;         // max / min of the ratio across n
  double spread_degree = 0.0;
  double spread_alpha = 0.0;
  double slope = 0.0;            // OLS slope of ln(mean M) on ln n
  double intercept = 0.0;

  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] std::string to_csv() const;
};

/// Requires summaries for at least 3 distinct n; throws std::invalid_argument otherwise.
[[nodiscard]] ScalingFit fit_scaling(std::span<const obs::FinalGraphSummary> summaries);

// ---------------------------------------------------------------------------

enum class Observable { Q, degree, c_uv, x_k, y_k };
[[nodiscard]] const char* name(Observable o);

struct TrajectoryRow {
  std::uint32_t n = 0;
  std::uint64_t step = 0;
  double t = 0.0;
  Observable observable = Observable::Q;
  std::size_t samples = 0;   // runs, or uncovered trackers summed over runs
  double measured_mean = 0.0;
  double center = 0.0;
  bool absolute = false;     // center is zero: errors are absolute, not relative
  double mean_error = 0.0;   // mean of (measured - center) / center over samples
  double max_abs_error = 0.0;
};

struct TrajectoryReport {
  std::vector<TrajectoryRow> rows;

  [[nodiscard]] const TrajectoryRow* find(std::uint32_t n, std::uint64_t step, Observable o) const;
  [[nodiscard]] std::string to_csv() const;
};

/// Relative errors against the trajectory centers, aggregated per (n,
/// scheduled checkpoint) across runs. X_K and Y_K use uncovered trackers only.
/// Terminal records are excluded unless they coincide with a scheduled step.
[[nodiscard]] TrajectoryReport trajectory_report(std::span<const RunCheckpoints> runs,
                                                 const analytics::ConstantInputs& constants);

}  // namespace c4proc::experiments
