// c4proc: command-line front end for the C4-free process simulator.
//
// Exit codes: 0 success, 1 invariant or oracle failure, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "c4proc/analytics.hpp"
#include "c4proc/experiments.hpp"
#include "c4proc/oracle.hpp"

namespace an = c4proc::analytics;
namespace ex = c4proc::experiments;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct RunArgs {
  std::vector<std::uint32_t> n;
  std::size_t runs = 1;
  std::uint64_t seed = 1;
  double beta = 1.0;
  double mu = 1.0;
  std::size_t trackers = 0;
  std::vector<double> checkpoints = c4proc::obs::default_checkpoint_times();
  std::string out;
  unsigned jobs = 0;
  bool no_edge_log = false;
};

int cmd_run(const RunArgs& a) {
  ex::ExperimentConfig cfg;
  cfg.n_values = a.n;
  cfg.runs = a.runs;
  cfg.base_seed = a.seed;
  cfg.constants.beta = a.beta;
  cfg.constants.mu = a.mu;
  cfg.trackers = a.trackers;
  cfg.checkpoint_times = a.checkpoints;
  cfg.out_dir = a.out;
  cfg.jobs = a.jobs;
  cfg.edge_log = !a.no_edge_log;
  const auto res = ex::run_ensemble(cfg);

  bool bad = res.failures() > 0;
  for (const auto& o : res.runs) {
    if (!o.ok) {
      std::fprintf(stderr, "n=%u run=%zu seed=%llu FAILED: %s\n", o.n, o.run,
                   static_cast<unsigned long long>(o.seed), o.error.c_str());
      continue;
    }
    const auto& s = o.summary;
    const bool structural = s.c4_count == 0 && s.disjointness_violations == 0 && 3 * s.triangles <= s.M;
    bad = bad || !structural;
    std::printf("n=%u run=%zu seed=%llu M=%llu maxdeg=%u alpha>=%llu%s%s\n", o.n, o.run,
                static_cast<unsigned long long>(o.seed), static_cast<unsigned long long>(s.M), s.max_degree,
                static_cast<unsigned long long>(s.greedy_alpha), o.resumed ? " (resumed)" : "",
                structural ? "" : " STRUCTURE VIOLATION");
  }
  return bad ? kFailure : kOk;
}

struct VerifyArgs {
  std::string mode;
  double V = 40.0;
  std::string W = "auto";
  double eps = 0.01;
  std::string mu = "auto";
  std::string beta = "auto";
  double grid_step = 0.01;
  double log_n = 1e40;
  std::uint64_t n = 0;
  bool boundary_layer = false;
  double tol = 1e-6;
};

double parse_real(const std::string& s, const char* flag) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw CLI::ValidationError(flag, "expected a number or 'auto', got '" + s + "'");
  return v;
}

int cmd_verify(const VerifyArgs& a) {
  an::ConstantInputs in;
  in.V = a.V;
  in.eps = a.eps;
  in.W = a.W == "auto" ? an::minimal_w(a.V) : parse_real(a.W, "--w");
  in.mu = a.mu == "auto" ? an::strict_mode_mu(in.W, a.eps) : parse_real(a.mu, "--mu");
  in.beta = a.beta == "auto" ? 8.0 / (in.mu * in.mu) : parse_real(a.beta, "--beta");
  const an::TrajectoryConstants c =
      a.n > 0 ? an::TrajectoryConstants::for_n(a.n, in) : an::TrajectoryConstants::for_log_n(a.log_n, in);

  an::VerificationReport rep;
  if (a.mode == "identities") {
    rep = an::check_derivative_identities(an::uniform_grid(0.0, 3.0, a.grid_step), a.tol);
  } else {
    std::vector<double> grid = an::uniform_grid(0.0, c.t_max(), a.grid_step);
    if (a.boundary_layer) {
      const auto layer = an::boundary_layer_grid(c);
      grid.insert(grid.end(), layer.begin(), layer.end());
      std::sort(grid.begin(), grid.end());
    }
    if (a.mode == "inequalities")
      rep = an::check_trend_inequalities(c, grid);
    else if (a.mode == "case-analysis")
      rep = an::check_case_analysis(c, grid);
    else
      rep = an::check_constants(c, {a.grid_step, 10.0});
  }
  nlohmann::json out = rep.to_json();
  out["constants"] = c.to_json();
  const auto strict = an::strict_mode_violations(c);
  out["strict_mode"] = strict.empty();
  out["strict_mode_violations"] = strict;
  std::cout << out.dump(2) << "\n";
  for (const auto& r : rep.checks)
    std::fprintf(stderr, "%-4s %s (%zu points)\n", r.passed() ? "ok" : "FAIL", r.name.c_str(),
                 r.grid_points_checked);
  return rep.passed() ? kOk : kFailure;
}

int cmd_oracle(std::uint32_t n, std::uint64_t seed, std::uint32_t ceiling, std::uint64_t max_steps) {
  c4proc::oracle::LockstepOptions opts;
  opts.ceiling = ceiling;
  const auto reports = c4proc::oracle::lockstep_check(n, seed, max_steps, opts);
  std::uint64_t mismatches = 0, dirty = 0;
  for (const auto& r : reports) {
    mismatches += r.status_mismatches.size();
    if (!r.clean()) {
      if (dirty++ < 5)
        std::fprintf(stderr, "step %llu: %zu status mismatches, c4=%llu, Q engine %llu vs oracle %llu\n",
                     static_cast<unsigned long long>(r.step), r.status_mismatches.size(),
                     static_cast<unsigned long long>(r.c4_count), static_cast<unsigned long long>(r.q_engine),
                     static_cast<unsigned long long>(r.q_oracle));
    }
  }
  std::printf("n=%u seed=%llu steps=%zu dirty_steps=%llu mismatches=%llu\n", n,
              static_cast<unsigned long long>(seed), reports.size() - 1, static_cast<unsigned long long>(dirty),
              static_cast<unsigned long long>(mismatches));
  return dirty == 0 ? kOk : kFailure;
}

int cmd_fit(const std::string& in, std::string json_path, std::string csv_path) {
  const auto summaries = ex::load_summaries(in);
  const auto fit = ex::fit_scaling(summaries);
  if (json_path.empty()) json_path = (fs::path(in) / "scaling.json").string();
  if (csv_path.empty()) csv_path = (fs::path(in) / "scaling.csv").string();
  ex::write_atomically(json_path, fit.to_json().dump(2) + "\n");
  ex::write_atomically(csv_path, fit.to_csv());
  std::cout << fit.to_json().dump(2) << "\n";
  return kOk;
}

int cmd_report(const std::string& in, std::string csv_path) {
  std::ifstream mf(fs::path(in) / "manifest.json");
  if (!mf) throw std::runtime_error("no manifest.json in " + in);
  const auto manifest = nlohmann::json::parse(mf);
  const auto cfg = ex::ExperimentConfig::from_json(manifest.at("config"));
  const auto runs = ex::load_checkpoints(in);
  const auto rep = ex::trajectory_report(runs, cfg.constants);
  if (csv_path.empty()) csv_path = (fs::path(in) / "trajectory.csv").string();
  ex::write_atomically(csv_path, rep.to_csv());
  std::cout << rep.to_csv();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and verification suite for the C4-free random graph process"};
  app.require_subcommand(1);

  RunArgs ra;
  ra.jobs = ex::default_jobs();
  auto* run = app.add_subcommand("run", "Run an ensemble to termination and write per-run outputs");
  run->add_option("--n", ra.n, "Vertex counts")->required()->delimiter(',')->check(CLI::Range(4U, 65536U));
  run->add_option("--runs", ra.runs, "Runs per n")->capture_default_str();
  run->add_option("--seed", ra.seed, "Base seed; run r uses seed + r*" + std::to_string(ex::kSeedStride))
      ->capture_default_str();
  run->add_option("--beta", ra.beta, "k-set size factor")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--mu", ra.mu, "t_max factor")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--trackers", ra.trackers, "k-set trackers per run")->capture_default_str();
  run->add_option("--checkpoints", ra.checkpoints, "Checkpoint times t")->delimiter(',');
  run->add_option("--out", ra.out, "Output directory")->required();
  run->add_option("--jobs", ra.jobs, "Parallel runs (default $C4PROC_JOBS or all cores)")
      ->check(CLI::PositiveNumber);
  run->add_flag("--no-edge-log", ra.no_edge_log, "Skip edges.tsv.gz");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Numerically verify the trajectory identities and inequalities");
  verify->add_option("--mode", va.mode, "What to check")
      ->required()
      ->check(CLI::IsMember({"identities", "inequalities", "constants", "case-analysis"}));
  verify->add_option("--v", va.V, "Constant V")->capture_default_str();
  verify->add_option("--w", va.W, "Constant W, or 'auto' for the smallest admissible")->capture_default_str();
  verify->add_option("--eps", va.eps, "Constant eps")->capture_default_str();
  verify->add_option("--mu", va.mu, "Constant mu, or 'auto' for (eps/4W)^{1/3}")->capture_default_str();
  verify->add_option("--beta", va.beta, "Constant beta, or 'auto' for 8/mu^2")->capture_default_str();
  verify->add_option("--grid-step", va.grid_step, "Grid spacing in t")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  auto* log_n = verify->add_option("--log-n", va.log_n, "ln n for n-dependent checks")->capture_default_str();
  verify->add_option("--n", va.n, "Finite n instead of --log-n")->excludes(log_n);
  verify->add_flag("--boundary-layer", va.boundary_layer, "Also sample t = a/W for a in [0, 100]");
  verify->add_option("--tol", va.tol, "Finite-difference tolerance")->capture_default_str();

  std::uint32_t on = 0, ceiling = c4proc::oracle::kDefaultCeiling;
  std::uint64_t oseed = 1, max_steps = ~std::uint64_t{0};
  auto* oracle = app.add_subcommand("oracle", "Lockstep check of the engine against full recomputation");
  oracle->add_option("--n", on, "Vertex count")->required()->check(CLI::Range(4U, 65536U));
  oracle->add_option("--seed", oseed, "Seed")->capture_default_str();
  oracle->add_option("--ceiling", ceiling, "Largest n accepted")->capture_default_str();
  oracle->add_option("--max-steps", max_steps, "Stop after this many steps");

  std::string fit_in, fit_json, fit_csv;
  auto* fit = app.add_subcommand("fit", "Scaling-law fit over an ensemble directory");
  fit->add_option("--in", fit_in, "Ensemble directory")->required()->check(CLI::ExistingDirectory);
  fit->add_option("--json", fit_json, "JSON output (default <in>/scaling.json)");
  fit->add_option("--csv", fit_csv, "CSV output (default <in>/scaling.csv)");

  std::string rep_in, rep_csv;
  auto* report = app.add_subcommand("report", "Trajectory relative-error table over an ensemble directory");
  report->add_option("--in", rep_in, "Ensemble directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--csv", rep_csv, "CSV output (default <in>/trajectory.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run(ra);
    if (*verify) return cmd_verify(va);
    if (*oracle) {
      if (on > ceiling) {
        std::fprintf(stderr, "--n %u exceeds the oracle ceiling %u\n", on, ceiling);
        return kUsage;
      }
      return cmd_oracle(on, oseed, ceiling, max_steps);
    }
    if (*fit) return cmd_fit(fit_in, fit_json, fit_csv);
    if (*report) return cmd_report(rep_in, rep_csv);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kUsage;
}
