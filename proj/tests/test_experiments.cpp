#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "c4proc/experiments.hpp"

using namespace c4proc;
namespace ex = c4proc::experiments;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory under the system temp dir, removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("c4proc_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ex::ExperimentConfig small_config(const fs::path& out = {}) {
  ex::ExperimentConfig cfg;
  cfg.n_values = {512};
  cfg.runs = 3;
  cfg.base_seed = 17;
  cfg.trackers = 3;
  cfg.c_uv_sample = 32;
  cfg.out_dir = out;
  cfg.jobs = 2;
  return cfg;
}

obs::FinalGraphSummary fake(std::uint32_t n, double M, double degree, double alpha) {
  obs::FinalGraphSummary s;
  s.n = n;
  s.M = static_cast<std::uint64_t>(std::llround(M));
  s.max_degree = static_cast<std::uint32_t>(std::llround(degree));
  s.greedy_alpha = static_cast<std::uint64_t>(std::llround(alpha));
  return s;
}

}  // namespace

TEST_CASE("seeds and config serialization") {
  ex::ExperimentConfig cfg = small_config();
  CHECK_EQ(cfg.seed_for(0), 17);
  CHECK_EQ(cfg.seed_for(2), 17 + 2 * ex::kSeedStride);
  cfg.constants.beta = 2.5;
  const auto j = cfg.to_json();
  CHECK_EQ(ex::ExperimentConfig::from_json(j).to_json(), j);
  CHECK(ex::default_jobs() >= 1);
}

TEST_CASE("ensembles are deterministic and resumable") {
  TempDir a("ens_a"), b("ens_b");
  const auto first = ex::run_ensemble(small_config(a.path));
  REQUIRE_EQ(first.runs.size(), 3);
  CHECK_EQ(first.failures(), 0);
  const auto second = ex::run_ensemble(small_config(b.path));
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& r = first.runs[i];
    CHECK(r.ok);
    CHECK_FALSE(r.resumed);
    CHECK_EQ(r.seed, small_config().seed_for(i));
    CHECK_EQ(r.summary.to_json(false), second.runs[i].summary.to_json(false));
    CHECK_EQ(r.summary.c4_count, 0);
    const fs::path da = ex::run_directory(a.path, 512, i), db = ex::run_directory(b.path, 512, i);
    CHECK(fs::exists(da / "summary.json"));
    CHECK(fs::exists(da / "checkpoints.jsonl"));
    CHECK_FALSE(fs::exists(da / "edges.partial.tsv.gz"));
    REQUIRE(fs::exists(da / "edges.tsv.gz"));
    CHECK_EQ(slurp(da / "edges.tsv.gz"), slurp(db / "edges.tsv.gz"));
  }

  // Second pass over the same directory reuses every run.
  const auto again = ex::run_ensemble(small_config(a.path));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(again.runs[i].resumed);
    CHECK_EQ(again.runs[i].summary.to_json(false), first.runs[i].summary.to_json(false));
    CHECK_EQ(again.runs[i].checkpoints.size(), first.runs[i].checkpoints.size());
  }

  const auto manifest = nlohmann::json::parse(slurp(a.path / "manifest.json"));
  CHECK_EQ(manifest.at("schema"), obs::kSchema);
  CHECK_EQ(manifest.at("runs").size(), 3);
  for (const auto& r : manifest.at("runs")) CHECK_EQ(r.at("status"), "done");

  const auto loaded = ex::load_summaries(a.path);
  REQUIRE_EQ(loaded.size(), 3);
  CHECK_EQ(ex::load_checkpoints(a.path).size(), 3);
}

TEST_CASE("in-memory ensembles match single runs") {
  ex::ExperimentConfig cfg = small_config();
  cfg.runs = 2;
  const auto res = ex::run_ensemble(cfg);
  const auto one = ex::run_single(512, cfg.seed_for(1), cfg);
  CHECK_EQ(res.runs[1].summary.to_json(false), one.summary.to_json(false));
  CHECK_EQ(one.trackers.size(), 3);
}

TEST_CASE("zero runs gives an empty manifest") {
  TempDir d("zero");
  ex::ExperimentConfig cfg = small_config(d.path);
  cfg.runs = 0;
  const auto res = ex::run_ensemble(cfg);
  CHECK(res.runs.empty());
  CHECK(res.manifest.at("runs").empty());
  CHECK(fs::exists(d.path / "manifest.json"));
}

TEST_CASE("a failing run is recorded, the rest complete") {
  TempDir d("fail");
  ex::ExperimentConfig cfg = small_config(d.path);
  // A plain file where run 1's directory should go.
  fs::create_directories(d.path / "n512");
  std::ofstream(ex::run_directory(d.path, 512, 1)) << "blocker";
  const auto res = ex::run_ensemble(cfg);
  CHECK_EQ(res.failures(), 1);
  CHECK(res.runs[0].ok);
  CHECK_FALSE(res.runs[1].ok);
  CHECK_FALSE(res.runs[1].error.empty());
  CHECK(res.runs[2].ok);
  const auto manifest = nlohmann::json::parse(slurp(d.path / "manifest.json"));
  CHECK_EQ(manifest.at("runs").at(1).at("status"), "failed");
  CHECK(manifest.at("runs").at(1).contains("error"));
}

TEST_CASE("atomic writes leave no temporary behind") {
  TempDir d("atomic");
  ex::write_atomically(d.path / "x.json", "{}\n");
  ex::write_atomically(d.path / "x.json", "[1]\n");
  CHECK_EQ(slurp(d.path / "x.json"), "[1]\n");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(d.path)) files += e.is_regular_file();
  CHECK_EQ(files, 1);
}

TEST_CASE("mean and sample standard deviation") {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  const ex::Stat s = ex::mean_stddev(v);
  CHECK_EQ(s.mean, 5.0);
  CHECK(s.stddev == doctest::Approx(std::sqrt(32.0 / 7.0)));
  const std::vector<double> one{3.0};
  CHECK_EQ(ex::mean_stddev(one).stddev, 0.0);
}

TEST_CASE("scaling fit on synthetic summaries") {
  SUBCASE("exact scaling laws give unit spreads") {
    std::vector<obs::FinalGraphSummary> s;
    for (std::uint32_t n : {1024u, 2048u, 4096u, 8192u}) {
      const double L = std::log(static_cast<double>(n));
      // Large multipliers keep the rounding to integers negligible.
      for (int r = 0; r < 2; ++r)
        s.push_back(fake(n, 5000.0 * std::pow(n, 4.0 / 3.0) * std::cbrt(L), 1000.0 * std::cbrt(n * L),
                         1000.0 * std::pow(n * L, 2.0 / 3.0)));
    }
    const auto fit = ex::fit_scaling(s);
    REQUIRE_EQ(fit.rows.size(), 4);
    CHECK_EQ(fit.rows[0].n, 1024);
    CHECK_EQ(fit.rows[0].runs, 2);
    CHECK(fit.spread_M == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.spread_degree == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(fit.spread_alpha == doctest::Approx(1.0).epsilon(1e-5));
  }
  SUBCASE("a pure power law recovers its exponent") {
    std::vector<obs::FinalGraphSummary> s;
    for (std::uint32_t n : {1000u, 8000u, 27000u, 64000u})
      s.push_back(fake(n, std::pow(n, 4.0 / 3.0), 10.0, 10.0));  // exact integers: n^{1/3} is integral
    const auto fit = ex::fit_scaling(s);
    CHECK(std::fabs(fit.slope - 4.0 / 3.0) < 1e-9);
    CHECK(std::fabs(fit.intercept) < 1e-8);
    const auto j = fit.to_json();
    CHECK(j.at("loglog_slope").get<double>() == fit.slope);
    CHECK(j.at("rows").size() == 4);
    const std::string csv = fit.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  }
  SUBCASE("fewer than three n values") {
    std::vector<obs::FinalGraphSummary> s{fake(1024, 100, 10, 10), fake(2048, 300, 10, 10),
                                          fake(2048, 310, 10, 10)};
    CHECK_THROWS_AS((void)ex::fit_scaling(s), std::invalid_argument);
  }
}

TEST_CASE("trajectory report from a small ensemble") {
  ex::ExperimentConfig cfg = small_config();
  cfg.trackers = 5;
  const auto res = ex::run_ensemble(cfg);
  std::vector<ex::RunCheckpoints> runs;
  for (const auto& o : res.runs) runs.push_back({o.n, o.seed, o.checkpoints});
  const auto rep = ex::trajectory_report(runs, cfg.constants);

  const auto* q0 = rep.find(512, 0, ex::Observable::Q);
  REQUIRE(q0 != nullptr);
  CHECK_EQ(q0->samples, 3);
  CHECK_EQ(q0->mean_error, -1.0 / 512.0);
  CHECK_FALSE(q0->absolute);

  const auto* d0 = rep.find(512, 0, ex::Observable::degree);
  REQUIRE(d0 != nullptr);
  CHECK(d0->absolute);
  CHECK_EQ(d0->mean_error, 0.0);

  const auto* y0 = rep.find(512, 0, ex::Observable::y_k);
  REQUIRE(y0 != nullptr);
  CHECK(y0->absolute);
  CHECK_EQ(y0->samples, 15);
  CHECK_EQ(y0->measured_mean, 0.0);

  const auto* x0 = rep.find(512, 0, ex::Observable::x_k);
  REQUIRE(x0 != nullptr);
  // X_K(0) = k (k-1)/2 (n - k) against k^2 n / 2.
  const double k = static_cast<double>(analytics::TrajectoryConstants::for_n(512).k());
  CHECK(x0->measured_mean == doctest::Approx(k * (k - 1) / 2 * (512 - k)));

  // Degree is deterministic given the step: 2i/n against 2tnp = 2i/n.
  for (const auto& row : rep.rows)
    if (row.observable == ex::Observable::degree && !row.absolute) CHECK(std::fabs(row.mean_error) < 1e-12);

  CHECK(rep.find(512, 1, ex::Observable::Q) == nullptr);
  const std::string csv = rep.to_csv();
  CHECK(csv.rfind("n,", 0) == 0);
}
