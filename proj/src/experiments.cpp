#include "c4proc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "c4proc/process.hpp"

namespace c4proc::experiments {

namespace fs = std::filesystem;

unsigned default_jobs() {
  if (const char* env = std::getenv("C4PROC_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"n", n_values},
          {"runs", runs},
          {"base_seed", base_seed},
          {"seed_stride", kSeedStride},
          {"constants",
           {{"mu", constants.mu}, {"eps", constants.eps}, {"V", constants.V}, {"W", constants.W},
            {"beta", constants.beta}, {"kappa", constants.kappa}}},
          {"checkpoint_times", checkpoint_times},
          {"trackers", trackers},
          {"c_uv_sample", c_uv_sample},
          {"edge_log", edge_log}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.n_values = j.at("n").get<std::vector<std::uint32_t>>();
  c.runs = j.at("runs");
  c.base_seed = j.at("base_seed");
  const auto& k = j.at("constants");
  c.constants = {k.at("mu"), k.at("eps"), k.at("V"), k.at("W"), k.at("beta"), k.at("kappa")};
  c.checkpoint_times = j.at("checkpoint_times").get<std::vector<double>>();
  c.trackers = j.at("trackers");
  c.c_uv_sample = j.at("c_uv_sample");
  c.edge_log = j.value("edge_log", true);
  return c;
}

RunResult run_single(std::uint32_t n, std::uint64_t seed, const ExperimentConfig& config,
                     const std::string& edge_log_path) {
  const auto constants = analytics::TrajectoryConstants::for_n(n, config.constants);
  obs::ObserverOptions oo;
  oo.checkpoint_times = config.checkpoint_times;
  oo.trackers = config.trackers;
  oo.c_uv_sample = config.c_uv_sample;
  obs::RunObserver observer(constants, seed, oo);
  ObservationPlan plan = observer.plan();

  std::unique_ptr<EdgeLogWriter> log;
  if (!edge_log_path.empty()) {
    log = std::make_unique<EdgeLogWriter>(edge_log_path);
    auto inner = plan.on_step;
    plan.on_step = [inner, w = log.get()](const ProcessState& s, const StepRecord& r) {
      w->write(r);
      if (inner) inner(s, r);
    };
  }
  ProcessState state(n, seed);
  RunResult out;
  out.summary = obs::run_to_completion(state, plan);
  if (log) log->close();
  out.checkpoints = observer.records();
  out.trackers = observer.trackers();
  return out;
}

fs::path run_directory(const fs::path& out, std::uint32_t n, std::size_t run) {
  return out / ("n" + std::to_string(n)) / ("run" + std::to_string(run));
}

void write_atomically(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << text;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<obs::CheckpointRecord> read_checkpoints(const fs::path& p) {
  std::vector<obs::CheckpointRecord> out;
  std::ifstream f(p);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  std::string line;
  while (std::getline(f, line))
    if (!line.empty()) out.push_back(obs::CheckpointRecord::from_json(nlohmann::json::parse(line)));
  return out;
}

void execute(const ExperimentConfig& config, RunOutcome& o) {
  const bool persist = !config.out_dir.empty();
  fs::path dir;
  if (persist) {
    dir = run_directory(config.out_dir, o.n, o.run);
    if (fs::exists(dir / "summary.json")) {
      o.summary = obs::FinalGraphSummary::from_json(nlohmann::json::parse(read_file(dir / "summary.json")));
      if (o.summary.seed != o.seed || o.summary.n != o.n)
        throw std::runtime_error("existing summary does not match this run");
      o.checkpoints = read_checkpoints(dir / "checkpoints.jsonl");
      o.resumed = true;
      o.ok = true;
      return;
    }
    fs::create_directories(dir);
  }

  std::string log_tmp;
  if (persist && config.edge_log) log_tmp = (dir / "edges.partial.tsv.gz").string();
  RunResult r = run_single(o.n, o.seed, config, log_tmp);
  o.summary = r.summary;
  o.checkpoints = std::move(r.checkpoints);

  if (persist) {
    if (!log_tmp.empty()) fs::rename(log_tmp, dir / "edges.tsv.gz");
    std::string lines;
    for (const auto& c : o.checkpoints) lines += c.to_json().dump() + "\n";
    write_atomically(dir / "checkpoints.jsonl", lines);
    // summary.json last: its presence marks the run complete.
    write_atomically(dir / "summary.json", o.summary.to_json().dump(2) + "\n");
  }
  o.ok = true;
}

nlohmann::json manifest_of(const ExperimentConfig& config, const std::vector<RunOutcome>& runs,
                           const std::vector<std::uint8_t>& finished) {
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!finished[i]) continue;
    const auto& o = runs[i];
    nlohmann::json e = {{"n", o.n}, {"run", o.run}, {"seed", o.seed}, {"status", o.ok ? "done" : "failed"}};
    if (o.ok) e["path"] = run_directory("", o.n, o.run).string();
    if (o.resumed) e["resumed"] = true;
    if (!o.ok) e["error"] = o.error;
    list.push_back(std::move(e));
  }
  return {{"schema", obs::kSchema}, {"config", config.to_json()}, {"runs", list}};
}

}  // namespace

EnsembleResult run_ensemble(const ExperimentConfig& config) {
  EnsembleResult result;
  for (std::uint32_t n : config.n_values)
    for (std::size_t r = 0; r < config.runs; ++r) {
      RunOutcome o;
      o.n = n;
      o.run = r;
      o.seed = config.seed_for(r);
      result.runs.push_back(std::move(o));
    }
  const bool persist = !config.out_dir.empty();
  if (persist) fs::create_directories(config.out_dir);

  std::vector<std::uint8_t> finished(result.runs.size(), 0);
  std::mutex manifest_mutex;
  const auto publish = [&] {
    // Serialized; rewritten after every run so an interrupted ensemble leaves a valid manifest.
    result.manifest = manifest_of(config, result.runs, finished);
    if (persist) write_atomically(config.out_dir / "manifest.json", result.manifest.dump(2) + "\n");
  };

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < result.runs.size(); i = next++) {
      RunOutcome& o = result.runs[i];
      try {
        execute(config, o);
      } catch (const std::exception& e) {
        o.ok = false;
        o.error = e.what();
      }
      std::lock_guard lock(manifest_mutex);
      finished[i] = 1;
      try {
        publish();
      } catch (const std::exception& e) {
        o.ok = false;
        o.error = std::string("manifest: ") + e.what();
      }
    }
  };

  const unsigned jobs = std::max(1U, std::min<unsigned>(config.jobs ? config.jobs : default_jobs(),
                                                        static_cast<unsigned>(result.runs.size())));
  if (result.runs.empty()) {
    publish();
    return result;
  }
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  publish();
  return result;
}

std::vector<obs::FinalGraphSummary> EnsembleResult::summaries() const {
  std::vector<obs::FinalGraphSummary> out;
  for (const auto& o : runs)
    if (o.ok) out.push_back(o.summary);
  return out;
}

std::size_t EnsembleResult::failures() const {
  return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const RunOutcome& o) { return !o.ok; }));
}

namespace {
std::vector<fs::path> run_dirs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& nd : fs::directory_iterator(dir)) {
    if (!nd.is_directory() || nd.path().filename().string().rfind('n', 0) != 0) continue;
    for (const auto& rd : fs::directory_iterator(nd.path()))
      if (rd.is_directory() && fs::exists(rd.path() / "summary.json")) out.push_back(rd.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}
}  // namespace

std::vector<obs::FinalGraphSummary> load_summaries(const fs::path& dir) {
  std::vector<obs::FinalGraphSummary> out;
  for (const auto& d : run_dirs(dir))
    out.push_back(obs::FinalGraphSummary::from_json(nlohmann::json::parse(read_file(d / "summary.json"))));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.n != b.n ? a.n < b.n : a.seed < b.seed;
  });
  return out;
}

std::vector<RunCheckpoints> load_checkpoints(const fs::path& dir) {
  std::vector<RunCheckpoints> out;
  for (const auto& d : run_dirs(dir)) {
    const auto s = obs::FinalGraphSummary::from_json(nlohmann::json::parse(read_file(d / "summary.json")));
    out.push_back({s.n, s.seed, read_checkpoints(d / "checkpoints.jsonl")});
  }
  return out;
}

// ---------------------------------------------------------------------------

Stat mean_stddev(std::span<const double> v) {
  Stat s;
  if (v.empty()) return s;
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

namespace {
double spread(const std::vector<ScalingRow>& rows, double ScalingRow::*field) {
  double lo = rows.front().*field, hi = lo;
  for (const auto& r : rows) {
    lo = std::min(lo, r.*field);
    hi = std::max(hi, r.*field);
  }
  return hi / lo;
}
}  // namespace

ScalingFit fit_scaling(std::span<const obs::FinalGraphSummary> summaries) {
  std::map<std::uint32_t, std::vector<const obs::FinalGraphSummary*>> by_n;
  for (const auto& s : summaries) by_n[s.n].push_back(&s);
  if (by_n.size() < 3) throw std::invalid_argument("fit_scaling: needs at least 3 distinct n values");

  ScalingFit fit;
  for (const auto& [n, list] : by_n) {
    std::vector<double> M, D, A;
    for (const auto* s : list) {
      M.push_back(static_cast<double>(s->M));
      D.push_back(s->max_degree);
      A.push_back(static_cast<double>(s->greedy_alpha));
    }
    ScalingRow row;
    row.n = n;
    row.runs = list.size();
    row.M = mean_stddev(M);
    row.max_degree = mean_stddev(D);
    row.greedy_alpha = mean_stddev(A);
    const double nn = n, ln = std::log(nn);
    row.ratio_M = row.M.mean / (std::pow(nn, 4.0 / 3.0) * std::cbrt(ln));
    row.ratio_degree = row.max_degree.mean / std::cbrt(nn * ln);
    row.ratio_alpha = row.greedy_alpha.mean / std::pow(nn * ln, 2.0 / 3.0);
    fit.rows.push_back(row);
  }
  fit.spread_M = spread(fit.rows, &ScalingRow::ratio_M);
  fit.spread_degree = spread(fit.rows, &ScalingRow::ratio_degree);
  fit.spread_alpha = spread(fit.rows, &ScalingRow::ratio_alpha);

  // OLS of ln(mean M) on ln n.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(fit.rows.size());
  for (const auto& r : fit.rows) {
    const double x = std::log(static_cast<double>(r.n)), y = std::log(r.M.mean);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double mx = sx / k, my = sy / k;
  fit.slope = (sxy - k * mx * my) / (sxx - k * mx * mx);
  fit.intercept = my - fit.slope * mx;
  return fit;
}

nlohmann::json ScalingFit::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows)
    rs.push_back({{"n", r.n},
                  {"runs", r.runs},
                  {"M", {{"mean", r.M.mean}, {"stddev", r.M.stddev}}},
                  {"max_degree", {{"mean", r.max_degree.mean}, {"stddev", r.max_degree.stddev}}},
                  {"greedy_alpha", {{"mean", r.greedy_alpha.mean}, {"stddev", r.greedy_alpha.stddev}}},
                  {"ratio_M", r.ratio_M},
                  {"ratio_degree", r.ratio_degree},
                  {"ratio_alpha", r.ratio_alpha}});
  return {{"schema", obs::kSchema},
          {"rows", rs},
          {"spread", {{"M", spread_M}, {"degree", spread_degree}, {"alpha", spread_alpha}}},
          {"loglog_slope", slope},
          {"loglog_intercept", intercept}};
}

std::string ScalingFit::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "n,runs,M_mean,M_std,maxdeg_mean,maxdeg_std,alpha_mean,alpha_std,ratio_M,ratio_degree,ratio_alpha\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.runs << ',' << r.M.mean << ',' << r.M.stddev << ',' << r.max_degree.mean << ','
       << r.max_degree.stddev << ',' << r.greedy_alpha.mean << ',' << r.greedy_alpha.stddev << ',' << r.ratio_M
       << ',' << r.ratio_degree << ',' << r.ratio_alpha << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------

const char* name(Observable o) {
  switch (o) {
    case Observable::Q: return "Q";
    case Observable::degree: return "degree";
    case Observable::c_uv: return "c_uv";
    case Observable::x_k: return "X_K";
    case Observable::y_k: return "Y_K";
  }
  return "?";
}

const TrajectoryRow* TrajectoryReport::find(std::uint32_t n, std::uint64_t step, Observable o) const {
  for (const auto& r : rows)
    if (r.n == n && r.step == step && r.observable == o) return &r;
  return nullptr;
}

std::string TrajectoryReport::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "n,step,t,observable,samples,measured_mean,center,error_kind,mean_error,max_abs_error\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.step << ',' << r.t << ',' << name(r.observable) << ',' << r.samples << ','
       << r.measured_mean << ',' << r.center << ',' << (r.absolute ? "absolute" : "relative") << ','
       << r.mean_error << ',' << r.max_abs_error << '\n';
  return os.str();
}

TrajectoryReport trajectory_report(std::span<const RunCheckpoints> runs, const analytics::ConstantInputs& constants) {
  struct Acc {
    double t = 0;
    std::vector<double> measured;
  };
  // (n, step, observable) -> samples
  std::map<std::tuple<std::uint32_t, std::uint64_t, int>, Acc> acc;
  for (const auto& run : runs) {
    for (const auto& r : run.records) {
      if (!r.scheduled) continue;
      const auto add = [&](Observable o, double v) {
        auto& a = acc[{run.n, r.step, static_cast<int>(o)}];
        a.t = r.t;
        a.measured.push_back(v);
      };
      add(Observable::Q, static_cast<double>(r.Q));
      add(Observable::degree, r.degree_mean);
      if (r.c_uv_samples > 0) add(Observable::c_uv, r.c_uv_mean);
      for (const auto& s : r.trackers) {
        if (s.covered) continue;
        add(Observable::x_k, static_cast<double>(s.x));
        add(Observable::y_k, static_cast<double>(s.y));
      }
    }
  }

  TrajectoryReport rep;
  std::map<std::uint32_t, analytics::TrajectoryConstants> cs;
  for (const auto& [key, a] : acc) {
    const auto [n, step, o] = key;
    if (!cs.count(n)) cs.emplace(n, analytics::TrajectoryConstants::for_n(n, constants));
    const obs::PredictedCenters pc = obs::predicted_centers(step, cs.at(n));
    TrajectoryRow row;
    row.n = n;
    row.step = step;
    row.t = a.t;
    row.observable = static_cast<Observable>(o);
    row.samples = a.measured.size();
    switch (row.observable) {
      case Observable::Q: row.center = pc.Q; break;
      case Observable::degree: row.center = pc.degree; break;
      case Observable::c_uv: row.center = pc.c_uv; break;
      case Observable::x_k: row.center = pc.x_k; break;
      case Observable::y_k: row.center = pc.y_k; break;
    }
    row.absolute = row.center == 0.0;
    double sum_m = 0, sum_e = 0;
    for (double m : a.measured) {
      const double e = row.absolute ? m - row.center : (m - row.center) / row.center;
      sum_m += m;
      sum_e += e;
      row.max_abs_error = std::max(row.max_abs_error, std::fabs(e));
    }
    row.measured_mean = sum_m / static_cast<double>(row.samples);
    row.mean_error = sum_e / static_cast<double>(row.samples);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace c4proc::experiments
