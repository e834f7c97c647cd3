#include "c4proc/observables.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "c4proc/oracle.hpp"

namespace c4proc::obs {

namespace {

void require_kset(std::span<const Vertex> K) {
  if (K.size() < 2) throw std::invalid_argument("k-set needs at least 2 vertices");
}

// o_w and e_w for every w, as counts of K-members.
struct KProfile {
  std::vector<std::uint32_t> open, edge;
};

KProfile profile(const ProcessState& state, std::span<const Vertex> K, const std::vector<std::uint8_t>& in_K) {
  const std::uint32_t n = state.n();
  KProfile p{std::vector<std::uint32_t>(n, 0), std::vector<std::uint32_t>(n, 0)};
  for (Vertex u : K) {
    for (Vertex w = 0; w < n; ++w) {
      if (w == u || in_K[w]) continue;
      const PairStatus s = state.status(u, w);
      if (s == PairStatus::Open)
        ++p.open[w];
      else if (s == PairStatus::Edge)
        ++p.edge[w];
    }
  }
  return p;
}

std::vector<std::uint8_t> membership(std::uint32_t n, std::span<const Vertex> K) {
  std::vector<std::uint8_t> in_K(n, 0);
  for (Vertex v : K) {
    if (v >= n) throw std::out_of_range("k-set member outside [0, n)");
    if (in_K[v]) throw std::invalid_argument("k-set has a repeated vertex");
    in_K[v] = 1;
  }
  return in_K;
}

}  // namespace

TripleCounts xk_yk_counts(const ProcessState& state, std::span<const Vertex> K) {
  require_kset(K);
  const auto in_K = membership(state.n(), K);
  const KProfile p = profile(state, K, in_K);
  TripleCounts out;
  for (Vertex w = 0; w < state.n(); ++w) {
    const std::uint64_t o = p.open[w];
    out.x += o * (o - (o > 0 ? 1 : 0)) / 2;
    out.y += o * p.edge[w];
  }
  return out;
}

bool is_covered(const Graph& g, std::span<const Vertex> K) {
  require_kset(K);
  const auto in_K = membership(g.vertex_count(), K);
  for (Vertex w = 0; w < g.vertex_count(); ++w) {
    int hits = 0;
    for (Vertex a : g.neighbors(w))
      if (in_K[a] && ++hits == 2) return true;
  }
  return false;
}

std::uint64_t partial_triple_uniqueness_violations(const ProcessState& state, std::span<const Vertex> K) {
  require_kset(K);
  const auto in_K = membership(state.n(), K);
  const KProfile p = profile(state, K, in_K);
  // An open uw sits in one partial triple per edge wv with v in K.
  std::uint64_t bad = 0;
  for (Vertex w = 0; w < state.n(); ++w)
    if (p.edge[w] >= 2) bad += p.open[w];
  return bad;
}

// ---------------------------------------------------------------------------

std::vector<ThreePath> PathScanner::paths(Vertex u, Vertex v) {
  std::vector<ThreePath> out;
  const auto nv = g_->neighbors(v);
  marker_.mark_all(nv);
  for (Vertex a : g_->neighbors(u)) {
    if (a == v) continue;
    for (Vertex b : g_->neighbors(a))
      if (b != u && b != v && marker_[b]) out.push_back({u, a, b, v});
  }
  marker_.clear_all(nv);
  return out;
}

std::uint64_t PathScanner::count(Vertex u, Vertex v) {
  std::uint64_t total = 0;
  const auto nv = g_->neighbors(v);
  marker_.mark_all(nv);
  for (Vertex a : g_->neighbors(u)) {
    if (a == v) continue;
    for (Vertex b : g_->neighbors(a))
      if (b != u && b != v && marker_[b]) ++total;
  }
  marker_.clear_all(nv);
  return total;
}

std::uint64_t three_path_count(const Graph& g, Vertex u, Vertex v) {
  if (u == v) throw std::invalid_argument("three_path_count: u == v");
  return PathScanner(g).count(u, v);
}

namespace {
bool share_edge(const ThreePath& p, const ThreePath& q) {
  const auto edge = [](const ThreePath& r, int i) { return Pair(r[i], r[i + 1]); };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (edge(p, i) == edge(q, j)) return true;
  return false;
}
}  // namespace

DisjointnessReport check_three_path_disjointness(const Graph& g, std::span<const Pair> pairs) {
  DisjointnessReport rep;
  PathScanner scanner(g);
  for (const Pair& uv : pairs) {
    const auto ps = scanner.paths(uv.u, uv.v);
    ++rep.pairs_checked;
    rep.paths_checked += ps.size();
    rep.max_paths = std::max<std::uint64_t>(rep.max_paths, ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = i + 1; j < ps.size(); ++j)
        if (share_edge(ps[i], ps[j])) rep.violations.push_back({uv, ps[i], ps[j]});
  }
  return rep;
}

std::vector<Pair> all_pairs(std::uint32_t n) {
  std::vector<Pair> out;
  out.reserve(pair_count(n));
  for (Vertex v = 1; v < n; ++v)
    for (Vertex u = 0; u < v; ++u) out.emplace_back(u, v);
  return out;
}

std::vector<Pair> random_pairs(std::uint32_t n, std::size_t count, Engine& rng) {
  if (n < 2) throw std::invalid_argument("random_pairs: n < 2");
  std::vector<Pair> out;
  out.reserve(count);
  const std::uint64_t total = pair_count(n);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(Pair::from_index(static_cast<PairIndex>(uniform_below(rng, total))));
  return out;
}

std::vector<Pair> structural_pair_sample(std::uint32_t n, Engine& rng) {
  if (n <= 200) return all_pairs(n);
  return random_pairs(n, 10000, rng);
}

std::uint64_t triangle_count(const Graph& g) {
  VertexMarker mark(g.vertex_count());
  std::uint64_t total = 0;
  for (Vertex a = 0; a < g.vertex_count(); ++a) {
    const auto na = g.neighbors(a);
    mark.mark_all(na);
    for (Vertex b : na) {
      if (b <= a) continue;
      for (Vertex c : g.neighbors(b))
        if (c > b && mark[c]) ++total;
    }
    mark.clear_all(na);
  }
  return total;
}

std::vector<Vertex> greedy_independent_set(const Graph& g) {
  const std::uint32_t n = g.vertex_count();
  std::vector<std::uint32_t> deg(n);
  std::vector<std::uint8_t> alive(n, 1);
  std::uint32_t max_deg = 0;
  for (Vertex v = 0; v < n; ++v) {
    deg[v] = g.degree(v);
    max_deg = std::max(max_deg, deg[v]);
  }
  // Bucket queue with lazy deletion; stale entries are skipped on pop.
  std::vector<std::vector<Vertex>> bucket(max_deg + 1);
  for (Vertex v = n; v-- > 0;) bucket[deg[v]].push_back(v);

  std::vector<Vertex> chosen;
  std::uint32_t cur = 0;
  std::uint32_t remaining = n;
  while (remaining > 0) {
    while (bucket[cur].empty()) ++cur;
    const Vertex v = bucket[cur].back();
    bucket[cur].pop_back();
    if (!alive[v] || deg[v] != cur) continue;

    chosen.push_back(v);
    alive[v] = 0;
    --remaining;
    for (Vertex w : g.neighbors(v)) {
      if (!alive[w]) continue;
      alive[w] = 0;
      --remaining;
      for (Vertex z : g.neighbors(w)) {
        if (!alive[z]) continue;
        bucket[--deg[z]].push_back(z);
        cur = std::min(cur, deg[z]);
      }
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

namespace {
std::uint32_t mis_exact(std::uint64_t P, const std::vector<std::uint64_t>& nb) {
  std::uint32_t taken = 0;
  for (;;) {
    if (P == 0) return taken;
    // Vertices of degree <= 1 inside P can always be taken.
    int v_best = -1, d_best = -1;
    bool reduced = false;
    for (std::uint64_t rest = P; rest; rest &= rest - 1) {
      const int v = std::countr_zero(rest);
      const int d = std::popcount(nb[v] & P);
      if (d <= 1) {
        P &= ~((nb[v] & P) | (std::uint64_t{1} << v));
        ++taken;
        reduced = true;
        break;
      }
      if (d > d_best) {
        d_best = d;
        v_best = v;
      }
    }
    if (reduced) continue;
    const std::uint64_t bit = std::uint64_t{1} << v_best;
    const std::uint32_t skip = mis_exact(P & ~bit, nb);
    const std::uint32_t take = 1 + mis_exact(P & ~bit & ~nb[v_best], nb);
    return taken + std::max(skip, take);
  }
}
}  // namespace

std::uint32_t independence_number(const Graph& g) {
  const std::uint32_t n = g.vertex_count();
  if (n > kExactIndependenceCeiling) throw std::invalid_argument("independence_number: n above ceiling");
  std::vector<std::uint64_t> nb(n, 0);
  for (Vertex v = 0; v < n; ++v)
    for (Vertex w : g.neighbors(v)) nb[v] |= std::uint64_t{1} << w;
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  return mis_exact(all, nb);
}

// ---------------------------------------------------------------------------

KSetTracker::KSetTracker(std::uint32_t n, std::vector<Vertex> K) : K_(std::move(K)) {
  require_kset(K_);
  in_K_ = membership(n, K_);
  std::sort(K_.begin(), K_.end());
}

std::uint64_t yk_one_step_decrease(const KSetTracker& tracker, const StepRecord& record,
                                   const ProcessState& state) {
  const Graph& g = state.graph();
  const auto edge_count_into_K = [&](Vertex w) {
    std::uint64_t e = 0;
    for (Vertex a : g.neighbors(w))
      if (tracker.contains(a)) ++e;
    return e;
  };
  // e_w before the step: the new edge may have added one K-neighbour to w.
  const auto before = [&](Vertex w) {
    std::uint64_t e = edge_count_into_K(w);
    const Pair& xy = record.edge;
    if ((xy.u == w && tracker.contains(xy.v)) || (xy.v == w && tracker.contains(xy.u))) --e;
    return e;
  };
  // A partial triple dies exactly when its single open pair changes status,
  // and that pair uw (u in K) lies in e_w partial triples.
  const auto lost = [&](const Pair& p) -> std::uint64_t {
    const bool u_in = tracker.contains(p.u), v_in = tracker.contains(p.v);
    if (u_in == v_in) return 0;
    return before(u_in ? p.v : p.u);
  };
  std::uint64_t total = lost(record.edge);
  for (const Pair& p : record.closed) total += lost(p);
  return total;
}

void KSetTracker::on_step(const ProcessState& state, const StepRecord& record) {
  if (covered()) return;
  const std::uint64_t dec = yk_one_step_decrease(*this, record, state);
  max_decrease_ = std::max(max_decrease_, dec);
  if (dec > 1 + record.newly_closed) ++bound_violations_;

  // The only new adjacency is xy, so coverage can only arise at x or y.
  const Graph& g = state.graph();
  const auto two_in_K = [&](Vertex w) {
    int hits = 0;
    for (Vertex a : g.neighbors(w))
      if (in_K_[a] && ++hits == 2) return true;
    return false;
  };
  const Pair& xy = record.edge;
  if ((in_K_[xy.v] && two_in_K(xy.u)) || (in_K_[xy.u] && two_in_K(xy.v))) cover_step_ = record.step;
}

const KSetSample& KSetTracker::sample(const ProcessState& state) {
  KSetSample s;
  s.step = state.step_count();
  s.t = state.time();
  s.covered = covered();
  s.counts = xk_yk_counts(state, K_);
  s.uniqueness_violations = s.covered ? 0 : partial_triple_uniqueness_violations(state, K_);
  history_.push_back(s);
  return history_.back();
}

std::vector<KSetTracker> sample_ksets(const analytics::TrajectoryConstants& c, std::uint32_t n,
                                      std::size_t count, std::uint64_t seed) {
  const std::uint64_t k = c.k();
  if (k > n) throw std::invalid_argument("sample_ksets: k = " + std::to_string(k) + " exceeds n");
  if (k < 2) throw std::invalid_argument("sample_ksets: k < 2");
  std::vector<KSetTracker> out;
  out.reserve(count);
  std::vector<Vertex> pool(n);
  for (std::size_t j = 0; j < count; ++j) {
    Engine rng = make_stream(seed, "kset", j);
    std::iota(pool.begin(), pool.end(), Vertex{0});
    // Partial Fisher-Yates.
    for (std::uint64_t i = 0; i < k; ++i) {
      const std::uint64_t r = i + uniform_below(rng, n - i);
      std::swap(pool[i], pool[r]);
    }
    out.emplace_back(n, std::vector<Vertex>(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k)));
  }
  return out;
}

// ---------------------------------------------------------------------------

PredictedCenters predicted_centers(std::uint64_t step, const analytics::TrajectoryConstants& c) {
  using analytics::Fn;
  const double n = static_cast<double>(c.n);
  const double t = c.time_of(step);
  const double p = c.p();
  const double kk = static_cast<double>(c.k());
  const double q = analytics::eval(Fn::q, t, c);
  PredictedCenters out;
  out.Q = q * n * n / 2.0;
  out.degree = 2.0 * t * n * p;
  out.c_uv = 12.0 * t * t * q / p;
  out.x_k = q * q / 2.0 * kk * kk * n;
  out.y_k = 2.0 * t * q * kk * kk * n * p;
  return out;
}

nlohmann::json CheckpointRecord::to_json() const {
  nlohmann::json tr = nlohmann::json::array();
  for (const auto& s : trackers)
    tr.push_back({{"id", s.id}, {"covered", s.covered}, {"x", s.x}, {"y", s.y},
                  {"uniqueness_violations", s.uniqueness_violations}});
  return {{"schema", kSchema},
          {"step", step},
          {"t", t},
          {"terminal", terminal},
          {"scheduled", scheduled},
          {"Q", Q},
          {"degree", {{"min", degree_min}, {"mean", degree_mean}, {"max", degree_max}}},
          {"c_uv", {{"samples", c_uv_samples}, {"mean", c_uv_mean}}},
          {"max_three_paths", max_three_paths},
          {"trackers", tr},
          {"predicted",
           {{"Q", predicted.Q}, {"degree", predicted.degree}, {"c_uv", predicted.c_uv},
            {"x_k", predicted.x_k}, {"y_k", predicted.y_k}}}};
}

CheckpointRecord CheckpointRecord::from_json(const nlohmann::json& j) {
  if (j.at("schema").get<std::string>() != kSchema) throw std::runtime_error("checkpoint: unknown schema");
  CheckpointRecord r;
  r.step = j.at("step");
  r.t = j.at("t");
  r.terminal = j.at("terminal");
  r.scheduled = j.at("scheduled");
  r.Q = j.at("Q");
  r.degree_min = j.at("degree").at("min");
  r.degree_mean = j.at("degree").at("mean");
  r.degree_max = j.at("degree").at("max");
  r.c_uv_samples = j.at("c_uv").at("samples");
  r.c_uv_mean = j.at("c_uv").at("mean");
  r.max_three_paths = j.at("max_three_paths");
  for (const auto& s : j.at("trackers"))
    r.trackers.push_back({s.at("id"), s.at("covered"), s.at("x"), s.at("y"), s.at("uniqueness_violations")});
  const auto& p = j.at("predicted");
  r.predicted = {p.at("Q"), p.at("degree"), p.at("c_uv"), p.at("x_k"), p.at("y_k")};
  return r;
}

nlohmann::json FinalGraphSummary::to_json(bool include_runtime) const {
  nlohmann::json j = {{"schema", kSchema},
                      {"n", n},
                      {"seed", seed},
                      {"M", M},
                      {"t_final", t_final},
                      {"max_degree", max_degree},
                      {"min_degree", min_degree},
                      {"triangles", triangles},
                      {"c4_count", c4_count},
                      {"greedy_alpha", greedy_alpha},
                      {"independence_bound", independence_bound},
                      {"disjointness", {{"pairs", disjointness_pairs}, {"violations", disjointness_violations},
                                        {"max_paths", max_three_paths}}}};
  if (include_runtime) j["runtime_seconds"] = runtime_seconds;
  return j;
}

FinalGraphSummary FinalGraphSummary::from_json(const nlohmann::json& j) {
  if (j.at("schema").get<std::string>() != kSchema) throw std::runtime_error("summary: unknown schema");
  FinalGraphSummary s;
  s.n = j.at("n");
  s.seed = j.at("seed");
  s.M = j.at("M");
  s.t_final = j.at("t_final");
  s.max_degree = j.at("max_degree");
  s.min_degree = j.at("min_degree");
  s.triangles = j.at("triangles");
  s.c4_count = j.at("c4_count");
  s.greedy_alpha = j.at("greedy_alpha");
  s.independence_bound = j.at("independence_bound");
  s.disjointness_pairs = j.at("disjointness").at("pairs");
  s.disjointness_violations = j.at("disjointness").at("violations");
  s.max_three_paths = j.at("disjointness").at("max_paths");
  s.runtime_seconds = j.value("runtime_seconds", 0.0);
  return s;
}

std::vector<double> default_checkpoint_times() { return {0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0}; }

std::vector<std::uint64_t> checkpoint_steps(std::span<const double> times, const analytics::TrajectoryConstants& c) {
  std::vector<std::uint64_t> out;
  const double s = c.s();
  for (double t : times) {
    if (!(t >= 0)) throw std::invalid_argument("checkpoint times must be nonnegative");
    out.push_back(static_cast<std::uint64_t>(std::llround(t * s)));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------

RunObserver::RunObserver(const analytics::TrajectoryConstants& c, std::uint64_t seed, ObserverOptions options)
    : constants_(c), options_(std::move(options)), pair_rng_(make_stream(seed, "pairs")) {
  if (!c.is_finite_n()) throw std::invalid_argument("RunObserver: constants need a finite n");
  if (options_.trackers > 0)
    trackers_ = sample_ksets(c, static_cast<std::uint32_t>(c.n), options_.trackers, seed);
}

ObservationPlan RunObserver::plan() {
  std::vector<double> times = options_.checkpoint_times;
  times.push_back(constants_.t_max());
  ObservationPlan p;
  p.checkpoints = checkpoint_steps(times, constants_);
  p.on_checkpoint = [this](const ProcessState& s) { records_.push_back(snapshot(s, false)); };
  if (!trackers_.empty())
    p.on_step = [this](const ProcessState& s, const StepRecord& r) {
      for (auto& tr : trackers_) tr.on_step(s, r);
    };
  p.on_termination = [this](const ProcessState& s) {
    if (!records_.empty() && records_.back().step == s.step_count())
      records_.back().terminal = true;
    else
      records_.push_back(snapshot(s, true));
  };
  return p;
}

CheckpointRecord RunObserver::snapshot(const ProcessState& state, bool terminal) {
  CheckpointRecord r;
  r.step = state.step_count();
  r.t = state.time();
  r.terminal = terminal;
  r.scheduled = !terminal;
  r.Q = state.open_count();
  const Graph& g = state.graph();
  r.degree_min = g.degree(0);
  std::uint64_t deg_sum = 0;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    r.degree_min = std::min(r.degree_min, g.degree(v));
    r.degree_max = std::max(r.degree_max, g.degree(v));
    deg_sum += g.degree(v);
  }
  r.degree_mean = static_cast<double>(deg_sum) / g.vertex_count();

  // Fresh non-edge sample every checkpoint, by rejection (the graph is sparse).
  const std::uint64_t non_edges = pair_count(state.n()) - g.edge_count();
  if (options_.c_uv_sample > 0 && non_edges > 0) {
    PathScanner scanner(g);
    std::uint64_t sum = 0;
    const std::uint64_t total = pair_count(state.n());
    while (r.c_uv_samples < options_.c_uv_sample) {
      const Pair p = Pair::from_index(static_cast<PairIndex>(uniform_below(pair_rng_, total)));
      if (state.status(p) == PairStatus::Edge) continue;
      sum += state.c_uv_size(p);
      r.max_three_paths = std::max(r.max_three_paths, scanner.count(p.u, p.v));
      ++r.c_uv_samples;
    }
    r.c_uv_mean = static_cast<double>(sum) / static_cast<double>(r.c_uv_samples);
  }

  for (std::uint32_t j = 0; j < trackers_.size(); ++j) {
    const KSetSample& s = trackers_[j].sample(state);
    r.trackers.push_back({j, s.covered, s.counts.x, s.counts.y, s.uniqueness_violations});
  }
  r.predicted = predicted_centers(r.step, constants_);
  return r;
}

FinalGraphSummary summarize(const ProcessState& state) {
  const Graph& g = state.graph();
  FinalGraphSummary s;
  s.n = state.n();
  s.seed = state.seed();
  s.M = state.step_count();
  s.t_final = state.time();
  s.min_degree = g.degree(0);
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    s.max_degree = std::max(s.max_degree, g.degree(v));
    s.min_degree = std::min(s.min_degree, g.degree(v));
  }
  s.triangles = triangle_count(g);
  s.c4_count = oracle::c4_count(g);
  s.greedy_alpha = greedy_independent_set(g).size();
  const double d = 2.0 * static_cast<double>(s.M) / s.n;
  const double h = static_cast<double>(std::max<std::uint64_t>(s.triangles, 1));
  s.independence_bound = d > 1.0 ? analytics::independence_lower_bound(s.n, d, h) : 0.0;

  Engine rng = make_stream(state.seed(), "structure");
  const auto sample = structural_pair_sample(s.n, rng);
  const DisjointnessReport rep = check_three_path_disjointness(g, sample);
  s.disjointness_pairs = rep.pairs_checked;
  s.disjointness_violations = rep.violations.size();
  s.max_three_paths = rep.max_paths;
  return s;
}

FinalGraphSummary run_to_completion(ProcessState& state, const ObservationPlan& plan) {
  const auto start = std::chrono::steady_clock::now();
  run_until_terminated(state, plan);
  const auto stop = std::chrono::steady_clock::now();
  FinalGraphSummary s = summarize(state);
  s.runtime_seconds = std::chrono::duration<double>(stop - start).count();
  return s;
}

}  // namespace c4proc::obs
