#include <doctest.h>

#include <cmath>
#include <set>
#include <tuple>

#include "c4proc/observables.hpp"
#include "c4proc/oracle.hpp"

using namespace c4proc;
using namespace c4proc::obs;
namespace an = c4proc::analytics;

namespace {

ProcessState build(std::uint32_t n, std::initializer_list<Pair> edges) {
  ProcessState s(n, 1);
  for (const Pair& e : edges) s.insert(e);
  return s;
}

using Triple = std::tuple<Vertex, Vertex, Vertex>;  // u < v in K, w outside

struct TripleSets {
  std::set<Triple> open, partial;
};

// Direct enumeration over C(K,2) x complement.
TripleSets brute_triples(const ProcessState& s, const std::vector<Vertex>& K) {
  TripleSets out;
  const std::set<Vertex> in(K.begin(), K.end());
  for (std::size_t i = 0; i < K.size(); ++i)
    for (std::size_t j = i + 1; j < K.size(); ++j) {
      const Vertex u = std::min(K[i], K[j]), v = std::max(K[i], K[j]);
      for (Vertex w = 0; w < s.n(); ++w) {
        if (in.count(w)) continue;
        const PairStatus a = s.status(u, w), b = s.status(v, w);
        if (a == PairStatus::Open && b == PairStatus::Open) out.open.insert({u, v, w});
        if ((a == PairStatus::Open && b == PairStatus::Edge) || (a == PairStatus::Edge && b == PairStatus::Open))
          out.partial.insert({u, v, w});
      }
    }
  return out;
}

TripleCounts counts(const ProcessState& s, std::vector<Vertex> K) { return xk_yk_counts(s, K); }

bool covered(const Graph& g, std::vector<Vertex> K) { return is_covered(g, K); }

Graph complete(std::uint32_t n) {
  Graph g(n);
  for (Vertex v = 1; v < n; ++v)
    for (Vertex u = 0; u < v; ++u) g.add_edge({u, v});
  return g;
}

Graph cycle(std::uint32_t n) {
  Graph g(n);
  for (Vertex v = 0; v < n; ++v) g.add_edge({v, (v + 1) % n});
  return g;
}

Graph petersen() {
  Graph g(10);
  for (Vertex i = 0; i < 5; ++i) {
    g.add_edge({i, (i + 1) % 5});
    g.add_edge({i, i + 5});
    g.add_edge({i + 5, (i + 2) % 5 + 5});
  }
  return g;
}

bool independent(const Graph& g, const std::vector<Vertex>& S) {
  for (std::size_t i = 0; i < S.size(); ++i)
    for (std::size_t j = i + 1; j < S.size(); ++j)
      if (g.has_edge(S[i], S[j])) return false;
  return true;
}

bool maximal_independent(const Graph& g, const std::vector<Vertex>& S) {
  std::vector<bool> in(g.vertex_count(), false);
  for (Vertex v : S) in[v] = true;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    if (in[v]) continue;
    bool blocked = false;
    for (Vertex a : g.neighbors(v)) blocked = blocked || in[a];
    if (!blocked) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("X_K and Y_K on the worked examples") {
  // K = {1, 2} on n = 5 leaves w in {0, 3, 4}.
  SUBCASE("empty graph") {
    const ProcessState s(5, 1);
    CHECK(counts(s, {1, 2}) == TripleCounts{3, 0});
  }
  SUBCASE("one edge from K") {
    const ProcessState s = build(5, {{1, 3}});
    CHECK(counts(s, {1, 2}) == TripleCounts{2, 1});
  }
  SUBCASE("a common neighbour counts in neither") {
    const ProcessState s = build(5, {{1, 4}, {2, 4}});
    CHECK(counts(s, {1, 2}) == TripleCounts{2, 0});
    CHECK(covered(s.graph(), {1, 2}));
  }
  CHECK_THROWS_AS((void)counts(ProcessState(5, 1), {3}), std::invalid_argument);
}

TEST_CASE("coverage examples") {
  CHECK(covered(Graph(6, {{1, 4}, {2, 4}}), {1, 2, 3}));
  CHECK_FALSE(covered(Graph(6, {{1, 2}}), {1, 2, 3}));
  CHECK(covered(Graph(6, {{1, 2}, {2, 3}}), {1, 3, 5}));
  // The common neighbour may itself lie in K.
  CHECK(covered(Graph(6, {{1, 2}, {2, 3}}), {1, 2, 3}));
  CHECK_FALSE(covered(Graph(6), {0, 1, 2, 3, 4, 5}));
}

TEST_CASE("three-path counts") {
  CHECK_EQ(three_path_count(Graph(5, {{1, 2}, {2, 3}, {3, 4}}), 1, 4), 1);
  CHECK_EQ(three_path_count(Graph(5, {{1, 2}, {2, 3}, {3, 4}}), 4, 1), 1);
  CHECK_EQ(three_path_count(Graph(6), 0, 5), 0);
  const Graph two(6, {{0, 1}, {1, 2}, {2, 5}, {0, 3}, {3, 4}, {4, 5}});
  CHECK_EQ(three_path_count(two, 0, 5), 2);
  const std::vector<Pair> sample{{0, 5}};
  const auto rep = check_three_path_disjointness(two, sample);
  CHECK(rep.clean());
  CHECK_EQ(rep.paths_checked, 2);
  CHECK_EQ(rep.max_paths, 2);
  PathScanner scan(two);
  for (const auto& p : scan.paths(0, 5)) {
    CHECK_EQ(p[0], 0);
    CHECK_EQ(p[3], 5);
  }
}

TEST_CASE("disjointness flags a graph with a 4-cycle") {
  // C4 0-1-2-3 with pendant 4-0: 4-0-1-2 and 4-0-3-2 share the edge 40.
  const Graph g(5, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 0}});
  const auto pairs = all_pairs(5);
  const auto rep = check_three_path_disjointness(g, pairs);
  CHECK_FALSE(rep.clean());
  bool found = false;
  for (const auto& v : rep.violations) found = found || v.endpoints == Pair(2, 4);
  CHECK(found);
  CHECK_EQ(rep.pairs_checked, 10);

  const std::vector<Pair> one{{0, 1}};
  CHECK(check_three_path_disjointness(Graph(2, {{0, 1}}), one).clean());
}

TEST_CASE("pair samples") {
  const auto all = all_pairs(7);
  CHECK_EQ(all.size(), 21);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK_EQ(all[i].index(), i);
  Engine rng = make_stream(5, "structure");
  CHECK_EQ(structural_pair_sample(200, rng).size(), 19900);
  const auto big = structural_pair_sample(201, rng);
  CHECK_EQ(big.size(), 10000);
  for (const auto& p : big) CHECK(p.v < 201);
}

TEST_CASE("independent sets") {
  CHECK_EQ(greedy_independent_set(Graph(9)).size(), 9);
  CHECK_EQ(greedy_independent_set(complete(6)).size(), 1);
  CHECK_EQ(greedy_independent_set(cycle(5)).size(), 2);
  CHECK_EQ(independence_number(cycle(5)), 2);
  CHECK_EQ(independence_number(petersen()), 4);
  CHECK_EQ(independence_number(complete(7)), 1);
  CHECK_EQ(independence_number(Graph(12)), 12);
  CHECK_THROWS_AS((void)independence_number(Graph(41)), std::invalid_argument);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ProcessState s(24, seed);
    (void)run_until_terminated(s);
    const auto S = greedy_independent_set(s.graph());
    CHECK(independent(s.graph(), S));
    CHECK(maximal_independent(s.graph(), S));
    CHECK(S.size() <= independence_number(s.graph()));
  }
}

TEST_CASE("triangle counts") {
  CHECK_EQ(triangle_count(complete(3)), 1);
  CHECK_EQ(triangle_count(complete(5)), 10);
  CHECK_EQ(triangle_count(Graph(5)), 0);
  CHECK_EQ(triangle_count(cycle(4)), 0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ProcessState s(120, seed);
    (void)run_until_terminated(s);
    CHECK(3 * triangle_count(s.graph()) <= s.graph().edge_count());
  }
}

TEST_CASE("k-set sampling") {
  const auto c = an::TrajectoryConstants::for_n(4096);
  CHECK_EQ(c.k(), 33);
  const auto t = sample_ksets(c, 4096, 5, 11);
  REQUIRE_EQ(t.size(), 5);
  for (const auto& tr : t) {
    const std::set<Vertex> m(tr.members().begin(), tr.members().end());
    CHECK_EQ(m.size(), 33);
    CHECK(*m.rbegin() < 4096);
    CHECK_FALSE(tr.covered());
  }
  CHECK(t[0].members()[0] != t[1].members()[0]);
  const auto again = sample_ksets(c, 4096, 5, 11);
  CHECK(std::equal(t[3].members().begin(), t[3].members().end(), again[3].members().begin()));
  CHECK(sample_ksets(c, 4096, 0, 11).empty());
  an::ConstantInputs huge;
  huge.beta = 1e6;
  CHECK_THROWS_AS((void)sample_ksets(an::TrajectoryConstants::for_n(4096, huge), 4096, 1, 1),
                  std::invalid_argument);
}

TEST_CASE("counts and decreases match brute-force triple enumeration") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const std::uint32_t n = 60;
    const auto c = an::TrajectoryConstants::for_n(n);
    auto trackers = sample_ksets(c, n, 6, seed);
    ProcessState s(n, seed);
    std::vector<TripleSets> prev;
    for (const auto& tr : trackers) prev.push_back(brute_triples(s, {tr.members().begin(), tr.members().end()}));
    std::vector<std::uint64_t> last_x(trackers.size(), ~std::uint64_t{0});
    while (!s.terminated()) {
      const StepRecord r = s.step();
      for (std::size_t j = 0; j < trackers.size(); ++j) {
        auto& tr = trackers[j];
        const std::vector<Vertex> K(tr.members().begin(), tr.members().end());
        const bool was_covered = tr.covered();
        const TripleSets now = brute_triples(s, K);
        if (!was_covered) {
          std::size_t lost = 0;
          for (const auto& tri : prev[j].partial) lost += !now.partial.count(tri);
          REQUIRE_EQ(yk_one_step_decrease(tr, r, s), lost);
          CHECK(lost <= 1 + r.newly_closed);
        }
        tr.on_step(s, r);
        REQUIRE_EQ(tr.covered(), is_covered(s.graph(), K));
        if (was_covered) REQUIRE(tr.covered());  // monotone
        const TripleCounts tc = xk_yk_counts(s, K);
        REQUIRE_EQ(tc.x, now.open.size());
        REQUIRE_EQ(tc.y, now.partial.size());
        REQUIRE(tc.x <= last_x[j]);
        last_x[j] = tc.x;
        if (!tr.covered()) REQUIRE_EQ(partial_triple_uniqueness_violations(s, K), 0);
        prev[j] = now;
      }
    }
    for (const auto& tr : trackers) {
      CHECK_EQ(tr.yk_bound_violations(), 0);
      const double diag = 3.0 * static_cast<double>(c.k()) * std::pow(n, 0.25);
      CHECK(static_cast<double>(tr.max_yk_decrease()) <= diag);
    }
  }
}

TEST_CASE("first edge destroys no partial triple") {
  const auto c = an::TrajectoryConstants::for_n(100);
  auto trackers = sample_ksets(c, 100, 3, 2);
  ProcessState s(100, 2);
  const StepRecord r = s.step();
  for (auto& tr : trackers) CHECK_EQ(yk_one_step_decrease(tr, r, s), 0);
}

TEST_CASE("uniqueness counter fires once K is covered") {
  // w = 4 has two edge-neighbours 1, 2 in K and an open pair to 3.
  const ProcessState s = build(6, {{1, 4}, {2, 4}});
  const std::vector<Vertex> K{1, 2, 3};
  CHECK(is_covered(s.graph(), K));
  CHECK_EQ(partial_triple_uniqueness_violations(s, K), 1);
}

TEST_CASE("predicted centers at t = 0") {
  const auto c = an::TrajectoryConstants::for_n(4096);
  const PredictedCenters p = predicted_centers(0, c);
  const double k = static_cast<double>(c.k());
  CHECK_EQ(p.Q, 4096.0 * 4096.0 / 2.0);
  CHECK_EQ(p.degree, 0.0);
  CHECK_EQ(p.c_uv, 0.0);
  CHECK(p.x_k == doctest::Approx(k * k * 4096.0 / 2.0));
  CHECK_EQ(p.y_k, 0.0);
  CHECK(predicted_centers(32768, c).c_uv == doctest::Approx(282.54).epsilon(1e-4));
}

TEST_CASE("checkpoint schedule") {
  const auto c = an::TrajectoryConstants::for_n(4096);
  const std::vector<double> times{0.0, 0.5, 0.5, 0.25};
  CHECK(checkpoint_steps(times, c) == std::vector<std::uint64_t>{0, 16384, 32768});
  CHECK_EQ(default_checkpoint_times().front(), 0.0);
}

TEST_CASE("observer records a run") {
  const std::uint32_t n = 300;
  const auto c = an::TrajectoryConstants::for_n(n);
  ObserverOptions opt;
  opt.trackers = 4;
  opt.c_uv_sample = 64;
  RunObserver obs(c, 9, opt);
  ProcessState s(n, 9);
  ObservationPlan plan = obs.plan();
  std::uint64_t q_at_checkpoint_ok = 0;
  auto inner = plan.on_checkpoint;
  plan.on_checkpoint = [&](const ProcessState& st) {
    inner(st);
    q_at_checkpoint_ok += obs.records().back().Q == st.open_count();
  };
  const FinalGraphSummary sum = run_to_completion(s, plan);

  const auto& recs = obs.records();
  REQUIRE(recs.size() >= 2);
  CHECK_EQ(q_at_checkpoint_ok, std::count_if(recs.begin(), recs.end(), [](const auto& r) { return r.scheduled; }));
  CHECK_EQ(recs.front().step, 0);
  CHECK_EQ(recs.front().Q, pair_count(n));
  CHECK_EQ(recs.front().c_uv_mean, 0.0);
  CHECK(recs.back().terminal);
  CHECK_EQ(recs.back().step, sum.M);
  CHECK_EQ(recs.back().Q, 0);
  for (std::size_t i = 1; i < recs.size(); ++i) CHECK(recs[i].step > recs[i - 1].step);
  for (const auto& r : recs) {
    CHECK_EQ(r.trackers.size(), 4);
    CHECK_EQ(r.c_uv_samples, 64);
    CHECK(r.degree_min <= r.degree_mean);
    CHECK(r.degree_mean <= r.degree_max);
    CHECK(r.degree_mean == doctest::Approx(2.0 * r.step / n));
    for (const auto& tr : r.trackers) CHECK_EQ(tr.uniqueness_violations, 0);
  }

  CHECK_EQ(sum.n, n);
  CHECK_EQ(sum.seed, 9);
  CHECK_EQ(sum.c4_count, 0);
  CHECK_EQ(sum.disjointness_violations, 0);
  CHECK_EQ(sum.disjointness_pairs, 10000);
  CHECK(3 * sum.triangles <= sum.M);
  CHECK(static_cast<double>(sum.greedy_alpha) >= sum.independence_bound);
  CHECK(sum.runtime_seconds >= 0.0);
  CHECK(sum.t_final == doctest::Approx(sum.M / c.s()));

  SUBCASE("records and summaries round-trip through JSON") {
    for (const auto& r : recs) {
      const auto j = r.to_json();
      CHECK_EQ(CheckpointRecord::from_json(j).to_json(), j);
    }
    const auto j = sum.to_json();
    CHECK_EQ(FinalGraphSummary::from_json(j).to_json(), j);
    CHECK(j.contains("runtime_seconds"));
    CHECK_FALSE(sum.to_json(false).contains("runtime_seconds"));
    CHECK(j.at("disjointness").contains("violations"));
  }
}

TEST_CASE("summary of a small exhaustive run") {
  ProcessState s(150, 4);
  (void)run_until_terminated(s);
  const FinalGraphSummary sum = summarize(s);
  CHECK_EQ(sum.disjointness_pairs, pair_count(150));
  CHECK_EQ(sum.c4_count, oracle::c4_count(s.graph()));
  CHECK_EQ(sum.c4_count, 0);
  CHECK_EQ(sum.M, s.graph().edge_count());
  const double d = 2.0 * sum.M / 150.0;
  const double h = std::max<double>(sum.triangles, 1.0);
  CHECK(sum.independence_bound == doctest::Approx(an::independence_lower_bound(150.0, d, h)));
  CHECK_EQ(sum.runtime_seconds, 0.0);
}
