#include <doctest.h>

#include "c4proc/oracle.hpp"

using namespace c4proc;
using oracle::c4_count;
using oracle::recompute_statuses;

namespace {
PairStatus at(const std::vector<PairStatus>& s, Vertex a, Vertex b) { return s[Pair(a, b).index()]; }

Graph complete(std::uint32_t n) {
  Graph g(n);
  for (Vertex v = 1; v < n; ++v)
    for (Vertex u = 0; u < v; ++u) g.add_edge({u, v});
  return g;
}
}  // namespace

TEST_CASE("recompute_statuses on small graphs") {
  SUBCASE("path 1-2-3-4") {
    const Graph g(5, {{1, 2}, {2, 3}, {3, 4}});
    const auto s = recompute_statuses(g);
    CHECK(at(s, 1, 4) == PairStatus::Closed);
    CHECK(at(s, 1, 3) == PairStatus::Open);
    CHECK(at(s, 2, 4) == PairStatus::Open);
    CHECK(at(s, 2, 3) == PairStatus::Edge);
    CHECK(at(s, 0, 1) == PairStatus::Open);
  }
  SUBCASE("empty graph") {
    for (PairStatus p : recompute_statuses(Graph(9))) CHECK(p == PairStatus::Open);
  }
  SUBCASE("a 4-cycle with a pendant") {
    // 0-1-2-3-0 with 3-4. The chords of the cycle have only 2-paths; 4 reaches
    // 1 along 4-3-2-1 and 4-3-0-1 but nothing reaches 0 or 2 in three steps.
    const Graph g(5, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {3, 4}});
    const auto s = recompute_statuses(g);
    CHECK(at(s, 0, 2) == PairStatus::Open);
    CHECK(at(s, 1, 3) == PairStatus::Open);
    CHECK(at(s, 1, 4) == PairStatus::Closed);
    CHECK(at(s, 0, 4) == PairStatus::Open);
    CHECK(at(s, 2, 4) == PairStatus::Open);
  }
}

TEST_CASE("c4_count on known graphs") {
  CHECK_EQ(c4_count(Graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}})), 1);
  CHECK_EQ(c4_count(complete(4)), 3);
  CHECK_EQ(c4_count(Graph(4, {{0, 1}, {1, 2}, {2, 3}})), 0);
  CHECK_EQ(c4_count(complete(5)), 15);  // 5 choose 4 subsets times 3
  // K_{2,3}: C(3,2) = 3 cycles through the two-vertex side.
  CHECK_EQ(c4_count(Graph(5, {{0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}})), 3);
}

TEST_CASE("lockstep agrees on small and medium n") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto reps = oracle::lockstep_check(4, seed, ~std::uint64_t{0});
    for (const auto& r : reps) CHECK(r.clean());
  }
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    const auto reps = oracle::lockstep_check(60, seed, ~std::uint64_t{0});
    CHECK(reps.front().step == 0);
    CHECK(reps.back().q_engine == 0);
    for (const auto& r : reps) {
      REQUIRE(r.status_mismatches.empty());
      REQUIRE_EQ(r.c4_count, 0);
      REQUIRE_EQ(r.q_oracle, r.q_engine);
    }
  }
}

TEST_CASE("lockstep catches a broken closure rule") {
  oracle::LockstepOptions opts;
  opts.process.closure_rule = ClosureRule::MiddleEdgeOnly;
  const auto reps = oracle::lockstep_check(40, 3, ~std::uint64_t{0}, opts);
  std::size_t mismatches = 0;
  for (const auto& r : reps) mismatches += r.status_mismatches.size();
  CHECK(mismatches > 0);
}

TEST_CASE("lockstep honours the ceiling and the step limit") {
  CHECK_THROWS_AS((void)oracle::lockstep_check(301, 1, 10), std::invalid_argument);
  oracle::LockstepOptions opts;
  opts.ceiling = 20;
  CHECK_THROWS_AS((void)oracle::lockstep_check(21, 1, 10, opts), std::invalid_argument);
  CHECK_EQ(oracle::lockstep_check(100, 1, 7).size(), 8);
}
