#include "c4proc/process.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

namespace c4proc {

OpenPairSet::OpenPairSet(std::uint32_t n) : items_(pair_count(n)), position_(pair_count(n)) {
  std::iota(items_.begin(), items_.end(), PairIndex{0});
  std::iota(position_.begin(), position_.end(), std::uint32_t{0});
}

void OpenPairSet::remove(PairIndex i) {
  const std::uint32_t slot = position_[i];
  const PairIndex last = items_.back();
  items_[slot] = last;
  position_[last] = slot;
  items_.pop_back();
  position_[i] = kAbsent;
}

ProcessState::ProcessState(std::uint32_t n, std::uint64_t seed, ProcessOptions options)
    : seed_(seed), rng_(make_stream(seed, "edges")), options_(options) {
  if (n < 4) throw std::invalid_argument("new_process: n must be at least 4 (no C4 fits on fewer vertices)");
  if (n > options.max_vertices || n > kMaxVertexCount)
    throw std::invalid_argument("new_process: n exceeds the configured vertex ceiling");
  graph_ = Graph(n);
  status_ = PairStatusArray(n);
  open_ = OpenPairSet(n);
}

ProcessState new_process(std::uint32_t n, std::uint64_t seed, ProcessOptions options) {
  return ProcessState(n, seed, options);
}

double ProcessState::time() const {
  return static_cast<double>(step_count()) / std::pow(static_cast<double>(n()), 4.0 / 3.0);
}

// Every new 3-path through xy uses it either as the middle edge (u-x-y-v) or
// as an end edge (x-y-q-v, y-x-q-v). Neighbor lists are those of G(i), which
// does not contain xy yet; the exclusions below make that equivalent to
// enumerating in G(i) + xy. Sink may see the same pair more than once.
template <typename Sink>
void ProcessState::enumerate_closures(Pair xy, Sink&& sink) const {
  const Vertex x = xy.u;
  const Vertex y = xy.v;
  const auto nx = graph_.neighbors(x);
  const auto ny = graph_.neighbors(y);

  for (Vertex u : nx) {
    for (Vertex v : ny) {
      if (u == v) continue;
      const PairIndex idx = pair_index(u, v);
      if (status_.get(idx) == PairStatus::Open) sink(idx);
    }
  }
  if (options_.closure_rule == ClosureRule::MiddleEdgeOnly) return;

  const auto end_edge = [&](Vertex a, Vertex b) {
    for (Vertex q : graph_.neighbors(b)) {
      for (Vertex v : graph_.neighbors(q)) {
        if (v == a || v == b) continue;
        const PairIndex idx = pair_index(a, v);
        if (status_.get(idx) == PairStatus::Open) sink(idx);
      }
    }
  };
  end_edge(x, y);
  end_edge(y, x);
}

std::vector<Pair> ProcessState::newly_closed_by(Pair xy) const {
  if (status(xy) != PairStatus::Open) throw std::logic_error("newly_closed_by: pair is not open");
  std::vector<PairIndex> found;
  enumerate_closures(xy, [&](PairIndex idx) { found.push_back(idx); });
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  std::vector<Pair> out;
  out.reserve(found.size());
  for (PairIndex idx : found) out.push_back(Pair::from_index(idx));
  std::sort(out.begin(), out.end());
  return out;
}

StepRecord ProcessState::insert(Pair xy) {
  const PairIndex xy_idx = xy.index();
  if (status_.get(xy_idx) != PairStatus::Open) throw std::logic_error("insert: pair is not open");

  StepRecord rec;
  rec.q_before = open_.size();
  rec.edge = xy;

  scratch_.clear();
  enumerate_closures(xy, [&](PairIndex idx) { scratch_.push_back(idx); });
  std::sort(scratch_.begin(), scratch_.end());
  scratch_.erase(std::unique(scratch_.begin(), scratch_.end()), scratch_.end());

  rec.closed.reserve(scratch_.size());
  for (PairIndex idx : scratch_) {
    status_.set(idx, PairStatus::Closed);
    open_.remove(idx);
    rec.closed.push_back(Pair::from_index(idx));
  }
  std::sort(rec.closed.begin(), rec.closed.end());
  closed_ += scratch_.size();

  status_.set(xy_idx, PairStatus::Edge);
  open_.remove(xy_idx);
  graph_.add_edge(xy);
  edge_log_.push_back(xy);

  rec.step = edge_log_.size();
  rec.newly_closed = scratch_.size();
  rec.t = time();
  return rec;
}

StepRecord ProcessState::step() {
  if (open_.empty()) throw ProcessTerminated();
  const auto slot = uniform_below(rng_, open_.size());
  return insert(Pair::from_index(open_.at(slot)));
}

std::uint64_t ProcessState::c_uv_size(Pair uv) const {
  if (status(uv) == PairStatus::Edge) throw std::invalid_argument("c_uv_size: uv is an edge");
  const Vertex u = uv.u;
  const Vertex v = uv.v;
  std::vector<PairIndex> found;

  // wz disjoint from uv: cycle u-v-z-w with w ~ u, z ~ v.
  for (Vertex w : graph_.neighbors(u)) {
    for (Vertex z : graph_.neighbors(v)) {
      if (w == z) continue;
      const PairIndex idx = pair_index(w, z);
      if (status_.get(idx) == PairStatus::Open) found.push_back(idx);
    }
  }
  // wz shares an endpoint with uv: pair {a, w} where w reaches the other
  // endpoint b in two steps avoiding a, closing the cycle a-b-c-w.
  const auto shared = [&](Vertex a, Vertex b) {
    for (Vertex c : graph_.neighbors(b)) {
      for (Vertex w : graph_.neighbors(c)) {
        if (w == a || w == b) continue;
        const PairIndex idx = pair_index(a, w);
        if (status_.get(idx) == PairStatus::Open) found.push_back(idx);
      }
    }
  };
  shared(u, v);
  shared(v, u);

  std::sort(found.begin(), found.end());
  return static_cast<std::uint64_t>(std::unique(found.begin(), found.end()) - found.begin());
}

std::uint64_t run_until_terminated(ProcessState& state, const ObservationPlan& plan) {
  const auto& cps = plan.checkpoints;
  std::size_t next = 0;
  const auto fire = [&] {
    bool fired = false;
    while (next < cps.size() && cps[next] <= state.step_count()) {
      if (cps[next] == state.step_count() && !fired && plan.on_checkpoint) {
        plan.on_checkpoint(state);
        fired = true;
      }
      ++next;
    }
  };

  fire();
  while (!state.terminated()) {
    const StepRecord rec = state.step();
    if (plan.on_step) plan.on_step(state, rec);
    fire();
  }
  if (plan.on_termination) plan.on_termination(state);
  return state.step_count();
}

// ---------------------------------------------------------------------------

namespace {
bool ends_with(const std::string& s, const char* suffix) {
  const std::size_t n = std::strlen(suffix);
  return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}
}  // namespace

EdgeLogWriter::EdgeLogWriter(const std::string& path) : path_(path) {
  if (ends_with(path, ".gz")) {
    gz_ = gzopen(path.c_str(), "wb");
    if (gz_ == nullptr) throw std::runtime_error("cannot open edge log " + path);
  } else {
    file_ = std::fopen(path.c_str(), "wb");
    if (file_ == nullptr) throw std::runtime_error("cannot open edge log " + path);
  }
}

EdgeLogWriter::~EdgeLogWriter() {
  try {
    close();
  } catch (...) {
  }
}

void EdgeLogWriter::write(const StepRecord& r) {
  char buf[128];
  const int len = std::snprintf(buf, sizeof buf, "%llu\t%u\t%u\t%llu\t%llu\n",
                                static_cast<unsigned long long>(r.step), r.edge.u, r.edge.v,
                                static_cast<unsigned long long>(r.q_before),
                                static_cast<unsigned long long>(r.newly_closed));
  if (gz_ != nullptr) {
    if (gzwrite(static_cast<gzFile>(gz_), buf, static_cast<unsigned>(len)) != len)
      throw std::runtime_error("write failed: " + path_);
  } else if (file_ != nullptr) {
    if (std::fwrite(buf, 1, static_cast<std::size_t>(len), file_) != static_cast<std::size_t>(len))
      throw std::runtime_error("write failed: " + path_);
  }
}

void EdgeLogWriter::close() {
  if (gz_ != nullptr) {
    const int rc = gzclose(static_cast<gzFile>(gz_));
    gz_ = nullptr;
    if (rc != Z_OK) throw std::runtime_error("close failed: " + path_);
  }
  if (file_ != nullptr) {
    const int rc = std::fclose(file_);
    file_ = nullptr;
    if (rc != 0) throw std::runtime_error("close failed: " + path_);
  }
}

std::vector<EdgeLogLine> read_edge_log(const std::string& path) {
  gzFile in = gzopen(path.c_str(), "rb");
  if (in == nullptr) throw std::runtime_error("cannot open edge log " + path);
  std::vector<EdgeLogLine> out;
  char buf[256];
  while (gzgets(in, buf, sizeof buf) != nullptr) {
    unsigned long long step = 0, q = 0, closed = 0;
    unsigned a = 0, b = 0;
    if (std::sscanf(buf, "%llu\t%u\t%u\t%llu\t%llu", &step, &a, &b, &q, &closed) != 5) {
      gzclose(in);
      throw std::runtime_error("malformed edge log line in " + path);
    }
    out.push_back({step, Pair(a, b), q, closed});
  }
  gzclose(in);
  return out;
}

}  // namespace c4proc
