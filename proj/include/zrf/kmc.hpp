#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zrf/equilibrium.hpp"
#include "zrf/model.hpp"
#include "zrf/rng.hpp"

namespace zrf {

// prefix-sum tree over per-site weights g(eta(x)); O(log L) sample/update
class FenwickTree {
 public:
  FenwickTree() = default;
  explicit FenwickTree(const std::vector<double>& values) { rebuild(values); }

  void rebuild(const std::vector<double>& values);
  void add(int i, double delta) {
    for (int j = i + 1; j <= n_; j += j & -j) tree_[j] += delta;
    total_ += delta;
  }
  double total() const { return total_; }

  // smallest index with prefix sum > u; u in [0, total)
  int sample(double u) const {
    int pos = 0;
    int mask = top_;
    while (mask > 0) {
      const int next = pos + mask;
      if (next <= n_ && tree_[next] <= u) {
        u -= tree_[next];
        pos = next;
      }
      mask >>= 1;
    }
    return pos;
  }

 private:
  std::vector<double> tree_;  // 1-indexed
  double total_ = 0.0;
  int n_ = 0;
  int top_ = 0;
};

// occupancy vector with cached rates and the sampling index
class Configuration {
 public:
  Configuration(std::vector<int32_t> occupancy, const RateFunction& g);

  static Configuration sample_equilibrium(const ModelParams& params, Rng& rng);

  int L() const { return static_cast<int>(occ_.size()); }
  int32_t at(int x) const { return occ_[x]; }
  const std::vector<int32_t>& occupancy() const { return occ_; }
  int64_t total_particles() const { return total_particles_; }
  double g_at(int x) const { return gval_[x]; }
  double total_weight() const { return weights_.total(); }
  const RateFunction& rate() const { return g_; }

  int sample_site(Rng& rng) const { return weights_.sample(rng.uniform() * weights_.total()); }

  // particle moves x -> y (distinct sites)
  void apply_move(int x, int y);

  // recompute the tree from scratch; returns drift of the cached total
  double audit();

 private:
  std::vector<int32_t> occ_;
  std::vector<double> gval_;
  FenwickTree weights_;
  RateFunction g_;
  int64_t total_particles_ = 0;
};

struct Event {
  double t;
  int32_t source;
  int32_t dest;
};

class EventSink {
 public:
  virtual ~EventSink() = default;
  // called with the configuration still in its pre-jump state
  virtual void before_move(double t, int src, int dst) = 0;
  virtual void after_move(double t, int src, int dst) = 0;
};

enum class AdvanceStatus { kReachedTime, kAbsorbing, kBudgetExhausted };

// Continuous-time dynamics: total event rate n * sum_x g(eta(x)), sources
// weighted by g, displacements from the periodized kernel.  The clock is
// macroscopic (the factor n lives in the rate).
class Simulator {
 public:
  Simulator(const ModelParams& params, uint64_t seed_stream = 0);
  Simulator(const ModelParams& params, Configuration initial, uint64_t seed_stream = 0);

  // run until time T or the event budget is hit; the pending waiting time is
  // kept across calls so the event stream does not depend on the call schedule
  AdvanceStatus advance_to(double T, EventSink* sink = nullptr);

  double time() const { return t_; }
  uint64_t events() const { return events_; }
  uint64_t proper_moves() const { return moves_; }
  const Configuration& config() const { return cfg_; }
  const JumpKernel& kernel() const { return kernel_; }
  const ModelParams& params() const { return params_; }
  void set_event_budget(uint64_t budget) { event_budget_ = budget; }

 private:
  ModelParams params_;
  JumpKernel kernel_;
  Configuration cfg_;
  Rng rng_;
  double t_ = 0.0;
  double pending_event_t_ = -1.0;  // <0: none pending
  uint64_t events_ = 0;
  uint64_t moves_ = 0;
  uint64_t event_budget_ = UINT64_MAX;
  uint64_t audit_mask_ = (1ull << 22) - 1;
};

struct Snapshot {
  double t = 0.0;
  std::vector<int32_t> occupancy;
};

struct Trajectory {
  ModelParams params;
  std::vector<Snapshot> snapshots;
  uint64_t events = 0;
  bool budget_exhausted = false;
};

// simulate and record full occupancy at the scheduled macroscopic times
Trajectory run(const ModelParams& params, std::span<const double> snapshot_times,
               uint64_t seed_stream = 0, EventSink* sink = nullptr,
               uint64_t event_budget = UINT64_MAX);

void write_trajectory(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory(const std::string& path);

inline int torus_wrap(int x, int L) { return ((x % L) + L) % L; }

// centered representative in (-L/2, L/2]
inline int torus_rep(int x, int L) {
  int r = torus_wrap(x, L);
  return r > L / 2 ? r - L : r;
}

}  // namespace zrf
