#include "zrf/kmc.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace zrf {

void FenwickTree::rebuild(const std::vector<double>& values) {
  n_ = static_cast<int>(values.size());
  top_ = n_ > 0 ? std::bit_floor(static_cast<unsigned>(n_)) : 0;
  tree_.assign(n_ + 1, 0.0);
  total_ = 0.0;
  for (int i = 0; i < n_; ++i) {
    tree_[i + 1] += values[i];
    const int parent = (i + 1) + ((i + 1) & -(i + 1));
    if (parent <= n_) tree_[parent] += tree_[i + 1];
    total_ += values[i];
  }
}

Configuration::Configuration(std::vector<int32_t> occupancy, const RateFunction& g)
    : occ_(std::move(occupancy)), g_(g) {
  gval_.resize(occ_.size());
  for (size_t i = 0; i < occ_.size(); ++i) {
    if (occ_[i] < 0) throw std::invalid_argument("negative occupancy");
    gval_[i] = g_(occ_[i]);
    total_particles_ += occ_[i];
  }
  weights_.rebuild(gval_);
}

Configuration Configuration::sample_equilibrium(const ModelParams& params, Rng& rng) {
  const MarginalSampler sampler(params.rho, params.rate());
  std::vector<int32_t> occ(params.L);
  sampler.fill(occ, rng);
  return Configuration(std::move(occ), params.rate());
}

void Configuration::apply_move(int x, int y) {
  occ_[x] -= 1;
  occ_[y] += 1;
  const double gx = g_(occ_[x]);
  const double gy = g_(occ_[y]);
  weights_.add(x, gx - gval_[x]);
  weights_.add(y, gy - gval_[y]);
  gval_[x] = gx;
  gval_[y] = gy;
}

double Configuration::audit() {
  double drift = weights_.total();
  weights_.rebuild(gval_);
  drift -= weights_.total();
  return drift;
}

Simulator::Simulator(const ModelParams& params, uint64_t seed_stream)
    : params_(params),
      kernel_(params),
      cfg_([&] {
        Rng init(params.seed, seed_stream * 2 + 1);
        return Configuration::sample_equilibrium(params, init);
      }()),
      rng_(params.seed, seed_stream * 2) {}

Simulator::Simulator(const ModelParams& params, Configuration initial, uint64_t seed_stream)
    : params_(params), kernel_(params), cfg_(std::move(initial)), rng_(params.seed, seed_stream * 2) {
  if (cfg_.L() != params.L) throw std::invalid_argument("configuration size != L");
}

AdvanceStatus Simulator::advance_to(double T, EventSink* sink) {
  const double n = static_cast<double>(params_.n);
  while (true) {
    if (pending_event_t_ < 0.0) {
      const double rate = n * cfg_.total_weight();
      if (rate <= 0.0) {
        t_ = T;
        return AdvanceStatus::kAbsorbing;
      }
      pending_event_t_ = t_ + rng_.exponential(rate);
    }
    if (pending_event_t_ > T) {
      t_ = T;
      return AdvanceStatus::kReachedTime;
    }
    if (events_ >= event_budget_) return AdvanceStatus::kBudgetExhausted;
    t_ = pending_event_t_;
    pending_event_t_ = -1.0;
    const int x = cfg_.sample_site(rng_);
    const int d = kernel_.sample_displacement(rng_);
    ++events_;
    if (d != 0) {
      const int y = torus_wrap(x + d, cfg_.L());
      if (sink) sink->before_move(t_, x, y);
      cfg_.apply_move(x, y);
      if (sink) sink->after_move(t_, x, y);
      ++moves_;
    }
    if ((events_ & audit_mask_) == 0) cfg_.audit();
  }
}

Trajectory run(const ModelParams& params, std::span<const double> snapshot_times,
               uint64_t seed_stream, EventSink* sink, uint64_t event_budget) {
  Simulator sim(params, seed_stream);
  sim.set_event_budget(event_budget);
  Trajectory traj;
  traj.params = params;
  double last = 0.0;
  for (double t : snapshot_times) {
    if (t < last) throw std::invalid_argument("snapshot times must be nondecreasing");
    last = t;
    const AdvanceStatus st = sim.advance_to(t, sink);
    if (st == AdvanceStatus::kBudgetExhausted) {
      traj.budget_exhausted = true;
      break;
    }
    traj.snapshots.push_back({t, sim.config().occupancy()});
  }
  traj.events = sim.events();
  return traj;
}

namespace {
constexpr char kMagic[8] = {'Z', 'R', 'F', 'T', 'R', 'J', '0', '1'};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace

void write_trajectory(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.write(kMagic, 8);
  const ModelParams& p = traj.params;
  put(out, p.alpha);
  put(out, p.beta);
  put(out, p.gamma);
  put(out, p.rho);
  put(out, p.rate_power);
  put(out, static_cast<uint32_t>(p.n));
  put(out, static_cast<uint32_t>(p.L));
  put(out, static_cast<uint32_t>(p.rate_id));
  put(out, p.seed);
  for (const Snapshot& s : traj.snapshots) {
    put(out, s.t);
    out.write(reinterpret_cast<const char*>(s.occupancy.data()),
              std::streamsize(s.occupancy.size() * sizeof(int32_t)));
  }
}

Trajectory read_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("bad trajectory file");
  Trajectory traj;
  ModelParams& p = traj.params;
  p.alpha = get<double>(in);
  p.beta = get<double>(in);
  p.gamma = get<double>(in);
  p.rho = get<double>(in);
  p.rate_power = get<double>(in);
  p.n = static_cast<int>(get<uint32_t>(in));
  p.L = static_cast<int>(get<uint32_t>(in));
  p.rate_id = static_cast<RateId>(get<uint32_t>(in));
  p.seed = get<uint64_t>(in);
  while (true) {
    Snapshot s;
    s.t = get<double>(in);
    if (!in) break;
    s.occupancy.resize(p.L);
    in.read(reinterpret_cast<char*>(s.occupancy.data()),
            std::streamsize(size_t(p.L) * sizeof(int32_t)));
    if (!in) throw std::runtime_error("truncated trajectory record");
    traj.snapshots.push_back(std::move(s));
  }
  return traj;
}

}  // namespace zrf
