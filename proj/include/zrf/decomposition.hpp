#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zrf/fields.hpp"
#include "zrf/kmc.hpp"
#include "zrf/testfunction.hpp"

namespace zrf {

struct DecompositionOptions {
  FrameMode frame = FrameMode::kFixed;
  double horizon = 1.0;
  double node_dt = 1e-3;                    // target quadrature step (macroscopic)
  std::vector<double> report_times;         // snapped to the node grid
  std::optional<double> velocity_override;  // default: characteristic velocity
};

struct DecompositionPoint {
  double t = 0.0;
  double Y = 0.0;   // field at t (exact frame shift)
  double I = 0.0;   // symmetric drift integral
  double B = 0.0;   // asymmetric drift integral
  double K = 0.0;   // frame-correction integral (zero in the fixed frame)
  double M = 0.0;   // martingale residual Y - Y0 - I - B - K
  double QV = 0.0;  // predictable quadratic variation, exact over events
};

struct DecompositionReport {
  std::string tf_id;
  FrameMode frame = FrameMode::kFixed;
  double velocity = 0.0;
  double Y0 = 0.0;
  std::vector<DecompositionPoint> points;
  // max relative gap between the raw generator action and the I/B/K split,
  // and between maintained and freshly recomputed sums
  double max_identity_residual = 0.0;
  // lattice value of E[QV rate] / gtilde; the continuum target is 2 E_quad(H)
  double qv_slope_lattice = 0.0;

  void append_csv(const std::string& path, const ModelParams& params,
                  bool write_header) const;
};

// Weight tables shared by all replicas of one (H, params, frame) setup.
// The delta family r = 0..m covers sub-lattice frame shifts r/m; the integer
// part of the shift is applied by index rotation at evaluation time.
class FieldWeights {
 public:
  FieldWeights(const ModelParams& params, const Thermo& thermo, const JumpKernel& kernel,
               const TestFunction& H, FrameMode frame, double velocity, double node_dt);

  int m() const { return m_; }
  double du() const { return du_; }
  double velocity() const { return velocity_; }
  FrameMode frame() const { return frame_; }
  const TestFunction& tf() const { return *tf_; }
  int L() const { return L_; }

  double hv(int r, int xi) const { return hv_[r][xi]; }
  double hp(int r, int xi) const { return hp_[r][xi]; }
  double wi(int r, int xi) const { return cs_[r][xi] - s0_ * hv_[r][xi]; }
  double grad(int r, int xi) const {
    return 0.5 * nu_ * (hv_[r][xi + 1 == L_ ? 0 : xi + 1] - hv_[r][xi == 0 ? L_ - 1 : xi - 1]);
  }
  double wqv(int r, int xi) const {
    const double h = hv_[r][xi];
    double w = q_s_ * (cs2_[r][xi] - 2.0 * h * cs_[r][xi] + s0_ * h * h);
    if (q_a_ != 0.0) {
      const double dp = hv_[r][xi + 1 == L_ ? 0 : xi + 1] - h;
      const double dm = hv_[r][xi == 0 ? L_ - 1 : xi - 1] - h;
      w += q_a_ * (dp * dp - dm * dm);
    }
    return w;
  }

  double nu() const { return nu_; }
  double af() const { return af_; }
  double f_i() const { return f_i_; }
  double f_b() const { return f_b_; }
  double c_char() const { return c_char_; }
  double c_vel() const { return c_vel_; }
  double rho() const { return rho_; }
  double gtilde() const { return gtilde_; }
  double gtilde1() const { return gtilde1_; }
  double qv_slope_lattice() const { return qv_slope_lattice_; }

 private:
  const TestFunction* tf_;
  FrameMode frame_;
  double velocity_;
  int m_ = 1;
  double du_ = 1e-3;
  int L_;
  double nu_, af_, s0_;
  double f_i_, f_b_, c_char_, c_vel_, q_s_, q_a_;
  double rho_, gtilde_, gtilde1_;
  double qv_slope_lattice_ = 0.0;
  std::vector<std::vector<double>> hv_, hp_, cs_, cs2_;
};

// Accumulates the decomposition along one trajectory.  Drive it with
// Simulator::advance_to(node_time(j), &sink) followed by at_node(j) for
// j = 0..node_count().
class DecompositionEstimator : public EventSink {
 public:
  DecompositionEstimator(const FieldWeights& w, const Configuration& cfg,
                         const DecompositionOptions& opts);

  long node_count() const { return n_nodes_; }
  double node_time(long j) const { return double(j) * w_.du(); }

  void at_node(long j);
  DecompositionReport report() const;

  void before_move(double t, int src, int dst) override;
  void after_move(double t, int src, int dst) override;

 private:
  struct Sums {  // dense dot products of site values against weight arrays
    double g_wi0 = 0.0, g_gd0 = 0.0, e_gd0 = 0.0;
    double g_wir = 0.0, g_gdr = 0.0, e_gdr = 0.0, e_hpr = 0.0;
    double c_wi0 = 0.0, c_gd0 = 0.0, c_wir = 0.0, c_gdr = 0.0;  // eta-free sums
  };
  struct Rates {
    double I = 0.0, B = 0.0, K = 0.0, resid = 0.0, scale = 0.0;
  };
  Sums dense_sums(int r, long offset) const;
  Rates rates_from(const Sums& s) const;
  double qv_sum_at(int r, long offset) const;
  double field_at(int r, long offset) const;
  int xi_of(int x, long offset) const {
    int xi = x - int(offset % w_.L());
    if (xi < 0) xi += w_.L();
    return xi;
  }

  const FieldWeights& w_;
  const Configuration& cfg_;
  DecompositionOptions opts_;
  long n_nodes_ = 0;
  std::vector<long> report_nodes_;

  Rates prev_rates_;
  double acc_I_ = 0.0, acc_B_ = 0.0, acc_K_ = 0.0;
  double qv_acc_ = 0.0;
  double qv_sum_ = 0.0;
  double t_last_ = 0.0;
  int cell_r_ = 0;
  long cell_offset_ = 0;
  bool fixed_fast_ = false;
  // maintained sums and their eta-free centering constants (fast path)
  double s_g_wi_ = 0.0, s_g_gd_ = 0.0;
  double c_wi0_ = 0.0, c_gd0_ = 0.0;
  double y0_ = 0.0;
  double max_resid_ = 0.0;
  size_t next_report_ = 0;
  std::vector<DecompositionPoint> points_;
  double pending_g_src_ = 0.0, pending_g_dst_ = 0.0;
};

// Energy functional A^{n,eps,->}_{0,t}(H) over an eps grid.
struct EnergyOptions {
  std::vector<double> eps_grid{1.0, 0.5, 0.25};
  double node_dt = 0.01;
  std::vector<double> report_times;
};

struct EnergyReport {
  std::string tf_id;
  std::vector<double> eps_grid;
  std::vector<double> report_times;
  // values[e][i] = A^{n,eps_e,->}_{0,t_i}(H)
  std::vector<std::vector<double>> values;

  void append_csv(const std::string& path, const ModelParams& params,
                  bool write_header) const;
};

// Evaluates the mollified-square functional on the running configuration;
// requires eps * n^{1/alpha} >= 2 (lattice resolution).
class EnergyEstimator {
 public:
  EnergyEstimator(const ModelParams& params, const Thermo& thermo, const TestFunction& H,
                  const EnergyOptions& opts, const Configuration& cfg, double velocity,
                  double horizon);

  long node_count() const { return n_nodes_; }
  double node_time(long j) const { return double(j) * du_; }
  void at_node(long j);
  EnergyReport report() const;

 private:
  double integrand(double u, size_t e) const;

  const Configuration& cfg_;
  ModelParams params_;
  TestFunction tf_;
  EnergyOptions opts_;
  double velocity_;
  double nu_, af_, rho_;
  long n_nodes_ = 0;
  std::vector<long> report_nodes_;
  double du_;
  std::vector<Mollifier> mollifiers_;
  std::vector<std::pair<int, double>> grad_supp_;  // (site offset, discrete gradient)
  std::vector<double> prev_vals_;
  std::vector<double> acc_;
  size_t next_report_ = 0;
  std::vector<std::vector<double>> out_;
};

struct ScanSample {
  std::vector<DecompositionReport> decomposition;
  EnergyReport energy;
};

// Builds the (expensive) weight tables once and runs replicas against them.
// When energy_eps is nonempty the energy functional of tfs.front() is
// evaluated on the same trajectory (common random numbers).
class DecompositionRunner {
 public:
  DecompositionRunner(const ModelParams& params, std::vector<TestFunction> tfs,
                      const DecompositionOptions& dopts, const EnergyOptions& eopts = {});

  ScanSample run(uint64_t seed_stream) const;
  double velocity() const { return velocity_; }
  const Thermo& thermo() const { return thermo_; }
  const FieldWeights& weights(size_t i) const { return *weights_[i]; }

 private:
  ModelParams params_;
  std::vector<TestFunction> tfs_;
  DecompositionOptions dopts_;
  EnergyOptions eopts_;
  bool do_energy_;
  Thermo thermo_;
  JumpKernel kernel_;
  double velocity_;
  std::vector<std::unique_ptr<FieldWeights>> weights_;
};

// single-replica conveniences
std::vector<DecompositionReport> decompose(const ModelParams& params,
                                           const std::vector<TestFunction>& tfs,
                                           const DecompositionOptions& opts,
                                           uint64_t seed_stream = 0);
EnergyReport energy_functional(const ModelParams& params, const TestFunction& H,
                               const EnergyOptions& opts, double horizon,
                               uint64_t seed_stream = 0);

}  // namespace zrf
