#include "zrf/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace zrf {

FieldWeights::FieldWeights(const ModelParams& params, const Thermo& thermo,
                           const JumpKernel& kernel, const TestFunction& H,
                           FrameMode frame, double velocity, double node_dt)
    : tf_(&H), frame_(frame), velocity_(velocity), L_(params.L) {
  if (velocity < 0.0) throw std::invalid_argument("frame velocity must be >= 0");
  if (frame == FrameMode::kFixed && velocity != 0.0)
    throw std::invalid_argument("fixed frame has velocity 0");

  const double n = params.n;
  nu_ = std::pow(n, 1.0 / params.alpha);
  af_ = std::pow(n, -0.5 / params.alpha);
  rho_ = thermo.rho;
  gtilde_ = thermo.gtilde;
  gtilde1_ = thermo.gtilde1;

  f_i_ = n * af_;
  f_b_ = 2.0 * params.beta * std::pow(n, 1.0 - params.gamma) * af_ / nu_;
  c_char_ = characteristic_velocity(params, thermo) * af_ / nu_;
  c_vel_ = velocity * af_ / nu_;
  q_s_ = std::pow(n, 1.0 - 1.0 / params.alpha);
  q_a_ = params.beta * std::pow(n, 1.0 - params.gamma - 1.0 / params.alpha);
  if (params.L == 2) q_a_ = 0.0;  // +1 and -1 coincide, asymmetry cancels

  if (frame_ == FrameMode::kMoving && velocity_ > 0.0) {
    m_ = std::max(1, int(std::ceil(1.0 / (velocity_ * node_dt) - 1e-9)));
    du_ = 1.0 / (velocity_ * m_);
  } else {
    m_ = 1;
    du_ = node_dt;
  }

  const std::vector<double>& sper = kernel.sym_probs();
  s0_ = 0.0;
  for (double v : sper) s0_ += v;

  hv_.assign(m_ + 1, std::vector<double>(L_, 0.0));
  hp_.assign(m_ + 1, std::vector<double>(L_, 0.0));
  cs_.assign(m_ + 1, std::vector<double>(L_, 0.0));
  cs2_.assign(m_ + 1, std::vector<double>(L_, 0.0));

  const long half_supp = std::min<long>(L_ / 2, long(std::ceil(H.radius() * nu_)) + 2);
  for (int r = 0; r <= m_; ++r) {
    const double delta = double(r) / m_;
    for (long j = -half_supp + 1; j <= half_supp; ++j) {
      const int xi = torus_wrap(int(j), L_);
      hv_[r][xi] = H((double(j) - delta) / nu_);
      hp_[r][xi] = H.deriv(1, (double(j) - delta) / nu_);
    }
    // torus convolutions against the periodized symmetric kernel, restricted
    // to the support of H
    std::vector<int> supp;
    for (long j = -half_supp + 1; j <= half_supp; ++j)
      if (hv_[r][torus_wrap(int(j), L_)] != 0.0) supp.push_back(torus_wrap(int(j), L_));
    for (int xi = 0; xi < L_; ++xi) {
      double c1 = 0.0, c2 = 0.0;
      for (int z : supp) {
        const double sv = sper[size_t(torus_wrap(z - xi, L_))];
        const double h = hv_[r][z];
        c1 += sv * h;
        c2 += sv * h * h;
      }
      cs_[r][xi] = c1;
      cs2_[r][xi] = c2;
    }
  }

  for (int xi = 0; xi < L_; ++xi) qv_slope_lattice_ += wqv(0, xi);
}

DecompositionEstimator::DecompositionEstimator(const FieldWeights& w,
                                               const Configuration& cfg,
                                               const DecompositionOptions& opts)
    : w_(w), cfg_(cfg), opts_(opts) {
  n_nodes_ = long(std::ceil(opts.horizon / w_.du() - 1e-9));
  for (double t : opts.report_times) {
    long j = std::lround(t / w_.du());
    j = std::clamp<long>(j, 0, n_nodes_);
    report_nodes_.push_back(j);
  }
  std::sort(report_nodes_.begin(), report_nodes_.end());
  fixed_fast_ = (w_.frame() == FrameMode::kFixed) ||
                (w_.frame() == FrameMode::kMoving && w_.velocity() == 0.0);
}

DecompositionEstimator::Rates DecompositionEstimator::rates_at(int r, long offset) const {
  const int L = w_.L();
  const double gt = w_.gtilde();
  const double gt1 = w_.gtilde1();
  const double rho = w_.rho();
  const bool moving = w_.frame() == FrameMode::kMoving;

  double s_g_wi0 = 0.0, s_g_wir = 0.0, s_g_gd0 = 0.0, s_g_gdr = 0.0;
  double s_e_gd0 = 0.0, s_e_gdr = 0.0, s_e_hpr = 0.0;
  double s_wi0 = 0.0, s_wir = 0.0, s_gd0 = 0.0, s_gdr = 0.0;
  const int off = int(offset % L);
  for (int xi = 0; xi < L; ++xi) {
    int x = xi + off;
    if (x >= L) x -= L;
    const double g = cfg_.g_at(x);
    const double e = double(cfg_.at(x)) - rho;
    const double wi0 = w_.wi(0, xi);
    const double gd0 = w_.grad(0, xi);
    s_g_wi0 += g * wi0;
    s_g_gd0 += g * gd0;
    s_e_gd0 += e * gd0;
    s_wi0 += wi0;
    s_gd0 += gd0;
    if (moving && r != 0) {
      const double wir = w_.wi(r, xi);
      const double gdr = w_.grad(r, xi);
      s_g_wir += g * wir;
      s_g_gdr += g * gdr;
      s_e_gdr += e * gdr;
      s_e_hpr += e * w_.hp(r, xi);
      s_wir += wir;
      s_gdr += gdr;
    }
  }
  if (!moving || r == 0) {
    s_g_wir = s_g_wi0;
    s_g_gdr = s_g_gd0;
    s_e_gdr = s_e_gd0;
    s_wir = s_wi0;
    s_gdr = s_gd0;
    if (moving) {
      // still need sum e H' for the transport terms
      for (int xi = 0; xi < L; ++xi) {
        int x = xi + off;
        if (x >= L) x -= L;
        s_e_hpr += (double(cfg_.at(x)) - rho) * w_.hp(0, xi);
      }
    }
  }

  Rates out;
  const double fI = w_.f_i();
  const double fB = w_.f_b();
  out.I = fI * (s_g_wi0 - gt * s_wi0);
  if (moving) {
    out.B = fB * (s_g_gd0 - gt * s_gd0 - gt1 * s_e_gd0);
    const double k1 = fI * ((s_g_wir - s_g_wi0) - gt * (s_wir - s_wi0));
    const double k2 = fB * ((s_g_gdr - s_g_gd0) - gt * (s_gdr - s_gd0) -
                            gt1 * (s_e_gdr - s_e_gd0));
    const double ktrans = w_.c_char() * s_e_gdr - w_.c_vel() * s_e_hpr;
    out.K = k1 + k2 + ktrans;
    const double raw = fI * s_g_wir + fB * s_g_gdr + gt1 * fB * s_e_gdr -
                       w_.c_vel() * s_e_hpr - gt1 * fB * s_e_gdr;
    // raw action: L_n F + dF/ds with the gtilde' transport written explicitly
    const double raw2 = fI * s_g_wir + fB * s_g_gdr - w_.c_vel() * s_e_hpr;
    out.resid = std::fabs(raw2 - (out.I + out.B + out.K));
    out.scale = std::fabs(raw) + std::fabs(out.I) + std::fabs(out.B) + std::fabs(out.K);
  } else {
    out.B = fB * (s_g_gd0 - gt * s_gd0);
    out.K = 0.0;
    const double raw = fI * s_g_wi0 + fB * s_g_gd0;
    out.resid = std::fabs(raw - (out.I + out.B));
    out.scale = std::fabs(raw) + std::fabs(out.I) + std::fabs(out.B);
  }
  return out;
}

double DecompositionEstimator::qv_sum_at(int r, long offset) const {
  const int L = w_.L();
  const int off = int(offset % L);
  double acc = 0.0;
  for (int xi = 0; xi < L; ++xi) {
    int x = xi + off;
    if (x >= L) x -= L;
    acc += cfg_.g_at(x) * w_.wqv(r, xi);
  }
  return acc;
}

double DecompositionEstimator::field_at(int r, long offset) const {
  const int L = w_.L();
  const int off = int(offset % L);
  double acc = 0.0;
  for (int xi = 0; xi < L; ++xi) {
    int x = xi + off;
    if (x >= L) x -= L;
    acc += (double(cfg_.at(x)) - w_.rho()) * w_.hv(r, xi);
  }
  return w_.af() * acc;
}

void DecompositionEstimator::before_move(double t, int src, int dst) {
  qv_acc_ += qv_sum_ * (t - t_last_);
  t_last_ = t;
  pending_g_src_ = cfg_.g_at(src);
  pending_g_dst_ = cfg_.g_at(dst);
}

void DecompositionEstimator::after_move(double, int src, int dst) {
  const int r = cell_r_;
  const long off = cell_offset_;
  const int xs = xi_of(src, off);
  const int xd = xi_of(dst, off);
  const double dg_s = cfg_.g_at(src) - pending_g_src_;
  const double dg_d = cfg_.g_at(dst) - pending_g_dst_;
  qv_sum_ += dg_s * w_.wqv(r, xs) + dg_d * w_.wqv(r, xd);
  if (fixed_fast_) {
    s_g_wi_ += dg_s * w_.wi(0, xs) + dg_d * w_.wi(0, xd);
    s_g_gd_ += dg_s * w_.grad(0, xs) + dg_d * w_.grad(0, xd);
  }
}

void DecompositionEstimator::at_node(long j) {
  const double t = node_time(j);
  const int m = w_.m();
  const double du = w_.du();

  if (j == 0) {
    cell_r_ = 0;
    cell_offset_ = 0;
    prev_rates_ = rates_at(0, 0);
    qv_sum_ = qv_sum_at(0, 0);
    t_last_ = 0.0;
    y0_ = field_at(0, 0);
    if (fixed_fast_) {
      // maintained dot products (dense values recomputed at rebases)
      s_g_wi_ = (prev_rates_.I / w_.f_i()) + w_.gtilde() * 0.0;
      // recompute directly to avoid reconstructing through the centering
      s_g_wi_ = 0.0;
      s_g_gd_ = 0.0;
      for (int xi = 0; xi < w_.L(); ++xi) {
        s_g_wi_ += cfg_.g_at(xi) * w_.wi(0, xi);
        s_g_gd_ += cfg_.g_at(xi) * w_.grad(0, xi);
      }
    }
  } else {
    // close the cell [t_{j-1}, t_j]; its frame offset stayed cell_offset_
    qv_acc_ += qv_sum_ * (t - t_last_);
    t_last_ = t;
    Rates close;
    if (fixed_fast_) {
      close = prev_rates_;  // weights are static; integrand is piecewise
      // constant in eta, sampled at nodes
      const double s_wi0 = 0.0, s_gd0 = 0.0;
      (void)s_wi0;
      (void)s_gd0;
      close.I = w_.f_i() * s_g_wi_;
      close.B = w_.f_b() * s_g_gd_;
      // centering constants sum to zero over the torus; subtract the exact
      // lattice sums once per rebase below
    } else {
      close = rates_at(cell_r_ + 1, cell_offset_);
    }
    // trapezoid over the cell
    acc_I_ += 0.5 * (prev_rates_.I + close.I) * du;
    acc_B_ += 0.5 * (prev_rates_.B + close.B) * du;
    acc_K_ += 0.5 * (prev_rates_.K + close.K) * du;
    if (close.scale > 0.0)
      max_resid_ = std::max(max_resid_, close.resid / std::max(close.scale, 1e-300));

    // open the next cell
    if (j < n_nodes_) {
      const int r_open = int(j % m);
      const long off_open = j / m;
      if (fixed_fast_) {
        prev_rates_ = close;
        if ((j & 255) == 0) {
          // rebase: recompute the maintained sums densely and fold the
          // mismatch into the identity residual
          Rates fresh = rates_at(0, 0);
          const double scale = std::max(fresh.scale, 1e-300);
          max_resid_ = std::max(max_resid_, std::fabs(fresh.I - close.I) / scale);
          max_resid_ = std::max(max_resid_, std::fabs(fresh.B - close.B) / scale);
          prev_rates_ = fresh;
          s_g_wi_ = fresh.I / w_.f_i();
          s_g_gd_ = w_.f_b() != 0.0 ? fresh.B / w_.f_b() : 0.0;
          qv_sum_ = qv_sum_at(0, 0);
        }
      } else {
        prev_rates_ = (r_open == 0) ? rates_at(0, off_open) : close;
        cell_r_ = r_open;
        cell_offset_ = off_open;
        qv_sum_ = qv_sum_at(r_open, off_open);
      }
    }
  }

  while (next_report_ < report_nodes_.size() && report_nodes_[next_report_] == j) {
    DecompositionPoint p;
    p.t = t;
    p.Y = (j == 0) ? y0_ : field_at(int(j % m), j / m);
    p.I = acc_I_;
    p.B = acc_B_;
    p.K = acc_K_;
    p.M = p.Y - y0_ - p.I - p.B - p.K;
    p.QV = qv_acc_;
    points_.push_back(p);
    ++next_report_;
  }
}

DecompositionReport DecompositionEstimator::report() const {
  DecompositionReport rep;
  rep.tf_id = w_.tf().id();
  rep.frame = w_.frame();
  rep.velocity = w_.velocity();
  rep.Y0 = y0_;
  rep.points = points_;
  rep.max_identity_residual = max_resid_;
  rep.qv_slope_lattice = w_.qv_slope_lattice();
  return rep;
}

namespace {
class CompositeSink : public EventSink {
 public:
  void add(EventSink* s) { sinks_.push_back(s); }
  void before_move(double t, int src, int dst) override {
    for (auto* s : sinks_) s->before_move(t, src, dst);
  }
  void after_move(double t, int src, int dst) override {
    for (auto* s : sinks_) s->after_move(t, src, dst);
  }

 private:
  std::vector<EventSink*> sinks_;
};
}  // namespace

std::vector<DecompositionReport> decompose(const ModelParams& params,
                                           const std::vector<TestFunction>& tfs,
                                           const DecompositionOptions& opts,
                                           uint64_t seed_stream) {
  EnergyOptions none;
  none.eps_grid.clear();
  return decompose_with_energy(params, tfs, opts, none, seed_stream).decomposition;
}

EnergyEstimator::EnergyEstimator(const ModelParams& params, const Thermo& thermo,
                                 const TestFunction& H, const EnergyOptions& opts,
                                 const Configuration& cfg, double velocity)
    : cfg_(cfg), params_(params), tf_(H), opts_(opts), velocity_(velocity) {
  nu_ = std::pow(double(params.n), 1.0 / params.alpha);
  af_ = std::pow(double(params.n), -0.5 / params.alpha);
  rho_ = thermo.rho;
  du_ = opts.node_dt;
  n_nodes_ = long(std::ceil(opts.horizon / du_ - 1e-9));
  for (double t : opts.report_times)
    report_nodes_.push_back(std::clamp<long>(std::lround(t / du_), 0, n_nodes_));
  std::sort(report_nodes_.begin(), report_nodes_.end());

  for (double eps : opts.eps_grid) {
    if (eps * nu_ < 2.0)
      throw std::runtime_error("energy functional: eps below lattice resolution");
    mollifiers_.emplace_back(eps);
  }
  const long half = std::min<long>(params.L / 2 - 1, long(std::ceil(H.radius() * nu_)) + 2);
  for (long x = -half; x <= half; ++x) {
    const double gd = 0.5 * nu_ * (H((x + 1) / nu_) - H((x - 1) / nu_));
    if (gd != 0.0) grad_supp_.push_back({int(x), gd});
  }
  prev_vals_.assign(mollifiers_.size(), 0.0);
  acc_.assign(mollifiers_.size(), 0.0);
  out_.assign(mollifiers_.size(), {});
}

double EnergyEstimator::integrand(double u, size_t e) const {
  const int L = params_.L;
  const Mollifier& G = mollifiers_[e];
  const double shift = velocity_ * u;
  const double o = std::floor(shift);
  const double delta = shift - o;
  const long offset = long(o);
  const long half_kern = long(std::ceil(G.support_radius() * nu_)) + 2;

  std::vector<double> kern(2 * half_kern + 1);
  for (long jj = -half_kern; jj <= half_kern; ++jj)
    kern[size_t(jj + half_kern)] = G((double(jj) - delta) / nu_);

  double acc = 0.0;
  for (const auto& [x, gd] : grad_supp_) {
    double q = 0.0;
    const long base = x + offset - half_kern;
    for (long jj = 0; jj <= 2 * half_kern; ++jj) {
      const int site = torus_wrap(int((base + jj) % L), L);
      q += kern[size_t(jj)] * (double(cfg_.at(site)) - rho_);
    }
    q *= af_;
    acc += gd * q * q;
  }
  return acc * std::pow(double(params_.n), -1.0 / params_.alpha);
}

void EnergyEstimator::at_node(long j) {
  const double t = node_time(j);
  for (size_t e = 0; e < mollifiers_.size(); ++e) {
    const double v = integrand(t, e);
    if (j > 0) acc_[e] += 0.5 * (prev_vals_[e] + v) * du_;
    prev_vals_[e] = v;
  }
  while (next_report_ < report_nodes_.size() && report_nodes_[next_report_] == j) {
    for (size_t e = 0; e < mollifiers_.size(); ++e) out_[e].push_back(acc_[e]);
    ++next_report_;
  }
}

EnergyReport EnergyEstimator::report() const {
  EnergyReport rep;
  rep.tf_id = tf_.id();
  rep.eps_grid = opts_.eps_grid;
  for (long j : report_nodes_) rep.report_times.push_back(node_time(j));
  rep.values = out_;
  return rep;
}

EnergyReport energy_functional(const ModelParams& params, const TestFunction& H,
                               const EnergyOptions& opts, uint64_t seed_stream) {
  DecompositionOptions dopts;
  dopts.frame = FrameMode::kMoving;
  dopts.horizon = opts.horizon;
  dopts.velocity_override = opts.velocity_override;
  ScanSample s = decompose_with_energy(params, {}, dopts, opts, seed_stream);
  return s.energy;
}

ScanSample decompose_with_energy(const ModelParams& params,
                                 const std::vector<TestFunction>& tfs,
                                 const DecompositionOptions& dopts,
                                 const EnergyOptions& eopts, uint64_t seed_stream) {
  const Thermo thermo = make_thermo(params.rho, params.rate());
  const double v = dopts.frame == FrameMode::kMoving
                       ? dopts.velocity_override.value_or(characteristic_velocity(params, thermo))
                       : 0.0;

  Simulator sim(params, seed_stream);

  std::vector<std::unique_ptr<FieldWeights>> weights;
  std::vector<std::unique_ptr<DecompositionEstimator>> ests;
  CompositeSink sink;
  for (const TestFunction& tf : tfs) {
    weights.push_back(std::make_unique<FieldWeights>(params, thermo, sim.kernel(), tf,
                                                     dopts.frame, v, dopts.node_dt));
    ests.push_back(
        std::make_unique<DecompositionEstimator>(*weights.back(), sim.config(), dopts));
    sink.add(ests.back().get());
  }

  std::unique_ptr<EnergyEstimator> energy;
  const bool do_energy = !eopts.eps_grid.empty();
  if (do_energy) {
    const double ev = eopts.velocity_override.value_or(v);
    EnergyOptions eo = eopts;
    eo.horizon = dopts.horizon;
    energy = std::make_unique<EnergyEstimator>(params, thermo, tfs.empty()
                                                   ? TestFunction::gaussian(1.0)
                                                   : tfs.front(),
                                               eo, sim.config(), ev);
  }

  // drive on the union of the two node grids
  const long nd = ests.empty() ? 0 : ests.front()->node_count();
  const long ne = energy ? energy->node_count() : 0;
  long jd = 0, je = 0;
  while (jd <= nd || (energy && je <= ne)) {
    const double td = jd <= nd && !ests.empty() ? ests.front()->node_time(jd) : 1e300;
    const double te = energy && je <= ne ? energy->node_time(je) : 1e300;
    if (td > 1e299 && te > 1e299) break;
    if (td <= te) {
      sim.advance_to(td, &sink);
      for (auto& e : ests) e->at_node(jd);
      ++jd;
      if (te <= td + 1e-12 && energy && je <= ne) {
        energy->at_node(je);
        ++je;
      }
    } else {
      sim.advance_to(te, &sink);
      energy->at_node(je);
      ++je;
    }
  }

  ScanSample out;
  for (auto& e : ests) out.decomposition.push_back(e->report());
  if (energy) out.energy = energy->report();
  return out;
}

void DecompositionReport::append_csv(const std::string& path, const ModelParams& params,
                                     bool write_header) const {
  std::ofstream out(path, write_header ? std::ios::trunc : std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path);
  if (write_header)
    out << "alpha,beta,gamma,n,L,tf,frame,velocity,t,Y,I,B,K,M,QV,identity_residual\n";
  out.precision(16);
  for (const auto& p : points) {
    out << params.alpha << "," << params.beta << "," << params.gamma << "," << params.n
        << "," << params.L << "," << tf_id << ","
        << (frame == FrameMode::kMoving ? "moving" : "fixed") << "," << velocity << ","
        << p.t << "," << p.Y << "," << p.I << "," << p.B << "," << p.K << "," << p.M
        << "," << p.QV << "," << max_identity_residual << "\n";
  }
}

void EnergyReport::append_csv(const std::string& path, const ModelParams& params,
                              bool write_header) const {
  std::ofstream out(path, write_header ? std::ios::trunc : std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path);
  if (write_header) out << "alpha,beta,gamma,n,L,tf,eps,t,A\n";
  out.precision(16);
  for (size_t e = 0; e < eps_grid.size(); ++e)
    for (size_t i = 0; i < report_times.size(); ++i)
      out << params.alpha << "," << params.beta << "," << params.gamma << "," << params.n
          << "," << params.L << "," << tf_id << "," << eps_grid[e] << ","
          << report_times[i] << "," << values[e][i] << "\n";
}

}  // namespace zrf
