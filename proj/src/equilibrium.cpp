#include "zrf/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace zrf {

namespace {

// Accumulate sum_k w(k) theta^k / g(k)! for up to three weight functions at
// once.  Terms are generated by the recurrence t_{k+1} = t_k theta/g(k+1).
// The ratio-test guard catches theta at or beyond theta_*.
struct SeriesEval {
  double z = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0, eg = 0.0;
};

SeriesEval eval_series(double theta, const RateFunction& g) {
  SeriesEval out;
  double term = 1.0;
  out.z = 1.0;
  if (theta == 0.0) return out;
  const int k_hard_cap = 2'000'000;
  for (int k = 1; k <= k_hard_cap; ++k) {
    const double gk = g(k);
    const double ratio = theta / gk;
    if (k > 64 && ratio >= 0.99)
      throw std::runtime_error("fugacity series diverges: theta too close to theta_*");
    term *= ratio;
    const double kd = k;
    out.z += term;
    out.m1 += kd * term;
    out.m2 += kd * kd * term;
    out.m3 += kd * kd * kd * term;
    out.eg += gk * term;
    if (term < 1e-16 * out.z && kd * kd * kd * term < 1e-16 * std::max(out.m3, 1.0))
      break;
    if (k == k_hard_cap)
      throw std::runtime_error("fugacity series did not converge");
  }
  return out;
}

}  // namespace

double partition_function(double theta, const RateFunction& g) {
  if (theta < 0.0) throw std::invalid_argument("theta must be >= 0");
  if (theta >= g.theta_star())
    throw std::runtime_error("theta >= theta_*: partition function diverges");
  return eval_series(theta, g).z;
}

double density_of_fugacity(double theta, const RateFunction& g) {
  const SeriesEval s = eval_series(theta, g);
  return s.m1 / s.z;
}

double expected_g(double theta, const RateFunction& g) {
  const SeriesEval s = eval_series(theta, g);
  return s.eg / s.z;
}

double fugacity_of_density(double rho, const RateFunction& g) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const double theta_star = g.theta_star();
  double lo = 0.0;
  double hi = std::isfinite(theta_star) ? theta_star * (1.0 - 1e-13) : 1.0;
  // expand the bracket for rates with theta_* = infinity
  while (density_of_fugacity(hi, g) < rho) {
    if (std::isfinite(theta_star)) {
      if (1.0 - hi / theta_star < 1e-12)
        throw std::runtime_error("rho out of range for this rate");
      hi = theta_star - 0.5 * (theta_star - hi);
    } else {
      hi *= 2.0;
      if (hi > 1e12) throw std::runtime_error("rho out of range for this rate");
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = density_of_fugacity(mid, g);
    if (std::fabs(r - rho) < 1e-11) return mid;
    (r < rho ? lo : hi) = mid;
    if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
  }
  const double theta = 0.5 * (lo + hi);
  if (std::fabs(density_of_fugacity(theta, g) - rho) > 1e-10)
    throw std::runtime_error("fugacity inversion did not reach tolerance");
  return theta;
}

Thermo make_thermo(double rho, const RateFunction& g) {
  Thermo t;
  t.rho = rho;
  t.theta_star = g.theta_star();
  t.theta = fugacity_of_density(rho, g);
  const SeriesEval s = eval_series(t.theta, g);
  t.Z = s.z;
  const double m1 = s.m1 / s.z;
  const double m2 = s.m2 / s.z;
  const double m3raw = s.m3 / s.z;
  t.sigma2 = m2 - m1 * m1;
  t.m3 = m3raw - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
  t.gtilde = t.theta;
  t.gtilde1 = t.gtilde / t.sigma2;

  // the identities behind gtilde and gtilde1 are re-checked from the series
  const double eg = s.eg / s.z;
  if (std::fabs(eg - t.theta) > 1e-8 * std::max(1.0, t.theta))
    throw std::runtime_error("E[g] != theta: series identity violated");

  const double h = 1e-4 * rho;
  const double th_p = fugacity_of_density(rho + h, g);
  const double th_m = fugacity_of_density(rho - h, g);
  const double d1_fd = (th_p - th_m) / (2.0 * h);
  if (std::fabs(d1_fd - t.gtilde1) > 1e-5 * std::max(1.0, std::fabs(t.gtilde1)))
    throw std::runtime_error("gtilde' != gtilde/sigma2: identity violated");

  // gtilde'' via centered difference of gtilde' = theta/sigma2(theta),
  // cross-checked against the series expression theta/sigma^4 - theta m3/sigma^6
  auto gtilde1_at = [&g](double r) {
    const double th = fugacity_of_density(r, g);
    const SeriesEval sv = eval_series(th, g);
    const double u1 = sv.m1 / sv.z, u2 = sv.m2 / sv.z;
    return th / (u2 - u1 * u1);
  };
  t.gtilde2 = (gtilde1_at(rho + h) - gtilde1_at(rho - h)) / (2.0 * h);
  const double s2 = t.sigma2;
  const double d2_series = t.theta / (s2 * s2) - t.theta * t.m3 / (s2 * s2 * s2);
  if (std::fabs(t.gtilde2 - d2_series) > 1e-4 * std::max(1.0, std::fabs(d2_series)))
    throw std::runtime_error("gtilde'' cross-check failed");
  return t;
}

MarginalSampler::MarginalSampler(double rho, const RateFunction& g)
    : thermo_(make_thermo(rho, g)) {
  const double theta = thermo_.theta;
  double term = 1.0 / thermo_.Z;
  pmf_.push_back(term);
  cdf_.push_back(term);
  for (int k = 1; k < 2'000'000; ++k) {
    term *= theta / g(k);
    pmf_.push_back(term);
    cdf_.push_back(cdf_.back() + term);
    // geometric tail bound: remaining mass <= term * r/(1-r)
    const double r = theta / g(k + 1);
    if (r < 0.999 && term * r / (1.0 - r) < 1e-14) break;
  }
  if (std::fabs(cdf_.back() - 1.0) > 1e-12)
    throw std::runtime_error("marginal pmf does not sum to 1");
}

int MarginalSampler::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  const auto idx = it - cdf_.begin();
  return static_cast<int>(std::min<std::ptrdiff_t>(idx, cdf_.size() - 1));
}

void MarginalSampler::fill(std::vector<int32_t>& occupancy, Rng& rng) const {
  for (auto& v : occupancy) v = static_cast<int32_t>(sample(rng));
}

void MarginalSampler::export_csv(const std::string& path, const RateFunction& g,
                                 const std::vector<double>& densities) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "rho,theta,Z,sigma2,gtilde,gtilde1,gtilde2\n";
  out.precision(16);
  for (double rho : densities) {
    const Thermo t = make_thermo(rho, g);
    out << t.rho << "," << t.theta << "," << t.Z << "," << t.sigma2 << ","
        << t.gtilde << "," << t.gtilde1 << "," << t.gtilde2 << "\n";
  }
}

}  // namespace zrf
