#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zrf/rates.hpp"
#include "zrf/rng.hpp"

namespace zrf {

// Thermodynamics of the product invariant measures: marginal at fugacity
// theta is P(k) = theta^k / (g(k)! Z(theta)).
struct Thermo {
  double rho = 0.0;      // density E[eta(0)]
  double theta = 0.0;    // fugacity theta(rho)
  double Z = 1.0;        // normalizer
  double sigma2 = 0.0;   // Var(eta(0))
  double m3 = 0.0;       // third central moment
  double gtilde = 0.0;   // E[g(eta(0))] = theta
  double gtilde1 = 0.0;  // d gtilde / d rho = gtilde / sigma2
  double gtilde2 = 0.0;  // second derivative, centered finite difference
  double theta_star = 0.0;
};

// Z(theta) = sum_k theta^k / g(k)!, relative error < 1e-12.
double partition_function(double theta, const RateFunction& g);

// rho(theta) = E[eta(0)] under the fugacity-theta marginal.
double density_of_fugacity(double theta, const RateFunction& g);

// E[g(eta(0))] by series; equals theta, which make_thermo asserts.
double expected_g(double theta, const RateFunction& g);

// inverse of rho(theta) by monotone bisection, |rho(theta) - rho| < 1e-10
double fugacity_of_density(double rho, const RateFunction& g);

// Full thermodynamic bundle at density rho.  The zero-range identities
// gtilde = theta and gtilde' = gtilde/sigma2 are re-derived numerically and
// verified against the series values to 1e-8 on every call.
Thermo make_thermo(double rho, const RateFunction& g);

// Inverse-CDF sampler for the single-site marginal; tail mass below 1e-14.
class MarginalSampler {
 public:
  MarginalSampler(double rho, const RateFunction& g);

  int sample(Rng& rng) const;
  double pmf(int k) const { return k < int(pmf_.size()) ? pmf_[k] : 0.0; }
  int k_max() const { return static_cast<int>(pmf_.size()) - 1; }
  const Thermo& thermo() const { return thermo_; }

  void fill(std::vector<int32_t>& occupancy, Rng& rng) const;

  // thermo table over a density grid, for audit
  static void export_csv(const std::string& path, const RateFunction& g,
                         const std::vector<double>& densities);

 private:
  Thermo thermo_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

}  // namespace zrf
