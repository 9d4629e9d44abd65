#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zrf/rates.hpp"
#include "zrf/rng.hpp"

namespace zrf {

struct ModelParams {
  double alpha = 1.0;   // tail exponent of the symmetric kernel, in (0,2)
  double beta = 0.0;    // asymmetry strength, >= 0
  double gamma = 0.0;   // asymmetry scale: a(+-1) weight is beta/n^gamma
  int n = 1;            // scaling parameter (space n^{1/alpha}, time n)
  int L = 64;           // lattice size, even
  double rho = 0.5;     // density, 0 < rho < rho_*
  RateId rate_id = RateId::kLinear;
  double rate_power = 0.5;  // exponent for RateId::kPower
  uint64_t seed = 1;

  RateFunction rate() const { return RateFunction(rate_id, rate_power); }
  double asym_weight() const { return beta * std::pow(double(n), -gamma); }
  void validate() const;
};

// Hurwitz zeta sum_{k>=0} (a+k)^{-s} for s>1, a>0, via Euler-Maclaurin.
double hurwitz_zeta(double s, double a);

// Normalization c_alpha with sum_{x != 0} c_alpha |x|^{-(1+alpha)} = 1 on Z.
double normalize_kernel(double alpha);

// Unperiodized kernel value s(x) = c_alpha |x|^{-(1+alpha)}, valid at real
// arguments; s(0) defined as 0.
double kernel_s(double alpha, double x);

// Walker alias table for O(1) sampling of a finite law.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(const std::vector<double>& weights);

  int sample(Rng& rng) const {
    const uint64_t r = rng.next();
    const size_t i = static_cast<size_t>(r % prob_.size());
    const double u = static_cast<double>(r >> 11) * 0x1.0p-53;
    return u < prob_[i] ? static_cast<int>(i) : alias_[i];
  }

  size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<int> alias_;
};

// Long-range jump law on the torus of size L.  Displacements are stored by
// centered representative d in {-L/2+1, ..., L/2}; index 0 carries the mass
// of the Z-walk that wraps onto displacement 0 (a self jump, which is a
// no-op for the particle system but keeps the law an exact periodization).
class JumpKernel {
 public:
  JumpKernel() = default;
  JumpKernel(const ModelParams& params);

  // displacement law; idx = d mod L
  double prob(int displacement) const { return p_[index_of(displacement)]; }
  const std::vector<double>& probs() const { return p_; }
  const std::vector<double>& sym_probs() const { return s_per_; }
  double symmetric(int displacement) const { return s_per_[index_of(displacement)]; }
  double self_jump_mass() const { return s_per_[0]; }

  double c_alpha() const { return c_alpha_; }
  double alpha() const { return alpha_; }
  int L() const { return L_; }
  double asym_weight() const { return asym_weight_; }

  // mean displacement by centered representative, exact from the table
  double table_mean() const;

  int sample_displacement(Rng& rng) const {
    int d = alias_.sample(rng);
    return d > L_ / 2 ? d - L_ : d;
  }

  void dump_csv(const std::string& path) const;

 private:
  size_t index_of(int d) const { return static_cast<size_t>(((d % L_) + L_) % L_); }

  double alpha_ = 0.0;
  double c_alpha_ = 0.0;
  double asym_weight_ = 0.0;
  int L_ = 0;
  std::vector<double> s_per_;  // periodized symmetric part, by index d mod L
  std::vector<double> p_;      // full law s_per + asym_weight * a_per
  AliasTable alias_;
};

}  // namespace zrf
