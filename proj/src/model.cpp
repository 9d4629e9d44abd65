#include "zrf/model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace zrf {

void ModelParams::validate() const {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("alpha must lie in (0,2)");
  if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
  if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  if (n < 1) throw std::invalid_argument("n must be a positive integer");
  if (L < 2 || L % 2 != 0) throw std::invalid_argument("L must be even and >= 2");
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  if (rate_id == RateId::kConstant && rho >= 1e12)
    throw std::invalid_argument("rho out of range");
}

double hurwitz_zeta(double s, double a) {
  if (s <= 1.0) throw std::invalid_argument("hurwitz_zeta needs s > 1");
  if (a <= 0.0) throw std::invalid_argument("hurwitz_zeta needs a > 0");
  // direct terms, then Euler-Maclaurin tail with Bernoulli corrections
  // through B6; with b >= 40 the remainder is below 1e-15
  const int N = 40;
  double sum = 0.0;
  for (int k = 0; k < N; ++k) sum += std::pow(a + k, -s);
  const double b = a + N;
  double tail = std::pow(b, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(b, -s);
  tail += s / 12.0 * std::pow(b, -s - 1.0);
  tail -= s * (s + 1.0) * (s + 2.0) / 720.0 * std::pow(b, -s - 3.0);
  tail += s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30240.0 *
          std::pow(b, -s - 5.0);
  return sum + tail;
}

double normalize_kernel(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("alpha must lie in (0,2)");
  // sum over Z\{0} of |x|^{-(1+alpha)} = 2 zeta(1+alpha)
  return 1.0 / (2.0 * hurwitz_zeta(1.0 + alpha, 1.0));
}

double kernel_s(double alpha, double x) {
  if (x == 0.0) return 0.0;
  return normalize_kernel(alpha) * std::pow(std::fabs(x), -(1.0 + alpha));
}

AliasTable::AliasTable(const std::vector<double>& weights) {
  const size_t n = weights.size();
  if (n == 0) throw std::invalid_argument("alias table needs weights");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("negative weight");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("zero total weight");

  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<int> small, large;
  small.reserve(n);
  large.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * double(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<int>(i));
  }
  while (!small.empty() && !large.empty()) {
    const int s = small.back();
    const int l = large.back();
    small.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (int i : large) prob_[i] = 1.0;
  for (int i : small) prob_[i] = 1.0;  // numerical leftovers
}

JumpKernel::JumpKernel(const ModelParams& params) {
  params.validate();
  alpha_ = params.alpha;
  L_ = params.L;
  c_alpha_ = normalize_kernel(alpha_);
  asym_weight_ = params.asym_weight();

  // periodize: s_per(d) = sum_m s(d + mL), done with Hurwitz zeta tails so
  // the wrap is exact to ~1e-15 rather than truncated
  const double s = 1.0 + alpha_;
  const double Ls = std::pow(double(L_), -s);
  s_per_.assign(L_, 0.0);
  for (int d = 0; d < L_; ++d) {
    // positive x = d + mL (m >= 0, x != 0), negative |x| = (L-d) + mL
    const double right = Ls * hurwitz_zeta(s, d == 0 ? 1.0 : double(d) / L_);
    const double left = Ls * hurwitz_zeta(s, double(L_ - d) / L_);
    s_per_[d] = c_alpha_ * (right + left);
  }

  p_ = s_per_;
  if (asym_weight_ != 0.0 && L_ > 2) {
    p_[1] += asym_weight_;
    p_[L_ - 1] -= asym_weight_;
  }
  // L == 2 identifies +1 with -1, so the periodized antisymmetric part is 0

  for (int d = 0; d < L_; ++d) {
    if (p_[d] < 0.0)
      throw std::runtime_error(
          "infeasible asymmetry: p has a negative entry; increase n or reduce beta");
  }
  if (L_ > 2 && asym_weight_ != 0.0) {
    if (!(p_[1] > 0.0 && p_[1] < 1.0 && p_[L_ - 1] > 0.0 && p_[L_ - 1] < 1.0))
      throw std::runtime_error("infeasible asymmetry: need 0 < p(+-1) < 1");
  }

  alias_ = AliasTable(p_);
}

double JumpKernel::table_mean() const {
  double m = 0.0;
  for (int d = 1; d < L_; ++d) {
    const int rep = d > L_ / 2 ? d - L_ : d;
    m += rep * p_[d];
  }
  return m;
}

void JumpKernel::dump_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "displacement,probability\n";
  out.precision(17);
  for (int d = -L_ / 2 + 1; d <= L_ / 2; ++d)
    out << d << "," << p_[index_of(d)] << "\n";
}

}  // namespace zrf
