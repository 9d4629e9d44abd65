#include "zrf/testfunction.hpp"

#include <cmath>
#include <stdexcept>

namespace zrf {

TestFunction::TestFunction(double width, double freq, bool use_sin, std::string id)
    : width_(width), freq_(freq), use_sin_(use_sin), id_(std::move(id)) {
  if (width <= 0.0) throw std::invalid_argument("width must be positive");
  // p_0 = 1; p_{k+1} = p_k' + p_k q',  q' = -u/w^2 + i freq
  const std::complex<double> ifreq(0.0, freq);
  const double inv_w2 = 1.0 / (width * width);
  poly_.resize(5);
  poly_[0] = {std::complex<double>(1.0, 0.0)};
  for (int k = 0; k < 4; ++k) {
    const auto& p = poly_[k];
    std::vector<std::complex<double>> q(p.size() + 1, 0.0);
    for (size_t j = 0; j + 1 < p.size(); ++j) q[j] += double(j + 1) * p[j + 1];
    for (size_t j = 0; j < p.size(); ++j) {
      q[j] += ifreq * p[j];
      q[j + 1] -= inv_w2 * p[j];
    }
    poly_[k + 1] = std::move(q);
  }
  // scan outward for the decay cutoff of all tracked derivatives
  double r = width;
  while (r < 60.0 * width) {
    bool small = true;
    for (int ord = 0; ord <= 4 && small; ++ord)
      small = std::fabs(deriv(ord, r)) < 1e-14 && std::fabs(deriv(ord, -r)) < 1e-14;
    if (small) break;
    r += 0.25 * width;
  }
  radius_ = r;
}

TestFunction TestFunction::gaussian(double width) {
  return TestFunction(width, 0.0, false, "gauss_w" + std::to_string(width));
}
TestFunction TestFunction::modulated_cos(double width, double freq) {
  return TestFunction(width, freq, false,
                      "modcos_w" + std::to_string(width) + "_f" + std::to_string(freq));
}
TestFunction TestFunction::modulated_sin(double width, double freq) {
  return TestFunction(width, freq, true,
                      "modsin_w" + std::to_string(width) + "_f" + std::to_string(freq));
}

double TestFunction::deriv(int order, double u) const {
  const auto& p = poly_[order];
  std::complex<double> val(0.0, 0.0);
  for (size_t j = p.size(); j-- > 0;) val = val * u + p[j];
  const double envelope = std::exp(-0.5 * u * u / (width_ * width_));
  const std::complex<double> phase(std::cos(freq_ * u), std::sin(freq_ * u));
  const std::complex<double> full = val * envelope * phase;
  return use_sin_ ? full.imag() : full.real();
}

double TestFunction::decay_certificate() const {
  double worst = 0.0;
  const int grid = 2048;
  for (int i = 0; i <= grid; ++i) {
    const double u = -radius_ + 2.0 * radius_ * i / grid;
    const double w = (1.0 + u * u) * (1.0 + u * u);
    for (int ord = 0; ord <= 4; ++ord)
      worst = std::max(worst, w * std::fabs(deriv(ord, u)));
  }
  return worst;
}

std::vector<TestFunction> test_function_battery() {
  std::vector<TestFunction> v;
  for (double w : {0.5, 1.0, 2.0}) v.push_back(TestFunction::gaussian(w));
  for (double f : {1.0, 2.0, 4.0}) v.push_back(TestFunction::modulated_cos(1.0, f));
  for (double f : {1.0, 2.0, 4.0}) v.push_back(TestFunction::modulated_sin(1.0, f));
  return v;
}

namespace {
// fixed C^inf bump on [-1,1], unit mass
double bump_raw(double t) {
  if (std::fabs(t) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}
// CDF of the normalized bump, tabulated once on a fine grid
struct BumpCdf {
  static constexpr int kN = 8192;
  double cdf[kN + 1];
  BumpCdf() {
    double acc = 0.0;
    cdf[0] = 0.0;
    const double h = 2.0 / kN;
    for (int i = 1; i <= kN; ++i) {
      const double a = -1.0 + (i - 1) * h;
      const double b = -1.0 + i * h;
      // Simpson on the cell
      acc += h / 6.0 * (bump_raw(a) + 4.0 * bump_raw(0.5 * (a + b)) + bump_raw(b));
      cdf[i] = acc;
    }
    for (int i = 0; i <= kN; ++i) cdf[i] /= acc;
  }
  double operator()(double t) const {
    if (t <= -1.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double x = (t + 1.0) / 2.0 * kN;
    const int i = std::min(kN - 1, static_cast<int>(x));
    const double fr = x - i;
    return cdf[i] * (1.0 - fr) + cdf[i + 1] * fr;
  }
};
const BumpCdf& bump_cdf() {
  static BumpCdf table;
  return table;
}
}  // namespace

Mollifier::Mollifier(double eps) : eps_(eps), bump_half_width_(eps / 8.0) {
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
  // numerical check of the defining bounds
  const int N = 4096;
  const double R = support_radius() * 1.001;
  const double h = 2.0 * R / N;
  double n2 = 0.0, d2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double z = -R + (i + 0.5) * h;
    const double g = (*this)(z);
    n2 += g * g * h;
    const double d = g - iota(z);
    d2 += d * d * h;
  }
  l2_norm2_ = n2;
  l2_dist_iota_ = std::sqrt(d2);
  if (l2_norm2_ > 1.0 / eps_ * (1.0 + 1e-9))
    throw std::runtime_error("mollifier bound ||G_eps||^2 <= 1/eps violated");
}

double Mollifier::operator()(double z) const {
  // (iota_eps * bump)(z) = (1/2eps) [F((z+eps)/h) - F((z-eps)/h)]
  const double h = bump_half_width_;
  return (bump_cdf()((z + eps_) / h) - bump_cdf()((z - eps_) / h)) / (2.0 * eps_);
}

double Mollifier::iota(double z) const {
  return std::fabs(z) <= eps_ ? 0.5 / eps_ : 0.0;
}

}  // namespace zrf
