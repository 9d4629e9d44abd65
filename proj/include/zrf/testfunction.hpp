#pragma once

#include <complex>
#include <string>
#include <vector>

namespace zrf {

// Smooth rapidly decaying test function with derivatives up to order 4.
// The battery is Gaussian bumps exp(-u^2/2w^2) and modulated Gaussians
// exp(-u^2/2w^2) cos/sin(freq u); derivatives come from the polynomial
// recursion for p_k e^{q} with q = -u^2/2w^2 + i freq u.
class TestFunction {
 public:
  static TestFunction gaussian(double width);
  static TestFunction modulated_cos(double width, double freq);
  static TestFunction modulated_sin(double width, double freq);

  double operator()(double u) const { return deriv(0, u); }
  double deriv(int order, double u) const;

  // outside |u| > radius() all derivatives up to order 4 are < 1e-14
  double radius() const { return radius_; }
  // sup over u of (1 + u^2)^2 |H^(l)(u)|, l = 0..4 (decay certificate)
  double decay_certificate() const;

  const std::string& id() const { return id_; }
  double width() const { return width_; }
  double freq() const { return freq_; }

 private:
  TestFunction(double width, double freq, bool use_sin, std::string id);

  double width_ = 1.0;
  double freq_ = 0.0;
  bool use_sin_ = false;
  double radius_ = 0.0;
  std::string id_;
  // p_k coefficients: deriv k = Re/Im( p_k(u) e^{q(u)} )
  std::vector<std::vector<std::complex<double>>> poly_;
};

// versioned battery used by the experiment harness (v1)
std::vector<TestFunction> test_function_battery();

// iota_eps is the box (1/2eps) 1_[-eps,eps]; G_eps smooths it with a fixed
// bump of width eps/8.  Both L2 bounds from the energy-condition setup are
// checked numerically at construction.
class Mollifier {
 public:
  explicit Mollifier(double eps);

  double eps() const { return eps_; }
  double operator()(double z) const;        // G_eps(z)
  double iota(double z) const;              // box kernel
  double l2_norm2() const { return l2_norm2_; }
  double l2_dist_iota() const { return l2_dist_iota_; }  // ||G_eps - iota_eps||_2
  double support_radius() const { return eps_ + bump_half_width_; }

 private:
  double eps_;
  double bump_half_width_;
  double l2_norm2_ = 0.0;
  double l2_dist_iota_ = 0.0;
};

}  // namespace zrf
