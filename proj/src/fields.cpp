#include "zrf/fields.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "zrf/kmc.hpp"

namespace zrf {

namespace {

// 15-point Gauss-Legendre nodes/weights on [-1,1]
constexpr int kGL = 15;
constexpr double kGLx[kGL] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
    -0.7244177313601700, -0.5709721726085388, -0.3941513470775634,
    -0.2011940939974345, 0.0,                 0.2011940939974345,
    0.3941513470775634,  0.5709721726085388,  0.7244177313601700,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kGLw[kGL] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
    0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
    0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
    0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

template <typename F>
double gl_panel(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < kGL; ++i) acc += kGLw[i] * f(mid + half * kGLx[i]);
  return acc * half;
}

template <typename F>
double gl_panels(F&& f, double a, double b, int panels) {
  double acc = 0.0;
  for (int i = 0; i < panels; ++i)
    acc += gl_panel(f, a + (b - a) * i / panels, a + (b - a) * (i + 1) / panels);
  return acc;
}

}  // namespace

DiscreteOps discrete_ops(const TestFunction& H, int n, double alpha, long x, long y) {
  const double nu = std::pow(double(n), 1.0 / alpha);
  DiscreteOps out;
  const double hx = H(x / nu);
  out.lap = H((x + y) / nu) + H((x - y) / nu) - 2.0 * hx;
  out.grad = 0.5 * nu * (H((x + 1) / nu) - H((x - 1) / nu));
  out.dfwd = nu * (H((x + 1) / nu) - hx);
  out.djump = H((x + y) / nu) - hx;
  return out;
}

double frac_laplacian(const TestFunction& H, double alpha, double x) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("alpha in (0,2)");
  const double c = normalize_kernel(alpha);

  // |y| < 1: integrand c y^{-1-alpha} D2(y) with D2 = H(x+y)-2H(x)+H(x-y);
  // substitute y = u^p, p = 1/(2-alpha), which absorbs the singular weight:
  // int_0^1 y^{1-alpha} psi(y) dy = p int_0^1 psi(u^p) du, psi = c D2 / y^2
  const double p = 1.0 / (2.0 - alpha);
  const double hxx = H(x);
  auto psi = [&](double y) {
    const double d2 = H(x + y) - 2.0 * hxx + H(x - y);
    return c * d2 / (y * y);
  };
  auto inner_f = [&](double u) { return psi(std::pow(u, p)); };
  auto inner_at = [&](int panels) { return p * gl_panels(inner_f, 0.0, 1.0, panels); };

  // |y| >= 1: plain power-law decay; truncate where H vanishes and add the
  // analytic tail of the -2H(x) term
  const double R = H.radius();
  const double Y = std::fabs(x) + R + 1.0;
  auto outer_fn = [&](double y) {
    return c * std::pow(y, -1.0 - alpha) * (H(x + y) - 2.0 * hxx + H(x - y));
  };
  auto outer_at = [&](int mult) {
    double acc = 0.0;
    double a = 1.0;
    while (a < Y) {
      const double b = std::min(2.0 * a, Y);
      acc += gl_panels(outer_fn, a, b, 2 * mult);
      a = b;
    }
    return acc;
  };
  const double tail = -2.0 * hxx * c * std::pow(Y, -alpha) / alpha;

  // (1/2) int_R = int_0^inf by symmetry of the second difference in y
  const double coarse = inner_at(8) + outer_at(1);
  const double fine = inner_at(16) + outer_at(2);
  if (std::fabs(fine - coarse) > 1e-8)
    throw std::runtime_error("frac_laplacian quadrature did not converge");
  return fine + tail;
}

double frac_symbol_constant(double alpha) {
  // int_R (1-cos u)|u|^{-1-alpha} du = 2 int_0^inf (1-cos u) u^{-1-alpha} du.
  // Near 0 substitute u = v^p as in frac_laplacian; oscillatory panels up to
  // U = 200 pi, then the analytic power tail and an integration-by-parts
  // expansion of the cosine tail through U^{-s-3}
  const double p = 1.0 / (2.0 - alpha);
  auto inner_f = [&](double v) {
    const double u = std::pow(v, p);
    // (1-cos u)/u^2, stable near 0
    const double s = std::sin(0.5 * u);
    return 2.0 * s * s / (u * u);
  };
  const double inner = p * gl_panels(inner_f, 0.0, 1.0, 16);

  const double U = 200.0 * std::numbers::pi;
  auto outer_f = [&](double u) {
    const double s = std::sin(0.5 * u);
    return 2.0 * s * s * std::pow(u, -1.0 - alpha);
  };
  double outer = 0.0;
  for (double a = 1.0; a < U;) {
    const double b = std::min(a + 4.0, U);
    outer += gl_panel(outer_f, a, b);
    a = b;
  }
  const double s = 1.0 + alpha;
  const double sU = std::sin(U), cU = std::cos(U);
  // T = int_U^inf cos(u) u^{-s} du, asymptotic IBP series
  const double T = -sU * std::pow(U, -s) + s * cU * std::pow(U, -s - 1.0) +
                   s * (s + 1.0) * sU * std::pow(U, -s - 2.0) -
                   s * (s + 1.0) * (s + 2.0) * cU * std::pow(U, -s - 3.0);
  const double tail = std::pow(U, -alpha) / alpha - T;
  return 2.0 * (inner + outer + tail);
}

double frac_symbol_constant_closed_form(double alpha) {
  if (std::fabs(alpha - 1.0) < 1e-9) return std::numbers::pi;
  // 2 pi cos(pi alpha/2) / (sin(pi alpha) Gamma(1+alpha))
  return 2.0 * std::numbers::pi * std::cos(0.5 * std::numbers::pi * alpha) /
         (std::sin(std::numbers::pi * alpha) * std::tgamma(1.0 + alpha));
}

double quadratic_energy(const TestFunction& H, double alpha) {
  const double R = H.radius();
  auto f = [&](double x) { return -H(x) * frac_laplacian(H, alpha, x); };
  return gl_panels(f, -R, R, 64);
}

double characteristic_velocity(const ModelParams& params, const Thermo& thermo) {
  return 2.0 * params.beta * thermo.gtilde1 * std::pow(double(params.n), 1.0 - params.gamma);
}

double eval_field(std::span<const int32_t> occupancy, const TestFunction& H,
                  const FieldFrame& frame, double t, const ModelParams& params,
                  double rho) {
  const int L = static_cast<int>(occupancy.size());
  const double nu = std::pow(double(params.n), 1.0 / params.alpha);
  const double shift = frame.shift(t);
  const double o = std::floor(shift);
  const double delta = shift - o;
  const long offset = static_cast<long>(o);

  const long half_supp = static_cast<long>(std::ceil(H.radius() * nu)) + 2;
  const double pref = std::pow(double(params.n), -0.5 / params.alpha);

  double acc = 0.0;
  if (2 * half_supp + 1 >= L) {
    for (int x = 0; x < L; ++x) {
      const int xi = torus_rep(x - static_cast<int>(offset % L), L);
      acc += H((xi - delta) / nu) * (occupancy[x] - rho);
    }
  } else {
    for (long j = -half_supp; j <= half_supp; ++j) {
      const int x = torus_wrap(static_cast<int>((offset + j) % L), L);
      acc += H((j - delta) / nu) * (occupancy[x] - rho);
    }
  }
  return pref * acc;
}

double eval_field_mollified(std::span<const int32_t> occupancy, const Mollifier& G,
                            const FieldFrame& frame, double t, const ModelParams& params,
                            double rho, long center_site) {
  const int L = static_cast<int>(occupancy.size());
  const double nu = std::pow(double(params.n), 1.0 / params.alpha);
  const double shift = frame.shift(t);
  const double o = std::floor(shift);
  const double delta = shift - o;
  const long offset = static_cast<long>(o) + center_site;

  const long half_supp = static_cast<long>(std::ceil(G.support_radius() * nu)) + 2;
  const double pref = std::pow(double(params.n), -0.5 / params.alpha);

  double acc = 0.0;
  for (long j = -half_supp; j <= half_supp; ++j) {
    const int x = torus_wrap(static_cast<int>((offset + j) % L), L);
    acc += G((j - delta) / nu) * (occupancy[x] - rho);
  }
  return pref * acc;
}

bool field_aliased(const TestFunction& H, const ModelParams& params) {
  const double nu = std::pow(double(params.n), 1.0 / params.alpha);
  return 2.0 * H.radius() * nu >= params.L;
}

}  // namespace zrf
