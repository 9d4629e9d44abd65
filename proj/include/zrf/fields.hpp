#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "zrf/equilibrium.hpp"
#include "zrf/model.hpp"
#include "zrf/testfunction.hpp"

namespace zrf {

struct DiscreteOps {
  double lap;    // H((x+y)/nu) + H((x-y)/nu) - 2 H(x/nu)
  double grad;   // (nu/2)(H((x+1)/nu) - H((x-1)/nu))
  double dfwd;   // nu (H((x+1)/nu) - H(x/nu))
  double djump;  // H((x+y)/nu) - H(x/nu)
};

DiscreteOps discrete_ops(const TestFunction& H, int n, double alpha, long x, long y);

// (Delta^{alpha/2} H)(x) = (1/2) int s(y) [H(x+y) - 2H(x) + H(x-y)] dy,
// absolute error below 1e-8 (checked by internal refinement)
double frac_laplacian(const TestFunction& H, double alpha, double x);

// C(alpha) = int (1 - cos u) |u|^{-1-alpha} du, so that the Fourier symbol
// of Delta^{alpha/2} is -c_alpha C(alpha) |k|^alpha
double frac_symbol_constant(double alpha);
double frac_symbol_constant_closed_form(double alpha);  // Gamma-reflection route

// E_quad(H) = (1/2) int int s(y) (H(x+y) - H(x))^2 dy dx = -int H Delta^{alpha/2} H
double quadratic_energy(const TestFunction& H, double alpha);

enum class FrameMode { kFixed, kMoving };

// Frame for field evaluation.  In the moving frame the shift at time t is
// velocity * t lattice sites; the continuum variant shifts by the full real
// amount, the lattice variant by its floor.
struct FieldFrame {
  FrameMode mode = FrameMode::kFixed;
  double velocity = 0.0;  // lattice sites per macroscopic time unit

  static FieldFrame fixed() { return {}; }
  static FieldFrame moving(double v) { return {FrameMode::kMoving, v}; }
  double shift(double t) const { return mode == FrameMode::kMoving ? velocity * t : 0.0; }
};

// characteristic velocity 2 beta gtilde'(rho) n^{1-gamma}, lattice sites per unit time
double characteristic_velocity(const ModelParams& params, const Thermo& thermo);

// Y^n_t(H) = n^{-1/2alpha} sum_x H((x - shift)/n^{1/alpha}) (eta(x) - rho),
// with the integer part of the shift wrapped on the torus and the fractional
// part applied in the argument.  Terms with |H| < 1e-14 are dropped via the
// support radius.
double eval_field(std::span<const int32_t> occupancy, const TestFunction& H,
                  const FieldFrame& frame, double t, const ModelParams& params,
                  double rho);

// same against a mollifier G_eps centered at frame position center/nu
double eval_field_mollified(std::span<const int32_t> occupancy, const Mollifier& G,
                            const FieldFrame& frame, double t, const ModelParams& params,
                            double rho, long center_site);

// true when the test-function support at scale n^{1/alpha} does not fit the torus
bool field_aliased(const TestFunction& H, const ModelParams& params);

}  // namespace zrf
