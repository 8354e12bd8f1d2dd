#pragma once

// Analytic 1D-periodic field closures on x in [0,1): a local-equilibrium gas
// description and a separable particle density n_F(x) * Maxwellian(v). These
// are the first-class smooth inputs of the weak-form integrators and the
// remainder diagnostics; ensemble-based reconstructions are the secondary
// path (see spray.hpp).

#include <cmath>

#include "sprays/geometry.hpp"
#include "sprays/kernels.hpp"
#include "sprays/rng.hpp"

namespace sprays {

inline double wrap_unit(double x) {
  double y = x - std::floor(x);
  return y >= 1.0 ? 0.0 : y;
}

// minimal-image signed distance on the unit circle
inline double wrap_dist(double dx) {
  dx -= std::round(dx);
  return dx;
}

// Gas equilibrium fields: alpha_n, u, theta/m_g, each of the form
// base * (1 + amp sin(2 pi (x - phase))) (u varies in its x component only).
struct AnalyticGasField {
  double alpha_n0 = 1.0;
  double alpha_n_amp = 0.0;
  double alpha_n_phase = 0.0;
  Vec3 u0{};
  double ux_amp = 0.0;
  double ux_phase = 0.0;
  double s2_0 = 1.0;  // theta/m_g
  double s2_amp = 0.0;
  double s2_phase = 0.0;

  static double dwave(double base, double amp, double phase, double x) {
    return base * amp * kTwoPi_ * std::cos(kTwoPi_ * (x - phase));
  }

  double alpha_n(double x) const {
    return alpha_n0 * (1.0 + alpha_n_amp * std::sin(kTwoPi_ * (x - alpha_n_phase)));
  }
  double dalpha_n(double x) const { return dwave(alpha_n0, alpha_n_amp, alpha_n_phase, x); }
  Vec3 u(double x) const {
    Vec3 v = u0;
    v.x += ux_amp * std::sin(kTwoPi_ * (x - ux_phase));
    return v;
  }
  double dux(double x) const { return ux_amp * kTwoPi_ * std::cos(kTwoPi_ * (x - ux_phase)); }
  double s2(double x) const {
    return s2_0 * (1.0 + s2_amp * std::sin(kTwoPi_ * (x - s2_phase)));
  }
  double ds2(double x) const { return dwave(s2_0, s2_amp, s2_phase, x); }

  kernels::LocalGasState state(double x) const { return {alpha_n(x), u(x), s2(x)}; }

  kernels::GasGradients gradients(double x) const {
    kernels::GasGradients g;
    g.grad_alpha_n = {dalpha_n(x), 0.0, 0.0};
    g.grad_u(0, 0) = dux(x);
    g.div_u = g.grad_u.trace();
    // grad of (alpha n)(theta/m); the alpha-vs-1 distinction is applied by
    // callers that track a particle phase
    g.grad_p = {dalpha_n(x) * s2(x) + alpha_n(x) * ds2(x), 0.0, 0.0};
    return g;
  }

  double maxwellian(double x, const Vec3& w) const {
    return kernels::maxwellian_eval(state(x), w);
  }

 private:
  static constexpr double kTwoPi_ = 6.28318530717958647692528676655900577;
};

// Separable particle density F(x, v) = n_F(x) G(v) with
// n_F(x) = n0 (1 + amp sin(2 pi (x - phase))) and G a unit-mass Maxwellian
// centered at u_F with variance s2_F per component. s2_F = 0 encodes a
// monokinetic (point) velocity distribution: it can be sampled and carries a
// number density, but has no pointwise v-density.
struct AnalyticParticleDensity {
  double n0 = 1.0;
  double amp = 0.0;
  double phase = 0.0;
  Vec3 u_F{};
  double s2_F = 0.1;

  double number_density(double x) const {
    return n0 * (1.0 + amp * std::sin(kTwoPi_ * (x - phase)));
  }
  double dnumber_density(double x) const {
    return n0 * amp * kTwoPi_ * std::cos(kTwoPi_ * (x - phase));
  }
  double d2number_density(double x) const {
    return -n0 * amp * kTwoPi_ * kTwoPi_ * std::sin(kTwoPi_ * (x - phase));
  }

  double velocity_shape(const Vec3& v) const {
    require(s2_F > 0.0, "AnalyticParticleDensity: point distribution has no v-density");
    return std::pow(kTwoPi_ * s2_F, -1.5) * std::exp(-(v - u_F).norm2() / (2.0 * s2_F));
  }
  double eval(double x, const Vec3& v) const { return number_density(x) * velocity_shape(v); }
  double grad_x(double x, const Vec3& v) const {
    return dnumber_density(x) * velocity_shape(v);
  }
  Vec3 grad_v(double x, const Vec3& v) const {
    return (u_F - v) * (eval(x, v) / s2_F);
  }

  Vec3 sample_v(CounterRng& rng) const {
    if (s2_F <= 0.0) return u_F;
    double s = std::sqrt(s2_F);
    return u_F + rng.normal3() * s;
  }

 private:
  static constexpr double kTwoPi_ = 6.28318530717958647692528676655900577;
};

}  // namespace sprays
