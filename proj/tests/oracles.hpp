#pragma once

// Test-only reference implementations, independent of the library paths they
// check: brute-force quadratures, an exact Riemann solver, a stiff-free ODE
// integrator for drag relaxation, and a chi-square tail threshold.

#include <cstdint>
#include <functional>
#include <vector>

#include "sprays/geometry.hpp"

namespace oracles {

// E[g(y)] for y ~ N(0, Id3), by a trapezoid grid in spherical shells.
// Good to ~1e-10 for smooth radial g with |g| <= poly growth.
double gaussian3_radial_moment(const std::function<double(double)>& g_of_r);

// E[g(y)] for y ~ N(0, Id3) by plain midpoint product grid on [-L, L]^3.
double gaussian3_moment(const std::function<double(const sprays::Vec3&)>& g, int n = 96,
                        double L = 8.0);

// Monte Carlo integral of f over the unit sphere (area 4*pi), with standard error.
struct McEstimate {
  double value;
  double std_error;
};
McEstimate mc_sphere(const std::function<double(const sprays::Vec3&)>& f, std::int64_t n,
                     std::uint64_t seed);

// Exact solution of the 1D Riemann problem for an ideal gas, sampled at x/t.
// Returns (rho, u, p) primitives. Standard two-wave construction with a
// Newton iteration on the star pressure.
struct RiemannState {
  double rho, u, p;
};
RiemannState riemann_exact(double rho_l, double u_l, double p_l, double rho_r, double u_r,
                           double p_r, double gamma, double xi);

// RK4 integration of dv/dt = -kappa(v) * (v - u_gas) for the scalar relative
// speed; kappa supplied by the caller. Returns v at the requested times.
std::vector<double> relax_ode(double v0, double u_gas,
                              const std::function<double(double)>& kappa_of_dv,
                              const std::vector<double>& times);

// Upper critical value of the chi-square distribution at tail probability
// 0.01, computed from the regularized incomplete gamma by bisection.
double chi2_critical_99(int dof);

// Least-squares slope of log(metric) against log(parameter).
struct LogLogFit {
  double slope;
  double residual;  // max |fit - data| over the points, in log space
};
LogLogFit fit_loglog(const std::vector<double>& params, const std::vector<double>& metrics);

}  // namespace oracles
