#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sprays/error.hpp"
#include "sprays/geometry.hpp"

namespace sprays {

// Step function with the symmetric convention at the jump: nodes landing
// exactly on the surface sigma.xi = 0 contribute with weight 1/2.
inline double heaviside(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5); }

struct Quad1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1].
Quad1D gauss_legendre(int n);
// Gauss-Legendre rule mapped to [a, b].
Quad1D gauss_legendre(int n, double a, double b);
// Gauss-Hermite rule with weight exp(-x^2) on the real line.
Quad1D gauss_hermite(int n);

struct SphereNode {
  Vec3 dir;
  double weight;  // weights sum to 4*pi (2*pi for hemisphere rules)
};

// Product rule over the sphere: Gauss-Legendre in cos(theta) x uniform
// (trapezoid) in phi, polar axis along +z.
std::vector<SphereNode> sphere_product_grid(int n_theta, int n_phi);
// Same construction restricted to the hemisphere dir.axis > 0; exact for
// polynomials in the direction components, so Heaviside-cut integrands
// become smooth when the grid is aligned with the cut.
std::vector<SphereNode> hemisphere_product_grid(const Vec3& axis, int n_theta, int n_phi);

struct QuadratureSpec {
  enum class SphereRule { product_grid, monte_carlo };

  SphereRule sphere_rule = SphereRule::product_grid;
  int n_theta = 32;
  int n_phi = 64;
  std::int64_t mc_samples = 100000;
  std::uint64_t mc_seed = 1;
  int hermite_order = 32;   // order for Gaussian-weighted 3D integrals
  double tolerance = 1e-6;  // refinement disagreement threshold

  void validate() const {
    if (sphere_rule == SphereRule::product_grid) {
      require(n_theta >= 16, "QuadratureSpec: n_theta must be >= 16");
      require(n_phi >= 2, "QuadratureSpec: n_phi must be >= 2");
    } else {
      require(mc_samples >= 1000, "QuadratureSpec: mc_samples must be >= 1000");
    }
    require(hermite_order >= 20, "QuadratureSpec: hermite_order must be >= 20");
    require(tolerance > 0.0, "QuadratureSpec: tolerance must be positive");
  }
};

// Integral of f over the hemisphere { dir . axis > 0 }, by the spec's rule.
// The Monte Carlo backend is kept for oracle cross-checks.
double integrate_hemisphere(const QuadratureSpec& spec, const Vec3& axis,
                            const std::function<double(const Vec3&)>& f);

// Composite Gauss-Legendre over [a, b] split into panels of width <= max_panel;
// refinement doubles the panel count until the result moves by less than tol.
// Throws on non-convergence.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol, double max_panel = 4.0);

// Scaled complementary error function exp(x^2) erfc(x) for x >= 0,
// stable for large arguments.
double erfcx(double x);

// Standard normal pdf/cdf.
double norm_pdf(double t);
double norm_cdf(double t);

// Half-range Gaussian moments for z ~ N(m, s^2), s > 0:
//   half_moment0 = E[ 1_{z>0} ]
//   half_moment1 = E[ z 1_{z>0} ]
//   half_moment2 = E[ z^2 1_{z>0} ]
//   half_moment3 = E[ z^3 1_{z>0} ]
//   half_moment1_neg = E[ -z 1_{z<0} ]
double half_moment0(double m, double s);
double half_moment1(double m, double s);
double half_moment2(double m, double s);
double half_moment3(double m, double s);
double half_moment1_neg(double m, double s);

}  // namespace sprays
