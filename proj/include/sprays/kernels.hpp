#pragma once

#include <memory>
#include <vector>

#include "sprays/geometry.hpp"
#include "sprays/quadrature.hpp"

namespace sprays::kernels {

// Parameters of the local equilibrium state mu[alpha_n, u, theta/m_g]:
// effective number density alpha*n, bulk velocity u, and squared thermal
// speed theta/m_g.
struct LocalGasState {
  double alpha_n = 1.0;
  Vec3 u{};
  double theta_over_m = 1.0;

  void validate() const;
};

// Spatial derivatives of the gas fields entering the drag assembly.
// grad_u(i,j) = du_i/dx_j. grad_p is the m_g-scaled pressure gradient
// grad(n*theta)/m_g used by the buoyancy-type acceleration.
struct GasGradients {
  Vec3 grad_alpha_n{};
  Mat3 grad_u{};
  double div_u = 0.0;
  Vec3 grad_p{};
  Vec3 grad_alpha{};

  static GasGradients zero() { return {}; }
  // div_u defaults to trace(grad_u); if supplied they must agree to 1e-12.
  void validate() const;
};

// Equilibrium density mu[alpha_n, u, theta/m](w)
//   = alpha_n / (2 pi theta/m)^{3/2} * exp(-|w-u|^2 / (2 theta/m)).
double maxwellian_eval(const LocalGasState& state, const Vec3& w);

// Friction profile integral q(xi) = (2pi)^{-3/2} int (xi-y)|xi-y| e^{-|y|^2/2} dy,
// evaluated by a 3D Gauss-Hermite product rule with successive order refinement.
// Throws on refinement disagreement above quad.tolerance.
Vec3 q_kernel(const Vec3& xi, const QuadratureSpec& quad);

// Radial profile qbar with q(xi) = qbar(|xi|) xi, via the axisymmetric
// reduction of the same integral to one dimension (the transverse Gaussian
// integral has a closed form in erfcx). qbar is even and smooth in s; below
// s = 1e-4 the value at 1e-4 is returned (quadratic error < 1e-8).
double qbar_profile(double s, const QuadratureSpec& quad);

// qbar tabulated on a log-spaced grid with cubic interpolation, refined at
// build time until the midpoint interpolation error is below tol. Outside the
// table: quadratic continuation near 0, the asymptotic tail s + 2/s - 1/s^3
// above s_max. Immutable once built; safe to share across workers.
class QbarTable {
 public:
  explicit QbarTable(const QuadratureSpec& quad, double tol = 1e-6);

  double operator()(double s) const;
  double max_build_error() const { return build_error_; }

  // process-wide default table (tolerance 1e-6)
  static const QbarTable& shared();

 private:
  std::vector<double> log_s_;
  std::vector<double> val_;
  std::vector<double> slope_;  // d qbar / d log s
  double s_min_, s_max_;
  double qbar0_, curv_;  // quadratic continuation below s_min
  double build_error_ = 0.0;
};

// 2-tensor Q(xi) = (4 pi/15) a^3 [2 xi (x) xi + |xi|^2 Id], closed form.
SymTensor2 Q_tensor(const Vec3& xi, double a);

// Hemisphere integrals over the unit sphere with the cut omega.xi > 0:
//   K(xi)  = int (omega.xi)^2 omega H(omega.xi) domega      = (pi/2)|xi| xi
//   K4(xi) = int omega(x)omega (omega.xi)^2 H(omega.xi) domega
//          = (2 pi/15)(|xi|^2 Id + 2 xi(x)xi)
// The quadrature paths evaluate the integrals on a product grid aligned with
// xi (or by Monte Carlo) and throw if grid refinement disagrees beyond
// quad.tolerance; the *_closed forms are the analytic counterparts.
Vec3 K_integral(const Vec3& xi, const QuadratureSpec& quad);
SymTensor2 K4_integral(const Vec3& xi, const QuadratureSpec& quad);
Vec3 K_closed(const Vec3& xi);
SymTensor2 K4_closed(const Vec3& xi);

// Volume of the d-ball of radius a: |S^{d-1}|/d * a^d.
double ball_coefficient(int d, double a);

// Friction force D(v-u) = pi a^2 (alpha n)(theta/m) q((v-u)/sqrt(theta/m))
//                         + div_x[ alpha n Q(v-u) ],
// the divergence assembled from the supplied gradients with v frozen
// (x-derivatives act on alpha n and u only), by direct index contraction.
Vec3 drag_force_D(const LocalGasState& state, const GasGradients& grads, const Vec3& v,
                  double a, const QbarTable& qbar);

// The same force written as a tensor acting on the relative velocity,
// D = Dbar (v-u):
//   Dbar = pi a^2 (alpha n) sqrt(theta/m) qbar(|v-u|/sqrt(theta/m)) Id
//        + (4 pi/15) a^3 [ 2 (g.(v-u)) Id + g (x) (v-u) ]
//        - (8 pi/15) a^3 (alpha n) [ div_u Id + grad_u + grad_u^T ],
// with g = grad(alpha n). Generally non-symmetric: the g(x)(v-u) term
// deflects the force toward grad(alpha n).
Mat3 viscous_tensor_Dbar(const LocalGasState& state, const GasGradients& grads,
                         const Vec3& v, double a, const QbarTable& qbar);

// Second moment int (v-w)(x)(v-w) mu dw = alpha_n (v-u)(x)(v-u)
//                                         + alpha_n (theta/m) Id.
SymTensor2 moment2_identity(const LocalGasState& state, const Vec3& v);

// Thermal-speed floor applied inside the drag kernels; cells at the floor are
// flagged by the solver layer.
inline constexpr double kThermalSpeedFloor = 1e-8;

}  // namespace sprays::kernels
