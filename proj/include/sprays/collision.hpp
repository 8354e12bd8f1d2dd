#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sprays/error.hpp"
#include "sprays/fields.hpp"
#include "sprays/geometry.hpp"

namespace sprays::collision {

// Dimensionless parameter set: mass ratio eta = m_g/m_p, inverse gas
// collision-rate scale delta, particle radius a (units of the box), and the
// two masses. The thermal-speed ratio is fixed to 1.
struct ScalingParams {
  double eta = 0.1;
  double delta = 0.1;
  double a = 0.05;
  double m_g = 1.0;
  double m_p = 10.0;

  static ScalingParams make(double eta, double delta, double a, double m_g = 1.0) {
    ScalingParams p{eta, delta, a, m_g, m_g / eta};
    p.validate();
    return p;
  }

  void validate() const {
    require(eta > 0.0 && eta <= 1.0, "ScalingParams: eta must lie in (0, 1]");
    require(delta > 0.0, "ScalingParams: delta must be positive");
    require(a > 0.0 && a < 0.5, "ScalingParams: a must lie in (0, 0.5)");
    require(m_g > 0.0 && m_p > 0.0, "ScalingParams: masses must be positive");
    require(std::abs(eta - m_g / m_p) <= 1e-12 * std::max(1.0, eta),
            "ScalingParams: eta must equal m_g/m_p");
  }
};

struct VelocityPair {
  Vec3 v;  // particle
  Vec3 w;  // gas molecule
};

// Elastic two-species transform:
//   v' = v - (2 eta/(1+eta)) ((v-w).sigma) sigma
//   w' = w - (2/(1+eta))     ((w-v).sigma) sigma
// sigma must be unit to 1e-12. Involution, even in sigma, |Jacobian| = 1,
// specular in the relative velocity; conserves m_p v + m_g w and
// m_p |v|^2 + m_g |w|^2 for m_g/m_p = eta.
VelocityPair cross_collision(const VelocityPair& pair, const Vec3& sigma, double eta);

// Same-species transform, identical to cross_collision at eta = 1.
VelocityPair same_species_collision(const VelocityPair& pair, const Vec3& sigma);

// Two-species sample-particle state on the periodic unit interval with 3D
// velocities. Weights are per-sample but uniform within each species, and
// particle weights must equal gas weights / eta so that the two collision
// integrals describe the same event stream. Total weight per species is
// conserved exactly by stepping.
struct KineticEnsemble {
  std::vector<double> gas_x;
  std::vector<Vec3> gas_v;
  std::vector<double> gas_w;
  std::vector<double> part_x;
  std::vector<Vec3> part_v;
  std::vector<double> part_w;
  int cell_count = 32;
  ScalingParams params;
  std::uint64_t rng_seed = 1;
  std::uint64_t step_index = 0;

  void validate() const;
  double gas_weight_total() const;
  double particle_weight_total() const;
};

// Uniform-in-x two-species ensemble: gas Maxwellian(u_g, s2_g) with number
// density gas_density, particles Maxwellian(u_p, s2_p) with number density
// part_density. Particle sample count follows from the weight constraint
// w_p = w_g / eta. Positions are stratified.
KineticEnsemble make_uniform_ensemble(const ScalingParams& params, int cells,
                                      std::size_t n_gas_samples, double gas_density,
                                      const Vec3& u_g, double s2_g, double part_density,
                                      const Vec3& u_p, double s2_p, std::uint64_t seed);

struct DsmcOptions {
  bool gas_gas = true;
  bool gas_particle = true;
  double max_dt_over_delta = 0.2;  // stability bound on dt/delta
};

struct DsmcStats {
  std::uint64_t gas_gas_events = 0;
  std::uint64_t gas_particle_events = 0;
  std::uint64_t majorant_violations = 0;
};

// One step of the stochastic particle scheme: free transport with periodic
// wrap, majorant-frequency gas-gas collisions at rate 1/delta, then
// gas-particle collisions with delocalized partner selection at offset
// |x_gas - x_part| <= a and flux-weighted contact direction. No
// particle-particle collisions. Deterministic for a fixed seed: every random
// draw comes from a counter stream keyed by (seed, step, substep, cell or
// particle index).
KineticEnsemble dsmc_step(const KineticEnsemble& state, double dt,
                          const DsmcOptions& opts = {}, DsmcStats* stats = nullptr);

struct SpeciesMoments {
  double mass = 0.0;  // species mass * total weight
  Vec3 momentum{};    // species mass * sum w v
  double energy = 0.0;  // species mass/2 * sum w |v|^2
};

SpeciesMoments gas_moments(const KineticEnsemble& e);
SpeciesMoments particle_moments(const KineticEnsemble& e);

// number-weighted bulk velocity of the particle species
Vec3 particle_bulk_velocity(const KineticEnsemble& e);

// per-cell gas number density, bulk velocity, and temperature-like spread
struct CellMoments {
  std::vector<double> density;
  std::vector<Vec3> velocity;
  std::vector<double> theta_over_m;
};
CellMoments gas_cell_moments(const KineticEnsemble& e);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Test function of velocity with gradient (for the weak drag forms).
struct VelocityTestFn {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;
};

// Test function of (x, velocity) for the combined weak identity.
using SpaceTestFn = std::function<double(double, const Vec3&)>;

// Monte Carlo estimate of int E2[F, f](x, v) phi(v) dv at the probe point,
// with gain and loss combined through the collision involution. Requires
// samples >= 1e4. Deterministic for a fixed seed; chunks may evaluate in
// parallel without changing the result.
McEstimate enskog_e2_apply(const AnalyticParticleDensity& F, const AnalyticGasField& f,
                           const VelocityTestFn& phi, double x, const ScalingParams& params,
                           std::int64_t samples, std::uint64_t seed);

struct IdentityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double sigma = 0.0;  // combined standard error of lhs - rhs
  double residual() const { return lhs > rhs ? lhs - rhs : rhs - lhs; }
  bool within(double k_sigma) const { return residual() <= k_sigma * sigma; }
};

struct IdentityOptions {
  double x0 = 0.37;
  double h_div = 0.02;  // central-difference step for the transport-flux term
  int s_nodes = 8;      // Gauss-Legendre order for the contact-line integral
};

// Both sides of the combined weak identity
//   eta int E1 phi dw + int E2 phi dv + eta d/dx I[f,F;phi] = R[f,F;phi],
// estimated by independent Monte Carlo streams; R merges the two collision
// integrals through the involution. Residual should vanish within noise.
IdentityResult weak_identity_residual(const AnalyticGasField& f,
                                      const AnalyticParticleDensity& F, const SpaceTestFn& phi,
                                      const ScalingParams& params, std::int64_t samples,
                                      std::uint64_t seed, const IdentityOptions& opts = {});

// Monte Carlo estimate of the contact-line flux I_x[f,F;phi](x) alone
// (the term whose x-divergence enters the identity).
McEstimate identity_flux_term(const AnalyticGasField& f, const AnalyticParticleDensity& F,
                              const SpaceTestFn& phi, double x, const ScalingParams& params,
                              std::int64_t samples, std::uint64_t seed, int s_nodes = 8);

}  // namespace sprays::collision
