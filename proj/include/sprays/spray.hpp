#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sprays/fields.hpp"
#include "sprays/geometry.hpp"
#include "sprays/kernels.hpp"
#include "sprays/quadrature.hpp"

namespace sprays::solver {

// Macroscopic gas state on a periodic 1D grid with 3D velocities.
// Primitive storage (alpha, n, u, theta); the conserved variables are
// (alpha rho, alpha rho u, alpha rho E) with rho = m_g n, p = n theta and
// E = |u|^2/2 + 3 theta / (2 m_g).
struct GasField {
  std::vector<double> alpha;
  std::vector<double> n;
  std::vector<Vec3> u;
  std::vector<double> theta;
  std::vector<std::uint8_t> vacuum_flag;  // cells held at the floor state
  double dx = 0.0;
  double m_g = 1.0;

  std::size_t cells() const { return n.size(); }
  double pressure(std::size_t i) const { return n[i] * theta[i]; }
  double energy(std::size_t i) const {
    return 0.5 * u[i].norm2() + 1.5 * theta[i] / m_g;
  }
  double sound_speed(std::size_t i) const {
    return std::sqrt(5.0 / 3.0 * theta[i] / m_g);
  }
  void validate() const;

  static GasField uniform(std::size_t cells, double m_g, double n0, const Vec3& u0,
                          double theta0);
};

// Weighted macro-particles of the dispersed phase.
struct ParticlePhase {
  std::vector<double> x;
  std::vector<Vec3> v;
  std::vector<double> w;
  double a = 0.05;

  std::size_t size() const { return x.size(); }
  double number_total() const;
  void validate() const;
};

// Per-cell volume fraction 1 - (4 pi/3) a^3 * (cell weight)/dx.
// Throws on any overpacked cell (alpha <= 0).
std::vector<double> volume_fraction(const ParticlePhase& phase, std::size_t cells, double dx);

struct SolverOptions {
  bool thin_mode = false;       // alpha forced to 1, drag reduced to the friction profile
  double vacuum_floor = 1e-12;  // density below which u, theta freeze
};

// One finite-volume update of the gas conserved variables: Rusanov fluxes for
// the convective + pressure part, the central non-conservative pressure
// correction p d(alpha)/dx, drag exchange sources accumulated from the
// particles (cloud-in-cell both ways), and the central second-moment
// correction fluxes. alpha_rate is the discrete d(alpha)/dt entering the
// energy equation (zero when the particle phase is frozen).
GasField gas_step(const GasField& gas, const ParticlePhase& phase, double dt,
                  const kernels::QbarTable& qbar, const SolverOptions& opts = {},
                  const std::vector<double>* alpha_rate = nullptr);

// Symplectic-Euler push of the macro-particles: v advances by the drag
// acceleration toward the local gas velocity plus the pressure push toward
// low pressure, then x advances with the updated velocity. Weights unchanged.
ParticlePhase vlasov_step(const ParticlePhase& phase, const GasField& gas, double dt,
                          const kernels::QbarTable& qbar, const SolverOptions& opts = {});

struct RemainderReport {
  double P_norm = 0.0;  // energy-equation defect, sup over cells
  double Q_norm = 0.0;  // kinetic-equation defect, sup over the (x,v) probe lattice
  double R_norm = 0.0;  // momentum-equation defect, sup over cells
  double a = 0.0;
};

// Second-order Taylor defects of the delocalized collision moments plus the
// algebraic volume-fraction corrections, evaluated against analytic closures.
// The (w,v)-integrals reduce to half-range Gaussian moments; only the sphere
// integral is numerical.
RemainderReport remainder_diagnostics(const AnalyticGasField& gas,
                                      const AnalyticParticleDensity& F, double a, double m_g,
                                      const QuadratureSpec& quad,
                                      const std::optional<double>& dalpha_dt_override = {});

// Pointwise kinetic-equation defect at (x, v): the delocalization defect of
// the equilibrium closure plus the volume-fraction exchange terms. This is
// the density whose sup over the probe lattice is Q_norm.
double remainder_Q_pointwise(const AnalyticGasField& gas, const AnalyticParticleDensity& F,
                             double a, double m_g, const QuadratureSpec& quad, double x,
                             const Vec3& v);

// The same diagnostics from a discrete state: gas fields from the grid,
// F reconstructed by a Gaussian kernel density in x (bandwidth 2 dx) with
// exact particle sums in v. particle_cap subsamples the phase to bound cost.
RemainderReport remainder_diagnostics(const GasField& gas, const ParticlePhase& phase,
                                      const QuadratureSpec& quad,
                                      std::size_t particle_cap = 2000);

struct TimeSeriesRow {
  double t = 0.0;
  double gas_mass = 0.0;
  Vec3 gas_momentum{};
  double gas_energy = 0.0;
  double particle_number = 0.0;
  Vec3 particle_momentum{};  // in gas-mass units, m_g sum w v
  double particle_kinetic_energy = 0.0;
  double min_alpha = 1.0;
  RemainderReport remainders{};
};

TimeSeriesRow measure(const GasField& gas, const ParticlePhase& phase, double t);

struct RunConfig {
  GasField gas;
  ParticlePhase phase;
  double dt = 1e-3;
  double t_final = 1.0;
  std::size_t output_every = 10;
  SolverOptions options{};
  QuadratureSpec quad{};
  bool remainders = false;  // evaluate the kernel-density remainder report per output
};

struct RunResult {
  std::vector<TimeSeriesRow> rows;
  GasField gas;
  ParticlePhase phase;
  std::size_t steps = 0;
};

// Strang-split loop: half gas step, particle step, half gas step; the
// energy bookkeeping term p d(alpha)/dt uses the discrete alpha difference
// of the particle move. Emits one row per output interval.
RunResult run_simulation(const RunConfig& config);

}  // namespace sprays::solver
