#include "sprays/spray.hpp"

#include <algorithm>
#include <cmath>

#include "sprays/error.hpp"
#include "sprays/rng.hpp"

namespace sprays::solver {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kBall3 = 4.0 * kPi / 3.0;

struct Cic {
  std::size_t i0, i1;
  double w0, w1;
};

Cic cic_weights(double x, std::size_t cells, double dx) {
  double xi = x / dx - 0.5;
  double fl = std::floor(xi);
  long long cells_ll = static_cast<long long>(cells);
  std::size_t i0 = static_cast<std::size_t>(
      ((static_cast<long long>(fl) % cells_ll) + cells_ll) % cells_ll);
  std::size_t i1 = (i0 + 1) % cells;
  double frac = xi - fl;
  return {i0, i1, 1.0 - frac, frac};
}

// central differences of periodic cell data
template <typename T>
std::vector<T> central_diff(const std::vector<T>& f, double dx) {
  std::size_t n = f.size();
  std::vector<T> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T& hi = f[(i + 1) % n];
    const T& lo = f[(i + n - 1) % n];
    d[i] = (hi - lo) * (0.5 / dx);
  }
  return d;
}

// periodic Catmull-Rom interpolation of cell-centered values
double cubic_interp(const std::vector<double>& f, double x, double dx) {
  std::size_t n = f.size();
  double xi = x / dx - 0.5;
  double fl = std::floor(xi);
  double t = xi - fl;
  long long i1 = static_cast<long long>(fl);
  long long nn = static_cast<long long>(n);
  auto at = [&](long long k) { return f[static_cast<std::size_t>(((k % nn) + nn) % nn)]; };
  double p0 = at(i1 - 1), p1 = at(i1), p2 = at(i1 + 1), p3 = at(i1 + 2);
  return p1 + 0.5 * t *
                  (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                  t * (3.0 * (p1 - p2) + p3 - p0)));
}

struct CellGradients {
  std::vector<Vec3> d_alpha_n;  // x-component carries d(alpha n)/dx
  std::vector<Vec3> du_dx;      // du/dx componentwise
  std::vector<Vec3> dp_scaled;  // d(n theta)/dx / m_g
  std::vector<Vec3> d_alpha;
};

CellGradients cell_gradients(const GasField& gas, const std::vector<double>& alpha_eff) {
  std::size_t n = gas.cells();
  std::vector<double> alpha_n(n), p(n);
  for (std::size_t i = 0; i < n; ++i) {
    alpha_n[i] = alpha_eff[i] * gas.n[i];
    p[i] = gas.pressure(i);
  }
  std::vector<double> dan = central_diff(alpha_n, gas.dx);
  std::vector<double> dp = central_diff(p, gas.dx);
  std::vector<double> da = central_diff(alpha_eff, gas.dx);
  CellGradients g;
  g.du_dx = central_diff(gas.u, gas.dx);
  g.d_alpha_n.resize(n);
  g.dp_scaled.resize(n);
  g.d_alpha.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.d_alpha_n[i] = {dan[i], 0.0, 0.0};
    g.dp_scaled[i] = {dp[i] / gas.m_g, 0.0, 0.0};
    g.d_alpha[i] = {da[i], 0.0, 0.0};
  }
  return g;
}

struct ParticleLocal {
  kernels::LocalGasState state;
  kernels::GasGradients grads;
  Vec3 grad_p_scaled;
};

ParticleLocal interp_at(const GasField& gas, const std::vector<double>& alpha_eff,
                        const CellGradients& cg, double x, bool thin) {
  std::size_t n = gas.cells();
  Cic c = cic_weights(x, n, gas.dx);
  auto mix = [&](auto&& get) { return get(c.i0) * c.w0 + get(c.i1) * c.w1; };

  ParticleLocal out;
  out.state.alpha_n = mix([&](std::size_t i) { return alpha_eff[i] * gas.n[i]; });
  out.state.u = mix([&](std::size_t i) { return gas.u[i]; });
  out.state.theta_over_m =
      std::max(mix([&](std::size_t i) { return gas.theta[i] / gas.m_g; }), 1e-16);
  if (!thin) {
    out.grads.grad_alpha_n = mix([&](std::size_t i) { return cg.d_alpha_n[i]; });
    Vec3 dudx = mix([&](std::size_t i) { return cg.du_dx[i]; });
    out.grads.grad_u(0, 0) = dudx.x;
    out.grads.grad_u(1, 0) = dudx.y;
    out.grads.grad_u(2, 0) = dudx.z;
    out.grads.div_u = out.grads.grad_u.trace();
    out.grads.grad_alpha = mix([&](std::size_t i) { return cg.d_alpha[i]; });
    out.grads.grad_p = mix([&](std::size_t i) { return cg.dp_scaled[i]; });
  }
  out.grad_p_scaled = mix([&](std::size_t i) { return cg.dp_scaled[i]; });
  return out;
}

}  // namespace

void GasField::validate() const {
  std::size_t c = cells();
  require(c >= 3, "GasField: need at least three cells");
  require(alpha.size() == c && u.size() == c && theta.size() == c,
          "GasField: mismatched field lengths");
  require(dx > 0.0 && std::abs(dx * static_cast<double>(c) - 1.0) < 1e-12,
          "GasField: grid must tile the unit interval");
  require(m_g > 0.0, "GasField: m_g must be positive");
  for (std::size_t i = 0; i < c; ++i) {
    require(alpha[i] > 0.0 && alpha[i] <= 1.0, "GasField: alpha outside (0,1]");
    require(n[i] >= 0.0 && std::isfinite(n[i]), "GasField: invalid density");
    require(theta[i] > 0.0 && std::isfinite(theta[i]), "GasField: invalid temperature");
    require(u[i].finite(), "GasField: invalid velocity");
  }
}

GasField GasField::uniform(std::size_t cells, double m_g, double n0, const Vec3& u0,
                           double theta0) {
  GasField g;
  g.alpha.assign(cells, 1.0);
  g.n.assign(cells, n0);
  g.u.assign(cells, u0);
  g.theta.assign(cells, theta0);
  g.vacuum_flag.assign(cells, 0);
  g.dx = 1.0 / static_cast<double>(cells);
  g.m_g = m_g;
  return g;
}

double ParticlePhase::number_total() const {
  double s = 0.0;
  for (double wi : w) s += wi;
  return s;
}

void ParticlePhase::validate() const {
  require(x.size() == v.size() && x.size() == w.size(), "ParticlePhase: mismatched arrays");
  require(a > 0.0 && a < 0.5, "ParticlePhase: radius must lie in (0, 0.5)");
  for (double xi : x) require(xi >= 0.0 && xi < 1.0, "ParticlePhase: position outside [0,1)");
  for (double wi : w) require(wi > 0.0, "ParticlePhase: weights must be positive");
}

std::vector<double> volume_fraction(const ParticlePhase& phase, std::size_t cells, double dx) {
  phase.validate();
  require(cells >= 1 && dx > 0.0, "volume_fraction: invalid grid");
  std::vector<double> bin(cells, 0.0);
  for (std::size_t p = 0; p < phase.size(); ++p) {
    std::size_t c = std::min(cells - 1, static_cast<std::size_t>(phase.x[p] / dx));
    bin[c] += phase.w[p];
  }
  double coef = kBall3 * phase.a * phase.a * phase.a;
  std::vector<double> alpha(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    alpha[c] = 1.0 - coef * bin[c] / dx;
    if (alpha[c] <= 0.0)
      throw SprayError("volume_fraction: overpacked cell " + std::to_string(c));
  }
  return alpha;
}

GasField gas_step(const GasField& gas, const ParticlePhase& phase, double dt,
                  const kernels::QbarTable& qbar, const SolverOptions& opts,
                  const std::vector<double>* alpha_rate) {
  gas.validate();
  require(dt > 0.0, "gas_step: dt must be positive");
  const std::size_t nc = gas.cells();
  const double dx = gas.dx, m_g = gas.m_g;
  const bool thin = opts.thin_mode;

  for (std::size_t i = 0; i < nc; ++i)
    require(dt * (std::abs(gas.u[i].x) + gas.sound_speed(i)) <= 0.5 * dx,
            "gas_step: CFL violation in cell " + std::to_string(i));

  std::vector<double> alpha_eff = thin ? std::vector<double>(nc, 1.0) : gas.alpha;

  // conserved state
  std::vector<double> e1(nc), e5(nc);
  std::vector<Vec3> e2(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    e1[i] = alpha_eff[i] * m_g * gas.n[i];
    e2[i] = gas.u[i] * e1[i];
    e5[i] = e1[i] * gas.energy(i);
  }

  CellGradients cg = cell_gradients(gas, alpha_eff);

  // drag exchange sources and second-moment correction tensors from particles
  std::vector<Vec3> src_mom(nc, Vec3{});
  std::vector<double> src_en(nc, 0.0);
  std::vector<SymTensor2> qmom(nc, SymTensor2{});
  std::vector<Vec3> qmom_v(nc, Vec3{});
  if (!phase.x.empty()) {
    phase.validate();
    for (std::size_t p = 0; p < phase.size(); ++p) {
      Cic c = cic_weights(phase.x[p], nc, dx);
      ParticleLocal loc = interp_at(gas, alpha_eff, cg, phase.x[p], thin);
      Vec3 drag = kernels::drag_force_D(loc.state, loc.grads, phase.v[p], phase.a, qbar);
      Vec3 dm = drag * (m_g * phase.w[p] / dx);
      double de = m_g * phase.w[p] / dx * drag.dot(phase.v[p]);
      src_mom[c.i0] += dm * c.w0;
      src_mom[c.i1] += dm * c.w1;
      src_en[c.i0] += de * c.w0;
      src_en[c.i1] += de * c.w1;
      if (!thin) {
        SymTensor2 q = kernels::Q_tensor(phase.v[p] - loc.state.u, phase.a);
        qmom[c.i0] = qmom[c.i0] + q * (phase.w[p] * c.w0 / dx);
        qmom[c.i1] = qmom[c.i1] + q * (phase.w[p] * c.w1 / dx);
        Vec3 qv = q * phase.v[p];
        qmom_v[c.i0] += qv * (phase.w[p] * c.w0 / dx);
        qmom_v[c.i1] += qv * (phase.w[p] * c.w1 / dx);
      }
    }
    if (!thin) {
      for (std::size_t i = 0; i < nc; ++i) {
        double arho = alpha_eff[i] * m_g * gas.n[i];
        qmom[i] = qmom[i] * arho;
        qmom_v[i] = qmom_v[i] * arho;
      }
    }
  }

  // Rusanov interface fluxes for the conservative part, alpha p inside
  std::vector<double> g1(nc), g5(nc);
  std::vector<Vec3> g2(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    std::size_t j = (i + 1) % nc;
    auto flux = [&](std::size_t k, double& f1, Vec3& f2, double& f5) {
      double ap = alpha_eff[k] * gas.pressure(k);
      double ux = gas.u[k].x;
      f1 = e1[k] * ux;
      f2 = e2[k] * ux + Vec3{ap, 0.0, 0.0};
      f5 = (e5[k] + ap) * ux;
    };
    double f1i, f5i, f1j, f5j;
    Vec3 f2i, f2j;
    flux(i, f1i, f2i, f5i);
    flux(j, f1j, f2j, f5j);
    double lam = std::max(std::abs(gas.u[i].x) + gas.sound_speed(i),
                          std::abs(gas.u[j].x) + gas.sound_speed(j));
    g1[i] = 0.5 * (f1i + f1j) - 0.5 * lam * (e1[j] - e1[i]);
    g2[i] = (f2i + f2j) * 0.5 - (e2[j] - e2[i]) * (0.5 * lam);
    g5[i] = 0.5 * (f5i + f5j) - 0.5 * lam * (e5[j] - e5[i]);
  }

  GasField out = gas;
  for (std::size_t i = 0; i < nc; ++i) {
    std::size_t im = (i + nc - 1) % nc;
    std::size_t ip = (i + 1) % nc;
    double r = dt / dx;
    double n1 = e1[i] - r * (g1[i] - g1[im]);
    Vec3 n2 = e2[i] - (g2[i] - g2[im]) * r;
    double n5 = e5[i] - r * (g5[i] - g5[im]);

    if (!thin) {
      // non-conservative pressure correction and second-moment fluxes
      n2.x += dt * gas.pressure(i) * cg.d_alpha[i].x;
      Vec3 tflux{(qmom[ip](0, 0) - qmom[im](0, 0)) * (0.5 / dx),
                 (qmom[ip](1, 0) - qmom[im](1, 0)) * (0.5 / dx),
                 (qmom[ip](2, 0) - qmom[im](2, 0)) * (0.5 / dx)};
      n2 -= tflux * dt;
      n5 -= dt * (qmom_v[ip].x - qmom_v[im].x) * (0.5 / dx);
      if (alpha_rate) n5 -= dt * gas.pressure(i) * (*alpha_rate)[i];
    }
    n2 += src_mom[i] * dt;
    n5 += dt * src_en[i];

    double dens = n1 / (alpha_eff[i] * m_g);
    if (dens < opts.vacuum_floor) {
      // hold the previous u, theta and flag the cell
      out.n[i] = std::max(dens, 0.0);
      out.vacuum_flag[i] = 1;
      continue;
    }
    Vec3 u = n2 / n1;
    double en = n5 / n1;
    double theta = 2.0 * m_g / 3.0 * (en - 0.5 * u.norm2());
    if (!(theta > 0.0))
      throw SprayError("gas_step: negative temperature in cell " + std::to_string(i) +
                       " (n=" + std::to_string(dens) + ", E=" + std::to_string(en) + ")");
    out.n[i] = dens;
    out.u[i] = u;
    out.theta[i] = theta;
    out.vacuum_flag[i] = 0;
  }
  out.alpha = alpha_eff;
  return out;
}

ParticlePhase vlasov_step(const ParticlePhase& phase, const GasField& gas, double dt,
                          const kernels::QbarTable& qbar, const SolverOptions& opts) {
  phase.validate();
  gas.validate();
  require(dt > 0.0, "vlasov_step: dt must be positive");
  const bool thin = opts.thin_mode;
  std::vector<double> alpha_eff = thin ? std::vector<double>(gas.cells(), 1.0) : gas.alpha;
  CellGradients cg = cell_gradients(gas, alpha_eff);
  const double buoy = kBall3 * phase.a * phase.a * phase.a;

  ParticlePhase out = phase;
  for (std::size_t p = 0; p < phase.size(); ++p) {
    ParticleLocal loc = interp_at(gas, alpha_eff, cg, phase.x[p], thin);
    Vec3 drag = kernels::drag_force_D(loc.state, loc.grads, phase.v[p], phase.a, qbar);
    Vec3 accel = -drag;  // relaxation toward the gas velocity
    if (!thin) accel -= loc.grad_p_scaled * buoy;  // push toward low pressure
    out.v[p] = phase.v[p] + accel * dt;
    out.x[p] = wrap_unit(phase.x[p] + dt * out.v[p].x);
  }
  return out;
}

namespace {

constexpr double kProbeScale = 1.2;

// sphere grid with the polar axis along x, the direction the fields vary in;
// the Heaviside factors are already absorbed into half-range closed forms, so
// the integrands are smooth
std::vector<SphereNode> remainder_sphere(const QuadratureSpec& quad) {
  int nt = std::max(16, quad.n_theta / 2);
  int np = std::max(16, quad.n_phi / 2);
  auto base = sphere_product_grid(nt, np);
  std::vector<SphereNode> out;
  out.reserve(base.size());
  for (const auto& n : base) out.push_back({{n.dir.z, n.dir.x, n.dir.y}, n.weight});
  return out;
}

// E[ z^2 (v.sigma) 1_{z>0} ] for z = (v-w).sigma, v ~ N(uF.sigma,s2F),
// w ~ N(u.sigma,s2g) independent
double half_z2_vdot(double mz, double s2F, double s2g, double y_mean) {
  double var = s2F + s2g;
  double sd = std::sqrt(var);
  double beta = s2F / var;
  return (y_mean - beta * mz) * half_moment2(mz, sd) + beta * half_moment3(mz, sd);
}

}  // namespace

RemainderReport remainder_diagnostics(const AnalyticGasField& gas,
                                      const AnalyticParticleDensity& F, double a, double m_g,
                                      const QuadratureSpec& quad,
                                      const std::optional<double>& dalpha_dt_override) {
  quad.validate();
  require(a > 0.0 && a < 0.5, "remainder_diagnostics: invalid radius");
  require(F.s2_F > 0.0, "remainder_diagnostics: need a spread-out velocity shape");
  std::vector<SphereNode> sph = remainder_sphere(quad);
  const double coef_kin = 2.0 * a * a * m_g;
  const double ball = kBall3 * a * a * a;

  const int nx = 33;
  RemainderReport rep;
  rep.a = a;

  // momentum and energy defects over the x probes
  for (int ix = 0; ix < nx; ++ix) {
    double x = (ix + 0.5) / nx;
    double alpha_n = gas.alpha_n(x);
    double s2g = gas.s2(x);
    Vec3 u = gas.u(x);
    double nF = F.number_density(x);
    double dnF = F.dnumber_density(x);
    double alpha = 1.0 - ball * nF;
    double dalpha = -ball * dnF;
    double p = alpha_n / alpha * s2g * m_g;  // n theta
    double dalpha_dt = dalpha_dt_override ? *dalpha_dt_override
                                          : ball * (F.u_F.x * dnF);  // static advected shape

    Vec3 r_kin{};
    double p_kin = 0.0;
    for (const auto& node : sph) {
      const Vec3& sg = node.dir;
      double d = a * sg.x;
      double defect = F.number_density(wrap_unit(x - d)) - nF + d * dnF;
      double mz = (F.u_F - u).dot(sg);
      double h2 = half_moment2(mz, std::sqrt(F.s2_F + s2g));
      r_kin += sg * (node.weight * defect * h2);
      p_kin += node.weight * defect * half_z2_vdot(mz, F.s2_F, s2g, F.u_F.dot(sg));
    }
    r_kin *= coef_kin * alpha_n;
    p_kin *= coef_kin * alpha_n;

    Vec3 r_total = r_kin + Vec3{(1.0 - alpha) * p * dalpha, 0.0, 0.0};
    double p_total = p_kin - (1.0 - alpha) * p * dalpha_dt;
    rep.R_norm = std::max(rep.R_norm, r_total.norm());
    rep.P_norm = std::max(rep.P_norm, std::abs(p_total));
  }

  // kinetic-equation defect over the (x, v) probe lattice
  double probe = kProbeScale * std::sqrt(F.s2_F + gas.s2_0);
  for (int ix = 0; ix < nx; ++ix) {
    double x = (ix + 0.5) / nx;
    for (int iv = 0; iv < 27; ++iv) {
      Vec3 v = F.u_F +
               Vec3{(iv % 3 - 1) * probe, ((iv / 3) % 3 - 1) * probe, (iv / 9 - 1) * probe};
      rep.Q_norm =
          std::max(rep.Q_norm, std::abs(remainder_Q_pointwise(gas, F, a, m_g, quad, x, v)));
    }
  }
  return rep;
}

double remainder_Q_pointwise(const AnalyticGasField& gas, const AnalyticParticleDensity& F,
                             double a, double m_g, const QuadratureSpec& quad, double x,
                             const Vec3& v) {
  const double ball = kBall3 * a * a * a;
  std::vector<SphereNode> sph = remainder_sphere(quad);
  double nF = F.number_density(x);
  double dnF = F.dnumber_density(x);
  double alpha = 1.0 - ball * nF;
  double dalpha = -ball * dnF;
  double s2g = gas.s2(x);
  double ntheta = gas.alpha_n(x) / alpha * s2g * m_g;
  double dntheta = m_g *
                   ((gas.dalpha_n(x) * s2g + gas.alpha_n(x) * gas.ds2(x)) * alpha -
                    gas.alpha_n(x) * s2g * dalpha) /
                   (alpha * alpha);
  double q_kin = 0.0;
  for (const auto& node : sph) {
    const Vec3& sg = node.dir;
    double d = a * sg.x;
    auto g_minus = [&](double y) {
      double yy = wrap_unit(y);
      return gas.alpha_n(yy) *
             half_moment1_neg((v - gas.u(yy)).dot(sg), std::sqrt(gas.s2(yy)));
    };
    auto g_plus = [&](double y) {
      double yy = wrap_unit(y);
      return gas.alpha_n(yy) * half_moment1((v - gas.u(yy)).dot(sg), std::sqrt(gas.s2(yy)));
    };
    double m0 = (v - gas.u(x)).dot(sg);
    double s0 = std::sqrt(s2g);
    double t = m0 / s0;
    double dm = -gas.dux(x) * sg.x;
    double ds = gas.ds2(x) / (2.0 * s0);
    double dgm = gas.dalpha_n(x) * half_moment1_neg(m0, s0) +
                 gas.alpha_n(x) * (-norm_cdf(-t) * dm + norm_pdf(t) * ds);
    double dgp = gas.dalpha_n(x) * half_moment1(m0, s0) +
                 gas.alpha_n(x) * (norm_cdf(t) * dm + norm_pdf(t) * ds);
    double defect_m = g_minus(x - d) - g_minus(x) + d * dgm;
    double defect_p = g_plus(x + d) - g_plus(x) - d * dgp;
    q_kin += node.weight * (defect_m - defect_p);
  }
  double q_total = a * a * F.eval(x, v) * q_kin;
  Vec3 gv = F.grad_v(x, v);
  q_total += ball / m_g * (ntheta * gv.x * dalpha - (1.0 - alpha) * gv.x * dntheta);
  return q_total;
}

RemainderReport remainder_diagnostics(const GasField& gas, const ParticlePhase& phase,
                                      const QuadratureSpec& quad, std::size_t particle_cap) {
  gas.validate();
  phase.validate();
  quad.validate();
  const std::size_t nc = gas.cells();
  const double dx = gas.dx, m_g = gas.m_g, a = phase.a;
  const double ball = kBall3 * a * a * a;
  std::vector<SphereNode> sph = remainder_sphere(quad);

  // subsample the phase with weight rescaling to bound cost
  std::vector<std::size_t> pick;
  if (phase.size() <= particle_cap) {
    pick.resize(phase.size());
    for (std::size_t p = 0; p < phase.size(); ++p) pick[p] = p;
  } else {
    CounterRng rng(0x5b5, phase.size());
    pick.resize(particle_cap);
    for (std::size_t k = 0; k < particle_cap; ++k)
      pick[k] =
          std::min(phase.size() - 1, static_cast<std::size_t>(rng.uniform() * phase.size()));
  }
  double rescale = 1.0;
  {
    double picked = 0.0;
    for (std::size_t p : pick) picked += phase.w[p];
    rescale = picked > 0.0 ? phase.number_total() / picked : 1.0;
  }

  std::vector<double> alpha_n(nc), s2(nc), ux(nc), uy(nc), uz(nc), pg(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    alpha_n[i] = gas.alpha[i] * gas.n[i];
    s2[i] = gas.theta[i] / m_g;
    ux[i] = gas.u[i].x;
    uy[i] = gas.u[i].y;
    uz[i] = gas.u[i].z;
    pg[i] = gas.pressure(i);
  }
  std::vector<double> dan = central_diff(alpha_n, dx);
  std::vector<double> ds2 = central_diff(s2, dx);
  std::vector<double> dux = central_diff(ux, dx);
  std::vector<double> dpg = central_diff(pg, dx);

  const double bw = 2.0 * dx;  // x kernel-density bandwidth
  auto kde = [&](double z) {
    double k = 0.0;
    for (int img = -1; img <= 1; ++img) {
      double d = z + img;
      k += std::exp(-0.5 * d * d / (bw * bw));
    }
    return k / (bw * std::sqrt(2.0 * kPi));
  };
  auto dkde = [&](double z) {
    double k = 0.0;
    for (int img = -1; img <= 1; ++img) {
      double d = z + img;
      k += -d / (bw * bw) * std::exp(-0.5 * d * d / (bw * bw));
    }
    return k / (bw * std::sqrt(2.0 * kPi));
  };

  // particle number flux for the discrete d(alpha)/dt
  std::vector<double> flux(nc, 0.0);
  for (std::size_t p = 0; p < phase.size(); ++p) {
    Cic c = cic_weights(phase.x[p], nc, dx);
    flux[c.i0] += phase.w[p] * phase.v[p].x * c.w0 / dx;
    flux[c.i1] += phase.w[p] * phase.v[p].x * c.w1 / dx;
  }
  std::vector<double> dflux = central_diff(flux, dx);

  RemainderReport rep;
  rep.a = a;
  for (std::size_t i = 0; i < nc; ++i) {
    double x = (static_cast<double>(i) + 0.5) * dx;
    double nF = 0.0, dnF = 0.0;
    for (std::size_t p : pick) {
      nF += rescale * phase.w[p] * kde(wrap_dist(x - phase.x[p]));
      dnF += rescale * phase.w[p] * dkde(wrap_dist(x - phase.x[p]));
    }
    double alpha = std::max(1e-6, 1.0 - ball * nF);
    double dalpha_dt = ball * dflux[i];
    double sgd = std::sqrt(s2[i]);

    Vec3 r_kin{};
    double p_kin = 0.0;
    for (const auto& node : sph) {
      const Vec3& sg = node.dir;
      double d = a * sg.x;
      double acc_r = 0.0, acc_p = 0.0;
      for (std::size_t p : pick) {
        double z0 = wrap_dist(x - phase.x[p]);
        double defect = kde(z0 - d) - kde(z0) + d * dkde(z0);
        double wgt = rescale * phase.w[p] * defect;
        double mz = (phase.v[p] - gas.u[i]).dot(sg);
        double h2 = half_moment2(mz, sgd);
        acc_r += wgt * h2;
        acc_p += wgt * phase.v[p].dot(sg) * h2;
      }
      r_kin += sg * (node.weight * acc_r);
      p_kin += node.weight * acc_p;
    }
    double coef = 2.0 * a * a * m_g * alpha_n[i];
    Vec3 r_total = r_kin * coef + Vec3{-ball * dnF, 0.0, 0.0} * ((1.0 - alpha) * pg[i]);
    double p_total = p_kin * coef - (1.0 - alpha) * pg[i] * dalpha_dt;
    rep.R_norm = std::max(rep.R_norm, r_total.norm());
    rep.P_norm = std::max(rep.P_norm, std::abs(p_total));
  }

  // kinetic-equation defect probed around the particle bulk velocity
  Vec3 vbulk{};
  double wtot = 0.0;
  for (std::size_t p : pick) {
    vbulk += phase.v[p] * phase.w[p];
    wtot += phase.w[p];
  }
  if (wtot > 0.0) vbulk = vbulk / wtot;
  double v2 = 0.0;
  for (std::size_t p : pick) v2 += phase.w[p] * (phase.v[p] - vbulk).norm2();
  double spread = wtot > 0.0 ? std::sqrt(std::max(v2 / (3.0 * wtot), 1e-12)) : 1.0;
  double hv =
      spread * std::pow(4.0 / (5.0 * static_cast<double>(std::max<std::size_t>(pick.size(), 2))),
                        1.0 / 7.0);  // Silverman rule, d = 3

  double probe = kProbeScale * std::max(spread, std::sqrt(s2[nc / 2]));
  for (std::size_t i = 0; i < nc; i += std::max<std::size_t>(1, nc / 16)) {
    double x = (static_cast<double>(i) + 0.5) * dx;
    double nF = 0.0, dnF = 0.0;
    for (std::size_t p : pick) {
      nF += rescale * phase.w[p] * kde(wrap_dist(x - phase.x[p]));
      dnF += rescale * phase.w[p] * dkde(wrap_dist(x - phase.x[p]));
    }
    double alpha = std::max(1e-6, 1.0 - ball * nF);
    for (int iv = 0; iv < 27; ++iv) {
      Vec3 v = vbulk +
               Vec3{(iv % 3 - 1) * probe, ((iv / 3) % 3 - 1) * probe, (iv / 9 - 1) * probe};
      double fF = 0.0;
      Vec3 gF{};
      double norm = std::pow(2.0 * kPi * hv * hv, -1.5);
      for (std::size_t p : pick) {
        double kx = kde(wrap_dist(x - phase.x[p]));
        double ev = std::exp(-(v - phase.v[p]).norm2() / (2.0 * hv * hv));
        fF += rescale * phase.w[p] * kx * norm * ev;
        gF += (phase.v[p] - v) * (rescale * phase.w[p] * kx * norm * ev / (hv * hv));
      }
      double q_kin = 0.0;
      for (const auto& node : sph) {
        const Vec3& sg = node.dir;
        double d = a * sg.x;
        auto g_of = [&](double y, bool neg) {
          double yy = wrap_unit(y);
          Vec3 ul{cubic_interp(ux, yy, dx), cubic_interp(uy, yy, dx),
                  cubic_interp(uz, yy, dx)};
          double an = cubic_interp(alpha_n, yy, dx);
          double ss = std::sqrt(std::max(1e-12, cubic_interp(s2, yy, dx)));
          double mz = (v - ul).dot(sg);
          return neg ? an * half_moment1_neg(mz, ss) : an * half_moment1(mz, ss);
        };
        double m0 = (v - gas.u[i]).dot(sg);
        double s0 = std::sqrt(s2[i]);
        double t = m0 / s0;
        double dm = -dux[i] * sg.x;
        double dsd = ds2[i] / (2.0 * s0);
        double dgm = dan[i] * half_moment1_neg(m0, s0) +
                     alpha_n[i] * (-norm_cdf(-t) * dm + norm_pdf(t) * dsd);
        double dgp = dan[i] * half_moment1(m0, s0) +
                     alpha_n[i] * (norm_cdf(t) * dm + norm_pdf(t) * dsd);
        double defect_m = g_of(x - d, true) - g_of(x, true) + d * dgm;
        double defect_p = g_of(x + d, false) - g_of(x, false) - d * dgp;
        q_kin += node.weight * (defect_m - defect_p);
      }
      double q_total = a * a * fF * q_kin;
      q_total += ball / m_g * (pg[i] * gF.x * (-ball * dnF) - (1.0 - alpha) * gF.x * dpg[i]);
      rep.Q_norm = std::max(rep.Q_norm, std::abs(q_total));
    }
  }
  return rep;
}

TimeSeriesRow measure(const GasField& gas, const ParticlePhase& phase, double t) {
  TimeSeriesRow row;
  row.t = t;
  for (std::size_t i = 0; i < gas.cells(); ++i) {
    double arho = gas.alpha[i] * gas.m_g * gas.n[i];
    row.gas_mass += arho * gas.dx;
    row.gas_momentum += gas.u[i] * (arho * gas.dx);
    row.gas_energy += arho * gas.energy(i) * gas.dx;
    row.min_alpha = std::min(row.min_alpha, gas.alpha[i]);
  }
  for (std::size_t p = 0; p < phase.size(); ++p) {
    row.particle_number += phase.w[p];
    row.particle_momentum += phase.v[p] * (gas.m_g * phase.w[p]);
    row.particle_kinetic_energy += 0.5 * gas.m_g * phase.w[p] * phase.v[p].norm2();
  }
  return row;
}

RunResult run_simulation(const RunConfig& config) {
  RunConfig cfg = config;
  cfg.gas.validate();
  const std::size_t nc = cfg.gas.cells();
  const kernels::QbarTable& qbar = kernels::QbarTable::shared();

  if (!cfg.options.thin_mode && !cfg.phase.x.empty())
    cfg.gas.alpha = volume_fraction(cfg.phase, nc, cfg.gas.dx);
  else
    cfg.gas.alpha.assign(nc, 1.0);

  RunResult out;
  out.rows.push_back(measure(cfg.gas, cfg.phase, 0.0));
  if (cfg.remainders && !cfg.phase.x.empty())
    out.rows.back().remainders = remainder_diagnostics(cfg.gas, cfg.phase, cfg.quad);

  std::size_t steps = static_cast<std::size_t>(std::llround(cfg.t_final / cfg.dt));
  GasField gas = cfg.gas;
  ParticlePhase phase = cfg.phase;
  const bool coupled = !phase.x.empty();

  for (std::size_t s = 0; s < steps; ++s) {
    gas = gas_step(gas, phase, 0.5 * cfg.dt, qbar, cfg.options);
    if (coupled) {
      std::vector<double> alpha_old = gas.alpha;
      phase = vlasov_step(phase, gas, cfg.dt, qbar, cfg.options);
      if (!cfg.options.thin_mode) {
        std::vector<double> alpha_new = volume_fraction(phase, nc, gas.dx);
        // moving-boundary energy bookkeeping: (alpha rho E) loses p dalpha
        for (std::size_t i = 0; i < nc; ++i) {
          double e1 = alpha_old[i] * gas.m_g * gas.n[i];
          if (e1 <= 0.0) {
            gas.alpha[i] = alpha_new[i];
            continue;
          }
          double e5 = e1 * gas.energy(i) - gas.pressure(i) * (alpha_new[i] - alpha_old[i]);
          double n_new = e1 / (alpha_new[i] * gas.m_g);
          double en = e5 / e1;
          double theta = 2.0 * gas.m_g / 3.0 * (en - 0.5 * gas.u[i].norm2());
          if (!(theta > 0.0))
            throw SprayError(
                "run_simulation: negative temperature from volume work in cell " +
                std::to_string(i));
          gas.alpha[i] = alpha_new[i];
          gas.n[i] = n_new;
          gas.theta[i] = theta;
        }
      }
    }
    gas = gas_step(gas, phase, 0.5 * cfg.dt, qbar, cfg.options);
    ++out.steps;

    if ((s + 1) % cfg.output_every == 0 || s + 1 == steps) {
      out.rows.push_back(measure(gas, phase, (static_cast<double>(s) + 1.0) * cfg.dt));
      if (cfg.remainders && coupled)
        out.rows.back().remainders = remainder_diagnostics(gas, phase, cfg.quad);
    }
  }
  out.gas = gas;
  out.phase = phase;
  return out;
}

}  // namespace sprays::solver
