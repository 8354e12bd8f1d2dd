#include "sprays/verify.hpp"

#include <algorithm>
#include <cmath>

#include "sprays/error.hpp"
#include "sprays/quadrature.hpp"
#include "sprays/rng.hpp"

namespace sprays::verify {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kBall = 4.0 * kPi / 3.0;

}  // namespace

ConvergenceStudy fit_order(const std::string& parameter_name, std::vector<double> values,
                           std::vector<double> metrics) {
  require(values.size() == metrics.size() && values.size() >= 2,
          "fit_order: need matching lists of at least two points");
  for (std::size_t i = 1; i < values.size(); ++i)
    require(values[i] < values[i - 1], "fit_order: parameter values must be descending");

  ConvergenceStudy st;
  st.parameter_name = parameter_name;
  st.values = std::move(values);
  st.metrics = std::move(metrics);

  st.degenerate = true;
  for (double m : st.metrics) {
    require(std::isfinite(m) && m >= 0.0, "fit_order: metrics must be finite and nonnegative");
    if (m > 1e-12) st.degenerate = false;
  }
  if (st.degenerate) return st;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = st.values.size();
  for (std::size_t i = 0; i < n; ++i) {
    double lx = std::log(st.values[i]);
    double ly = std::log(std::max(st.metrics[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double dn = static_cast<double>(n);
  st.fitted_order = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  double intercept = (sy - st.fitted_order * sx) / dn;

  double lo = 1e300, hi = -1e300;
  st.fit_residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double ly = std::log(st.metrics[i]);
    lo = std::min(lo, ly);
    hi = std::max(hi, ly);
    st.fit_residual = std::max(
        st.fit_residual, std::abs(intercept + st.fitted_order * std::log(st.values[i]) - ly));
  }
  st.conclusive = st.fit_residual < 0.2 * std::max(hi - lo, 1e-30);
  return st;
}

SmoothCase default_smooth_case() {
  SmoothCase c;
  c.gas.alpha_n0 = 1.5;
  c.gas.alpha_n_amp = 0.2;
  c.gas.alpha_n_phase = 0.1;
  c.gas.u0 = {0.15, 0.0, 0.05};
  c.gas.ux_amp = 0.1;
  c.gas.ux_phase = 0.3;
  c.gas.s2_0 = 1.0;
  c.gas.s2_amp = 0.15;
  c.gas.s2_phase = 0.7;
  c.F.n0 = 5.0;
  c.F.amp = 0.4;
  c.F.phase = 0.2;
  c.F.u_F = {0.5, 0.1, 0.0};
  c.F.s2_F = 0.2;
  return c;
}

double drag_limit_weak_rhs(const SmoothCase& c, double a, const collision::VelocityTestFn& phi,
                           const QuadratureSpec& quad) {
  const double x = c.x0;
  const kernels::QbarTable& qbar = kernels::QbarTable::shared();

  kernels::LocalGasState state = c.gas.state(x);
  kernels::GasGradients grads = c.gas.gradients(x);

  // pressure gradient grad(n theta)/m_g with n = alpha_n / alpha
  double ball = kBall * a * a * a;
  double nF = c.F.number_density(x);
  double dnF = c.F.dnumber_density(x);
  double alpha = 1.0 - ball * nF;
  double dalpha = -ball * dnF;
  double s2 = c.gas.s2(x);
  double grad_p_scaled =
      ((c.gas.dalpha_n(x) * s2 + c.gas.alpha_n(x) * c.gas.ds2(x)) * alpha -
       c.gas.alpha_n(x) * s2 * dalpha) /
      (alpha * alpha);
  grads.grad_p = {grad_p_scaled, 0.0, 0.0};
  grads.grad_alpha = {dalpha, 0.0, 0.0};

  // Gauss-Hermite over the particle velocity shape
  Quad1D gh = gauss_hermite(std::max(16, quad.hermite_order / 2));
  const double inv_pi32 = 0.17958712212516655907430693317931;
  double sF = std::sqrt(c.F.s2_F);
  double drift = 0.0, defect = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i)
    for (std::size_t j = 0; j < gh.nodes.size(); ++j)
      for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
        Vec3 v = c.F.u_F +
                 Vec3{gh.nodes[i], gh.nodes[j], gh.nodes[k]} * (std::sqrt(2.0) * sF);
        double wgt = gh.weights[i] * gh.weights[j] * gh.weights[k] * inv_pi32;
        Vec3 force = kernels::drag_force_D(state, grads, v, a, qbar) +
                     grads.grad_p * ball;
        drift += wgt * force.dot(phi.gradient(v));
        defect += wgt * solver::remainder_Q_pointwise(c.gas, c.F, a, c.m_g, quad, x, v) /
                  c.F.velocity_shape(v) / c.F.number_density(x) * phi.value(v);
      }
  // defect accumulated as int (Q / F) F dv with the Gaussian quadrature
  return -nF * drift + nF * defect;
}

ConvergenceStudy drag_limit_consistency(const SmoothCase& c, double a, double delta,
                                        const std::vector<double>& eta_list,
                                        const collision::VelocityTestFn& phi,
                                        std::int64_t samples, const QuadratureSpec& quad,
                                        std::uint64_t seed) {
  require(!eta_list.empty(), "drag_limit_consistency: empty eta list");
  double rhs = drag_limit_weak_rhs(c, a, phi, quad);
  std::vector<double> gaps;
  gaps.reserve(eta_list.size());
  for (std::size_t i = 0; i < eta_list.size(); ++i) {
    double eta = eta_list[i];
    collision::ScalingParams pr = collision::ScalingParams::make(eta, delta, a);
    collision::McEstimate est =
        collision::enskog_e2_apply(c.F, c.gas, phi, c.x0, pr, samples, seed + i);
    double gap = std::abs(est.value / eta - rhs);
    if (est.std_error / eta > 0.5 * gap)
      throw SprayError("drag_limit_consistency: insufficient samples for eta = " +
                       std::to_string(eta));
    gaps.push_back(gap);
  }
  return fit_order("eta", eta_list, gaps);
}

PressureScaling pressure_term_scaling(double a, double eta, double delta,
                                      std::int64_t samples, std::uint64_t seed) {
  // co-moving configuration: friction vanishes in the mean, the volume push
  // carries the whole signal
  SmoothCase c;
  c.gas.alpha_n0 = 2.0;
  c.gas.s2_0 = 1.0;
  c.gas.s2_amp = 0.25;
  c.gas.s2_phase = 0.1;
  c.gas.u0 = {0.0, 0.0, 0.0};
  c.F.n0 = 1.0;
  c.F.u_F = c.gas.u0;
  c.F.s2_F = 1e-4;

  collision::VelocityTestFn phi{[](const Vec3& v) { return v.x; },
                                [](const Vec3&) { return Vec3{1, 0, 0}; }};

  PressureScaling out;
  collision::ScalingParams pr_full = collision::ScalingParams::make(eta, delta, a);
  collision::ScalingParams pr_half = collision::ScalingParams::make(eta, delta, 0.5 * a);
  collision::McEstimate full =
      collision::enskog_e2_apply(c.F, c.gas, phi, c.x0, pr_full, samples, seed);
  collision::McEstimate half =
      collision::enskog_e2_apply(c.F, c.gas, phi, c.x0, pr_half, samples * 4, seed + 1);

  // remove the surface-scaling part: the friction term cancels at co-moving
  // mean, so the whole signal is the volume term
  out.term_full = full.value / eta;
  out.term_half = half.value / eta;
  out.ratio = out.term_full / out.term_half;
  out.mc_error = std::abs(full.std_error / (eta * out.term_half)) +
                 std::abs(half.std_error * out.term_full /
                          (eta * out.term_half * out.term_half));
  out.pass = std::isfinite(out.ratio) && std::abs(out.ratio - 8.0) <= 0.8;
  return out;
}

std::vector<IdentityRow> identity_suite(const SmoothCase& c,
                                        const collision::ScalingParams& pr,
                                        std::int64_t samples, std::uint64_t seed,
                                        bool include_bump) {
  std::vector<IdentityRow> rows;
  collision::IdentityOptions opts;
  opts.x0 = c.x0;

  auto run = [&](const std::string& name, const collision::SpaceTestFn& phi,
                 std::uint64_t salt) {
    IdentityRow row;
    row.name = name;
    row.result = collision::weak_identity_residual(c.gas, c.F, phi, pr, samples, seed + salt,
                                                   opts);
    row.pass = row.result.sigma == 0.0 ? row.result.residual() == 0.0
                                       : row.result.within(3.0);
    rows.push_back(row);
  };

  run("1", [](double, const Vec3&) { return 1.0; }, 11);
  run("xi_1", [](double, const Vec3& xi) { return xi.x; }, 23);
  run("half_speed2", [](double, const Vec3& xi) { return 0.5 * xi.norm2(); }, 37);
  if (include_bump) {
    run("bump",
        [](double x, const Vec3& xi) {
          double dx = wrap_dist(x - 0.4) / 0.3;
          double dv = (xi - Vec3{0.5, 0, 0}).norm2() / 4.0;
          double fx = std::abs(dx) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - dx * dx)) : 0.0;
          double fv = dv < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - dv)) : 0.0;
          return fx * fv;
        },
        53);
  }
  return rows;
}

RemainderScaling remainder_order_fit(const SmoothCase& c, const std::vector<double>& a_list,
                                     const QuadratureSpec& quad) {
  std::vector<double> pn, qn, rn;
  for (double a : a_list) {
    solver::RemainderReport rep = solver::remainder_diagnostics(c.gas, c.F, a, c.m_g, quad);
    pn.push_back(rep.P_norm);
    qn.push_back(rep.Q_norm);
    rn.push_back(rep.R_norm);
  }
  RemainderScaling out;
  out.P = fit_order("a", a_list, pn);
  out.Q = fit_order("a", a_list, qn);
  out.R = fit_order("a", a_list, rn);
  out.degenerate = out.P.degenerate && out.Q.degenerate && out.R.degenerate;
  return out;
}

MomentComparison compare_relaxation(const RelaxationScenario& sc, double eta, double delta,
                                    double a, std::uint64_t seed) {
  MomentComparison out;
  out.eta = eta;
  out.delta = delta;
  out.a = a;
  out.horizons = sc.horizons;

  collision::ScalingParams pr = collision::ScalingParams::make(eta, delta, a);
  double ball = kBall * a * a * a;
  double alpha0 = 1.0 - ball * sc.part_density;

  // stochastic run: gas holds the product alpha*n of the continuum state
  collision::KineticEnsemble ens = collision::make_uniform_ensemble(
      pr, sc.cells, sc.gas_samples, alpha0 * sc.gas_density, {0, 0, 0}, sc.gas_theta,
      sc.part_density, sc.part_v0, sc.part_spread2, seed);
  double dt = 0.2 * delta;
  std::size_t h = 0;
  double t = 0.0;
  out.v_dsmc.resize(sc.horizons.size());
  while (h < sc.horizons.size()) {
    double target = sc.horizons[h];
    while (t < target - 1e-12) {
      double step = std::min(dt, target - t);
      ens = collision::dsmc_step(ens, step);
      t += step;
    }
    out.v_dsmc[h] = collision::particle_bulk_velocity(ens).x;
    ++h;
  }

  // continuum run with matched moments
  solver::GasField gas = solver::GasField::uniform(static_cast<std::size_t>(sc.cells), pr.m_g,
                                                   sc.gas_density, {0, 0, 0}, sc.gas_theta);
  solver::ParticlePhase phase;
  phase.a = a;
  std::size_t npart = 4096;
  phase.w.assign(npart, sc.part_density / static_cast<double>(npart));
  CounterRng rng(seed, 0x50);
  double sp = std::sqrt(sc.part_spread2);
  for (std::size_t j = 0; j < npart; ++j) {
    phase.x.push_back((static_cast<double>(j) + 0.5) / static_cast<double>(npart));
    phase.v.push_back(sc.part_v0 + rng.normal3() * sp);
  }
  solver::RunConfig cfg;
  cfg.gas = gas;
  cfg.phase = phase;
  cfg.dt = sc.dt_solver;
  cfg.t_final = sc.horizons.back();
  cfg.output_every = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(sc.horizons.front() / sc.dt_solver)));
  solver::RunResult res = solver::run_simulation(cfg);

  out.v_solver.resize(sc.horizons.size());
  for (std::size_t k = 0; k < sc.horizons.size(); ++k) {
    double best = 1e300;
    for (const auto& row : res.rows) {
      double d = std::abs(row.t - sc.horizons[k]);
      if (d < best) {
        best = d;
        out.v_solver[k] = row.particle_momentum.x / row.particle_number;
      }
    }
  }

  double gap0 = std::abs(sc.part_v0.x);
  for (std::size_t k = 0; k < sc.horizons.size(); ++k)
    out.discrepancy =
        std::max(out.discrepancy, std::abs(out.v_dsmc[k] - out.v_solver[k]) / gap0);
  return out;
}

MomentComparisonSeries dsmc_vs_solver_moments(
    const RelaxationScenario& sc, const std::vector<std::pair<double, double>>& eta_delta,
    double a, std::uint64_t seed) {
  MomentComparisonSeries series;
  for (std::size_t i = 0; i < eta_delta.size(); ++i)
    series.runs.push_back(
        compare_relaxation(sc, eta_delta[i].first, eta_delta[i].second, a, seed + 7 * i));
  series.monotone = true;
  for (std::size_t i = 1; i < series.runs.size(); ++i)
    if (series.runs[i].discrepancy >= series.runs[i - 1].discrepancy) series.monotone = false;
  return series;
}

ConvergenceStudy thin_limit_order(const std::vector<double>& a_list) {
  // deterministic monokinetic relaxation: both runs share noise-free sources,
  // so the gap measures the model difference alone
  std::vector<double> gaps;
  for (double a : a_list) {
    solver::GasField gas = solver::GasField::uniform(32, 1.0, 1.0, {0, 0, 0}, 1.0);
    solver::ParticlePhase phase;
    phase.a = a;
    const std::size_t n = 2048;
    phase.w.assign(n, 30.0 / static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
      phase.x.push_back((static_cast<double>(j) + 0.5) / static_cast<double>(n));
      phase.v.push_back(Vec3{1.0, 0.0, 0.0});
    }
    solver::RunConfig cfg;
    cfg.gas = gas;
    cfg.phase = phase;
    cfg.dt = 5e-3;
    cfg.t_final = 1.0;
    cfg.output_every = 1000000;
    solver::RunResult thick = run_simulation(cfg);
    cfg.options.thin_mode = true;
    solver::RunResult thin = run_simulation(cfg);

    // compare primitive fields (identical at t = 0) at the final time
    double gap = 0.0;
    double vthick = thick.rows.back().particle_momentum.x / thick.rows.back().particle_number;
    double vthin = thin.rows.back().particle_momentum.x / thin.rows.back().particle_number;
    gap = std::max(gap, std::abs(vthick - vthin));
    for (std::size_t i = 0; i < thick.gas.cells(); ++i) {
      gap = std::max(gap, std::abs(thick.gas.n[i] - thin.gas.n[i]));
      gap = std::max(gap, std::abs(thick.gas.u[i].x - thin.gas.u[i].x));
    }
    gaps.push_back(gap);
  }
  return fit_order("a", a_list, gaps);
}

}  // namespace sprays::verify
