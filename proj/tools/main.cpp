// Command-line front end: scenario configs in, CSV/JSON artifacts out.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "sprays/io.hpp"
#include "sprays/kernels.hpp"
#include "sprays/rng.hpp"
#include "sprays/verify.hpp"

namespace {

using namespace sprays;

constexpr double kPi = 3.14159265358979323846264338327950288;

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;  // 0: keep the config's seed
  int threads = 1;
};

io::ScenarioConfig load_config(const GlobalArgs& g, const char* mode_default) {
  io::ScenarioConfig cfg;
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw SprayError("cannot open config: " + g.config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    cfg = io::parse_config(ss.str());
  } else {
    cfg.mode = mode_default;
  }
  if (g.seed != 0) cfg.seed = g.seed;
  return cfg;
}

std::string out_path(const GlobalArgs& g, const std::string& name) {
  std::filesystem::create_directories(g.out_dir);
  return (std::filesystem::path(g.out_dir) / name).string();
}

struct CheckRow {
  std::string name;
  double error;
  double tolerance;
};

int run_kernels_check(const GlobalArgs& g) {
  io::ScenarioConfig cfg = load_config(g, "spray");
  QuadratureSpec quad = cfg.quad;
  const kernels::QbarTable& qbar = kernels::QbarTable::shared();
  std::vector<CheckRow> rows;
  CounterRng rng(cfg.seed ? cfg.seed : 1234);

  {  // equilibrium closure: zeroth moment by Gauss-Hermite
    kernels::LocalGasState st{1.7, {0.4, -0.2, 0.9}, 1.3};
    Quad1D gh = gauss_hermite(40);
    double mass = 0.0;
    double s = std::sqrt(st.theta_over_m);
    for (std::size_t i = 0; i < gh.nodes.size(); ++i)
      for (std::size_t j = 0; j < gh.nodes.size(); ++j)
        for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
          Vec3 w = st.u + Vec3{gh.nodes[i], gh.nodes[j], gh.nodes[k]} * (std::sqrt(2.0) * s);
          mass += gh.weights[i] * gh.weights[j] * gh.weights[k] *
                  kernels::maxwellian_eval(st, w);
        }
    mass *= std::pow(2.0, 1.5) * s * s * s;
    rows.push_back({"maxwellian-moment-0", std::abs(mass - st.alpha_n), 1e-10});
  }
  {  // friction profile: radial structure and limit value
    QuadratureSpec q3 = quad;
    q3.tolerance = std::max(quad.tolerance, 1e-5);
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      Vec3 xi = rng.unit_sphere() * rng.uniform(0.5, 4.0);
      Vec3 qv = kernels::q_kernel(xi, q3);
      Vec3 xh = xi / xi.norm();
      worst = std::max(worst, (qv - xh * qv.dot(xh)).norm());
    }
    rows.push_back({"q-parallelism", worst, q3.tolerance});
    double worst2 = 0.0;
    for (double sarg : {0.5, 1.0, 2.0, 5.0}) {
      Vec3 q3d = kernels::q_kernel({0, 0, sarg}, q3);
      worst2 = std::max(worst2, std::abs(q3d.z - kernels::qbar_profile(sarg, quad) * sarg));
    }
    rows.push_back({"qbar-vs-q-3d", worst2, q3.tolerance});
    rows.push_back({"qbar-limit",
                    std::abs(kernels::qbar_profile(0.0, quad) - 2.1276921621376896), 1e-6});
    double worst3 = 0.0;
    for (double sarg = 0.05; sarg < 30.0; sarg *= 1.7)
      worst3 = std::max(worst3, std::abs(qbar(sarg) - kernels::qbar_profile(sarg, quad)));
    rows.push_back({"qbar-table", worst3, 2e-6});
  }
  {  // hemisphere integrals against their closed forms
    double worst_k = 0.0, worst_k4 = 0.0, worst_idc = 0.0, worst_idq = 0.0;
    for (int t = 0; t < 100; ++t) {
      Vec3 xi = rng.unit_sphere() * rng.uniform(0.1, 10.0);
      Vec3 dk = kernels::K_integral(xi, quad) - kernels::K_closed(xi);
      worst_k = std::max(worst_k, dk.norm());
      SymTensor2 k4 = kernels::K4_integral(xi, quad);
      worst_k4 = std::max(worst_k4, max_abs_diff(k4, kernels::K4_closed(xi)));
      double a = 0.05 + 0.2 * (t % 5);
      double a3 = 2.0 * a * a * a;
      worst_idc = std::max(worst_idc, max_abs_diff(kernels::K4_closed(xi) * a3,
                                                   kernels::Q_tensor(xi, a)));
      worst_idq = std::max(worst_idq, max_abs_diff(k4 * a3, kernels::Q_tensor(xi, a)));
    }
    rows.push_back({"K-vs-closed", worst_k, 1e-6});
    rows.push_back({"K4-vs-closed", worst_k4, 1e-6});
    rows.push_back({"K4-Q-identity-closed", worst_idc, 1e-10});
    rows.push_back({"K4-Q-identity-quad", worst_idq, 1e-6});
  }
  {
    double e = std::abs(kernels::ball_coefficient(3, 1.0) - 4.0 * kPi / 3.0) +
               std::abs(kernels::ball_coefficient(2, 1.0) - kPi) +
               std::abs(kernels::ball_coefficient(1, 1.0) - 2.0);
    rows.push_back({"ball-coefficient", e, 1e-12});
  }
  {  // friction force against the tensor route
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      kernels::LocalGasState st{rng.uniform(0.1, 5.0),
                                {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)},
                                rng.uniform(0.3, 3.0)};
      kernels::GasGradients gr;
      gr.grad_alpha_n = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) gr.grad_u(i, j) = rng.uniform(-1, 1);
      gr.div_u = gr.grad_u.trace();
      Vec3 v{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
      double a = rng.uniform(0.01, 0.3);
      Vec3 d1 = kernels::drag_force_D(st, gr, v, a, qbar);
      Vec3 d2 = kernels::viscous_tensor_Dbar(st, gr, v, a, qbar) * (v - st.u);
      worst = std::max(worst, (d1 - d2).norm() / std::max(1e-30, d1.norm()));
    }
    rows.push_back({"drag-vs-viscous-tensor", worst, 1e-10});
  }
  {
    kernels::LocalGasState st{0.8, {0.1, 0.5, -0.3}, 0.6};
    Vec3 v{1.2, -0.4, 0.7};
    SymTensor2 m2 = kernels::moment2_identity(st, v);
    double tr = st.alpha_n * (v - st.u).norm2() + 3.0 * st.alpha_n * st.theta_over_m;
    rows.push_back({"moment2-trace", std::abs(m2.trace() - tr), 1e-12});
  }

  bool all_pass = true;
  std::printf("%-26s %14s %12s  %s\n", "check", "max abs error", "tolerance", "status");
  for (const auto& r : rows) {
    bool ok = r.error <= r.tolerance;
    all_pass = all_pass && ok;
    std::printf("%-26s %14.3e %12.1e  %s\n", r.name.c_str(), r.error, r.tolerance,
                ok ? "PASS" : "FAIL");
  }
  return all_pass ? 0 : 1;
}

int run_dsmc(const GlobalArgs& g) {
  io::ScenarioConfig cfg = load_config(g, "dsmc");
  collision::ScalingParams pr = cfg.scaling();
  collision::KineticEnsemble ens = collision::make_uniform_ensemble(
      pr, static_cast<int>(cfg.cells), cfg.gas_samples, cfg.gas_n, {cfg.gas_u, 0, 0},
      cfg.gas_theta / cfg.m_g, cfg.particle_density, {cfg.particle_v0, 0, 0},
      cfg.particle_spread2, cfg.seed);
  collision::DsmcOptions opts;
  opts.gas_gas = cfg.gas_gas;
  opts.gas_particle = cfg.gas_particle;

  std::vector<io::DsmcMomentRow> rows;
  auto emit = [&](double t) {
    collision::SpeciesMoments gm = collision::gas_moments(ens);
    rows.push_back({t, "gas", gm.mass, gm.momentum, gm.energy});
    if (!ens.part_x.empty()) {
      collision::SpeciesMoments pm = collision::particle_moments(ens);
      rows.push_back({t, "particle", pm.mass, pm.momentum, pm.energy});
    }
  };
  emit(0.0);
  std::size_t steps = static_cast<std::size_t>(std::llround(cfg.t_final / cfg.dt));
  collision::DsmcStats total{};
  for (std::size_t s = 0; s < steps; ++s) {
    collision::DsmcStats st{};
    ens = collision::dsmc_step(ens, cfg.dt, opts, &st);
    total.gas_gas_events += st.gas_gas_events;
    total.gas_particle_events += st.gas_particle_events;
    total.majorant_violations += st.majorant_violations;
    if ((s + 1) % cfg.output_every == 0 || s + 1 == steps)
      emit((static_cast<double>(s) + 1.0) * cfg.dt);
  }
  io::write_dsmc_csv(out_path(g, "dsmc_moments.csv"), rows);
  io::save_ensemble(out_path(g, "dsmc_state.json"), ens, cfg.t_final);
  std::printf("dsmc: %zu steps, %llu gas-gas events, %llu gas-particle events, "
              "%llu majorant violations\n",
              steps, static_cast<unsigned long long>(total.gas_gas_events),
              static_cast<unsigned long long>(total.gas_particle_events),
              static_cast<unsigned long long>(total.majorant_violations));
  return 0;
}

int run_spray(const GlobalArgs& g, bool thin) {
  io::ScenarioConfig cfg = load_config(g, thin ? "thin-spray" : "spray");
  io::Scenario sc = io::build_scenario(cfg);
  solver::RunConfig run;
  run.gas = sc.gas;
  run.phase = sc.phase;
  run.dt = cfg.dt;
  run.t_final = cfg.t_final;
  run.output_every = cfg.output_every;
  run.options.thin_mode = thin || cfg.mode == "thin-spray";
  run.quad = cfg.quad;
  run.remainders = cfg.remainders;
  solver::RunResult res = solver::run_simulation(run);
  io::write_timeseries(out_path(g, "spray_timeseries.csv"), res.rows);
  io::save_snapshot(out_path(g, "spray_state.json"), res.gas, res.phase, cfg.t_final);
  std::printf("spray: %zu steps, %zu output rows, min alpha %.6f\n", res.steps,
              res.rows.size(), res.rows.back().min_alpha);
  return 0;
}

int run_verify_prop1(const GlobalArgs& g) {
  io::ScenarioConfig cfg = load_config(g, "verify-prop1");
  verify::SmoothCase sc = verify::default_smooth_case();
  collision::VelocityTestFn phi{[](const Vec3& v) { return v.x; },
                                [](const Vec3&) { return Vec3{1, 0, 0}; }};
  std::vector<double> etas = {0.1, 0.05, 0.025};
  verify::ConvergenceStudy st = verify::drag_limit_consistency(
      sc, cfg.a, cfg.delta, etas, phi, static_cast<std::int64_t>(cfg.mc_samples), cfg.quad,
      cfg.seed);
  verify::PressureScaling ps = verify::pressure_term_scaling(
      2.0 * cfg.a, 0.05, cfg.delta, static_cast<std::int64_t>(cfg.mc_samples), cfg.seed + 1);

  io::Report rep;
  rep.name = "drag-limit-consistency";
  rep.inputs = {{"a", cfg.a}, {"delta", cfg.delta},
                {"samples", static_cast<double>(cfg.mc_samples)}};
  for (std::size_t i = 0; i < etas.size(); ++i)
    rep.metrics.push_back({"gap_eta_" + std::to_string(i), st.metrics[i]});
  rep.metrics.push_back({"pressure_ratio", ps.ratio});
  rep.has_fitted_order = true;
  rep.fitted_order = st.fitted_order;
  rep.fit_residual = st.fit_residual;
  rep.pass = st.conclusive && st.fitted_order >= 0.8 && st.fitted_order <= 1.2 && ps.pass;
  io::write_report(out_path(g, "verify_prop1.json"), rep);
  std::printf("%s\n", io::report_json(rep).c_str());
  return rep.pass ? 0 : 1;
}

int run_verify_prop3(const GlobalArgs& g) {
  io::ScenarioConfig cfg = load_config(g, "verify-prop3");
  verify::SmoothCase sc = verify::default_smooth_case();
  collision::ScalingParams pr = cfg.scaling();
  auto rows = verify::identity_suite(sc, pr, static_cast<std::int64_t>(cfg.mc_samples),
                                     cfg.seed, true);
  io::Report rep;
  rep.name = "collision-weak-identity";
  rep.inputs = {{"eta", pr.eta}, {"a", pr.a},
                {"samples", static_cast<double>(cfg.mc_samples)}};
  rep.pass = true;
  for (const auto& row : rows) {
    rep.metrics.push_back({"residual_" + row.name, row.result.residual()});
    rep.metrics.push_back({"sigma_" + row.name, row.result.sigma});
    rep.pass = rep.pass && row.pass;
  }
  io::write_report(out_path(g, "verify_prop3.json"), rep);
  std::printf("%s\n", io::report_json(rep).c_str());
  return rep.pass ? 0 : 1;
}

int run_remainder_scaling(const GlobalArgs& g) {
  io::ScenarioConfig cfg = load_config(g, "remainder-scaling");
  verify::SmoothCase sc = verify::default_smooth_case();
  std::vector<double> a_list = {0.08, 0.04, 0.02};
  verify::RemainderScaling rs = verify::remainder_order_fit(sc, a_list, cfg.quad);
  io::Report rep;
  rep.name = "remainder-scaling";
  for (std::size_t i = 0; i < a_list.size(); ++i) {
    rep.inputs.push_back({"a_" + std::to_string(i), a_list[i]});
    rep.metrics.push_back({"P_" + std::to_string(i), rs.P.metrics[i]});
    rep.metrics.push_back({"Q_" + std::to_string(i), rs.Q.metrics[i]});
    rep.metrics.push_back({"R_" + std::to_string(i), rs.R.metrics[i]});
  }
  rep.metrics.push_back({"order_P", rs.P.fitted_order});
  rep.metrics.push_back({"order_Q", rs.Q.fitted_order});
  rep.metrics.push_back({"order_R", rs.R.fitted_order});
  rep.has_fitted_order = true;
  rep.fitted_order = std::min({rs.P.fitted_order, rs.Q.fitted_order, rs.R.fitted_order});
  rep.fit_residual = std::max({rs.P.fit_residual, rs.Q.fit_residual, rs.R.fit_residual});
  rep.pass = !rs.degenerate && rs.P.conclusive && rs.Q.conclusive && rs.R.conclusive &&
             rs.P.fitted_order >= 3.5 && rs.Q.fitted_order >= 3.5 && rs.R.fitted_order >= 3.5;
  io::write_report(out_path(g, "remainder_scaling.json"), rep);
  std::printf("%s\n", io::report_json(rep).c_str());
  return rep.pass ? 0 : 1;
}

int run_compare_moments(const GlobalArgs& g) {
  io::ScenarioConfig cfg = load_config(g, "compare-moments");
  verify::RelaxationScenario sc;
  sc.gas_samples = cfg.gas_samples;
  std::vector<std::pair<double, double>> schedule = {{0.1, 0.1}, {0.05, 0.05}, {0.025, 0.025}};

  // runs are independent; spread them across the requested workers
  std::vector<verify::MomentComparison> runs(schedule.size());
  {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex mu;
    int workers = std::max(1, std::min<int>(g.threads, static_cast<int>(schedule.size())));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next >= schedule.size()) return;
            i = next++;
          }
          runs[i] = verify::compare_relaxation(sc, schedule[i].first, schedule[i].second,
                                               cfg.a, cfg.seed + 7 * i);
        }
      });
    for (auto& th : pool) th.join();
  }
  bool monotone = true;
  for (std::size_t i = 1; i < runs.size(); ++i)
    if (runs[i].discrepancy >= runs[i - 1].discrepancy) monotone = false;

  io::Report rep;
  rep.name = "dsmc-vs-solver-moments";
  rep.inputs = {{"a", cfg.a}, {"gas_samples", static_cast<double>(cfg.gas_samples)}};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    rep.inputs.push_back({"eta_" + std::to_string(i), runs[i].eta});
    rep.metrics.push_back({"discrepancy_" + std::to_string(i), runs[i].discrepancy});
  }
  rep.pass = monotone;
  for (const auto& r : runs)
    if (std::abs(r.eta - 0.05) < 1e-12) rep.pass = rep.pass && r.discrepancy <= 0.10;
  io::write_report(out_path(g, "compare_moments.json"), rep);
  std::printf("%s\n", io::report_json(rep).c_str());
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinetic and continuum simulation of gas-particle mixtures with "
               "volume-exclusion coupling"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "scenario configuration file");
  app.add_option("--seed", g.seed, "override the configured random seed");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--threads", g.threads, "worker threads for independent study runs");

  auto* kc = app.add_subcommand("kernels-check",
                                "closed-form vs quadrature comparison table");
  auto* dsmc = app.add_subcommand("dsmc", "stochastic two-species particle run");
  auto* spray = app.add_subcommand("spray-sim", "continuum two-phase run");
  auto* p1 = app.add_subcommand("verify-prop1", "drag-limit consistency study");
  auto* p3 = app.add_subcommand("verify-prop3", "combined weak-identity residuals");
  auto* rs = app.add_subcommand("remainder-scaling", "remainder-norm order fit");
  auto* cm = app.add_subcommand("compare-moments", "stochastic vs continuum relaxation");

  CLI11_PARSE(app, argc, argv);

  try {
    if (kc->parsed()) return run_kernels_check(g);
    if (dsmc->parsed()) return run_dsmc(g);
    if (spray->parsed()) return run_spray(g, false);
    if (p1->parsed()) return run_verify_prop1(g);
    if (p3->parsed()) return run_verify_prop3(g);
    if (rs->parsed()) return run_remainder_scaling(g);
    if (cm->parsed()) return run_compare_moments(g);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
