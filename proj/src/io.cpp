#include "sprays/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sprays/error.hpp"
#include "sprays/rng.hpp"

namespace sprays::io {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SprayError("cannot open for writing: " + path);
  out << content;
  if (!out) throw SprayError("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SprayError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json vec_to_json(const std::vector<double>& v) { return json(v); }

std::vector<double> json_to_vec(const json& j) { return j.get<std::vector<double>>(); }

}  // namespace

std::string timeseries_csv(const std::vector<solver::TimeSeriesRow>& rows) {
  std::ostringstream out;
  out << "t,total_gas_mass,total_gas_momentum_x,total_gas_momentum_y,total_gas_momentum_z,"
         "total_gas_energy,total_particle_number,total_particle_momentum_x,"
         "total_particle_momentum_y,total_particle_momentum_z,total_particle_kinetic_energy,"
         "min_alpha,P_norm,Q_norm,R_norm\n";
  for (const auto& r : rows) {
    out << fmt(r.t) << ',' << fmt(r.gas_mass) << ',' << fmt(r.gas_momentum.x) << ','
        << fmt(r.gas_momentum.y) << ',' << fmt(r.gas_momentum.z) << ',' << fmt(r.gas_energy)
        << ',' << fmt(r.particle_number) << ',' << fmt(r.particle_momentum.x) << ','
        << fmt(r.particle_momentum.y) << ',' << fmt(r.particle_momentum.z) << ','
        << fmt(r.particle_kinetic_energy) << ',' << fmt(r.min_alpha) << ','
        << fmt(r.remainders.P_norm) << ',' << fmt(r.remainders.Q_norm) << ','
        << fmt(r.remainders.R_norm) << '\n';
  }
  return out.str();
}

void write_timeseries(const std::string& path,
                      const std::vector<solver::TimeSeriesRow>& rows) {
  write_file(path, timeseries_csv(rows));
}

std::string dsmc_csv(const std::vector<DsmcMomentRow>& rows) {
  std::ostringstream out;
  out << "t,species,mass,momentum_x,momentum_y,momentum_z,energy\n";
  for (const auto& r : rows) {
    out << fmt(r.t) << ',' << r.species << ',' << fmt(r.mass) << ',' << fmt(r.momentum.x)
        << ',' << fmt(r.momentum.y) << ',' << fmt(r.momentum.z) << ',' << fmt(r.energy)
        << '\n';
  }
  return out.str();
}

void write_dsmc_csv(const std::string& path, const std::vector<DsmcMomentRow>& rows) {
  write_file(path, dsmc_csv(rows));
}

std::string report_json(const Report& report) {
  json j;
  j["schema_version"] = 1;
  j["name"] = report.name;
  json inputs = json::object();
  for (const auto& e : report.inputs) inputs[e.key] = e.value;
  j["inputs"] = inputs;
  json metrics = json::object();
  for (const auto& e : report.metrics) metrics[e.key] = e.value;
  j["metrics"] = metrics;
  if (report.has_fitted_order) {
    j["fitted_order"] = report.fitted_order;
    j["fit_residual"] = report.fit_residual;
  }
  j["pass"] = report.pass;
  return j.dump(2) + "\n";
}

void write_report(const std::string& path, const Report& report) {
  write_file(path, report_json(report));
}

void save_snapshot(const std::string& path, const solver::GasField& gas,
                   const solver::ParticlePhase& phase, double t) {
  json j;
  j["schema_version"] = 1;
  j["kind"] = "spray_state";
  j["t"] = t;
  json g;
  g["dx"] = gas.dx;
  g["m_g"] = gas.m_g;
  g["alpha"] = vec_to_json(gas.alpha);
  g["n"] = vec_to_json(gas.n);
  std::vector<double> ux, uy, uz;
  for (const Vec3& u : gas.u) {
    ux.push_back(u.x);
    uy.push_back(u.y);
    uz.push_back(u.z);
  }
  g["u_x"] = ux;
  g["u_y"] = uy;
  g["u_z"] = uz;
  g["theta"] = vec_to_json(gas.theta);
  g["vacuum_flag"] = gas.vacuum_flag;
  j["gas"] = g;
  json p;
  p["a"] = phase.a;
  p["x"] = vec_to_json(phase.x);
  std::vector<double> vx, vy, vz;
  for (const Vec3& v : phase.v) {
    vx.push_back(v.x);
    vy.push_back(v.y);
    vz.push_back(v.z);
  }
  p["v_x"] = vx;
  p["v_y"] = vy;
  p["v_z"] = vz;
  p["w"] = vec_to_json(phase.w);
  j["particles"] = p;
  write_file(path, j.dump() + "\n");
}

Snapshot load_snapshot(const std::string& path) {
  json j = json::parse(read_file(path));
  require(j.value("kind", "") == "spray_state", "snapshot: wrong kind in " + path);
  require(j.value("schema_version", 0) == 1, "snapshot: unsupported schema version");
  Snapshot s;
  s.t = j["t"].get<double>();
  const json& g = j["gas"];
  s.gas.dx = g["dx"].get<double>();
  s.gas.m_g = g["m_g"].get<double>();
  s.gas.alpha = json_to_vec(g["alpha"]);
  s.gas.n = json_to_vec(g["n"]);
  std::vector<double> ux = json_to_vec(g["u_x"]);
  std::vector<double> uy = json_to_vec(g["u_y"]);
  std::vector<double> uz = json_to_vec(g["u_z"]);
  for (std::size_t i = 0; i < ux.size(); ++i) s.gas.u.push_back({ux[i], uy[i], uz[i]});
  s.gas.theta = json_to_vec(g["theta"]);
  s.gas.vacuum_flag = g["vacuum_flag"].get<std::vector<std::uint8_t>>();
  const json& p = j["particles"];
  s.phase.a = p["a"].get<double>();
  s.phase.x = json_to_vec(p["x"]);
  std::vector<double> vx = json_to_vec(p["v_x"]);
  std::vector<double> vy = json_to_vec(p["v_y"]);
  std::vector<double> vz = json_to_vec(p["v_z"]);
  for (std::size_t i = 0; i < vx.size(); ++i) s.phase.v.push_back({vx[i], vy[i], vz[i]});
  s.phase.w = json_to_vec(p["w"]);
  return s;
}

void save_ensemble(const std::string& path, const collision::KineticEnsemble& e, double t) {
  json j;
  j["schema_version"] = 1;
  j["kind"] = "kinetic_ensemble";
  j["t"] = t;
  j["cell_count"] = e.cell_count;
  j["rng_seed"] = e.rng_seed;
  j["step_index"] = e.step_index;
  json pr;
  pr["eta"] = e.params.eta;
  pr["delta"] = e.params.delta;
  pr["a"] = e.params.a;
  pr["m_g"] = e.params.m_g;
  pr["m_p"] = e.params.m_p;
  j["params"] = pr;
  auto species = [](const std::vector<double>& x, const std::vector<Vec3>& v,
                    const std::vector<double>& w) {
    json s;
    s["x"] = x;
    std::vector<double> vx, vy, vz;
    for (const Vec3& vv : v) {
      vx.push_back(vv.x);
      vy.push_back(vv.y);
      vz.push_back(vv.z);
    }
    s["v_x"] = vx;
    s["v_y"] = vy;
    s["v_z"] = vz;
    s["w"] = w;
    return s;
  };
  j["gas"] = species(e.gas_x, e.gas_v, e.gas_w);
  j["particles"] = species(e.part_x, e.part_v, e.part_w);
  write_file(path, j.dump() + "\n");
}

EnsembleSnapshot load_ensemble(const std::string& path) {
  json j = json::parse(read_file(path));
  require(j.value("kind", "") == "kinetic_ensemble", "snapshot: wrong kind in " + path);
  require(j.value("schema_version", 0) == 1, "snapshot: unsupported schema version");
  EnsembleSnapshot out;
  out.t = j["t"].get<double>();
  collision::KineticEnsemble& e = out.ensemble;
  e.cell_count = j["cell_count"].get<int>();
  e.rng_seed = j["rng_seed"].get<std::uint64_t>();
  e.step_index = j["step_index"].get<std::uint64_t>();
  e.params.eta = j["params"]["eta"].get<double>();
  e.params.delta = j["params"]["delta"].get<double>();
  e.params.a = j["params"]["a"].get<double>();
  e.params.m_g = j["params"]["m_g"].get<double>();
  e.params.m_p = j["params"]["m_p"].get<double>();
  auto species = [](const json& s, std::vector<double>& x, std::vector<Vec3>& v,
                    std::vector<double>& w) {
    x = s["x"].get<std::vector<double>>();
    std::vector<double> vx = s["v_x"].get<std::vector<double>>();
    std::vector<double> vy = s["v_y"].get<std::vector<double>>();
    std::vector<double> vz = s["v_z"].get<std::vector<double>>();
    for (std::size_t i = 0; i < vx.size(); ++i) v.push_back({vx[i], vy[i], vz[i]});
    w = s["w"].get<std::vector<double>>();
  };
  species(j["gas"], e.gas_x, e.gas_v, e.gas_w);
  species(j["particles"], e.part_x, e.part_v, e.part_w);
  return out;
}

Scenario build_scenario(const ScenarioConfig& cfg) {
  Scenario sc;
  sc.gas = solver::GasField::uniform(cfg.cells, cfg.m_g, cfg.gas_n, {cfg.gas_u, 0.0, 0.0},
                                     cfg.gas_theta);
  constexpr double kTwoPi = 6.28318530717958647692528676655900577;

  if (cfg.preset == "sod") {
    for (std::size_t i = 0; i < cfg.cells; ++i) {
      double x = (static_cast<double>(i) + 0.5) * sc.gas.dx;
      if (x >= 0.5) {
        sc.gas.n[i] = 0.125 * cfg.gas_n;
        sc.gas.theta[i] = 0.8 * cfg.gas_theta;
      }
    }
    return sc;  // pure gas problem
  }
  if (cfg.preset == "sinusoidal-F" && cfg.gas_n_amp != 0.0) {
    for (std::size_t i = 0; i < cfg.cells; ++i) {
      double x = (static_cast<double>(i) + 0.5) * sc.gas.dx;
      sc.gas.n[i] = cfg.gas_n * (1.0 + cfg.gas_n_amp * std::sin(kTwoPi * x));
    }
  }

  if (cfg.particle_density <= 0.0) return sc;

  sc.phase.a = cfg.a;
  std::size_t n = cfg.particle_count;
  sc.phase.w.assign(n, cfg.particle_density / static_cast<double>(n));
  CounterRng rng(cfg.seed, 0x1c);
  double v0 = cfg.preset == "comoving" ? cfg.gas_u : cfg.particle_v0;
  double spread = std::sqrt(cfg.particle_spread2);
  double amp = cfg.preset == "sinusoidal-F" ? cfg.particle_amp : 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double target = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
    double x = target;
    if (amp != 0.0) {
      // invert the sinusoidal cumulative density by Newton iteration
      for (int it = 0; it < 50; ++it) {
        double cdf = x + amp / kTwoPi * (1.0 - std::cos(kTwoPi * x));
        double pdf = 1.0 + amp * std::sin(kTwoPi * x);
        x -= (cdf - target) / pdf;
        x = wrap_unit(x);
      }
    }
    sc.phase.x.push_back(x);
    sc.phase.v.push_back(Vec3{v0, 0.0, 0.0} +
                         (spread > 0.0 ? rng.normal3() * spread : Vec3{}));
  }
  return sc;
}

}  // namespace sprays::io
