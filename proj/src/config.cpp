#include "sprays/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "sprays/error.hpp"

namespace sprays::io {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Parser {
  ScenarioConfig cfg;
  std::vector<std::string> errors;
  bool m_p_given = false;

  using Setter = std::function<void(Parser&, const std::string&, int line)>;
  static const std::map<std::string, Setter>& table();

  void fail(int line, const std::string& msg) {
    errors.push_back("line " + std::to_string(line) + ": " + msg);
  }

  double num(const std::string& v, int line, bool& ok) {
    try {
      std::size_t pos = 0;
      double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing characters");
      ok = true;
      return d;
    } catch (const std::exception&) {
      fail(line, "not a number: '" + v + "'");
      ok = false;
      return 0.0;
    }
  }

  bool boolean(const std::string& v, int line, bool& ok) {
    ok = true;
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(line, "not a boolean: '" + v + "'");
    ok = false;
    return false;
  }
};

#define NUM_SETTER(field)                          \
  [](Parser& p, const std::string& v, int line) { \
    bool ok;                                       \
    double d = p.num(v, line, ok);                 \
    if (ok) p.cfg.field = d;                       \
  }
#define SIZE_SETTER(field)                                    \
  [](Parser& p, const std::string& v, int line) {            \
    bool ok;                                                  \
    double d = p.num(v, line, ok);                            \
    if (ok && (d < 0 || d != std::floor(d)))                  \
      p.fail(line, "expected a nonnegative integer");         \
    else if (ok)                                              \
      p.cfg.field = static_cast<std::size_t>(d);              \
  }
#define BOOL_SETTER(field)                         \
  [](Parser& p, const std::string& v, int line) { \
    bool ok;                                       \
    bool b = p.boolean(v, line, ok);               \
    if (ok) p.cfg.field = b;                       \
  }

const std::map<std::string, Parser::Setter>& Parser::table() {
  static const std::map<std::string, Setter> t = {
      {"run.mode", [](Parser& p, const std::string& v, int) { p.cfg.mode = v; }},
      {"run.seed", SIZE_SETTER(seed)},
      {"run.remainders", BOOL_SETTER(remainders)},
      {"run.mc_samples", SIZE_SETTER(mc_samples)},
      {"params.eta", NUM_SETTER(eta)},
      {"params.delta", NUM_SETTER(delta)},
      {"params.a", NUM_SETTER(a)},
      {"params.m_g", NUM_SETTER(m_g)},
      {"params.m_p",
       [](Parser& p, const std::string& v, int line) {
         bool ok;
         double d = p.num(v, line, ok);
         if (ok) {
           p.cfg.m_p = d;
           p.m_p_given = true;
         }
       }},
      {"grid.cells", SIZE_SETTER(cells)},
      {"grid.dt", NUM_SETTER(dt)},
      {"grid.t_final", NUM_SETTER(t_final)},
      {"grid.output_every", SIZE_SETTER(output_every)},
      {"initial.preset", [](Parser& p, const std::string& v, int) { p.cfg.preset = v; }},
      {"initial.gas_n", NUM_SETTER(gas_n)},
      {"initial.gas_theta", NUM_SETTER(gas_theta)},
      {"initial.gas_u", NUM_SETTER(gas_u)},
      {"initial.gas_n_amp", NUM_SETTER(gas_n_amp)},
      {"initial.particle_density", NUM_SETTER(particle_density)},
      {"initial.particle_v0", NUM_SETTER(particle_v0)},
      {"initial.particle_spread2", NUM_SETTER(particle_spread2)},
      {"initial.particle_amp", NUM_SETTER(particle_amp)},
      {"initial.particle_count", SIZE_SETTER(particle_count)},
      {"dsmc.gas_samples", SIZE_SETTER(gas_samples)},
      {"dsmc.gas_gas", BOOL_SETTER(gas_gas)},
      {"dsmc.gas_particle", BOOL_SETTER(gas_particle)},
      {"quadrature.sphere",
       [](Parser& p, const std::string& v, int line) {
         if (v.rfind("product:", 0) == 0) {
           int nt = 0, np = 0;
           if (std::sscanf(v.c_str(), "product:%dx%d", &nt, &np) == 2) {
             p.cfg.quad.sphere_rule = QuadratureSpec::SphereRule::product_grid;
             p.cfg.quad.n_theta = nt;
             p.cfg.quad.n_phi = np;
             return;
           }
         } else if (v.rfind("mc:", 0) == 0) {
           long long ns = 0, sd = 0;
           if (std::sscanf(v.c_str(), "mc:%lld:%lld", &ns, &sd) == 2) {
             p.cfg.quad.sphere_rule = QuadratureSpec::SphereRule::monte_carlo;
             p.cfg.quad.mc_samples = ns;
             p.cfg.quad.mc_seed = static_cast<std::uint64_t>(sd);
             return;
           }
         }
         p.fail(line, "sphere rule must be product:<n>x<m> or mc:<samples>:<seed>");
       }},
      {"quadrature.hermite_order",
       [](Parser& p, const std::string& v, int line) {
         bool ok;
         double d = p.num(v, line, ok);
         if (ok) p.cfg.quad.hermite_order = static_cast<int>(d);
       }},
      {"quadrature.tolerance",
       [](Parser& p, const std::string& v, int line) {
         bool ok;
         double d = p.num(v, line, ok);
         if (ok) p.cfg.quad.tolerance = d;
       }},
  };
  return t;
}

#undef NUM_SETTER
#undef SIZE_SETTER
#undef BOOL_SETTER

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  Parser p;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        p.fail(line_no, "malformed section header: " + line);
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      p.fail(line_no, "expected key = value: " + line);
      continue;
    }
    std::string key = section + "." + trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto it = Parser::table().find(key);
    if (it == Parser::table().end()) {
      std::string best;
      std::size_t best_d = 1000;
      for (const auto& [k, setter] : Parser::table()) {
        (void)setter;
        std::size_t d = edit_distance(key, k);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      p.fail(line_no, "unknown key '" + key + "' (nearest valid key: '" + best + "')");
      continue;
    }
    it->second(p, value, line_no);
  }

  ScenarioConfig& c = p.cfg;
  if (!p.m_p_given && c.eta > 0.0) c.m_p = c.m_g / c.eta;

  // invariants, all collected before reporting
  static const std::vector<std::string> modes = {
      "dsmc",         "spray",           "thin-spray",     "verify-prop1",
      "verify-prop3", "remainder-scaling", "compare-moments"};
  if (std::find(modes.begin(), modes.end(), c.mode) == modes.end())
    p.errors.push_back("mode '" + c.mode + "' is not one of the supported subcommand modes");
  static const std::vector<std::string> presets = {"uniform", "sod", "comoving",
                                                   "drag-relaxation", "sinusoidal-F"};
  if (std::find(presets.begin(), presets.end(), c.preset) == presets.end())
    p.errors.push_back("preset '" + c.preset + "' is not a known initial condition");

  if (!(c.eta > 0.0 && c.eta <= 1.0)) p.errors.push_back("eta must lie in (0, 1]");
  if (!(c.delta > 0.0)) p.errors.push_back("delta must be positive");
  if (!(c.a > 0.0 && c.a < 0.5))
    p.errors.push_back("a must lie in (0, 0.5): the contact offset has to fit the box");
  if (!(c.m_g > 0.0 && c.m_p > 0.0)) p.errors.push_back("masses must be positive");
  if (c.eta > 0.0 && c.m_p > 0.0 &&
      std::abs(c.eta - c.m_g / c.m_p) > 1e-12 * std::max(1.0, c.eta))
    p.errors.push_back("eta must equal m_g/m_p (got eta = " + fmt(c.eta) +
                       ", m_g/m_p = " + fmt(c.m_g / c.m_p) + ")");
  if (c.cells < 3) p.errors.push_back("grid needs at least three cells");
  if (!(c.dt > 0.0)) p.errors.push_back("dt must be positive");
  if (!(c.t_final >= c.dt)) p.errors.push_back("t_final must cover at least one step");
  if (c.output_every == 0) p.errors.push_back("output_every must be positive");
  if (!(c.gas_n > 0.0)) p.errors.push_back("gas density must be positive");
  if (!(c.gas_theta > 0.0)) p.errors.push_back("gas temperature must be positive");
  if (c.particle_density < 0.0) p.errors.push_back("particle density must be nonnegative");
  if (c.particle_spread2 < 0.0) p.errors.push_back("particle spread must be nonnegative");

  if (c.mode == "spray" || c.mode == "thin-spray") {
    double cmax = std::abs(c.gas_u) + std::sqrt(5.0 / 3.0 * c.gas_theta / c.m_g) +
                  std::abs(c.particle_v0);
    if (c.dt * cmax > 0.5 / static_cast<double>(c.cells))
      p.errors.push_back("dt violates the CFL bound for the configured state (dt*(|u|+c) = " +
                         fmt(c.dt * cmax) + " > dx/2 = " +
                         fmt(0.5 / static_cast<double>(c.cells)) + ")");
  }
  if (c.mode == "dsmc" && c.gas_gas && c.dt > 0.2 * c.delta)
    p.errors.push_back("dt must not exceed 0.2*delta for collisional stepping");
  try {
    c.quad.validate();
  } catch (const SprayError& e) {
    p.errors.push_back(e.what());
  }

  if (!p.errors.empty()) {
    std::string all = "configuration invalid:";
    for (const auto& e : p.errors) all += "\n  - " + e;
    throw SprayError(all);
  }
  return c;
}

std::string print_config(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "[run]\n";
  out << "mode = " << c.mode << "\n";
  out << "seed = " << c.seed << "\n";
  out << "remainders = " << (c.remainders ? "true" : "false") << "\n";
  out << "mc_samples = " << c.mc_samples << "\n";
  out << "\n[params]\n";
  out << "eta = " << fmt(c.eta) << "\n";
  out << "delta = " << fmt(c.delta) << "\n";
  out << "a = " << fmt(c.a) << "\n";
  out << "m_g = " << fmt(c.m_g) << "\n";
  out << "m_p = " << fmt(c.m_p) << "\n";
  out << "\n[grid]\n";
  out << "cells = " << c.cells << "\n";
  out << "dt = " << fmt(c.dt) << "\n";
  out << "t_final = " << fmt(c.t_final) << "\n";
  out << "output_every = " << c.output_every << "\n";
  out << "\n[initial]\n";
  out << "preset = " << c.preset << "\n";
  out << "gas_n = " << fmt(c.gas_n) << "\n";
  out << "gas_theta = " << fmt(c.gas_theta) << "\n";
  out << "gas_u = " << fmt(c.gas_u) << "\n";
  out << "gas_n_amp = " << fmt(c.gas_n_amp) << "\n";
  out << "particle_density = " << fmt(c.particle_density) << "\n";
  out << "particle_v0 = " << fmt(c.particle_v0) << "\n";
  out << "particle_spread2 = " << fmt(c.particle_spread2) << "\n";
  out << "particle_amp = " << fmt(c.particle_amp) << "\n";
  out << "particle_count = " << c.particle_count << "\n";
  out << "\n[dsmc]\n";
  out << "gas_samples = " << c.gas_samples << "\n";
  out << "gas_gas = " << (c.gas_gas ? "true" : "false") << "\n";
  out << "gas_particle = " << (c.gas_particle ? "true" : "false") << "\n";
  out << "\n[quadrature]\n";
  if (c.quad.sphere_rule == QuadratureSpec::SphereRule::product_grid)
    out << "sphere = product:" << c.quad.n_theta << "x" << c.quad.n_phi << "\n";
  else
    out << "sphere = mc:" << c.quad.mc_samples << ":" << c.quad.mc_seed << "\n";
  out << "hermite_order = " << c.quad.hermite_order << "\n";
  out << "tolerance = " << fmt(c.quad.tolerance) << "\n";
  return out.str();
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  return a.mode == b.mode && a.eta == b.eta && a.delta == b.delta && a.a == b.a &&
         a.m_g == b.m_g && a.m_p == b.m_p && a.cells == b.cells && a.dt == b.dt &&
         a.t_final == b.t_final && a.output_every == b.output_every && a.preset == b.preset &&
         a.gas_n == b.gas_n && a.gas_theta == b.gas_theta && a.gas_u == b.gas_u &&
         a.gas_n_amp == b.gas_n_amp && a.particle_density == b.particle_density &&
         a.particle_v0 == b.particle_v0 && a.particle_spread2 == b.particle_spread2 &&
         a.particle_amp == b.particle_amp && a.particle_count == b.particle_count &&
         a.gas_samples == b.gas_samples && a.gas_gas == b.gas_gas &&
         a.gas_particle == b.gas_particle && a.quad.sphere_rule == b.quad.sphere_rule &&
         a.quad.n_theta == b.quad.n_theta && a.quad.n_phi == b.quad.n_phi &&
         a.quad.mc_samples == b.quad.mc_samples && a.quad.mc_seed == b.quad.mc_seed &&
         a.quad.hermite_order == b.quad.hermite_order &&
         a.quad.tolerance == b.quad.tolerance && a.seed == b.seed &&
         a.remainders == b.remainders && a.mc_samples == b.mc_samples;
}

}  // namespace sprays::io
