#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sprays/collision.hpp"
#include "sprays/quadrature.hpp"

namespace sprays::io {

// Scenario description shared by every subcommand. The grammar is
// line-oriented: [section] headers, key = value pairs, '#' comments.
// Unknown keys and violated invariants are all reported together.
struct ScenarioConfig {
  std::string mode = "spray";  // dsmc | spray | thin-spray | verify-*

  // [params]
  double eta = 0.1;
  double delta = 0.1;
  double a = 0.05;
  double m_g = 1.0;
  double m_p = 10.0;  // defaults to m_g/eta when absent

  // [grid]
  std::size_t cells = 64;
  double dt = 2e-3;
  double t_final = 1.0;
  std::size_t output_every = 10;

  // [initial]
  std::string preset = "uniform";  // uniform | sod | comoving | drag-relaxation | sinusoidal-F
  double gas_n = 1.0;
  double gas_theta = 1.0;
  double gas_u = 0.0;
  double gas_n_amp = 0.0;      // sinusoidal gas modulation (sinusoidal-F preset)
  double particle_density = 0.0;
  double particle_v0 = 0.0;
  double particle_spread2 = 0.0;
  double particle_amp = 0.0;   // sinusoidal particle-density modulation
  std::size_t particle_count = 4096;

  // [dsmc]
  std::size_t gas_samples = 100000;
  bool gas_gas = true;
  bool gas_particle = true;

  // [quadrature]
  QuadratureSpec quad{};

  // [run]
  std::uint64_t seed = 1;
  bool remainders = false;
  std::size_t mc_samples = 1000000;

  collision::ScalingParams scaling() const {
    return collision::ScalingParams{eta, delta, a, m_g, m_p};
  }
};

// Parse the text form; collects every violation instead of stopping at the
// first. Unknown keys are reported with the nearest valid key name.
ScenarioConfig parse_config(const std::string& text);

// Canonical text form; parse_config(print_config(c)) reproduces c exactly
// (all numbers carry 17 significant digits).
std::string print_config(const ScenarioConfig& c);

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

}  // namespace sprays::io
