#pragma once

#include <string>
#include <vector>

#include "sprays/collision.hpp"
#include "sprays/config.hpp"
#include "sprays/spray.hpp"
#include "sprays/verify.hpp"

namespace sprays::io {

// Time-series CSV for the continuum solver, fixed column order. All numbers
// are written with 17 significant digits.
std::string timeseries_csv(const std::vector<solver::TimeSeriesRow>& rows);
void write_timeseries(const std::string& path, const std::vector<solver::TimeSeriesRow>& rows);

// Per-step, per-species moment CSV for the stochastic runs.
struct DsmcMomentRow {
  double t;
  std::string species;  // "gas" | "particle"
  double mass;
  Vec3 momentum;
  double energy;
};
std::string dsmc_csv(const std::vector<DsmcMomentRow>& rows);
void write_dsmc_csv(const std::string& path, const std::vector<DsmcMomentRow>& rows);

// Schema-versioned JSON verification report.
struct ReportEntry {
  std::string key;
  double value;
};
struct Report {
  std::string name;
  std::vector<ReportEntry> inputs;
  std::vector<ReportEntry> metrics;
  bool has_fitted_order = false;
  double fitted_order = 0.0;
  double fit_residual = 0.0;
  bool pass = false;
};
std::string report_json(const Report& report);
void write_report(const std::string& path, const Report& report);

// Snapshot of the full continuum state: self-describing, versioned,
// field-name-tagged JSON. save -> load reproduces every double bit for bit.
void save_snapshot(const std::string& path, const solver::GasField& gas,
                   const solver::ParticlePhase& phase, double t);
struct Snapshot {
  solver::GasField gas;
  solver::ParticlePhase phase;
  double t = 0.0;
};
Snapshot load_snapshot(const std::string& path);

// Same for the two-species sample state.
void save_ensemble(const std::string& path, const collision::KineticEnsemble& e, double t);
struct EnsembleSnapshot {
  collision::KineticEnsemble ensemble;
  double t = 0.0;
};
EnsembleSnapshot load_ensemble(const std::string& path);

// Scenario construction from a parsed config (presets).
struct Scenario {
  solver::GasField gas;
  solver::ParticlePhase phase;
};
Scenario build_scenario(const ScenarioConfig& cfg);

}  // namespace sprays::io
