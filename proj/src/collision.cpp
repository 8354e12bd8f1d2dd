#include "sprays/collision.hpp"

#include <algorithm>
#include <cmath>

#include "sprays/quadrature.hpp"
#include "sprays/rng.hpp"

namespace sprays::collision {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kFourPi = 4.0 * kPi;

void check_unit(const Vec3& sigma) {
  require(std::abs(sigma.norm2() - 1.0) <= 2e-12, "collision: sigma must be a unit vector");
}

// direction with cos(angle to axis) = mu, azimuth phi
Vec3 tilted_direction(const Vec3& axis, double mu, double phi) {
  Vec3 e1, e2, e3;
  orthonormal_frame(axis, e1, e2, e3);
  double r = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  return e3 * mu + e1 * (r * std::cos(phi)) + e2 * (r * std::sin(phi));
}

struct RunningSum {
  double sum = 0.0, sum2 = 0.0;
  std::int64_t n = 0;
  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++n;
  }
  McEstimate estimate() const {
    double mean = sum / static_cast<double>(n);
    double var = std::max(0.0, sum2 / static_cast<double>(n) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(n))};
  }
};

}  // namespace

VelocityPair cross_collision(const VelocityPair& pair, const Vec3& sigma, double eta) {
  check_unit(sigma);
  require(eta > 0.0 && eta <= 1.0, "cross_collision: eta must lie in (0, 1]");
  double proj = (pair.v - pair.w).dot(sigma);
  return {pair.v - sigma * (2.0 * eta / (1.0 + eta) * proj),
          pair.w + sigma * (2.0 / (1.0 + eta) * proj)};
}

VelocityPair same_species_collision(const VelocityPair& pair, const Vec3& sigma) {
  check_unit(sigma);
  double proj = (pair.v - pair.w).dot(sigma);
  return {pair.v - sigma * proj, pair.w + sigma * proj};
}

void KineticEnsemble::validate() const {
  params.validate();
  require(gas_x.size() == gas_v.size() && gas_x.size() == gas_w.size(),
          "KineticEnsemble: gas arrays must have equal length");
  require(part_x.size() == part_v.size() && part_x.size() == part_w.size(),
          "KineticEnsemble: particle arrays must have equal length");
  require(cell_count >= 1, "KineticEnsemble: cell_count must be >= 1");
  for (double x : gas_x)
    require(x >= 0.0 && x < 1.0, "KineticEnsemble: gas position outside [0,1)");
  for (double x : part_x)
    require(x >= 0.0 && x < 1.0, "KineticEnsemble: particle position outside [0,1)");
  for (double w : gas_w) require(w > 0.0, "KineticEnsemble: gas weight must be positive");
  for (double w : part_w) require(w > 0.0, "KineticEnsemble: particle weight must be positive");
}

double KineticEnsemble::gas_weight_total() const {
  double s = 0.0;
  for (double w : gas_w) s += w;
  return s;
}

double KineticEnsemble::particle_weight_total() const {
  double s = 0.0;
  for (double w : part_w) s += w;
  return s;
}

KineticEnsemble make_uniform_ensemble(const ScalingParams& params, int cells,
                                      std::size_t n_gas_samples, double gas_density,
                                      const Vec3& u_g, double s2_g, double part_density,
                                      const Vec3& u_p, double s2_p, std::uint64_t seed) {
  params.validate();
  require(n_gas_samples >= 2, "make_uniform_ensemble: need at least two gas samples");
  require(gas_density > 0.0 && part_density >= 0.0 && s2_g > 0.0 && s2_p >= 0.0,
          "make_uniform_ensemble: invalid densities or spreads");

  KineticEnsemble e;
  e.params = params;
  e.cell_count = cells;
  e.rng_seed = seed;

  double wg = gas_density / static_cast<double>(n_gas_samples);
  double wp = wg / params.eta;  // event-rate consistency between the two species
  std::size_t n_part =
      part_density > 0.0
          ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(part_density / wp)))
          : 0;

  CounterRng rng(seed, 0x5eed);
  double sg = std::sqrt(s2_g), sp = std::sqrt(s2_p);
  e.gas_x.resize(n_gas_samples);
  e.gas_v.resize(n_gas_samples);
  e.gas_w.assign(n_gas_samples, wg);
  for (std::size_t i = 0; i < n_gas_samples; ++i) {
    e.gas_x[i] = wrap_unit((static_cast<double>(i) + rng.uniform()) /
                           static_cast<double>(n_gas_samples));
    e.gas_v[i] = u_g + rng.normal3() * sg;
  }
  e.part_x.resize(n_part);
  e.part_v.resize(n_part);
  e.part_w.assign(n_part, wp);
  for (std::size_t j = 0; j < n_part; ++j) {
    e.part_x[j] =
        wrap_unit((static_cast<double>(j) + rng.uniform()) / static_cast<double>(n_part));
    e.part_v[j] = u_p + rng.normal3() * sp;
  }
  return e;
}

namespace {

void require_uniform(const std::vector<double>& w, const char* what) {
  if (w.empty()) return;
  for (double wi : w)
    require(std::abs(wi - w[0]) <= 1e-12 * w[0],
            std::string("dsmc_step: ") + what + " weights must be uniform within a species");
}

}  // namespace

KineticEnsemble dsmc_step(const KineticEnsemble& state, double dt, const DsmcOptions& opts,
                          DsmcStats* stats) {
  state.validate();
  require(dt > 0.0, "dsmc_step: dt must be positive");
  if (opts.gas_gas)
    require(dt <= opts.max_dt_over_delta * state.params.delta,
            "dsmc_step: dt exceeds the collision-frequency stability bound");
  require_uniform(state.gas_w, "gas");
  require_uniform(state.part_w, "particle");

  KineticEnsemble out = state;
  out.step_index = state.step_index + 1;
  const ScalingParams& pr = out.params;
  const std::uint64_t step = out.step_index;
  DsmcStats local{};

  // free transport with periodic wrap
  for (std::size_t i = 0; i < out.gas_x.size(); ++i)
    out.gas_x[i] = wrap_unit(out.gas_x[i] + dt * out.gas_v[i].x);
  for (std::size_t j = 0; j < out.part_x.size(); ++j)
    out.part_x[j] = wrap_unit(out.part_x[j] + dt * out.part_v[j].x);

  // intra-gas collisions, majorant-frequency sampling per cell
  if (opts.gas_gas && out.gas_x.size() >= 2) {
    const int cells = out.cell_count;
    const double dx = 1.0 / cells;
    const double wg = out.gas_w[0];
    std::vector<std::vector<std::size_t>> bucket(static_cast<std::size_t>(cells));
    for (std::size_t i = 0; i < out.gas_x.size(); ++i) {
      int c = std::min(cells - 1, static_cast<int>(out.gas_x[i] * cells));
      bucket[static_cast<std::size_t>(c)].push_back(i);
    }
    for (int c = 0; c < cells; ++c) {
      const auto& idx = bucket[static_cast<std::size_t>(c)];
      std::size_t n = idx.size();
      if (n < 2) continue;
      CounterRng rng(out.rng_seed, step, 2, static_cast<std::uint64_t>(c));
      Vec3 mean{};
      for (std::size_t i : idx) mean += out.gas_v[i];
      mean = mean / static_cast<double>(n);
      double spread = 0.0;
      for (std::size_t i : idx) spread = std::max(spread, (out.gas_v[i] - mean).norm());
      double g_hat = 2.0 * spread * 1.05 + 1e-12;
      double pair_rate = kPi * wg / (pr.delta * dx) * g_hat;
      double intensity =
          0.5 * static_cast<double>(n) * static_cast<double>(n - 1) * pair_rate * dt;
      std::uint64_t m = rng.poisson(intensity);
      for (std::uint64_t k = 0; k < m; ++k) {
        std::size_t i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
        std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - 1));
        if (j >= i) ++j;
        i = idx[std::min(i, n - 1)];
        j = idx[std::min(j, n - 1)];
        Vec3 rel = out.gas_v[i] - out.gas_v[j];
        double g = rel.norm();
        if (g == 0.0) continue;
        if (g > g_hat) ++local.majorant_violations;
        if (rng.uniform() * g_hat > g) continue;
        // contact direction weighted by (rel.sigma) H(rel.sigma)
        double mu = std::sqrt(rng.uniform());
        double phi = kTwoPi * rng.uniform();
        Vec3 sigma = tilted_direction(rel, mu, phi);
        VelocityPair post = same_species_collision({out.gas_v[i], out.gas_v[j]}, sigma);
        out.gas_v[i] = post.v;
        out.gas_v[j] = post.w;
        ++local.gas_gas_events;
      }
    }
  }

  // gas-particle collisions with delocalized partner selection at offset a
  if (opts.gas_particle && !out.part_x.empty() && !out.gas_x.empty()) {
    const double a = pr.a;
    const double wg = out.gas_w[0];
    require(std::abs(out.part_w[0] * pr.eta / wg - 1.0) <= 1e-9,
            "dsmc_step: particle weights must equal gas weights / eta");

    const int nbins = std::max(2, static_cast<int>(std::floor(4.0 / a)));
    std::vector<std::vector<std::size_t>> bin(static_cast<std::size_t>(nbins));
    std::vector<double> bin_maxspeed(static_cast<std::size_t>(nbins), 0.0);
    for (std::size_t i = 0; i < out.gas_x.size(); ++i) {
      int b = std::min(nbins - 1, static_cast<int>(out.gas_x[i] * nbins));
      bin[static_cast<std::size_t>(b)].push_back(i);
      bin_maxspeed[static_cast<std::size_t>(b)] =
          std::max(bin_maxspeed[static_cast<std::size_t>(b)], out.gas_v[i].norm());
    }
    const int reach = static_cast<int>(std::ceil(a * nbins)) + 1;

    std::vector<const std::vector<std::size_t>*> ranges;
    std::vector<std::size_t> cum;
    for (std::size_t j = 0; j < out.part_x.size(); ++j) {
      CounterRng rng(out.rng_seed, step, 3, static_cast<std::uint64_t>(j));
      int b0 = std::min(nbins - 1, static_cast<int>(out.part_x[j] * nbins));
      ranges.clear();
      cum.clear();
      std::size_t total = 0;
      double maxspeed = 0.0;
      for (int d = -reach; d <= reach; ++d) {
        int b = ((b0 + d) % nbins + nbins) % nbins;
        const auto& lst = bin[static_cast<std::size_t>(b)];
        if (lst.empty()) continue;
        ranges.push_back(&lst);
        total += lst.size();
        cum.push_back(total);
        maxspeed = std::max(maxspeed, bin_maxspeed[static_cast<std::size_t>(b)]);
      }
      if (total == 0) continue;
      double g_hat = (maxspeed + out.part_v[j].norm()) * 1.1 + 1e-12;
      double cand_rate = static_cast<double>(total) * kTwoPi * a * wg / pr.eta * g_hat;
      std::uint64_t m = rng.poisson(cand_rate * dt);
      for (std::uint64_t k = 0; k < m; ++k) {
        std::size_t pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(total));
        if (pick >= total) pick = total - 1;
        std::size_t r = 0;
        while (cum[r] <= pick) ++r;
        std::size_t within = pick - (r == 0 ? 0 : cum[r - 1]);
        std::size_t i = (*ranges[r])[within];

        double delta_x = wrap_dist(out.gas_x[i] - out.part_x[j]);
        if (std::abs(delta_x) > a) continue;  // bin overhang
        double sx = delta_x / a;
        double rr = std::sqrt(std::max(0.0, 1.0 - sx * sx));
        double phi = kTwoPi * rng.uniform();
        Vec3 sigma{sx, rr * std::cos(phi), rr * std::sin(phi)};
        double flux = (out.part_v[j] - out.gas_v[i]).dot(sigma);
        if (flux <= 0.0) continue;
        if (flux > g_hat) ++local.majorant_violations;
        if (rng.uniform() * g_hat > flux) continue;
        VelocityPair post = cross_collision({out.part_v[j], out.gas_v[i]}, sigma, pr.eta);
        out.part_v[j] = post.v;
        out.gas_v[i] = post.w;
        int b = std::min(nbins - 1, static_cast<int>(out.gas_x[i] * nbins));
        bin_maxspeed[static_cast<std::size_t>(b)] =
            std::max(bin_maxspeed[static_cast<std::size_t>(b)], out.gas_v[i].norm());
        ++local.gas_particle_events;
      }
    }
  }

  if (stats) *stats = local;
  return out;
}

namespace {

SpeciesMoments weighted_moments(const std::vector<Vec3>& v, const std::vector<double>& w,
                                double mass) {
  SpeciesMoments m;
  for (std::size_t i = 0; i < v.size(); ++i) {
    m.mass += w[i];
    m.momentum += v[i] * w[i];
    m.energy += 0.5 * w[i] * v[i].norm2();
  }
  m.mass *= mass;
  m.momentum *= mass;
  m.energy *= mass;
  return m;
}

}  // namespace

SpeciesMoments gas_moments(const KineticEnsemble& e) {
  return weighted_moments(e.gas_v, e.gas_w, e.params.m_g);
}

SpeciesMoments particle_moments(const KineticEnsemble& e) {
  return weighted_moments(e.part_v, e.part_w, e.params.m_p);
}

Vec3 particle_bulk_velocity(const KineticEnsemble& e) {
  Vec3 sum{};
  double wsum = 0.0;
  for (std::size_t j = 0; j < e.part_v.size(); ++j) {
    sum += e.part_v[j] * e.part_w[j];
    wsum += e.part_w[j];
  }
  require(wsum > 0.0, "particle_bulk_velocity: empty particle phase");
  return sum / wsum;
}

CellMoments gas_cell_moments(const KineticEnsemble& e) {
  int cells = e.cell_count;
  CellMoments m;
  m.density.assign(static_cast<std::size_t>(cells), 0.0);
  m.velocity.assign(static_cast<std::size_t>(cells), Vec3{});
  m.theta_over_m.assign(static_cast<std::size_t>(cells), 0.0);
  std::vector<double> wsum(static_cast<std::size_t>(cells), 0.0);
  double dx = 1.0 / cells;
  auto cell_of = [&](double x) {
    return static_cast<std::size_t>(std::min(cells - 1, static_cast<int>(x * cells)));
  };
  for (std::size_t i = 0; i < e.gas_x.size(); ++i) {
    std::size_t c = cell_of(e.gas_x[i]);
    wsum[c] += e.gas_w[i];
    m.velocity[c] += e.gas_v[i] * e.gas_w[i];
  }
  for (std::size_t c = 0; c < wsum.size(); ++c) {
    m.density[c] = wsum[c] / dx;
    if (wsum[c] > 0.0) m.velocity[c] = m.velocity[c] / wsum[c];
  }
  for (std::size_t i = 0; i < e.gas_x.size(); ++i) {
    std::size_t c = cell_of(e.gas_x[i]);
    m.theta_over_m[c] += e.gas_w[i] * (e.gas_v[i] - m.velocity[c]).norm2() / 3.0;
  }
  for (std::size_t c = 0; c < wsum.size(); ++c)
    if (wsum[c] > 0.0) m.theta_over_m[c] /= wsum[c];
  return m;
}

McEstimate enskog_e2_apply(const AnalyticParticleDensity& F, const AnalyticGasField& f,
                           const VelocityTestFn& phi, double x, const ScalingParams& params,
                           std::int64_t samples, std::uint64_t seed) {
  params.validate();
  require(samples >= 10000, "enskog_e2_apply: need at least 1e4 samples");
  const double a = params.a, eta = params.eta;
  const double amp = a * a * kFourPi;
  RunningSum acc;
  CounterRng rng(seed, 0xe2);
  // antithetic mirroring through the distribution centers: the partner
  // sample (-sigma, -dev, reflected v) lands on the same side of the flux
  // cut, so the even-in-sigma bulk cancels within each pair and the odd
  // delocalization signal is resolved at far lower variance
  auto member = [&](const Vec3& sg, const Vec3& dev, const Vec3& v) {
    double xs = wrap_unit(x + a * sg.x);
    kernels::LocalGasState st = f.state(xs);
    Vec3 w = st.u + dev * std::sqrt(st.theta_over_m);
    double flux = (v - w).dot(sg);
    if (flux <= 0.0) return 0.0;
    Vec3 vp = v - sg * (2.0 * eta / (1.0 + eta) * flux);
    return amp * st.alpha_n * F.number_density(x) * flux * (phi.value(vp) - phi.value(v));
  };
  for (std::int64_t k = 0; k < samples / 2; ++k) {
    Vec3 sigma = rng.unit_sphere();
    Vec3 dev = rng.normal3();
    Vec3 v = F.sample_v(rng);
    Vec3 v_mirror = F.u_F * 2.0 - v;
    acc.add(0.5 * (member(sigma, dev, v) + member(-sigma, -dev, v_mirror)));
  }
  return acc.estimate();
}

namespace {

// importance ratio between the local Maxwellian shape at z and the proposal
// shape at the probe point
double maxwellian_shape_ratio(const AnalyticGasField& f, double z, double x0, const Vec3& w) {
  double s2z = f.s2(z), s20 = f.s2(x0);
  double ez = (w - f.u(z)).norm2() / (2.0 * s2z);
  double e0 = (w - f.u(x0)).norm2() / (2.0 * s20);
  return std::pow(s20 / s2z, 1.5) * std::exp(e0 - ez);
}

struct FluxSample {
  Vec3 sigma;
  Vec3 w;
  Vec3 v;
};

// contact-line flux I_x at position y for one Monte Carlo sample; the
// s-integral runs along the contact segment by Gauss-Legendre, and the gas
// proposal drawn at the probe point x0 is reweighted to the shifted state
double flux_sample_at(const AnalyticGasField& f, const AnalyticParticleDensity& F,
                      const SpaceTestFn& phi, const ScalingParams& pr, const FluxSample& smp,
                      double y, double x0, const Quad1D& s_rule) {
  double flux = (smp.v - smp.w).dot(smp.sigma);
  if (flux <= 0.0) return 0.0;
  Vec3 wp = smp.w + smp.sigma * (2.0 / (1.0 + pr.eta) * flux);
  double sum = 0.0;
  for (std::size_t m = 0; m < s_rule.nodes.size(); ++m) {
    double s = s_rule.nodes[m];
    double xg = wrap_unit(y + s * smp.sigma.x);
    double xp = wrap_unit(y - (pr.a - s) * smp.sigma.x);
    double phid = phi(xg, wp) - phi(xg, smp.w);
    sum += s_rule.weights[m] * phid * f.alpha_n(xg) *
           maxwellian_shape_ratio(f, xg, x0, smp.w) * F.number_density(xp);
  }
  return pr.a * pr.a * kFourPi * smp.sigma.x * flux * sum;
}

}  // namespace

McEstimate identity_flux_term(const AnalyticGasField& f, const AnalyticParticleDensity& F,
                              const SpaceTestFn& phi, double x, const ScalingParams& params,
                              std::int64_t samples, std::uint64_t seed, int s_nodes) {
  params.validate();
  Quad1D s_rule = gauss_legendre(s_nodes, 0.0, params.a);
  RunningSum acc;
  CounterRng rng(seed, 0x1f);
  for (std::int64_t k = 0; k < samples; ++k) {
    FluxSample smp;
    smp.sigma = rng.unit_sphere();
    kernels::LocalGasState st = f.state(x);
    smp.w = st.u + rng.normal3() * std::sqrt(st.theta_over_m);
    smp.v = F.sample_v(rng);
    acc.add(flux_sample_at(f, F, phi, params, smp, x, x, s_rule));
  }
  return acc.estimate();
}

IdentityResult weak_identity_residual(const AnalyticGasField& f,
                                      const AnalyticParticleDensity& F, const SpaceTestFn& phi,
                                      const ScalingParams& params, std::int64_t samples,
                                      std::uint64_t seed, const IdentityOptions& opts) {
  params.validate();
  require(samples >= 10000, "weak_identity_residual: need at least 1e4 samples");
  const double a = params.a, eta = params.eta, x0 = opts.x0, h = opts.h_div;
  const double amp = a * a * kFourPi;
  Quad1D s_rule = gauss_legendre(opts.s_nodes, 0.0, a);

  // E1 weak form at x0: gas drawn at x0, partner density at x0 - a sigma
  RunningSum acc_e1;
  {
    CounterRng rng(seed, 0xa1);
    for (std::int64_t k = 0; k < samples; ++k) {
      Vec3 sigma = rng.unit_sphere();
      kernels::LocalGasState st = f.state(x0);
      Vec3 w = st.u + rng.normal3() * std::sqrt(st.theta_over_m);
      Vec3 v = F.sample_v(rng);
      double flux = (v - w).dot(sigma);
      double val = 0.0;
      if (flux > 0.0) {
        Vec3 wp = w + sigma * (2.0 / (1.0 + eta) * flux);
        val = amp * st.alpha_n * F.number_density(wrap_unit(x0 - a * sigma.x)) * flux *
              (phi(x0, wp) - phi(x0, w));
      }
      acc_e1.add(val);
    }
  }

  // E2 weak form at x0: particle at x0, gas drawn at x0 + a sigma
  RunningSum acc_e2;
  {
    CounterRng rng(seed, 0xa2);
    for (std::int64_t k = 0; k < samples; ++k) {
      Vec3 sigma = rng.unit_sphere();
      double xs = wrap_unit(x0 + a * sigma.x);
      kernels::LocalGasState st = f.state(xs);
      Vec3 w = st.u + rng.normal3() * std::sqrt(st.theta_over_m);
      Vec3 v = F.sample_v(rng);
      double flux = (v - w).dot(sigma);
      double val = 0.0;
      if (flux > 0.0) {
        Vec3 vp = v - sigma * (2.0 * eta / (1.0 + eta) * flux);
        val = amp * st.alpha_n * F.number_density(x0) * flux * (phi(x0, vp) - phi(x0, v));
      }
      acc_e2.add(val);
    }
  }

  // d/dx of the contact-line flux, central difference with common random draws
  RunningSum acc_div;
  {
    CounterRng rng(seed, 0xa3);
    for (std::int64_t k = 0; k < samples; ++k) {
      FluxSample smp;
      smp.sigma = rng.unit_sphere();
      kernels::LocalGasState st = f.state(x0);
      smp.w = st.u + rng.normal3() * std::sqrt(st.theta_over_m);
      smp.v = F.sample_v(rng);
      double up = flux_sample_at(f, F, phi, params, smp, x0 + h, x0, s_rule);
      double dn = flux_sample_at(f, F, phi, params, smp, x0 - h, x0, s_rule);
      acc_div.add((up - dn) / (2.0 * h));
    }
  }

  // combined right-hand side: the two collision integrals merged through the
  // involution, with the eta-weighted gas-side defect evaluated at x0 + a sigma
  RunningSum acc_rhs;
  {
    CounterRng rng(seed, 0xb7);
    for (std::int64_t k = 0; k < samples; ++k) {
      Vec3 sigma = rng.unit_sphere();
      double xs = wrap_unit(x0 + a * sigma.x);
      kernels::LocalGasState st = f.state(xs);
      Vec3 w = st.u + rng.normal3() * std::sqrt(st.theta_over_m);
      Vec3 v = F.sample_v(rng);
      double flux = (v - w).dot(sigma);
      double val = 0.0;
      if (flux > 0.0) {
        Vec3 vp = v - sigma * (2.0 * eta / (1.0 + eta) * flux);
        Vec3 wp = w + sigma * (2.0 / (1.0 + eta) * flux);
        double bracket = phi(x0, vp) - phi(x0, v) + eta * (phi(xs, wp) - phi(xs, w));
        val = amp * st.alpha_n * F.number_density(x0) * flux * bracket;
      }
      acc_rhs.add(val);
    }
  }

  McEstimate e1 = acc_e1.estimate(), e2 = acc_e2.estimate(), dv = acc_div.estimate(),
             rhs = acc_rhs.estimate();
  IdentityResult r;
  r.lhs = eta * e1.value + e2.value + eta * dv.value;
  r.rhs = rhs.value;
  r.sigma = std::sqrt(eta * eta * e1.std_error * e1.std_error + e2.std_error * e2.std_error +
                      eta * eta * dv.std_error * dv.std_error + rhs.std_error * rhs.std_error);
  return r;
}

}  // namespace sprays::collision
