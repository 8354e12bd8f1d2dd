#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "oracles.hpp"
#include "sprays/collision.hpp"
#include "sprays/kernels.hpp"
#include "sprays/rng.hpp"

using namespace sprays;
using namespace sprays::collision;

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// |det| of a 6x6 matrix by Gaussian elimination with partial pivoting
double det6(std::array<std::array<double, 6>, 6> m) {
  double det = 1.0;
  for (int c = 0; c < 6; ++c) {
    int piv = c;
    for (int r = c + 1; r < 6; ++r)
      if (std::abs(m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) >
          std::abs(m[static_cast<std::size_t>(piv)][static_cast<std::size_t>(c)]))
        piv = r;
    if (piv != c) std::swap(m[static_cast<std::size_t>(piv)], m[static_cast<std::size_t>(c)]);
    double d = m[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    if (d == 0.0) return 0.0;
    det *= d;
    for (int r = c + 1; r < 6; ++r) {
      double f = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] / d;
      for (int k = c; k < 6; ++k)
        m[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] -=
            f * m[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
    }
  }
  return std::abs(det);
}

}  // namespace

TEST_CASE("cross collision: hand-checked values") {
  // equal masses, head-on: full exchange
  VelocityPair p{{1, 0, 0}, {0, 0, 0}};
  VelocityPair swapped = cross_collision(p, {1, 0, 0}, 1.0);
  CHECK(swapped.v.x == doctest::Approx(0.0));
  CHECK(swapped.w.x == doctest::Approx(1.0));

  // eta = 1/2: v' = 1/3, w' = 4/3 along the contact normal
  VelocityPair q = cross_collision(p, {1, 0, 0}, 0.5);
  CHECK(q.v.x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(q.w.x == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  // momentum with m_p = 2, m_g = 1
  CHECK(2.0 * q.v.x + 1.0 * q.w.x == doctest::Approx(2.0).epsilon(1e-15));

  CHECK_THROWS_AS(cross_collision(p, {1.0, 0.5, 0.0}, 0.5), SprayError);
  CHECK_THROWS_AS(cross_collision(p, {1, 0, 0}, 1.5), SprayError);
}

TEST_CASE("same-species transform equals cross collision at eta 1") {
  CounterRng rng(17);
  for (int i = 0; i < 100; ++i) {
    VelocityPair p{rng.normal3() * 2.0, rng.normal3() * 2.0};
    Vec3 sigma = rng.unit_sphere();
    VelocityPair a = same_species_collision(p, sigma);
    VelocityPair b = cross_collision(p, sigma, 1.0);
    CHECK((a.v - b.v).norm() < 1e-15);
    CHECK((a.w - b.w).norm() < 1e-15);
    Vec3 dp = (a.v + a.w) - (p.v + p.w);
    CHECK(dp.norm() < 1e-12);
    CHECK(a.v.norm2() + a.w.norm2() ==
          doctest::Approx(p.v.norm2() + p.w.norm2()).epsilon(1e-12));
  }
  // sigma perpendicular to the relative velocity leaves the pair unchanged
  VelocityPair p{{1, 0, 0}, {0, 0, 0}};
  VelocityPair r = same_species_collision(p, {0, 0, 1});
  CHECK((r.v - p.v).norm() == 0.0);
  CHECK((r.w - p.w).norm() == 0.0);
}

TEST_CASE("collision-law property suite on random samples") {
  CounterRng rng(23);
  double worst_inv = 0.0, worst_spec = 0.0, worst_even = 0.0, worst_mom = 0.0, worst_en = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double eta = rng.uniform(0.01, 1.0);
    VelocityPair p{rng.normal3() * 3.0, rng.normal3() * 3.0};
    Vec3 sigma = rng.unit_sphere();

    VelocityPair q = cross_collision(p, sigma, eta);
    VelocityPair back = cross_collision(q, sigma, eta);
    worst_inv = std::max(worst_inv, std::max((back.v - p.v).norm(), (back.w - p.w).norm()));

    VelocityPair q2 = cross_collision(p, -sigma, eta);
    worst_even = std::max(worst_even, std::max((q2.v - q.v).norm(), (q2.w - q.w).norm()));

    worst_spec =
        std::max(worst_spec, std::abs((q.v - q.w).dot(sigma) + (p.v - p.w).dot(sigma)));

    double m_p = 1.0 / eta;  // m_g = 1
    Vec3 dmom = (q.v * m_p + q.w) - (p.v * m_p + p.w);
    worst_mom = std::max(worst_mom, dmom.norm() / (1.0 + m_p * p.v.norm() + p.w.norm()));
    double den = m_p * q.v.norm2() + q.w.norm2() - m_p * p.v.norm2() - p.w.norm2();
    worst_en = std::max(worst_en, std::abs(den) / (m_p * p.v.norm2() + p.w.norm2() + 1.0));
  }
  CHECK(worst_inv <= 1e-12);
  CHECK(worst_even <= 1e-12);
  CHECK(worst_spec <= 1e-12);
  CHECK(worst_mom <= 1e-12);
  CHECK(worst_en <= 1e-12);
}

TEST_CASE("collision map has unit jacobian") {
  CounterRng rng(29);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    double eta = rng.uniform(0.05, 1.0);
    Vec3 sigma = rng.unit_sphere();
    VelocityPair p{rng.normal3(), rng.normal3()};

    auto image = [&](const VelocityPair& in) {
      VelocityPair out = cross_collision(in, sigma, eta);
      return std::array<double, 6>{out.v.x, out.v.y, out.v.z, out.w.x, out.w.y, out.w.z};
    };
    std::array<std::array<double, 6>, 6> jac{};
    for (int c = 0; c < 6; ++c) {
      VelocityPair lo = p, hi = p;
      double* hi_comp = c < 3 ? &hi.v[static_cast<std::size_t>(c)]
                              : &hi.w[static_cast<std::size_t>(c - 3)];
      double* lo_comp = c < 3 ? &lo.v[static_cast<std::size_t>(c)]
                              : &lo.w[static_cast<std::size_t>(c - 3)];
      *hi_comp += h;
      *lo_comp -= h;
      auto fp = image(hi), fm = image(lo);
      for (int r = 0; r < 6; ++r)
        jac[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
            (fp[static_cast<std::size_t>(r)] - fm[static_cast<std::size_t>(r)]) / (2.0 * h);
    }
    CHECK(det6(jac) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("scaling params invariants") {
  CHECK_NOTHROW(ScalingParams::make(0.1, 0.1, 0.05).validate());
  ScalingParams bad = ScalingParams::make(0.1, 0.1, 0.05);
  bad.m_p = 5.0;  // eta no longer equals m_g/m_p
  CHECK_THROWS_AS(bad.validate(), SprayError);
  CHECK_THROWS_AS(ScalingParams::make(0.1, 0.1, 0.6), SprayError);
  CHECK_THROWS_AS(ScalingParams::make(1.5, 0.1, 0.05), SprayError);
}

TEST_CASE("pure transport advances positions exactly") {
  ScalingParams pr = ScalingParams::make(0.1, 0.1, 0.05);
  KineticEnsemble e =
      make_uniform_ensemble(pr, 8, 200, 1.0, {0, 0, 0}, 1.0, 0.5, {1, 0, 0}, 0.01, 42);
  DsmcOptions opts;
  opts.gas_gas = false;
  opts.gas_particle = false;
  double dt = 0.37;
  KineticEnsemble out = dsmc_step(e, dt, opts);
  for (std::size_t i = 0; i < e.gas_x.size(); ++i) {
    double expect = wrap_unit(e.gas_x[i] + dt * e.gas_v[i].x);
    CHECK(out.gas_x[i] == doctest::Approx(expect).epsilon(1e-15));
    CHECK((out.gas_v[i] - e.gas_v[i]).norm() == 0.0);
  }
}

TEST_CASE("dsmc conserves weights and the coupled invariants") {
  ScalingParams pr = ScalingParams::make(0.2, 0.2, 0.08);
  KineticEnsemble e =
      make_uniform_ensemble(pr, 16, 20000, 4.0, {0, 0, 0}, 1.0, 0.5, {1.5, 0, 0}, 0.05, 7);
  double wg0 = e.gas_weight_total(), wp0 = e.particle_weight_total();

  // conserved combination: number-weighted momentum and energy across species
  auto combo_mom = [](const KineticEnsemble& s) {
    Vec3 m{};
    for (std::size_t i = 0; i < s.gas_v.size(); ++i) m += s.gas_v[i] * s.gas_w[i];
    for (std::size_t j = 0; j < s.part_v.size(); ++j) m += s.part_v[j] * s.part_w[j];
    return m;
  };
  auto combo_en = [](const KineticEnsemble& s) {
    double en = 0.0;
    for (std::size_t i = 0; i < s.gas_v.size(); ++i) en += s.gas_w[i] * s.gas_v[i].norm2();
    for (std::size_t j = 0; j < s.part_v.size(); ++j) en += s.part_w[j] * s.part_v[j].norm2();
    return en;
  };
  Vec3 mom0 = combo_mom(e);
  double en0 = combo_en(e);

  DsmcStats stats{};
  KineticEnsemble cur = e;
  for (int step = 0; step < 20; ++step) {
    DsmcStats s{};
    cur = dsmc_step(cur, 0.02, {}, &s);
    stats.gas_gas_events += s.gas_gas_events;
    stats.gas_particle_events += s.gas_particle_events;
  }
  CHECK(stats.gas_gas_events > 100);
  CHECK(stats.gas_particle_events > 50);
  CHECK(cur.gas_weight_total() == doctest::Approx(wg0).epsilon(1e-14));
  CHECK(cur.particle_weight_total() == doctest::Approx(wp0).epsilon(1e-14));
  CHECK((combo_mom(cur) - mom0).norm() <= 1e-10 * (1.0 + mom0.norm()));
  CHECK(combo_en(cur) == doctest::Approx(en0).epsilon(1e-10));
}

TEST_CASE("dsmc is deterministic for a fixed seed") {
  ScalingParams pr = ScalingParams::make(0.2, 0.2, 0.08);
  KineticEnsemble e =
      make_uniform_ensemble(pr, 8, 5000, 2.0, {0, 0, 0}, 1.0, 0.3, {1, 0, 0}, 0.05, 99);
  KineticEnsemble a = dsmc_step(dsmc_step(e, 0.02), 0.02);
  KineticEnsemble b = dsmc_step(dsmc_step(e, 0.02), 0.02);
  REQUIRE(a.gas_v.size() == b.gas_v.size());
  for (std::size_t i = 0; i < a.gas_v.size(); ++i) {
    CHECK(a.gas_x[i] == b.gas_x[i]);
    CHECK((a.gas_v[i] - b.gas_v[i]).norm() == 0.0);
  }
}

TEST_CASE("dsmc rejects oversized steps and inconsistent weights") {
  ScalingParams pr = ScalingParams::make(0.2, 0.1, 0.05);
  KineticEnsemble e =
      make_uniform_ensemble(pr, 8, 1000, 1.0, {0, 0, 0}, 1.0, 0.2, {1, 0, 0}, 0.05, 1);
  CHECK_THROWS_AS(dsmc_step(e, 0.5), SprayError);  // dt > 0.2 delta
  KineticEnsemble bad = e;
  bad.part_w.assign(bad.part_w.size(), bad.gas_w[0]);  // breaks w_p = w_g / eta
  CHECK_THROWS_AS(dsmc_step(bad, 0.01), SprayError);
}

TEST_CASE("equilibrium hold: maxwellian gas stays maxwellian") {
  ScalingParams pr = ScalingParams::make(0.2, 0.2, 0.05);
  const double s2 = 1.0;
  KineticEnsemble e =
      make_uniform_ensemble(pr, 16, 20000, 1.0, {0, 0, 0}, s2, 0.0, {0, 0, 0}, 0.0, 31);
  DsmcOptions opts;
  opts.gas_particle = false;
  DsmcStats total{};
  for (int step = 0; step < 300; ++step) {
    DsmcStats st{};
    e = dsmc_step(e, 0.04, opts, &st);
    total.gas_gas_events += st.gas_gas_events;
  }
  CHECK(total.gas_gas_events > 100000);  // well-collisional regime

  // chi-square of the x-velocity histogram against the nominal normal law
  const int nbins = 20;
  const double lo = -4.0, hi = 4.0;
  std::vector<double> observed(nbins, 0.0);
  for (const Vec3& v : e.gas_v) {
    int b = static_cast<int>((v.x / std::sqrt(s2) - lo) / (hi - lo) * nbins);
    b = std::clamp(b, 0, nbins - 1);  // tails merged into the edge bins
    observed[static_cast<std::size_t>(b)] += 1.0;
  }
  double n = static_cast<double>(e.gas_v.size());
  double chi2 = 0.0;
  for (int b = 0; b < nbins; ++b) {
    double zl = lo + (hi - lo) * b / nbins, zr = lo + (hi - lo) * (b + 1) / nbins;
    double pl = b == 0 ? 0.0 : norm_cdf(zl);
    double prr = b == nbins - 1 ? 1.0 : norm_cdf(zr);
    double expect = n * (prr - pl);
    double dev = observed[static_cast<std::size_t>(b)] - expect;
    chi2 += dev * dev / expect;
  }
  CHECK(chi2 < oracles::chi2_critical_99(nbins - 1));
}

TEST_CASE("weak E2 estimator: constant test function gives exactly zero") {
  ScalingParams pr = ScalingParams::make(0.1, 0.1, 0.05);
  AnalyticGasField gas;  // uniform
  AnalyticParticleDensity F;
  F.u_F = {1.0, 0, 0};
  F.s2_F = 0.0;  // monokinetic
  VelocityTestFn one{[](const Vec3&) { return 1.0; }, [](const Vec3&) { return Vec3{}; }};
  McEstimate est = enskog_e2_apply(F, gas, one, 0.25, pr, 20000, 5);
  CHECK(est.value == 0.0);
  CHECK(est.std_error == 0.0);
}

TEST_CASE("weak E2 estimator requires a sane sample count") {
  ScalingParams pr = ScalingParams::make(0.1, 0.1, 0.05);
  AnalyticGasField gas;
  AnalyticParticleDensity F;
  VelocityTestFn one{[](const Vec3&) { return 1.0; }, [](const Vec3&) { return Vec3{}; }};
  CHECK_THROWS_AS(enskog_e2_apply(F, gas, one, 0.25, pr, 100, 5), SprayError);
}

TEST_CASE("weak E2 estimator reproduces the friction limit for phi = v1") {
  // homogeneous fields: (1/eta) int E2 phi dv approaches
  //   -pi a^2 alpha_n (theta/m) int F q((v-u)/sqrt(theta/m)) dv
  double eta = 0.02;
  ScalingParams pr = ScalingParams::make(eta, 0.1, 0.05);
  AnalyticGasField gas;
  gas.alpha_n0 = 2.0;
  gas.s2_0 = 0.8;
  AnalyticParticleDensity F;
  F.n0 = 1.3;
  F.u_F = {0.9, 0.2, -0.1};
  F.s2_F = 0.15;

  VelocityTestFn phi{[](const Vec3& v) { return v.x; },
                     [](const Vec3&) { return Vec3{1, 0, 0}; }};
  McEstimate est = enskog_e2_apply(F, gas, phi, 0.4, pr, 4000000, 11);
  double scaled = est.value / eta;

  // reference: Gauss-Hermite over the particle Maxwellian, qbar profile inside
  const kernels::QbarTable& qbar = kernels::QbarTable::shared();
  double s = std::sqrt(gas.s2_0), sF = std::sqrt(F.s2_F);
  Quad1D gh = gauss_hermite(24);
  double ref = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i)
    for (std::size_t j = 0; j < gh.nodes.size(); ++j)
      for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
        Vec3 v = F.u_F + Vec3{gh.nodes[i], gh.nodes[j], gh.nodes[k]} * (std::sqrt(2.0) * sF);
        double wgt = gh.weights[i] * gh.weights[j] * gh.weights[k] *
                     0.17958712212516655907430693317931;  // pi^{-3/2}
        Vec3 rel = v - gas.u0;
        ref += wgt * qbar(rel.norm() / s) * rel.x / s;
      }
  ref *= -kPi * pr.a * pr.a * gas.alpha_n0 * gas.s2_0 * F.n0;

  // finite-eta bias is O(eta); allow it plus Monte Carlo noise
  double bias = std::abs(ref) * eta;
  CHECK(std::abs(scaled - ref) <= 4.0 * est.std_error / eta + 2.0 * bias);
  CHECK(std::abs(scaled - ref) <= 0.05 * std::abs(ref));
}

TEST_CASE("combined weak identity holds within noise") {
  ScalingParams pr = ScalingParams::make(0.1, 0.1, 0.08);
  AnalyticGasField gas;
  gas.alpha_n0 = 1.4;
  gas.alpha_n_amp = 0.25;
  gas.alpha_n_phase = 0.1;
  gas.u0 = {0.2, 0.0, 0.1};
  gas.ux_amp = 0.15;
  gas.s2_0 = 0.9;
  gas.s2_amp = 0.2;
  gas.s2_phase = 0.4;
  AnalyticParticleDensity F;
  F.n0 = 1.1;
  F.amp = 0.3;
  F.phase = 0.55;
  F.u_F = {0.7, -0.2, 0.0};
  F.s2_F = 0.2;

  SUBCASE("constant test function: identically zero") {
    SpaceTestFn one = [](double, const Vec3&) { return 1.0; };
    IdentityResult r = weak_identity_residual(gas, F, one, pr, 20000, 3);
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
  }
  SUBCASE("momentum component") {
    SpaceTestFn phi = [](double, const Vec3& xi) { return xi.x; };
    IdentityResult r = weak_identity_residual(gas, F, phi, pr, 200000, 3);
    CHECK(r.sigma > 0.0);
    CHECK(r.within(3.0));
  }
  SUBCASE("kinetic energy") {
    SpaceTestFn phi = [](double, const Vec3& xi) { return 0.5 * xi.norm2(); };
    IdentityResult r = weak_identity_residual(gas, F, phi, pr, 200000, 4);
    CHECK(r.within(3.0));
  }
  SUBCASE("space-dependent bump") {
    SpaceTestFn phi = [](double x, const Vec3& xi) {
      double dx = wrap_dist(x - 0.4) / 0.3;
      double dv = (xi - Vec3{0.5, 0, 0}).norm2() / 4.0;
      double fx = std::abs(dx) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - dx * dx)) : 0.0;
      double fv = dv < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - dv)) : 0.0;
      return fx * fv;
    };
    IdentityResult r = weak_identity_residual(gas, F, phi, pr, 200000, 6);
    CHECK(r.within(3.0));
  }
}
