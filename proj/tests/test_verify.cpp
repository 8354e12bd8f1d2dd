#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sprays/verify.hpp"

using namespace sprays;
using namespace sprays::verify;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

TEST_CASE("order fit: behavior on clean, degenerate, and noisy data") {
  ConvergenceStudy clean =
      fit_order("a", {0.08, 0.04, 0.02}, {8e-3 * std::pow(0.08, 4), 8e-3 * std::pow(0.04, 4),
                                          8e-3 * std::pow(0.02, 4)});
  CHECK(clean.fitted_order == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(clean.conclusive);
  CHECK_FALSE(clean.degenerate);

  ConvergenceStudy floor = fit_order("a", {0.08, 0.04}, {1e-14, 2e-15});
  CHECK(floor.degenerate);

  // wildly non-power-law data is flagged inconclusive
  ConvergenceStudy bad = fit_order("a", {0.08, 0.04, 0.02}, {1.0, 1e-6, 0.7});
  CHECK_FALSE(bad.conclusive);

  CHECK_THROWS_AS(fit_order("a", {0.04, 0.08}, {1.0, 2.0}), SprayError);
}

TEST_CASE("drag-limit weak rhs matches the friction closed form when uniform") {
  SmoothCase c;  // default-constructed closures are uniform
  c.gas.alpha_n0 = 2.0;
  c.gas.s2_0 = 0.8;
  c.F.n0 = 1.3;
  c.F.u_F = {0.9, 0.2, -0.1};
  c.F.s2_F = 0.15;
  collision::VelocityTestFn phi{[](const Vec3& v) { return v.x; },
                                [](const Vec3&) { return Vec3{1, 0, 0}; }};
  QuadratureSpec quad;
  double a = 0.05;
  double rhs = drag_limit_weak_rhs(c, a, phi, quad);

  // independent: -pi a^2 alpha_n s^2 n_F E[qbar(|v-u|/s)(v-u)_x / s]
  const kernels::QbarTable& qbar = kernels::QbarTable::shared();
  double s = std::sqrt(c.gas.s2_0), sF = std::sqrt(c.F.s2_F);
  Quad1D gh = gauss_hermite(24);
  double ref = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i)
    for (std::size_t j = 0; j < gh.nodes.size(); ++j)
      for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
        Vec3 v = c.F.u_F + Vec3{gh.nodes[i], gh.nodes[j], gh.nodes[k]} * (std::sqrt(2.0) * sF);
        double wgt = gh.weights[i] * gh.weights[j] * gh.weights[k] *
                     0.17958712212516655907430693317931;
        Vec3 rel = v - c.gas.u0;
        ref += wgt * qbar(rel.norm() / s) * rel.x / s;
      }
  ref *= -kPi * a * a * c.gas.alpha_n0 * c.gas.s2_0 * c.F.n0;
  CHECK(rhs == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("drag limit: gap decays linearly in the mass ratio") {
  SmoothCase c = default_smooth_case();
  collision::VelocityTestFn phi{[](const Vec3& v) { return v.x; },
                                [](const Vec3&) { return Vec3{1, 0, 0}; }};
  QuadratureSpec quad;
  ConvergenceStudy st =
      drag_limit_consistency(c, 0.05, 0.1, {0.1, 0.05, 0.025}, phi, 2000000, quad, 21);
  CHECK(st.conclusive);
  CHECK(st.fitted_order >= 0.8);
  CHECK(st.fitted_order <= 1.2);
}

TEST_CASE("co-moving case: both sides vanish within noise for every eta") {
  SmoothCase c;
  c.gas.alpha_n0 = 1.0;
  c.gas.s2_0 = 1.0;
  c.F.n0 = 1.0;
  c.F.u_F = {0, 0, 0};
  c.F.s2_F = 1e-6;
  collision::VelocityTestFn phi{[](const Vec3& v) { return v.x; },
                                [](const Vec3&) { return Vec3{1, 0, 0}; }};
  QuadratureSpec quad;
  CHECK(std::abs(drag_limit_weak_rhs(c, 0.05, phi, quad)) < 1e-10);
  for (double eta : {0.1, 0.05}) {
    collision::ScalingParams pr = collision::ScalingParams::make(eta, 0.1, 0.05);
    collision::McEstimate est = collision::enskog_e2_apply(c.F, c.gas, phi, c.x0, pr, 100000, 3);
    CHECK(std::abs(est.value) <= 3.0 * est.std_error + 1e-12);
  }
}

TEST_CASE("pressure term scales as the particle volume") {
  PressureScaling ps = pressure_term_scaling(0.1, 0.05, 0.1, 2000000, 17);
  CHECK(ps.pass);
  CHECK(ps.ratio == doctest::Approx(8.0).epsilon(0.1));
}

TEST_CASE("identity suite passes for the canonical family") {
  SmoothCase c = default_smooth_case();
  collision::ScalingParams pr = collision::ScalingParams::make(0.1, 0.1, 0.08);
  auto rows = identity_suite(c, pr, 200000, 5, true);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    INFO(row.name);
    CHECK(row.pass);
  }
}

TEST_CASE("contact-line flux term matches its volume-order closed form") {
  // uniform closures so the only corrections are O(eta) and Monte Carlo noise
  SmoothCase c;
  c.gas.alpha_n0 = 1.5;
  c.gas.s2_0 = 0.9;
  c.F.n0 = 2.0;
  c.F.u_F = {0.8, 0.1, 0.0};
  c.F.s2_F = 0.2;
  double a = 0.08, eta = 0.01;  // small mass ratio keeps the eta-corrections inside the bound
  collision::ScalingParams pr = collision::ScalingParams::make(eta, 0.1, a);
  collision::SpaceTestFn phi = [](double, const Vec3& xi) { return 0.5 * xi.norm2(); };
  collision::McEstimate flux =
      collision::identity_flux_term(c.gas, c.F, phi, c.x0, pr, 400000, 9);

  // alpha_n n_F E[ (Q(v-u) v)_x + ball a^3 s^2 v_x ] over the particle shape
  Quad1D gh = gauss_hermite(20);
  double sF = std::sqrt(c.F.s2_F);
  double lead = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i)
    for (std::size_t j = 0; j < gh.nodes.size(); ++j)
      for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
        Vec3 v = c.F.u_F + Vec3{gh.nodes[i], gh.nodes[j], gh.nodes[k]} * (std::sqrt(2.0) * sF);
        double wgt = gh.weights[i] * gh.weights[j] * gh.weights[k] *
                     0.17958712212516655907430693317931;
        Vec3 qv = kernels::Q_tensor(v - c.gas.u0, a) * v;
        lead += wgt * (qv.x + 4.0 * kPi / 3.0 * a * a * a * c.gas.s2_0 * v.x);
      }
  lead *= c.gas.alpha_n0 * c.F.n0;
  CHECK(std::abs(flux.value - lead) <= 3.0 * flux.std_error + 0.1 * std::abs(lead));
}

TEST_CASE("remainder norms fit beyond cubic order on the smooth case") {
  SmoothCase c = default_smooth_case();
  QuadratureSpec quad;
  RemainderScaling rs = remainder_order_fit(c, {0.08, 0.04, 0.02}, quad);
  CHECK_FALSE(rs.degenerate);
  CHECK(rs.P.conclusive);
  CHECK(rs.Q.conclusive);
  CHECK(rs.R.conclusive);
  CHECK(rs.P.fitted_order >= 3.5);
  CHECK(rs.Q.fitted_order >= 3.5);
  CHECK(rs.R.fitted_order >= 3.5);
}

TEST_CASE("algebraic momentum-defect piece scales exactly as the sixth power") {
  SmoothCase c = default_smooth_case();
  auto algebraic = [&](double a) {
    double ball = 4.0 * kPi / 3.0 * a * a * a;
    double x = c.x0;
    double nF = c.F.number_density(x);
    double alpha = 1.0 - ball * nF;
    double ntheta = c.gas.alpha_n(x) / alpha * c.gas.s2(x) * c.m_g;
    return (1.0 - alpha) * ntheta * std::abs(-ball * c.F.dnumber_density(x));
  };
  double r = algebraic(0.08) / algebraic(0.04);
  CHECK(r == doctest::Approx(64.0).epsilon(0.02));  // a^6 per halving, alpha drift aside
}

TEST_CASE("uniform closures make the remainder study degenerate") {
  SmoothCase c;
  c.F.n0 = 2.0;
  c.F.s2_F = 0.2;
  QuadratureSpec quad;
  RemainderScaling rs = remainder_order_fit(c, {0.08, 0.04}, quad);
  CHECK(rs.degenerate);
}

TEST_CASE("stochastic and continuum relaxation curves agree at desk scale") {
  RelaxationScenario sc;
  sc.gas_samples = 30000;
  sc.horizons = {0.8, 1.6};
  MomentComparison cmp = compare_relaxation(sc, 0.1, 0.1, 0.05, 33);
  CHECK(cmp.discrepancy < 0.2);
  // both curves actually decayed
  CHECK(cmp.v_dsmc.back() < 0.95 * sc.part_v0.x);
  CHECK(cmp.v_solver.back() < 0.95 * sc.part_v0.x);
}

TEST_CASE("thin-mode gap fits at cubic order or better") {
  ConvergenceStudy st = thin_limit_order({0.08, 0.04, 0.02});
  CHECK(st.conclusive);
  CHECK(st.fitted_order >= 3.0);
}
