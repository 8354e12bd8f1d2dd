#include "sprays/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "sprays/error.hpp"
#include "sprays/rng.hpp"

namespace sprays::kernels {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kSqrt2 = 1.41421356237309504880168872420970;

double thermal_speed(const LocalGasState& state) {
  return std::sqrt(std::max(state.theta_over_m, kThermalSpeedFloor * kThermalSpeedFloor));
}

}  // namespace

void LocalGasState::validate() const {
  require(std::isfinite(alpha_n) && alpha_n >= 0.0, "LocalGasState: alpha_n must be >= 0");
  require(u.finite(), "LocalGasState: u must be finite");
  require(std::isfinite(theta_over_m) && theta_over_m > 0.0,
          "LocalGasState: theta_over_m must be > 0");
}

void GasGradients::validate() const {
  require(grad_alpha_n.finite() && grad_u.finite() && grad_p.finite() && grad_alpha.finite() &&
              std::isfinite(div_u),
          "GasGradients: non-finite entry");
  require(std::abs(div_u - grad_u.trace()) <= 1e-12 * std::max(1.0, grad_u.max_abs()),
          "GasGradients: div_u inconsistent with trace(grad_u)");
}

double maxwellian_eval(const LocalGasState& state, const Vec3& w) {
  state.validate();
  require(w.finite(), "maxwellian_eval: non-finite velocity");
  double s2 = state.theta_over_m;
  double norm = state.alpha_n / std::pow(kTwoPi * s2, 1.5);
  return norm * std::exp(-(w - state.u).norm2() / (2.0 * s2));
}

Vec3 q_kernel(const Vec3& xi, const QuadratureSpec& quad) {
  quad.validate();
  require(xi.finite(), "q_kernel: non-finite argument");

  auto eval = [&xi](int order) {
    const Quad1D& gh = gauss_hermite(order);
    const double inv_pi32 = 0.17958712212516655907430693317931;  // pi^{-3/2}
    Vec3 sum{};
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
      double yi = kSqrt2 * gh.nodes[i];
      double wi = gh.weights[i];
      for (std::size_t j = 0; j < gh.nodes.size(); ++j) {
        double yj = kSqrt2 * gh.nodes[j];
        double wij = wi * gh.weights[j];
        for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
          Vec3 d{xi.x - yi, xi.y - yj, xi.z - kSqrt2 * gh.nodes[k]};
          sum += (wij * gh.weights[k] * d.norm()) * d;
        }
      }
    }
    return sum * inv_pi32;
  };

  // the integrand is only C^1 at y = xi, so convergence is algebraic; the
  // ladder runs deep before giving up (orders past ~170 are rejected by the
  // root finder, which also bounds the cost)
  int order = std::max(quad.hermite_order, 20);
  Vec3 prev = eval(order);
  while (order < 162) {
    order = std::min(order * 3 / 2, 162);
    Vec3 cur = eval(order);
    double diff = std::max({std::abs(cur.x - prev.x), std::abs(cur.y - prev.y),
                            std::abs(cur.z - prev.z)});
    if (diff <= quad.tolerance) return cur;
    prev = cur;
  }
  throw SprayError("q_kernel: Gauss-Hermite refinement did not converge");
}

namespace {

// Transverse Gaussian integral int_0^inf r sqrt(c^2 + r^2) e^{-r^2/2} dr
//   = |c| + sqrt(pi/2) erfcx(|c|/sqrt(2)).
double transverse_profile(double c) {
  double ac = std::abs(c);
  return ac + 1.25331413731550025120788264240552 * erfcx(ac / kSqrt2);
}

// q(s e).e = (2 pi)^{-1/2} int c e^{-(c-s)^2/2} transverse_profile(c) dc
double qbar_times_s(double s, double tol) {
  const double inv_sqrt2pi = 0.39894228040143267793994605993438;
  auto f = [s](double c) {
    return c * std::exp(-0.5 * (c - s) * (c - s)) * transverse_profile(c);
  };
  double lo = s - 13.0, hi = s + 13.0;
  double result;
  if (lo < 0.0 && hi > 0.0) {
    // the transverse profile is only C^2 at c = 0; split the panel there
    result = integrate_adaptive(f, lo, 0.0, tol, 2.0) + integrate_adaptive(f, 0.0, hi, tol, 2.0);
  } else {
    result = integrate_adaptive(f, lo, hi, tol, 2.0);
  }
  return inv_sqrt2pi * result;
}

}  // namespace

double qbar_profile(double s, const QuadratureSpec& quad) {
  quad.validate();
  require(std::isfinite(s) && s >= 0.0, "qbar_profile: s must be >= 0");
  double se = std::max(s, 1e-4);
  return qbar_times_s(se, 0.1 * quad.tolerance) / se;
}

QbarTable::QbarTable(const QuadratureSpec& quad, double tol) {
  s_min_ = 1e-2;
  s_max_ = 64.0;
  qbar0_ = 2.1276921621376896;  // (8/3) sqrt(2/pi), the s -> 0 limit
  std::size_t n = 129;
  double lo = std::log(s_min_), hi = std::log(s_max_);
  for (int round = 0; round < 5; ++round) {
    log_s_.resize(n);
    val_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      log_s_[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
      val_[i] = qbar_profile(std::exp(log_s_[i]), quad);
    }
    // centered slopes in log s, one-sided at the ends
    slope_.resize(n);
    double h = (hi - lo) / static_cast<double>(n - 1);
    slope_[0] = (val_[1] - val_[0]) / h;
    slope_[n - 1] = (val_[n - 1] - val_[n - 2]) / h;
    for (std::size_t i = 1; i + 1 < n; ++i) slope_[i] = (val_[i + 1] - val_[i - 1]) / (2.0 * h);
    curv_ = (val_[0] - qbar0_) / (s_min_ * s_min_);

    // midpoint interpolation error
    build_error_ = 0.0;
    for (std::size_t i = 0; i + 1 < n; i += 8) {
      double sm = std::exp(0.5 * (log_s_[i] + log_s_[i + 1]));
      build_error_ = std::max(build_error_, std::abs((*this)(sm)-qbar_profile(sm, quad)));
    }
    if (build_error_ <= tol) return;
    n = 2 * n - 1;
  }
  throw SprayError("QbarTable: interpolation refinement did not reach tolerance");
}

double QbarTable::operator()(double s) const {
  if (s <= s_min_) return qbar0_ + curv_ * s * s;
  if (s >= s_max_) return s + 2.0 / s - 1.0 / (s * s * s);
  double t = std::log(s);
  double lo = log_s_.front(), h = (log_s_.back() - lo) / static_cast<double>(log_s_.size() - 1);
  std::size_t i = std::min(static_cast<std::size_t>((t - lo) / h), log_s_.size() - 2);
  double u = (t - log_s_[i]) / h;
  // cubic Hermite in log s
  double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
  double h10 = u * (1.0 - u) * (1.0 - u);
  double h01 = u * u * (3.0 - 2.0 * u);
  double h11 = u * u * (u - 1.0);
  return h00 * val_[i] + h10 * h * slope_[i] + h01 * val_[i + 1] + h11 * h * slope_[i + 1];
}

const QbarTable& QbarTable::shared() {
  static QbarTable table{QuadratureSpec{}, 1e-6};
  return table;
}

SymTensor2 Q_tensor(const Vec3& xi, double a) {
  require(xi.finite() && std::isfinite(a) && a >= 0.0, "Q_tensor: invalid input");
  double coef = 4.0 * kPi / 15.0 * a * a * a;
  SymTensor2 t = SymTensor2::outer(xi) * 2.0 + SymTensor2::identity() * xi.norm2();
  return t * coef;
}

Vec3 K_closed(const Vec3& xi) { return xi * (0.5 * kPi * xi.norm()); }

SymTensor2 K4_closed(const Vec3& xi) {
  return (SymTensor2::identity() * xi.norm2() + SymTensor2::outer(xi) * 2.0) * (kTwoPi / 15.0);
}

namespace {

// shared driver for the two hemisphere integrals; FVec is Vec3 or SymTensor2
template <typename T, typename Node>
T accumulate_nodes(const std::vector<Node>& nodes, const Vec3& xi, bool rank4) {
  T sum{};
  for (const auto& n : nodes) {
    double proj = n.dir.dot(xi);
    double w = n.weight * proj * proj;
    if constexpr (std::is_same_v<T, Vec3>) {
      (void)rank4;
      sum += n.dir * w;
    } else {
      sum = sum + SymTensor2::outer(n.dir) * w;
    }
  }
  return sum;
}

template <typename T>
T hemisphere_cut_integral(const Vec3& xi, const QuadratureSpec& quad, double (*diff)(const T&, const T&)) {
  quad.validate();
  require(xi.finite(), "hemisphere integral: non-finite argument");
  if (xi.norm2() == 0.0) return T{};

  if (quad.sphere_rule == QuadratureSpec::SphereRule::monte_carlo) {
    CounterRng rng(quad.mc_seed, 0x51c3);
    Vec3 ax = xi / xi.norm();
    T sum{};
    for (std::int64_t k = 0; k < quad.mc_samples; ++k) {
      Vec3 d = rng.unit_sphere();
      double proj = d.dot(xi);
      double w = proj * proj * heaviside(proj);
      if constexpr (std::is_same_v<T, Vec3>)
        sum += d * w;
      else
        sum = sum + SymTensor2::outer(d) * w;
    }
    (void)ax;
    return sum * (4.0 * kPi / static_cast<double>(quad.mc_samples));
  }

  auto eval = [&xi](int nt, int np) {
    auto nodes = hemisphere_product_grid(xi, nt, np);
    return accumulate_nodes<T>(nodes, xi, true);
  };
  T coarse = eval(quad.n_theta, quad.n_phi);
  T fine = eval(quad.n_theta + 8, quad.n_phi + 16);
  if (diff(coarse, fine) > quad.tolerance)
    throw SprayError("hemisphere integral: grid refinement disagreement above tolerance");
  return fine;
}

double vec_diff(const Vec3& a, const Vec3& b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}
double sym_diff(const SymTensor2& a, const SymTensor2& b) { return (a - b).max_abs(); }

}  // namespace

Vec3 K_integral(const Vec3& xi, const QuadratureSpec& quad) {
  return hemisphere_cut_integral<Vec3>(xi, quad, &vec_diff);
}

SymTensor2 K4_integral(const Vec3& xi, const QuadratureSpec& quad) {
  return hemisphere_cut_integral<SymTensor2>(xi, quad, &sym_diff);
}

double ball_coefficient(int d, double a) {
  require(d >= 1, "ball_coefficient: dimension must be >= 1");
  require(std::isfinite(a) && a >= 0.0, "ball_coefficient: radius must be >= 0");
  double sphere_area = 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
  return sphere_area / d * std::pow(a, d);
}

Vec3 drag_force_D(const LocalGasState& state, const GasGradients& grads, const Vec3& v,
                  double a, const QbarTable& qbar) {
  state.validate();
  grads.validate();
  require(v.finite() && std::isfinite(a) && a >= 0.0, "drag_force_D: invalid input");

  double s = thermal_speed(state);
  Vec3 xi = v - state.u;
  Vec3 force = xi * (kPi * a * a * state.alpha_n * s * qbar(xi.norm() / s));

  // div_x[alpha n Q(v-u)] with v frozen, by index contraction:
  //   d_i xi_k = -grad_u(k,i)
  double coef = 4.0 * kPi / 15.0 * a * a * a;
  const Vec3& g = grads.grad_alpha_n;
  const Mat3& J = grads.grad_u;
  double xi2 = xi.norm2();
  for (int j = 0; j < 3; ++j) {
    double term = 0.0;
    for (int i = 0; i < 3; ++i) {
      term += g[static_cast<std::size_t>(i)] *
              (2.0 * xi[static_cast<std::size_t>(i)] * xi[static_cast<std::size_t>(j)] +
               (i == j ? xi2 : 0.0));
      term += state.alpha_n * (-2.0) * xi[static_cast<std::size_t>(i)] * J(j, i);
      term += state.alpha_n * (-2.0) * xi[static_cast<std::size_t>(i)] * J(i, j);
    }
    term += state.alpha_n * (-2.0) * grads.div_u * xi[static_cast<std::size_t>(j)];
    force[static_cast<std::size_t>(j)] += coef * term;
  }
  return force;
}

Mat3 viscous_tensor_Dbar(const LocalGasState& state, const GasGradients& grads,
                         const Vec3& v, double a, const QbarTable& qbar) {
  state.validate();
  grads.validate();
  require(v.finite() && std::isfinite(a) && a >= 0.0, "viscous_tensor_Dbar: invalid input");

  double s = thermal_speed(state);
  Vec3 xi = v - state.u;
  double scalar = kPi * a * a * state.alpha_n * s * qbar(xi.norm() / s);

  double c3 = 4.0 * kPi / 15.0 * a * a * a;
  const Vec3& g = grads.grad_alpha_n;
  Mat3 out = Mat3::identity() * (scalar + 2.0 * c3 * g.dot(xi));
  out = out + Mat3::outer(g, xi) * c3;
  Mat3 sym = grads.grad_u + grads.grad_u.transposed() + Mat3::identity() * grads.div_u;
  out = out - sym * (2.0 * c3 * state.alpha_n);
  return out;
}

SymTensor2 moment2_identity(const LocalGasState& state, const Vec3& v) {
  state.validate();
  require(v.finite(), "moment2_identity: non-finite velocity");
  Vec3 xi = v - state.u;
  return SymTensor2::outer(xi) * state.alpha_n +
         SymTensor2::identity() * (state.alpha_n * state.theta_over_m);
}

}  // namespace sprays::kernels
