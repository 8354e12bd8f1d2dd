#include "sprays/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "sprays/rng.hpp"

namespace sprays {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

Quad1D compute_gauss_legendre(int n) {
  // Newton iteration on P_n, nodes from the Chebyshev-like initial guess.
  Quad1D q;
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[static_cast<std::size_t>(i)] = -x;
    q.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    q.weights[static_cast<std::size_t>(i)] = w;
    q.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return q;
}

Quad1D compute_gauss_hermite(int n) {
  // Newton iteration with the orthonormal Hermite recurrence (weight e^{-x^2}).
  Quad1D q;
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  const double pim4 = 0.75112554446494248285870300477623;  // pi^{-1/4}
  int m = (n + 1) / 2;
  double x = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      x -= 1.14 * std::pow(static_cast<double>(n), 0.426) / x;
    } else if (i == 2) {
      x = 1.86 * x - 0.86 * q.nodes[static_cast<std::size_t>(n - 1)];
    } else if (i == 3) {
      x = 1.91 * x - 0.91 * q.nodes[static_cast<std::size_t>(n - 2)];
    } else {
      x = 2.0 * x - q.nodes[static_cast<std::size_t>(n - i + 1)];
    }
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = x * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    q.nodes[static_cast<std::size_t>(i)] = -x;
    double w = 2.0 / (pp * pp);
    q.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    q.weights[static_cast<std::size_t>(i)] = w;
  }
  // the Newton starting guesses degrade for large n; reject silently wrong rules
  double sum = 0.0;
  for (double w : q.weights) sum += w;
  bool monotone = true;
  for (std::size_t i = 1; i < q.nodes.size(); ++i)
    if (q.nodes[i] <= q.nodes[i - 1]) monotone = false;
  require(monotone && std::abs(sum - 1.77245385090551602729816748334115) < 1e-10,
          "gauss_hermite: root search failed at this order");
  return q;
}

const Quad1D& cached(std::map<int, Quad1D>& cache, std::mutex& mu, int n,
                     Quad1D (*compute)(int)) {
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute(n)).first;
  return it->second;
}

}  // namespace

Quad1D gauss_legendre(int n) {
  require(n >= 1, "gauss_legendre: order must be >= 1");
  static std::map<int, Quad1D> cache;
  static std::mutex mu;
  return cached(cache, mu, n, &compute_gauss_legendre);
}

Quad1D gauss_legendre(int n, double a, double b) {
  Quad1D base = gauss_legendre(n);
  Quad1D q = base;
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    q.nodes[i] = mid + half * base.nodes[i];
    q.weights[i] = half * base.weights[i];
  }
  return q;
}

Quad1D gauss_hermite(int n) {
  require(n >= 1, "gauss_hermite: order must be >= 1");
  static std::map<int, Quad1D> cache;
  static std::mutex mu;
  return cached(cache, mu, n, &compute_gauss_hermite);
}

std::vector<SphereNode> sphere_product_grid(int n_theta, int n_phi) {
  Quad1D mu = gauss_legendre(n_theta);  // cos(theta) in [-1, 1]
  std::vector<SphereNode> nodes;
  nodes.reserve(static_cast<std::size_t>(n_theta * n_phi));
  double dphi = 2.0 * kPi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    double c = mu.nodes[static_cast<std::size_t>(i)];
    double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < n_phi; ++j) {
      double phi = (j + 0.5) * dphi;
      nodes.push_back({{s * std::cos(phi), s * std::sin(phi), c},
                       mu.weights[static_cast<std::size_t>(i)] * dphi});
    }
  }
  return nodes;
}

std::vector<SphereNode> hemisphere_product_grid(const Vec3& axis, int n_theta, int n_phi) {
  require(axis.norm2() > 0.0, "hemisphere_product_grid: axis must be nonzero");
  Vec3 e1, e2, e3;
  orthonormal_frame(axis, e1, e2, e3);
  Quad1D mu = gauss_legendre(n_theta, 0.0, 1.0);  // cos(theta) in (0, 1)
  std::vector<SphereNode> nodes;
  nodes.reserve(static_cast<std::size_t>(n_theta * n_phi));
  double dphi = 2.0 * kPi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    double c = mu.nodes[static_cast<std::size_t>(i)];
    double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < n_phi; ++j) {
      double phi = (j + 0.5) * dphi;
      Vec3 dir = e1 * (s * std::cos(phi)) + e2 * (s * std::sin(phi)) + e3 * c;
      nodes.push_back({dir, mu.weights[static_cast<std::size_t>(i)] * dphi});
    }
  }
  return nodes;
}

double integrate_hemisphere(const QuadratureSpec& spec, const Vec3& axis,
                            const std::function<double(const Vec3&)>& f) {
  spec.validate();
  if (spec.sphere_rule == QuadratureSpec::SphereRule::product_grid) {
    double sum = 0.0;
    for (const SphereNode& n : hemisphere_product_grid(axis, spec.n_theta, spec.n_phi))
      sum += n.weight * f(n.dir);
    return sum;
  }
  // Monte Carlo over the hemisphere dir.axis > 0 (area 2*pi)
  CounterRng rng(spec.mc_seed, 0x7e3a);
  Vec3 ax = axis / axis.norm();
  double sum = 0.0;
  for (std::int64_t k = 0; k < spec.mc_samples; ++k) {
    Vec3 d = rng.unit_sphere();
    if (d.dot(ax) < 0.0) d = -d;
    sum += f(d);
  }
  return 2.0 * kPi * sum / static_cast<double>(spec.mc_samples);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol, double max_panel) {
  require(b >= a, "integrate_adaptive: inverted interval");
  if (a == b) return 0.0;
  int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel)));
  auto eval = [&](int np) {
    double sum = 0.0;
    double h = (b - a) / np;
    const Quad1D& base = gauss_legendre(32);
    for (int p = 0; p < np; ++p) {
      double lo = a + p * h, mid = lo + 0.5 * h, half = 0.5 * h;
      for (std::size_t i = 0; i < base.nodes.size(); ++i)
        sum += half * base.weights[i] * f(mid + half * base.nodes[i]);
    }
    return sum;
  };
  double prev = eval(panels);
  for (int round = 0; round < 6; ++round) {
    panels *= 2;
    double cur = eval(panels);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  throw SprayError("integrate_adaptive: no convergence to requested tolerance");
}

double erfcx(double x) {
  if (x < 6.0) return std::exp(x * x) * std::erfc(x);
  // Laplace continued fraction, evaluated bottom-up; accurate to machine
  // precision for x >= 6
  double cf = 0.0;
  for (int k = 40; k >= 1; --k) cf = 0.5 * k / (x + cf);
  return 1.0 / (1.77245385090551602729816748334115 * (x + cf));
}

double norm_pdf(double t) {
  return 0.39894228040143267793994605993438 * std::exp(-0.5 * t * t);
}

double norm_cdf(double t) { return 0.5 * std::erfc(-t * 0.70710678118654752440084436210485); }

double half_moment0(double m, double s) { return norm_cdf(m / s); }

double half_moment1(double m, double s) {
  double t = m / s;
  return m * norm_cdf(t) + s * norm_pdf(t);
}

double half_moment2(double m, double s) {
  double t = m / s;
  return (m * m + s * s) * norm_cdf(t) + m * s * norm_pdf(t);
}

double half_moment3(double m, double s) {
  double t = m / s;
  return (m * m * m + 3.0 * m * s * s) * norm_cdf(t) + (m * m * s + 2.0 * s * s * s) * norm_pdf(t);
}

double half_moment1_neg(double m, double s) { return half_moment1(m, s) - m; }

}  // namespace sprays
