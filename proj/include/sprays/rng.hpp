#pragma once

#include <cmath>
#include <cstdint>

#include "sprays/geometry.hpp"

namespace sprays {

// splitmix64 finalizer; good 64->64 bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based generator: the stream is a pure function of
// (seed, s0, s1, s2, draw index), so identical seeds give bit-identical
// sequences regardless of how work is split across workers.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t s0 = 0, std::uint64_t s1 = 0,
             std::uint64_t s2 = 0)
      : base_(mix64(mix64(mix64(mix64(seed) ^ s0) ^ s1) ^ s2)) {}

  std::uint64_t next_u64() { return mix64(base_ ^ counter_++); }

  // uniform in [0,1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal (Box-Muller, pair cached)
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec3 normal3() { return {normal(), normal(), normal()}; }

  // uniform direction on the unit sphere
  Vec3 unit_sphere() {
    double c = uniform(-1.0, 1.0);
    double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    double phi = uniform(0.0, 6.283185307179586476925286766559);
    return {s * std::cos(phi), s * std::sin(phi), c};
  }

  // Poisson sample by inversion for small means, normal approximation above.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      double l = std::exp(-mean), p = 1.0;
      std::uint64_t k = 0;
      do {
        ++k;
        p *= uniform();
      } while (p > l);
      return k - 1;
    }
    double g = mean + std::sqrt(mean) * normal();
    return g < 0.0 ? 0 : static_cast<std::uint64_t>(g + 0.5);
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace sprays
