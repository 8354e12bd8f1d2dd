#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace sprays {

// 3-vector for velocities, forces, directions.
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  constexpr double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

  double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
  double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

// General 3x3 tensor, row-major. grad_u(i,j) = du_i/dx_j.
struct Mat3 {
  std::array<double, 9> m{};

  static Mat3 zero() { return {}; }
  static Mat3 identity() {
    Mat3 r;
    r(0, 0) = r(1, 1) = r(2, 2) = 1.0;
    return r;
  }
  static Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
    return r;
  }

  double operator()(int i, int j) const { return m[3 * i + j]; }
  double& operator()(int i, int j) { return m[3 * i + j]; }

  Mat3 operator+(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
    return r;
  }
  Mat3 operator-(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = m[i] - o.m[i];
    return r;
  }
  Mat3 operator*(double s) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = m[i] * s;
    return r;
  }
  Vec3 operator*(const Vec3& v) const {
    return {(*this)(0, 0) * v.x + (*this)(0, 1) * v.y + (*this)(0, 2) * v.z,
            (*this)(1, 0) * v.x + (*this)(1, 1) * v.y + (*this)(1, 2) * v.z,
            (*this)(2, 0) * v.x + (*this)(2, 1) * v.y + (*this)(2, 2) * v.z};
  }
  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }
  double trace() const { return m[0] + m[4] + m[8]; }
  double max_abs() const {
    double r = 0.0;
    for (double v : m) r = std::max(r, std::abs(v));
    return r;
  }
  bool finite() const {
    for (double v : m)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline Mat3 operator*(double s, const Mat3& a) { return a * s; }

// Symmetric 3x3 tensor; only the 6 independent components are stored,
// so symmetry holds structurally.
struct SymTensor2 {
  // order: xx, yy, zz, xy, xz, yz
  std::array<double, 6> c{};

  static SymTensor2 zero() { return {}; }
  static SymTensor2 identity() { return {{1.0, 1.0, 1.0, 0.0, 0.0, 0.0}}; }
  static SymTensor2 outer(const Vec3& v) {
    return {{v.x * v.x, v.y * v.y, v.z * v.z, v.x * v.y, v.x * v.z, v.y * v.z}};
  }

  double operator()(int i, int j) const {
    if (i == j) return c[static_cast<std::size_t>(i)];
    int a = i + j;  // xy: 1 -> 3, xz: 2 -> 4, yz: 3 -> 5
    return c[static_cast<std::size_t>(a + 2)];
  }
  double& xx() { return c[0]; }
  double& yy() { return c[1]; }
  double& zz() { return c[2]; }

  SymTensor2 operator+(const SymTensor2& o) const {
    SymTensor2 r;
    for (int i = 0; i < 6; ++i) r.c[i] = c[i] + o.c[i];
    return r;
  }
  SymTensor2 operator-(const SymTensor2& o) const {
    SymTensor2 r;
    for (int i = 0; i < 6; ++i) r.c[i] = c[i] - o.c[i];
    return r;
  }
  SymTensor2 operator*(double s) const {
    SymTensor2 r;
    for (int i = 0; i < 6; ++i) r.c[i] = c[i] * s;
    return r;
  }
  Vec3 operator*(const Vec3& v) const {
    return {c[0] * v.x + c[3] * v.y + c[4] * v.z,
            c[3] * v.x + c[1] * v.y + c[5] * v.z,
            c[4] * v.x + c[5] * v.y + c[2] * v.z};
  }
  double trace() const { return c[0] + c[1] + c[2]; }
  double max_abs() const {
    double r = 0.0;
    for (double v : c) r = std::max(r, std::abs(v));
    return r;
  }
  Mat3 as_mat3() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(i, j);
    return r;
  }
  bool finite() const {
    for (double v : c)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline SymTensor2 operator*(double s, const SymTensor2& t) { return t * s; }

inline double max_abs_diff(const SymTensor2& a, const SymTensor2& b) { return (a - b).max_abs(); }
inline double max_abs_diff(const Mat3& a, const Mat3& b) { return (a - b).max_abs(); }

// Orthonormal basis (e1, e2, axis) with the third vector along `axis`.
// axis must be nonzero.
inline void orthonormal_frame(const Vec3& axis, Vec3& e1, Vec3& e2, Vec3& e3) {
  e3 = axis / axis.norm();
  // pick the coordinate direction least aligned with e3
  Vec3 h = std::abs(e3.x) < 0.7 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  e1 = h - e3 * h.dot(e3);
  e1 = e1 / e1.norm();
  e2 = {e3.y * e1.z - e3.z * e1.y, e3.z * e1.x - e3.x * e1.z, e3.x * e1.y - e3.y * e1.x};
}

}  // namespace sprays
