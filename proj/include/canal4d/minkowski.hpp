#pragma once

// Indefinite linear algebra of Minkowski space-time E^4_1 with metric
// signature (-,+,+,+). Component 0 is the timelike coordinate x1.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "canal4d/errors.hpp"

namespace canal4d {

struct Vec4 {
  std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};

  constexpr Vec4() = default;
  constexpr Vec4(double x1, double x2, double x3, double x4) : c{x1, x2, x3, x4} {}

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }

  constexpr Vec4& operator+=(const Vec4& o) {
    for (std::size_t i = 0; i < 4; ++i) c[i] += o.c[i];
    return *this;
  }
  constexpr Vec4& operator-=(const Vec4& o) {
    for (std::size_t i = 0; i < 4; ++i) c[i] -= o.c[i];
    return *this;
  }
  constexpr Vec4& operator*=(double s) {
    for (auto& x : c) x *= s;
    return *this;
  }
  constexpr Vec4& operator/=(double s) {
    for (auto& x : c) x /= s;
    return *this;
  }

  friend constexpr Vec4 operator+(Vec4 a, const Vec4& b) { return a += b; }
  friend constexpr Vec4 operator-(Vec4 a, const Vec4& b) { return a -= b; }
  friend constexpr Vec4 operator-(Vec4 a) { return a *= -1.0; }
  friend constexpr Vec4 operator*(Vec4 a, double s) { return a *= s; }
  friend constexpr Vec4 operator*(double s, Vec4 a) { return a *= s; }
  friend constexpr Vec4 operator/(Vec4 a, double s) { return a /= s; }
  friend constexpr bool operator==(const Vec4&, const Vec4&) = default;

  bool finite() const {
    for (double x : c)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

/// Points and vectors share the representation.
using Point4 = Vec4;

namespace basis {
inline constexpr Vec4 e1{1.0, 0.0, 0.0, 0.0};
inline constexpr Vec4 e2{0.0, 1.0, 0.0, 0.0};
inline constexpr Vec4 e3{0.0, 0.0, 1.0, 0.0};
inline constexpr Vec4 e4{0.0, 0.0, 0.0, 1.0};
}  // namespace basis

/// Extended-precision coordinates for difference stencils.
using Vec4x = std::array<long double, 4>;

inline Vec4x widen(const Vec4& a) { return {a[0], a[1], a[2], a[3]}; }

enum class CausalCharacter { Spacelike, Timelike, Lightlike };

inline const char* to_string(CausalCharacter c) {
  switch (c) {
    case CausalCharacter::Spacelike: return "spacelike";
    case CausalCharacter::Timelike: return "timelike";
    case CausalCharacter::Lightlike: return "lightlike";
  }
  return "?";
}

/// -x1 y1 + x2 y2 + x3 y3 + x4 y4
constexpr double inner(const Vec4& x, const Vec4& y) {
  return -x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3];
}

/// Euclidean dot product, used only for diagnostics and scaling.
constexpr double euclid_dot(const Vec4& x, const Vec4& y) {
  return x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3];
}

/// Ternary vector product: formal determinant with first row (-e1, e2, e3, e4)
/// followed by the rows x, y, z. Expanded by cofactors along the first row.
constexpr Vec4 triple_product(const Vec4& x, const Vec4& y, const Vec4& z) {
  // 3x3 minor of rows (x,y,z) with columns (a,b,c).
  auto minor = [&](int a, int b, int c) {
    return x[a] * (y[b] * z[c] - y[c] * z[b]) - x[b] * (y[a] * z[c] - y[c] * z[a]) +
           x[c] * (y[a] * z[b] - y[b] * z[a]);
  };
  return Vec4{-minor(1, 2, 3), -minor(0, 2, 3), minor(0, 1, 3), -minor(0, 1, 2)};
}

inline double norm(const Vec4& x) { return std::sqrt(std::abs(inner(x, x))); }

/// Lightlike iff |<x,x>| <= tol * (1 + |x|_E^2). The zero vector counts as spacelike.
inline CausalCharacter causal_character(const Vec4& x, double tol = 1e-10) {
  const double e2 = euclid_dot(x, x);
  if (e2 == 0.0) return CausalCharacter::Spacelike;
  const double q = inner(x, x);
  if (std::abs(q) <= tol * (1.0 + e2)) return CausalCharacter::Lightlike;
  return q > 0.0 ? CausalCharacter::Spacelike : CausalCharacter::Timelike;
}

using Signature = std::array<int, 4>;
using Tetrad = std::array<Vec4, 4>;

/// Ordered tetrad B1..B4 with <Bi,Bj> = sigma_i delta_ij.
struct ParallelFrame {
  Tetrad b{basis::e1, basis::e2, basis::e3, basis::e4};
  Signature signature{-1, 1, 1, 1};

  const Vec4& operator[](std::size_t i) const { return b[i]; }
  Vec4& operator[](std::size_t i) { return b[i]; }
};

/// max_ij |<Bi,Bj> - sigma_i delta_ij|
inline double gram_residual(const ParallelFrame& f) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const double target = i == j ? f.signature[i] : 0.0;
      worst = std::max(worst, std::abs(inner(f.b[i], f.b[j]) - target));
    }
  return worst;
}

/// Signature-aware Gram-Schmidt in the order B1, B2, B3, B4. Each vector keeps
/// its direction (sigma_i <out_i, in_i> > 0). Throws DegenerateError when a
/// projected vector is (nearly) null or has the wrong causal sign.
inline ParallelFrame lorentz_orthonormalize(const ParallelFrame& in, double tol = 1e-12) {
  ParallelFrame out;
  out.signature = in.signature;
  for (std::size_t i = 0; i < 4; ++i) {
    Vec4 v = in.b[i];
    for (std::size_t j = 0; j < i; ++j) v -= (out.signature[j] * inner(v, out.b[j])) * out.b[j];
    const double q = inner(v, v);
    const double scale = std::max(1.0, euclid_dot(in.b[i], in.b[i]));
    if (!(q * out.signature[i] > tol * scale))
      throw DegenerateError("lorentz_orthonormalize: vector B" + std::to_string(i + 1) +
                            " is degenerate or has the wrong causal character");
    out.b[i] = v / std::sqrt(std::abs(q));
  }
  return out;
}

}  // namespace canal4d
