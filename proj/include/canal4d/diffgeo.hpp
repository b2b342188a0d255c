#pragma once

// Generic numerical engine for parametrized 3-surfaces Psi(u, v, w) in E^4_1:
// partial derivatives, unit normal, fundamental forms, shape operator and the
// curvature invariants K, H and the principal curvatures.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <numbers>
#include <optional>
#include <string>

#include "canal4d/errors.hpp"
#include "canal4d/minkowski.hpp"

namespace canal4d {

using Mat3 = std::array<std::array<double, 3>, 3>;

namespace mat3 {

inline double det(const Mat3& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

inline double trace(const Mat3& a) { return a[0][0] + a[1][1] + a[2][2]; }

inline Mat3 adjugate(const Mat3& a) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int i1 = (j + 1) % 3, i2 = (j + 2) % 3;
      const int j1 = (i + 1) % 3, j2 = (i + 2) % 3;
      r[i][j] = a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1];
    }
  return r;
}

inline Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

inline double max_abs(const Mat3& a) {
  double m = 0.0;
  for (const auto& row : a)
    for (double x : row) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace mat3

/// Point, first partials (u, v, w) and the symmetric table of second partials.
struct SurfaceJet {
  Point4 point;
  std::array<Vec4, 3> d1;
  std::array<std::array<Vec4, 3>, 3> d2;
};

template <class S>
concept ParametricHypersurface = requires(const S& s, double u, double v, double w) {
  { s.evaluate(u, v, w) } -> std::convertible_to<Vec4>;
};

template <class S>
concept AnalyticHypersurface = ParametricHypersurface<S> && requires(const S& s, double u, double v, double w) {
  { s.analytic_jet(u, v, w) } -> std::convertible_to<SurfaceJet>;
};

/// Adapts a callable (u, v, w) -> Vec4.
template <class F>
struct FunctionSurface {
  F fn;
  Vec4 evaluate(double u, double v, double w) const { return fn(u, v, w); }
};
template <class F>
FunctionSurface(F) -> FunctionSurface<F>;

enum class DerivativeMode { FiniteDifference, Analytic };

struct JetOptions {
  DerivativeMode mode = DerivativeMode::FiniteDifference;
  double step = 1e-4;
};

/// Central differences of order two. Diagonal second partials use the 3-point
/// stencil, mixed ones the 4 corners of the 3x3 stencil.
/// Surfaces that can also evaluate in long double.
template <class S>
concept ExtendedEvaluation = requires(const S& s, long double x) {
  { s.evaluate_ext(x, x, x) } -> std::convertible_to<Vec4x>;
};

/// Central differences with the stencil evaluated in long double, so that the
/// double result carries the truncation error of the step alone.
template <ExtendedEvaluation S>
SurfaceJet jet_ext(const S& surface, double u, double v, double w, double step) {
  using L = long double;
  const std::array<L, 3> x{u, v, w};
  std::array<L, 3> h{};
  for (std::size_t i = 0; i < 3; ++i) {
    volatile L t = x[i] + step;
    h[i] = t - x[i];
  }
  auto at = [&](std::array<L, 3> p) {
    try {
      return static_cast<Vec4x>(surface.evaluate_ext(p[0], p[1], p[2]));
    } catch (const Error& e) {
      throw DomainError(std::string("jet: evaluation failure inside the stencil: ") + e.what());
    }
  };
  auto shifted = [&](std::size_t i, L di, std::size_t j = 0, L dj = 0) {
    auto p = x;
    p[i] += di;
    p[j] += dj;
    return p;
  };
  auto narrow = [](const Vec4x& a) {
    return Vec4{static_cast<double>(a[0]), static_cast<double>(a[1]), static_cast<double>(a[2]),
                static_cast<double>(a[3])};
  };
  SurfaceJet J;
  const Vec4x c = at(x);
  J.point = narrow(c);
  for (std::size_t i = 0; i < 3; ++i) {
    const Vec4x p = at(shifted(i, h[i])), m = at(shifted(i, -h[i]));
    Vec4x d1, d2;
    for (std::size_t k = 0; k < 4; ++k) {
      d1[k] = (p[k] - m[k]) / (2 * h[i]);
      d2[k] = (p[k] - 2 * c[k] + m[k]) / (h[i] * h[i]);
    }
    J.d1[i] = narrow(d1);
    J.d2[i][i] = narrow(d2);
  }
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) {
      const Vec4x pp = at(shifted(i, h[i], j, h[j])), pm = at(shifted(i, h[i], j, -h[j]));
      const Vec4x mp = at(shifted(i, -h[i], j, h[j])), mm = at(shifted(i, -h[i], j, -h[j]));
      Vec4x d;
      for (std::size_t k = 0; k < 4; ++k) d[k] = (pp[k] - pm[k] - mp[k] + mm[k]) / (4 * h[i] * h[j]);
      J.d2[i][j] = J.d2[j][i] = narrow(d);
    }
  return J;
}

template <ParametricHypersurface S>
SurfaceJet jet(const S& surface, double u, double v, double w, JetOptions opts = {}) {
  if (opts.mode == DerivativeMode::Analytic) {
    if constexpr (AnalyticHypersurface<S>) {
      return surface.analytic_jet(u, v, w);
    } else {
      throw DomainError("jet: analytic partials are not available for this surface");
    }
  }
  if constexpr (ExtendedEvaluation<S>) return jet_ext(surface, u, v, w, opts.step);
  const std::array<double, 3> x{u, v, w};
  // Per-axis step adjusted so that x +- h are exact in floating point.
  std::array<double, 3> h{};
  for (int i = 0; i < 3; ++i) {
    volatile double t = x[i] + opts.step;
    h[i] = t - x[i];
  }
  auto at = [&](std::array<double, 3> p) {
    try {
      return static_cast<Vec4>(surface.evaluate(p[0], p[1], p[2]));
    } catch (const Error& e) {
      throw DomainError(std::string("jet: evaluation failure inside the stencil: ") + e.what());
    }
  };
  auto shifted = [&](int i, double di, int j = 0, double dj = 0.0) {
    auto p = x;
    p[i] += di;
    p[j] += dj;
    return p;
  };
  SurfaceJet J;
  J.point = at(x);
  std::array<Vec4, 3> plus, minus;
  for (int i = 0; i < 3; ++i) {
    plus[i] = at(shifted(i, h[i]));
    minus[i] = at(shifted(i, -h[i]));
    J.d1[i] = (plus[i] - minus[i]) / (2 * h[i]);
    J.d2[i][i] = (plus[i] - 2.0 * J.point + minus[i]) / (h[i] * h[i]);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const Vec4 pp = at(shifted(i, h[i], j, h[j]));
      const Vec4 pm = at(shifted(i, h[i], j, -h[j]));
      const Vec4 mp = at(shifted(i, -h[i], j, h[j]));
      const Vec4 mm = at(shifted(i, -h[i], j, -h[j]));
      J.d2[i][j] = J.d2[j][i] = (pp - pm - mp + mm) / (4 * h[i] * h[j]);
    }
  return J;
}

struct UnitNormal {
  Vec4 n;
  int epsilon = 1;  // <N, N>
};

inline UnitNormal unit_normal(const SurfaceJet& j) {
  const Vec4 t = triple_product(j.d1[0], j.d1[1], j.d1[2]);
  double scale = 1.0;
  for (const auto& d : j.d1) scale *= std::sqrt(euclid_dot(d, d));
  const double te = std::sqrt(euclid_dot(t, t));
  if (te < 1e-12 * std::max(1.0, scale))
    throw DegenerateError("unit_normal: tangent vectors are linearly dependent");
  if (causal_character(t / te) == CausalCharacter::Lightlike)
    throw DegenerateError("unit_normal: normal direction is lightlike");
  const double nrm = norm(t);
  UnitNormal out{t / nrm, inner(t, t) > 0.0 ? 1 : -1};
  return out;
}

struct FundamentalForms {
  Mat3 g{};
  Mat3 h{};
  int epsilon = 1;
  Vec4 n;
};

inline FundamentalForms fundamental_forms(const SurfaceJet& j) {
  const UnitNormal un = unit_normal(j);
  FundamentalForms f;
  f.n = un.n;
  f.epsilon = un.epsilon;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      f.g[a][b] = inner(j.d1[a], j.d1[b]);
      f.h[a][b] = inner(j.d2[a][b], f.n);
    }
  return f;
}

/// Flips N (and with it h) so that N points like `reference` up to causal sign.
/// Returns +1 when the raw orientation already agreed, -1 when it was flipped.
inline int align_orientation(FundamentalForms& f, const Vec4& reference) {
  if (f.epsilon * inner(f.n, reference) >= 0.0) return 1;
  f.n = -f.n;
  for (auto& row : f.h)
    for (double& x : row) x = -x;
  return -1;
}

/// S = g^{-1} h
inline Mat3 shape_operator(const FundamentalForms& f) {
  const double d = mat3::det(f.g);
  const double scale = mat3::max_abs(f.g);
  if (!(std::abs(d) > 1e-12 * scale * scale * scale))
    throw DegenerateError("shape_operator: first fundamental form is singular");
  Mat3 inv = mat3::adjugate(f.g);
  for (auto& row : inv)
    for (double& x : row) x /= d;
  return mat3::mul(inv, f.h);
}

/// Real eigenvalues of `a`, sorted descending. The best isolated root of the
/// characteristic cubic is found by Cardano plus Newton; the remaining pair
/// comes from the 2x2 restriction of `a` to range(a - lambda1 I), which keeps a
/// double eigenvalue accurate to machine precision instead of sqrt(eps). A
/// complex pair whose imaginary part exceeds imag_tol * max(1, |re|) is a
/// SpectralError; smaller ones are taken as a double real root.
inline std::array<double, 3> real_eigenvalues(const Mat3& a, double imag_tol = 1e-8) {
  // lambda^3 + c2 lambda^2 + c1 lambda + c0
  const double c2 = -mat3::trace(a);
  const double c1 = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] +
                    a[1][1] * a[2][2] - a[1][2] * a[2][1];
  const double c0 = -mat3::det(a);
  const double shift = c2 / 3.0;
  const double p = c1 - c2 * c2 / 3.0;
  const double q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;

  double lambda1;
  if (p == 0.0 && q == 0.0) {
    lambda1 = -shift;
  } else if (disc <= 0.0) {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    std::array<double, 3> t;
    for (int k = 0; k < 3; ++k) t[k] = m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) - shift;
    int best = 0;
    double sep = -1.0;
    for (int k = 0; k < 3; ++k) {
      const double d = std::min(std::abs(t[k] - t[(k + 1) % 3]), std::abs(t[k] - t[(k + 2) % 3]));
      if (d > sep) {
        sep = d;
        best = k;
      }
    }
    lambda1 = t[best];
  } else {
    const double sd = std::sqrt(disc);
    lambda1 = std::cbrt(-q / 2.0 + sd) + std::cbrt(-q / 2.0 - sd) - shift;
  }
  auto poly = [&](double x) { return ((x + c2) * x + c1) * x + c0; };
  auto dpoly = [&](double x) { return (3.0 * x + 2.0 * c2) * x + c1; };
  for (int it = 0; it < 4; ++it) {
    const double d = dpoly(lambda1);
    if (d == 0.0) break;
    const double nx = lambda1 - poly(lambda1) / d;
    if (!(std::abs(poly(nx)) < std::abs(poly(lambda1)))) break;
    lambda1 = nx;
  }

  const double scale = std::max(1.0, mat3::max_abs(a));
  Mat3 M = a;
  for (int i = 0; i < 3; ++i) M[i][i] -= lambda1;
  if (mat3::max_abs(M) <= 1e-13 * scale) return {lambda1, lambda1, lambda1};

  // Two most independent columns of M span the complementary invariant plane.
  using V3 = std::array<double, 3>;
  auto col = [&](int j) { return V3{M[0][j], M[1][j], M[2][j]}; };
  auto cross_norm2 = [](const V3& x, const V3& y) {
    const double a0 = x[1] * y[2] - x[2] * y[1], a1 = x[2] * y[0] - x[0] * y[2], a2 = x[0] * y[1] - x[1] * y[0];
    return a0 * a0 + a1 * a1 + a2 * a2;
  };
  int bi = 0, bj = 1;
  double best = -1.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (const double c = cross_norm2(col(i), col(j)); c > best) {
        best = c;
        bi = i;
        bj = j;
      }
  const double mnorm = mat3::max_abs(M);
  std::array<double, 3> out;
  if (best <= 1e-24 * mnorm * mnorm * mnorm * mnorm) {
    // Rank one: a - lambda1 I has a two-dimensional kernel, so lambda1 is the
    // double root and the third one follows from the trace.
    out = {lambda1, lambda1, mat3::trace(a) - 2.0 * lambda1};
  } else {
    const V3 q0 = col(bi), q1 = col(bj);
    auto apply = [&](const V3& x) {
      V3 y{};
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) y[i] += a[i][k] * x[k];
      return y;
    };
    auto dot = [](const V3& x, const V3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; };
    const V3 s0 = apply(q0), s1 = apply(q1);
    // R = (Q^T Q)^{-1} Q^T A Q
    const double g00 = dot(q0, q0), g01 = dot(q0, q1), g11 = dot(q1, q1);
    const double det = g00 * g11 - g01 * g01;
    const double b00 = dot(q0, s0), b01 = dot(q0, s1), b10 = dot(q1, s0), b11 = dot(q1, s1);
    const double r00 = (g11 * b00 - g01 * b10) / det, r01 = (g11 * b01 - g01 * b11) / det;
    const double r10 = (g00 * b10 - g01 * b00) / det, r11 = (g00 * b11 - g01 * b01) / det;
    const double mean = 0.5 * (r00 + r11);
    const double half = 0.5 * (r00 - r11);
    const double d2 = half * half + r01 * r10;
    if (d2 < 0.0) {
      const double im = std::sqrt(-d2);
      if (im > imag_tol * std::max(1.0, std::abs(mean)))
        throw SpectralError("shape operator has a complex eigenvalue pair (imaginary part " + std::to_string(im) +
                            ")");
      out = {lambda1, mean, mean};
    } else {
      const double sd = std::sqrt(d2);
      out = {lambda1, mean + sd, mean - sd};
    }
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

struct CurvatureSet {
  double K = 0.0;
  double H = 0.0;
  std::array<double, 3> principal{};  // descending
};

/// K = eps det h / det g, H = eps tr S / 3, principal = eigenvalues of S.
inline CurvatureSet curvatures(const FundamentalForms& f, const Mat3& S, double imag_tol = 1e-8) {
  CurvatureSet c;
  c.K = f.epsilon * mat3::det(f.h) / mat3::det(f.g);
  c.H = f.epsilon * mat3::trace(S) / 3.0;
  c.principal = real_eigenvalues(S, imag_tol);
  return c;
}

/// Everything the oracle produces at one parameter point.
struct OracleSample {
  SurfaceJet jet;
  FundamentalForms forms;
  Mat3 S{};
  CurvatureSet curv;
  int orientation = 1;  // -1 when the raw triple-product normal was flipped
};

/// Runs the full pipeline. When `reference` is given the normal is aligned
/// with it first and the applied sign is recorded.
template <ParametricHypersurface Surf>
OracleSample analyze(const Surf& surface, double u, double v, double w, JetOptions opts = {},
                     std::optional<Vec4> reference = std::nullopt, double imag_tol = 1e-8) {
  OracleSample s;
  s.jet = jet(surface, u, v, w, opts);
  s.forms = fundamental_forms(s.jet);
  if (reference) s.orientation = align_orientation(s.forms, *reference);
  s.S = shape_operator(s.forms);
  s.curv = curvatures(s.forms, s.S, imag_tol);
  return s;
}

}  // namespace canal4d
