#pragma once

// The eight canal hypersurface types C_m, m = 1..8, built over non-null
// Bishop-framed spines:
//
//   C_m(u,v,w) = gamma(u) + s r r' B1 + r sqrt(s + r'^2) (f1 B2 + f2 B3 + f3 B4)
//
// with s = (-1)^{m + (8-m)!} and (f1, f2, f3) taken from the type's row of the
// shape-function table. Odd m envelope pseudo hyperspheres, even m pseudo
// hyperbolic hyperspheres.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "canal4d/diffgeo.hpp"
#include "canal4d/errors.hpp"
#include "canal4d/minkowski.hpp"
#include "canal4d/radius.hpp"
#include "canal4d/spine.hpp"

namespace canal4d {

enum class ShapeKind { HyperbolicB2, HyperbolicB3, HyperbolicB4, Circular };

/// Per-type constants. Rows for eps, mu and eta are the published table; the
/// parity constant s is precomputed from (-1)^{m + (8-m)!}:
/// (8-m)! is even for m <= 6 and equals 1 for m = 7, 8, so s = (-1)^m for
/// m <= 6 and s = (-1)^{m+1} for m = 7, 8.
struct TypeTables {
  int m = 1;
  int s = -1;
  ShapeKind shape = ShapeKind::HyperbolicB2;
  std::array<int, 3> eps{};
  std::array<int, 3> mu{};
  int eta = -1;

  static constexpr TypeTables for_type(int m) {
    constexpr std::array<TypeTables, 8> rows{{
        {1, -1, ShapeKind::HyperbolicB2, {1, -1, -1}, {-1, 1, 1}, -1},
        {2, 1, ShapeKind::HyperbolicB2, {1, -1, -1}, {1, -1, -1}, -1},
        {3, -1, ShapeKind::HyperbolicB3, {1, -1, 1}, {1, -1, 1}, -1},
        {4, 1, ShapeKind::HyperbolicB3, {1, -1, 1}, {-1, 1, -1}, -1},
        {5, -1, ShapeKind::HyperbolicB4, {1, 1, -1}, {1, 1, -1}, 1},
        {6, 1, ShapeKind::HyperbolicB4, {1, 1, -1}, {-1, -1, 1}, -1},
        {7, 1, ShapeKind::Circular, {1, 1, 1}, {1, 1, 1}, 1},
        {8, -1, ShapeKind::Circular, {1, 1, 1}, {-1, -1, -1}, -1},
    }};
    if (m < 1 || m > 8) throw DomainError("canal type m must be in 1..8");
    return rows[static_cast<std::size_t>(m - 1)];
  }

  constexpr FrameKind spine_kind() const {
    switch (shape) {
      case ShapeKind::HyperbolicB2: return FrameKind::SpacelikeB2Timelike;
      case ShapeKind::HyperbolicB3: return FrameKind::SpacelikeB3Timelike;
      case ShapeKind::HyperbolicB4: return FrameKind::SpacelikeB4Timelike;
      case ShapeKind::Circular: return FrameKind::TimelikeCurve;
    }
    return FrameKind::TimelikeCurve;
  }

  /// (-1)^{m+1}: <C - gamma, C - gamma> = envelope_sign * r^2.
  constexpr int envelope_sign() const { return m % 2 == 1 ? 1 : -1; }
  constexpr bool pseudo_hypersphere() const { return m % 2 == 1; }
  /// (-1)^{(8-m)!}
  constexpr int factorial_sign() const { return m >= 7 ? -1 : 1; }
  constexpr int parity_sign() const { return m % 2 == 0 ? 1 : -1; }  // (-1)^m
};

/// f and its first and second partials in (v, w).
struct ShapeJet {
  std::array<double, 3> f{}, fv{}, fw{}, fvv{}, fvw{}, fww{};
};

inline ShapeJet shape_jet(const TypeTables& t, double v, double w) {
  ShapeJet j;
  if (t.shape == ShapeKind::Circular) {
    const double cv = std::cos(v), sv = std::sin(v), cw = std::cos(w), sw = std::sin(w);
    j.f = {cv * cw, sv * cw, sw};
    j.fv = {-sv * cw, cv * cw, 0.0};
    j.fw = {-cv * sw, -sv * sw, cw};
    j.fvv = {-cv * cw, -sv * cw, 0.0};
    j.fvw = {sv * sw, -cv * sw, 0.0};
    j.fww = {-cv * cw, -sv * cw, -sw};
    return j;
  }
  const double cv = std::cosh(v), sv = std::sinh(v), cw = std::cosh(w), sw = std::sinh(w);
  // P = cosh v cosh w, Q = sinh w, R = sinh v cosh w; rows permute (P, Q, R).
  const std::array<double, 6> P{cv * cw, sv * cw, cv * sw, cv * cw, sv * sw, cv * cw};
  const std::array<double, 6> Q{sw, 0.0, cw, 0.0, 0.0, sw};
  const std::array<double, 6> R{sv * cw, cv * cw, sv * sw, sv * cw, cv * sw, sv * cw};
  std::array<const std::array<double, 6>*, 3> order{};
  switch (t.shape) {
    case ShapeKind::HyperbolicB2: order = {&P, &Q, &R}; break;
    case ShapeKind::HyperbolicB3: order = {&R, &P, &Q}; break;
    case ShapeKind::HyperbolicB4: order = {&Q, &R, &P}; break;
    case ShapeKind::Circular: break;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& b = *order[i];
    j.f[i] = b[0];
    j.fv[i] = b[1];
    j.fw[i] = b[2];
    j.fvv[i] = b[3];
    j.fvw[i] = b[4];
    j.fww[i] = b[5];
  }
  return j;
}

inline std::array<double, 3> shape_functions(const TypeTables& t, double v, double w) {
  return shape_jet(t, v, w).f;
}

/// Shape functions alone, in any floating type.
template <class T>
std::array<T, 3> shape_values(const TypeTables& t, T v, T w) {
  if (t.shape == ShapeKind::Circular) return {std::cos(v) * std::cos(w), std::sin(v) * std::cos(w), std::sin(w)};
  const T P = std::cosh(v) * std::cosh(w), Q = std::sinh(w), R = std::sinh(v) * std::cosh(w);
  switch (t.shape) {
    case ShapeKind::HyperbolicB2: return {P, Q, R};
    case ShapeKind::HyperbolicB3: return {R, P, Q};
    case ShapeKind::HyperbolicB4: return {Q, R, P};
    case ShapeKind::Circular: break;
  }
  return {};
}

struct SurfaceIntervals {
  Interval u;
  Interval v;
  Interval w;

  /// Hyperbolic types: [-2, 2]^2. Circular types: v in [0, 2 pi), w kept 0.2
  /// away from the cos w = 0 degeneracy.
  static SurfaceIntervals defaults(const TypeTables& t, Interval u) {
    if (t.shape == ShapeKind::Circular)
      return {u, {0.0, 2.0 * std::numbers::pi}, {-std::numbers::pi / 2 + 0.2, std::numbers::pi / 2 - 0.2}};
    return {u, {-2.0, 2.0}, {-2.0, 2.0}};
  }
};

class CanalSurface {
 public:
  static constexpr double kValidityMargin = 1e-12;

  /// Validates the spine/type pairing and s + r'^2 > 0, r > 0 on the u interval
  /// (sampled at 2001 points). The u interval must be bounded.
  CanalSurface(TypeTables tables, SpineCurve spine, RadiusProfile radius, Interval u_range,
               std::optional<SurfaceIntervals> vw = std::nullopt)
      : tables_(tables), spine_(std::move(spine)), radius_(std::move(radius)) {
    if (spine_.kind() != tables_.spine_kind())
      throw DomainError("canal type " + std::to_string(tables_.m) + " requires a " +
                        to_string(tables_.spine_kind()) + " spine, got " + to_string(spine_.kind()));
    if (!u_range.bounded() || u_range.lo > u_range.hi)
      throw DomainError("canal: u interval must be bounded and non-empty");
    const Interval& sd = spine_.domain();
    const Interval& rd = radius_.domain();
    if (u_range.lo < sd.lo || u_range.hi > sd.hi)
      throw DomainError("canal: u interval exceeds the spine interval");
    if (u_range.lo < rd.lo || u_range.hi > rd.hi)
      throw DomainError("canal: u interval exceeds the radius interval");
    intervals_ = vw ? *vw : SurfaceIntervals::defaults(tables_, u_range);
    intervals_.u = u_range;
    constexpr int samples = 2000;
    for (int i = 0; i <= samples; ++i) {
      const double u = u_range.lo + (u_range.hi - u_range.lo) * i / samples;
      check_validity(u);
    }
  }

  const TypeTables& tables() const { return tables_; }
  const SpineCurve& spine() const { return spine_; }
  const RadiusProfile& radius() const { return radius_; }
  const SurfaceIntervals& intervals() const { return intervals_; }

  /// s + r'^2 at u.
  double validity_margin(double u) const {
    const RadiusJet r = radius_.at(u);
    return tables_.s + r.r1 * r.r1;
  }

  bool valid_at(double u) const {
    try {
      check_validity(u);
      return true;
    } catch (const DomainError&) {
      return false;
    }
  }

  void check_validity(double u) const {
    if (!intervals_.u.contains(u))
      throw DomainError("canal: u = " + std::to_string(u) + " outside the surface u interval");
    const RadiusJet r = radius_.at(u);
    if (!(r.r > 0.0)) throw DomainError("canal: radius must be positive (u = " + std::to_string(u) + ")");
    if (!(tables_.s + r.r1 * r.r1 > kValidityMargin))
      throw DomainError("canal: validity s + r'^2 > 0 violated at u = " + std::to_string(u));
  }

  /// evaluate() carried out in long double.
  Vec4x evaluate_ext(long double u, long double v, long double w) const {
    check_validity(static_cast<double>(u));
    const RadiusJetX r = radius_.at_ext(u);
    const SpineStateX st = spine_.frame_at_ext(u);
    const auto f = shape_values<long double>(tables_, v, w);
    const long double q = std::sqrt(tables_.s + r.r1 * r.r1);
    const long double a = tables_.s * r.r * r.r1, b = r.r * q;
    Vec4x x;
    for (std::size_t i = 0; i < 4; ++i)
      x[i] = st.point[i] + a * st.b[0][i] + b * (f[0] * st.b[1][i] + f[1] * st.b[2][i] + f[2] * st.b[3][i]);
    return x;
  }

  Point4 evaluate(double u, double v, double w) const {
    check_validity(u);
    const RadiusJet r = radius_.at(u);
    const SpineState st = spine_.frame_at(u);
    const auto f = shape_functions(tables_, v, w);
    const double q = std::sqrt(tables_.s + r.r1 * r.r1);
    return st.point + (tables_.s * r.r * r.r1) * st.frame.b[0] +
           (r.r * q) * (f[0] * st.frame.b[1] + f[1] * st.frame.b[2] + f[2] * st.frame.b[3]);
  }

  /// Gauss map eta((-1)^{(8-m)!} r' B1 + (-1)^m sqrt(s + r'^2) sum f_i B_{i+1}).
  Vec4 gauss_map_closed(double u, double v, double w) const {
    check_validity(u);
    const RadiusJet r = radius_.at(u);
    const SpineState st = spine_.frame_at(u);
    const auto f = shape_functions(tables_, v, w);
    const double q = std::sqrt(tables_.s + r.r1 * r.r1);
    return tables_.eta * ((tables_.factorial_sign() * r.r1) * st.frame.b[0] +
                          (tables_.parity_sign() * q) *
                              (f[0] * st.frame.b[1] + f[1] * st.frame.b[2] + f[2] * st.frame.b[3]));
  }

  /// <C - gamma, C - gamma> - (-1)^{m+1} r^2
  double membership_residual(double u, double v, double w) const {
    const Vec4 d = evaluate(u, v, w) - spine_.frame_at(u).point;
    const double r = radius_.at(u).r;
    return inner(d, d) - tables_.envelope_sign() * r * r;
  }

  /// <C - gamma, dC/du> with a central-difference tangent.
  double tangent_radial_orthogonality(double u, double v, double w, double step = 1e-5) const {
    const Vec4 d = evaluate(u, v, w) - spine_.frame_at(u).point;
    const Vec4 cu = (evaluate(u + step, v, w) - evaluate(u - step, v, w)) / (2 * step);
    return inner(d, cu);
  }

  /// Exact partials from the frame jet of the spine and the radius derivatives.
  SurfaceJet analytic_jet(double u, double v, double w) const {
    check_validity(u);
    const RadiusJet r = radius_.at(u);
    const SpineJet sj = spine_.jet(u);
    const ShapeJet f = shape_jet(tables_, v, w);
    const int s = tables_.s;

    const double a = s * r.r * r.r1;
    const double a1 = s * (r.r1 * r.r1 + r.r * r.r2);
    const double a2 = s * (3.0 * r.r1 * r.r2 + r.r * r.r3);
    const double q = std::sqrt(s + r.r1 * r.r1);
    const double q1 = r.r1 * r.r2 / q;
    const double q2 = (r.r2 * r.r2 + r.r1 * r.r3) / q - r.r1 * r.r1 * r.r2 * r.r2 / (q * q * q);
    const double rho = r.r * q;
    const double rho1 = r.r1 * q + r.r * q1;
    const double rho2 = r.r2 * q + 2.0 * r.r1 * q1 + r.r * q2;

    const Tetrad& B = sj.frame.b;
    auto comb = [](const std::array<double, 3>& c, const Tetrad& x) {
      return c[0] * x[1] + c[1] * x[2] + c[2] * x[3];
    };
    const Vec4 F = comb(f.f, B), Fv = comb(f.fv, B), Fw = comb(f.fw, B);
    const Vec4 Fu = comb(f.f, sj.d1), Fuu = comb(f.f, sj.d2);
    const Vec4 Fuv = comb(f.fv, sj.d1), Fuw = comb(f.fw, sj.d1);

    SurfaceJet J;
    J.point = sj.point + a * B[0] + rho * F;
    J.d1[0] = B[0] + a1 * B[0] + a * sj.d1[0] + rho1 * F + rho * Fu;
    J.d1[1] = rho * Fv;
    J.d1[2] = rho * Fw;
    J.d2[0][0] = sj.d1[0] + a2 * B[0] + 2.0 * a1 * sj.d1[0] + a * sj.d2[0] + rho2 * F + 2.0 * rho1 * Fu +
                 rho * Fuu;
    J.d2[0][1] = J.d2[1][0] = rho1 * Fv + rho * Fuv;
    J.d2[0][2] = J.d2[2][0] = rho1 * Fw + rho * Fuw;
    J.d2[1][1] = rho * comb(f.fvv, B);
    J.d2[1][2] = J.d2[2][1] = rho * comb(f.fvw, B);
    J.d2[2][2] = rho * comb(f.fww, B);
    return J;
  }

 private:
  TypeTables tables_;
  SpineCurve spine_;
  RadiusProfile radius_;
  SurfaceIntervals intervals_;
};

/// The spine kind's standard frame and a line through gamma0 in direction B1.
inline SpineCurve straight_spine(FrameKind kind, const Point4& gamma0 = {}) {
  return SpineCurve::line(kind, gamma0, standard_frame(kind));
}

/// Direct transcription of the n in {1, 2} parametrization
///   C_n = gamma + (-1)^n r r' B1 + r sqrt((-1)^n + r'^2)(cosh v cosh w B2 + sinh w B3 + sinh v cosh w B4)
/// kept separate from evaluate() so the two can be diffed.
inline Point4 evaluate_c12(const CanalSurface& c, double u, double v, double w) {
  const int n = c.tables().m;
  if (n != 1 && n != 2) throw DomainError("evaluate_c12 applies to types 1 and 2 only");
  const double sn = n == 1 ? -1.0 : 1.0;
  const RadiusJet r = c.radius().at(u);
  const SpineState st = c.spine().frame_at(u);
  const auto& B = st.frame.b;
  return st.point + sn * r.r * r.r1 * B[0] +
         r.r * std::sqrt(sn + r.r1 * r.r1) *
             (std::cosh(v) * std::cosh(w) * B[1] + std::sinh(w) * B[2] + std::sinh(v) * std::cosh(w) * B[3]);
}

/// N_n = -(r' B1 + (-1)^n sqrt((-1)^n + r'^2)(cosh v cosh w B2 + sinh w B3 + sinh v cosh w B4))
inline Vec4 gauss_map_c12(const CanalSurface& c, double u, double v, double w) {
  const int n = c.tables().m;
  if (n != 1 && n != 2) throw DomainError("gauss_map_c12 applies to types 1 and 2 only");
  const double sn = n == 1 ? -1.0 : 1.0;
  const RadiusJet r = c.radius().at(u);
  const auto& B = c.spine().frame_at(u).frame.b;
  return -(r.r1 * B[0] + sn * std::sqrt(sn + r.r1 * r.r1) *
                             (std::cosh(v) * std::cosh(w) * B[1] + std::sinh(w) * B[2] +
                              std::sinh(v) * std::cosh(w) * B[3]));
}

}  // namespace canal4d
