#pragma once

// Radius families for which a canal hypersurface over a straight spine is flat
// (K = 0) or minimal (H = 0):
//   Linear             r = c1 u + c2                                 (r'' = 0)
//   FlatRoot           r = +-sqrt(s (e^{2 c1} - (u + c2)^2))
//   MinimalRoot        r = +-sqrt(-s (-e^{2 c1} + (u + c2)^2))       (same function)
//   MinimalQuadrature  2s + 2r'^2 + 3 r r'' = 0, first integral
//                      int_{r0}^{r} dr / sqrt((c3/r)^{4/3} - s) = +-u + c4

#include <algorithm>
#include <array>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "canal4d/canal.hpp"
#include "canal4d/closedform.hpp"
#include "canal4d/errors.hpp"
#include "canal4d/grid.hpp"
#include "canal4d/radius.hpp"
#include "canal4d/spine.hpp"

namespace canal4d {

enum class FamilyKind { Linear, FlatRoot, MinimalRoot, MinimalQuadrature };

inline const char* to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::Linear: return "linear";
    case FamilyKind::FlatRoot: return "flat_root";
    case FamilyKind::MinimalRoot: return "minimal_root";
    case FamilyKind::MinimalQuadrature: return "minimal_quadrature";
  }
  return "?";
}

/// Which factor of the flat / minimal conditions the radius satisfies.
enum class OdeBranch {
  Affine,         // r'' = 0
  RootBranch,     // s + r'^2 + r r'' = 0
  MinimalBranch,  // 2s + 2r'^2 + 3 r r'' = 0
  None
};

inline const char* to_string(OdeBranch b) {
  switch (b) {
    case OdeBranch::Affine: return "affine";
    case OdeBranch::RootBranch: return "root";
    case OdeBranch::MinimalBranch: return "minimal";
    case OdeBranch::None: return "none";
  }
  return "?";
}

struct RadiusFamily {
  FamilyKind kind = FamilyKind::Linear;
  double c1 = 0.0, c2 = 0.0;  // Linear and root families
  double c3 = 1.0, c4 = 0.0;  // MinimalQuadrature
  double r0 = 1.0;            // MinimalQuadrature: r at the base point u0 = -sign c4
  int sign = 1;

  static RadiusFamily linear(double c1, double c2) { return {FamilyKind::Linear, c1, c2}; }
  static RadiusFamily flat_root(double c1, double c2, int sign = 1) {
    return {FamilyKind::FlatRoot, c1, c2, 1.0, 0.0, 1.0, sign};
  }
  static RadiusFamily minimal_root(double c1, double c2, int sign = 1) {
    return {FamilyKind::MinimalRoot, c1, c2, 1.0, 0.0, 1.0, sign};
  }
  static RadiusFamily minimal_quadrature(double c3, double c4, int sign, double r0) {
    return {FamilyKind::MinimalQuadrature, 0.0, 0.0, c3, c4, r0, sign};
  }

  double base_point() const { return -sign * c4; }
};

inline constexpr double kFamilyMargin = 1e-6;

namespace detail {

inline void check_sign(int sign) {
  if (sign != 1 && sign != -1) throw DomainError("radius family: sign must be +1 or -1");
}

inline RadiusProfile root_profile(double c1, double c2, int s, int sign, Interval domain, const char* tag) {
  check_sign(sign);
  if (sign < 0) throw DomainError(std::string(tag) + ": the negative root is not a positive radius anywhere");
  const double a2 = std::exp(2.0 * c1);
  auto fn = [=](double u) {
    const double x = u + c2;
    const double r = std::sqrt(s * (a2 - x * x));
    RadiusJet j;
    j.r = r;
    j.r1 = -s * x / r;
    j.r2 = -a2 / (r * r * r);
    j.r3 = 3.0 * a2 * j.r1 / (r * r * r * r);
    return j;
  };
  auto ext = [=](long double u) {
    const long double x = u + c2;
    const long double r = std::sqrt(s * (static_cast<long double>(a2) - x * x));
    return RadiusJetX{r, -s * x / r};
  };
  return RadiusProfile(fn, domain, tag, ext);
}

struct OdeKnot {
  double u, r, p, a;  // r, r', r''
};

}  // namespace detail

/// Integrates 2s + 2r'^2 + 3 r r'' = 0 by RK4 and interpolates with quintic
/// Hermite polynomials on (r, r', r'').
class MinimalQuadratureSolution {
 public:
  static constexpr double kStep = 1e-4;

  MinimalQuadratureSolution(RadiusFamily fam, int s, Interval domain, double step = kStep)
      : fam_(fam), s_(s), domain_(domain), step_(step) {
    detail::check_sign(fam.sign);
    if (!(fam.c3 > 0.0)) throw DomainError("minimal_quadrature: c3 must be positive");
    if (!(fam.r0 > 0.0)) throw DomainError("minimal_quadrature: r0 must be positive");
    const double rad = radicand(fam.r0);
    if (!(rad > 0.0)) throw DomainError("minimal_quadrature: quadrature radicand non-positive at r0");
    const double u0 = fam.base_point();
    if (!domain.bounded() || !domain.contains(u0))
      throw DomainError("minimal_quadrature: interval must be bounded and contain u0 = " + std::to_string(u0));
    const detail::OdeKnot k0{u0, fam.r0, fam.sign * std::sqrt(rad), accel(fam.r0, fam.sign * std::sqrt(rad))};
    auto back = sweep(k0, domain.lo, true);
    std::reverse(back.begin(), back.end());
    knots_ = std::make_shared<std::vector<detail::OdeKnot>>(std::move(back));
    knots_->push_back(k0);
    auto fwd = sweep(k0, domain.hi, true);
    knots_->insert(knots_->end(), fwd.begin(), fwd.end());
  }

  /// Largest interval around u0 (within +-cap) on which the branch stays
  /// monotone with r above 1e-3 r0, pulled in by kFamilyMargin at each end.
  static Interval natural_interval(const RadiusFamily& fam, int s, double cap = 10.0, double step = kStep) {
    MinimalQuadratureSolution probe(fam, s, {fam.base_point(), fam.base_point()}, step);
    const detail::OdeKnot k0 = probe.knots_->front();
    const auto back = probe.sweep(k0, k0.u - cap, false);
    const auto fwd = probe.sweep(k0, k0.u + cap, false);
    const double lo = back.empty() ? k0.u : back.back().u;
    const double hi = fwd.empty() ? k0.u : fwd.back().u;
    Interval out{lo, hi};
    if (lo > k0.u - cap) out.lo += kFamilyMargin;
    if (hi < k0.u + cap) out.hi -= kFamilyMargin;
    return out;
  }

  RadiusProfile profile() const {
    auto knots = knots_;
    return RadiusProfile([knots, s = s_](double u) { return interpolate(*knots, u, s); }, domain_,
                         "minimal_quadrature", [knots](long double u) { return interpolate_ext(*knots, u); });
  }

  /// max |r (r'^2 + s)^{3/4} - c3| / c3 over the knots.
  double first_integral_drift() const {
    double worst = 0.0;
    for (const auto& k : *knots_)
      worst = std::max(worst, std::abs(k.r * std::pow(k.p * k.p + s_, 0.75) - fam_.c3) / fam_.c3);
    return worst;
  }

  /// u recovered from the quadrature relation at r(u).
  double u_from_quadrature(double r) const {
    auto integrand = [this](double rho) {
      const double rad = radicand(rho);
      if (!(rad > 0.0)) throw DomainError("minimal_quadrature: quadrature radicand non-positive");
      return 1.0 / std::sqrt(rad);
    };
    if (r == fam_.r0) return fam_.sign * (0.0 - fam_.c4);
    boost::math::quadrature::tanh_sinh<double> ts;
    const double F = r > fam_.r0 ? ts.integrate(integrand, fam_.r0, r, 1e-14) : -ts.integrate(integrand, r, fam_.r0, 1e-14);
    return fam_.sign * (F - fam_.c4);
  }

  /// max |u_quadrature(r(u)) - u| over `samples` evenly spaced knots.
  double quadrature_mismatch(int samples = 64) const {
    const auto& ks = *knots_;
    double worst = 0.0;
    const std::size_t n = ks.size();
    for (int i = 0; i < samples; ++i) {
      const std::size_t idx = samples == 1 ? 0 : static_cast<std::size_t>(i) * (n - 1) / (samples - 1);
      worst = std::max(worst, std::abs(u_from_quadrature(ks[idx].r) - ks[idx].u));
    }
    return worst;
  }

  const Interval& domain() const { return domain_; }
  std::size_t knot_count() const { return knots_->size(); }

 private:
  double radicand(double r) const { return std::pow(fam_.c3 / r, 4.0 / 3.0) - s_; }
  double accel(double r, double p) const { return -2.0 * (s_ + p * p) / (3.0 * r); }

  // With `strict` a stop inside the requested span is an error; otherwise the
  // knots up to the stop are returned.
  std::vector<detail::OdeKnot> sweep(detail::OdeKnot k, double end, bool strict) const {
    std::vector<detail::OdeKnot> out;
    const double dir = end >= k.u ? 1.0 : -1.0;
    const double rmin = 1e-3 * fam_.r0;
    while (dir * (end - k.u) > 0.0) {
      const double local = step_ * std::min(1.0, k.r / (fam_.r0 * std::max(1.0, std::abs(k.p))));
      const double next = dir * (end - k.u) <= local * (1 + 1e-9) ? end : k.u + dir * local;
      const double h = next - k.u;
      auto f = [this](double r, double p) { return std::array<double, 2>{p, accel(r, p)}; };
      const auto a1 = f(k.r, k.p);
      const auto a2 = f(k.r + h / 2 * a1[0], k.p + h / 2 * a1[1]);
      const auto a3 = f(k.r + h / 2 * a2[0], k.p + h / 2 * a2[1]);
      const auto a4 = f(k.r + h * a3[0], k.p + h * a3[1]);
      const double r = k.r + h / 6 * (a1[0] + 2 * a2[0] + 2 * a3[0] + a4[0]);
      const double p = k.p + h / 6 * (a1[1] + 2 * a2[1] + 2 * a3[1] + a4[1]);
      const bool stop = !std::isfinite(r) || !std::isfinite(p) || r < rmin || fam_.sign * p <= 0.0;
      if (stop) {
        if (strict)
          throw DomainError("minimal_quadrature: ODE leaves the validity domain near u = " + std::to_string(next));
        break;
      }
      k = {next, r, p, accel(r, p)};
      out.push_back(k);
    }
    return out;
  }

  static RadiusJet interpolate(const std::vector<detail::OdeKnot>& ks, double u, int s) {
    if (ks.size() == 1) {
      const auto& k = ks.front();
      return {k.r, k.p, k.a, -4.0 * k.p * k.a / (3.0 * k.r) + 2.0 * (s + k.p * k.p) * k.p / (3.0 * k.r * k.r)};
    }
    auto it = std::upper_bound(ks.begin(), ks.end(), u, [](double x, const detail::OdeKnot& k) { return x < k.u; });
    std::size_t i1 = static_cast<std::size_t>(it - ks.begin());
    i1 = std::clamp<std::size_t>(i1, 1, ks.size() - 1);
    const auto& A = ks[i1 - 1];
    const auto& B = ks[i1];
    const double h = B.u - A.u;
    const double t = (u - A.u) / h;
    const double dp = B.r - A.r, d0 = A.p * h, d1 = B.p * h, s0 = A.a * h * h, s1 = B.a * h * h;
    const std::array<double, 6> c{A.r,
                                  d0,
                                  s0 / 2,
                                  10 * dp - 6 * d0 - 4 * d1 - (3 * s0 - s1) / 2,
                                  -15 * dp + 8 * d0 + 7 * d1 + (3 * s0 - 2 * s1) / 2,
                                  6 * dp - 3 * d0 - 3 * d1 - (s0 - s1) / 2};
    double v = 0, v1 = 0;
    for (int i = 5; i >= 0; --i) {
      v1 = v1 * t + v;
      v = v * t + c[static_cast<std::size_t>(i)];
    }
    // r'' and r''' come from the ODE at the interpolated (r, r').
    const double r = v, p = v1 / h;
    const double a = -2.0 * (s + p * p) / (3.0 * r);
    return {r, p, a, -4.0 * p * a / (3.0 * r) + 2.0 * (s + p * p) * p / (3.0 * r * r)};
  }

  static RadiusJetX interpolate_ext(const std::vector<detail::OdeKnot>& ks, long double u) {
    if (ks.size() == 1) return {ks.front().r, ks.front().p};
    auto it = std::upper_bound(ks.begin(), ks.end(), static_cast<double>(u),
                               [](double x, const detail::OdeKnot& k) { return x < k.u; });
    std::size_t i1 = static_cast<std::size_t>(it - ks.begin());
    i1 = std::clamp<std::size_t>(i1, 1, ks.size() - 1);
    const auto& A = ks[i1 - 1];
    const auto& B = ks[i1];
    const long double h = static_cast<long double>(B.u) - A.u;
    const long double t = (u - A.u) / h;
    const long double dp = static_cast<long double>(B.r) - A.r, d0 = A.p * h, d1 = B.p * h, s0 = A.a * h * h,
                      s1 = B.a * h * h;
    const std::array<long double, 6> c{A.r,
                                       d0,
                                       s0 / 2,
                                       10 * dp - 6 * d0 - 4 * d1 - (3 * s0 - s1) / 2,
                                       -15 * dp + 8 * d0 + 7 * d1 + (3 * s0 - 2 * s1) / 2,
                                       6 * dp - 3 * d0 - 3 * d1 - (s0 - s1) / 2};
    long double v = 0, v1 = 0;
    for (int i = 5; i >= 0; --i) {
      v1 = v1 * t + v;
      v = v * t + c[static_cast<std::size_t>(i)];
    }
    return {v, v1 / h};
  }

  RadiusFamily fam_;
  int s_;
  Interval domain_;
  double step_;
  std::shared_ptr<std::vector<detail::OdeKnot>> knots_;
};

/// Maximal interval of positive, valid radius for type m (one component for
/// the root families with s = -1: u + c2 > e^{c1}). Finite ends are pulled in by
/// kFamilyMargin.
inline Interval natural_interval(const RadiusFamily& fam, int m) {
  const int s = TypeTables::for_type(m).s;
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (fam.kind) {
    case FamilyKind::Linear: {
      if (!(s + fam.c1 * fam.c1 > CanalSurface::kValidityMargin))
        throw DomainError("linear family: s + c1^2 <= 0, empty valid interval");
      if (fam.c1 == 0.0) {
        if (!(fam.c2 > 0.0)) throw DomainError("linear family: r = c2 <= 0");
        return {-inf, inf};
      }
      const double root = -fam.c2 / fam.c1;
      return fam.c1 > 0 ? Interval{root + kFamilyMargin, inf} : Interval{-inf, root - kFamilyMargin};
    }
    case FamilyKind::FlatRoot:
    case FamilyKind::MinimalRoot: {
      detail::check_sign(fam.sign);
      if (fam.sign < 0) throw DomainError("root family: the negative root is not a positive radius");
      const double a = std::exp(fam.c1);
      if (s > 0) return {-a - fam.c2 + kFamilyMargin, a - fam.c2 - kFamilyMargin};
      return {a - fam.c2 + kFamilyMargin, inf};
    }
    case FamilyKind::MinimalQuadrature: return MinimalQuadratureSolution::natural_interval(fam, s);
  }
  return {};
}

struct BranchResiduals {
  double affine = 0, root = 0, minimal = 0;  // max scaled residuals
};

inline BranchResiduals branch_residuals(const RadiusProfile& r, int s, Interval span, int samples = 257) {
  if (!span.bounded()) throw DomainError("branch classification needs a bounded interval");
  BranchResiduals b;
  for (int i = 0; i < samples; ++i) {
    const double u = span.lo + span.width() * i / std::max(1, samples - 1);
    const RadiusJet j = r.at(u);
    const double rr2 = j.r * j.r2;
    const double scale = 1.0 + j.r1 * j.r1 + std::abs(rr2);
    b.affine = std::max(b.affine, std::abs(j.r2) / (1.0 + std::abs(j.r2)));
    b.root = std::max(b.root, std::abs(s + j.r1 * j.r1 + rr2) / scale);
    b.minimal = std::max(b.minimal, std::abs(2.0 * s + 2.0 * j.r1 * j.r1 + 3.0 * rr2) / scale);
  }
  return b;
}

inline OdeBranch classify_branch(const BranchResiduals& b, double tol = 1e-10) {
  if (b.affine < tol) return OdeBranch::Affine;
  if (b.root < tol) return OdeBranch::RootBranch;
  if (b.minimal < tol) return OdeBranch::MinimalBranch;
  return OdeBranch::None;
}

struct FamilyProfile {
  RadiusFamily family;
  int m = 1;
  RadiusProfile profile;
  Interval interval;
  OdeBranch branch = OdeBranch::None;
  BranchResiduals residuals;
  std::optional<MinimalQuadratureSolution> ode;  // MinimalQuadrature only
};

namespace detail {

inline Interval resolve_interval(const RadiusFamily& fam, int m, std::optional<Interval> requested) {
  const Interval nat = natural_interval(fam, m);
  Interval span = requested.value_or(nat);
  if (!span.bounded()) throw DomainError("radius family: a bounded interval is required");
  if (span.lo < nat.lo || span.hi > nat.hi || span.lo > span.hi)
    throw DomainError("radius family " + std::string(to_string(fam.kind)) + ": interval [" + std::to_string(span.lo) +
                      ", " + std::to_string(span.hi) + "] is outside the valid interval");
  return span;
}

inline FamilyProfile build_family(const RadiusFamily& fam, int m, std::optional<Interval> requested) {
  const int s = TypeTables::for_type(m).s;
  if (fam.kind == FamilyKind::MinimalQuadrature) {
    const Interval span = requested ? *requested : natural_interval(fam, m);
    MinimalQuadratureSolution sol(fam, s, span);
    return {fam, m, sol.profile(), span, OdeBranch::None, {}, sol};
  }
  const Interval span = resolve_interval(fam, m, requested);
  if (fam.kind == FamilyKind::Linear) {
    const double c1 = fam.c1, c2 = fam.c2;
    RadiusProfile p([c1, c2](double u) { return RadiusJet{c1 * u + c2, c1, 0.0, 0.0}; }, span, "linear");
    return {fam, m, p, span, OdeBranch::None, {}, std::nullopt};
  }
  return {fam, m,
          root_profile(fam.c1, fam.c2, s, fam.sign, span,
                       fam.kind == FamilyKind::FlatRoot ? "flat_root" : "minimal_root"),
          span,
          OdeBranch::None,
          {},
          std::nullopt};
}

}  // namespace detail

/// Linear or FlatRoot radius; asserts r'' (s + r'^2 + r r'') = 0 on the interval.
inline FamilyProfile flat_radius(const RadiusFamily& fam, int m, std::optional<Interval> interval = std::nullopt) {
  if (fam.kind != FamilyKind::Linear && fam.kind != FamilyKind::FlatRoot)
    throw DomainError("flat_radius: family must be linear or flat_root");
  FamilyProfile out = detail::build_family(fam, m, interval);
  out.residuals = branch_residuals(out.profile, TypeTables::for_type(m).s, out.interval);
  out.branch = classify_branch(out.residuals);
  if (out.branch != OdeBranch::Affine && out.branch != OdeBranch::RootBranch)
    throw DomainError("flat_radius: profile satisfies neither r'' = 0 nor s + r'^2 + r r'' = 0");
  return out;
}

/// MinimalRoot or MinimalQuadrature radius, classified by the ODE it satisfies.
inline FamilyProfile minimal_radius(const RadiusFamily& fam, int m,
                                    std::optional<Interval> interval = std::nullopt) {
  if (fam.kind != FamilyKind::MinimalRoot && fam.kind != FamilyKind::MinimalQuadrature)
    throw DomainError("minimal_radius: family must be minimal_root or minimal_quadrature");
  FamilyProfile out = detail::build_family(fam, m, interval);
  out.residuals = branch_residuals(out.profile, TypeTables::for_type(m).s, out.interval);
  out.branch = classify_branch(out.residuals);
  if (out.branch == OdeBranch::None) throw DomainError("minimal_radius: profile satisfies no family ODE");
  return out;
}

enum class FamilyTarget { Gaussian, Mean };

struct FamilyCheck {
  double max_abs = 0.0;  // +inf when any node is singular
  std::size_t nodes = 0;
  std::size_t singular = 0;
  std::array<double, 3> worst{};
};

/// Closed-form K or H over the grid on a straight spine of the kind type m
/// requires.
inline FamilyCheck verify_family(const RadiusProfile& profile, int m, const Grid& grid, FamilyTarget target) {
  const TypeTables t = TypeTables::for_type(m);
  CanalSurface surface(t, straight_spine(t.spine_kind()), profile,
                       {std::min(grid.u.min, grid.u.max), std::max(grid.u.min, grid.u.max)});
  FamilyCheck out;
  for (const auto& n : grid.nodes()) {
    ++out.nodes;
    try {
      const ClosedTerms x = closed_terms(surface, n[0], n[1], n[2]);
      const double val = std::abs(target == FamilyTarget::Gaussian ? gaussian_closed(x) : mean_closed(x));
      if (val > out.max_abs) {
        out.max_abs = val;
        out.worst = n;
      }
    } catch (const SingularPointError&) {
      if (out.singular++ == 0) out.worst = n;
      out.max_abs = std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

}  // namespace canal4d
