#pragma once

#include <cmath>
#include <random>

#include "canal4d/canal.hpp"
#include "canal4d/closedform.hpp"

namespace canal4d::testing {

inline constexpr Curvatures3 kStdK{0.3, 0.2, 0.1};

/// 1.5 + 0.2u for s = +1, 0.2 + 1.5u for s = -1 (so r'^2 > 1).
inline RadiusProfile std_radius(const TypeTables& t) {
  return t.s > 0 ? RadiusProfile::polynomial({1.5, 0.2}) : RadiusProfile::polynomial({0.2, 1.5});
}

/// Radius with nonzero r'' and r''' for formulas that would otherwise not
/// see those terms.
inline RadiusProfile curved_radius(const TypeTables& t) {
  return t.s > 0 ? RadiusProfile::polynomial({1.5, 0.2, 0.1, 0.05}) : RadiusProfile::polynomial({0.2, 1.5, 0.1, 0.05});
}

/// The u interval leaves room for difference stencils around samples in [0.1, 1].
inline CanalSurface std_surface(int m, Curvatures3 k = kStdK, bool curved = false, Interval u = {0.05, 1.05}) {
  const TypeTables t = TypeTables::for_type(m);
  const FrameKind kind = t.spine_kind();
  return CanalSurface(t, SpineCurve::constant_k(kind, k, {}, standard_frame(kind)),
                      curved ? curved_radius(t) : std_radius(t), u);
}

inline CanalSurface unit_tube(int m) {
  const TypeTables t = TypeTables::for_type(m);
  return CanalSurface(t, straight_spine(t.spine_kind()), RadiusProfile::constant(1.0), {-5.0, 5.0});
}

/// Sample (v, w) from the region where the closed forms are regular for the
/// standard surfaces.
struct PointSampler {
  std::mt19937_64 rng;
  explicit PointSampler(unsigned long long seed) : rng(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

  std::array<double, 3> point(const TypeTables& t, Interval u = {0.1, 1.0}) {
    const double uu = uniform(u.lo, u.hi);
    if (t.shape == ShapeKind::Circular)
      return {uu, uniform(0.0, 6.283185307179586), uniform(-1.3707963267948966, 1.3707963267948966)};
    return {uu, uniform(-0.5, 0.5), uniform(-0.5, 0.5)};
  }
};

inline double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace canal4d::testing
