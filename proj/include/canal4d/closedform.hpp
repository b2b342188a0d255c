#pragma once

// Closed-form curvature invariants of the canal types. With
//   P   = s + r'^2,  q = sqrt(P)
//   lin = sum mu_i k_i f_i,  E = sum eps_i k_i f_i,  dbl = E^2
//   D   = r (r'' + lin q) + P
// one has
//   K = [r''(P + r r'') + dbl r P + lin q (P + 2 r r'')] / (eta r^2 D^2)
//   H = [(P + r r'')(2P + 3 r r'') + 3 dbl r^2 P + lin r q (5P + 6 r r'')] / (3 eta r D^2)
//   c1 = c2 = (-1)^{m+1} eta / r,  c3 = (-1)^{m+1} r^2 K.

#include <array>
#include <cmath>
#include <string>

#include "canal4d/canal.hpp"
#include "canal4d/errors.hpp"

namespace canal4d {

struct ClosedTerms {
  double r = 0, r1 = 0, r2 = 0;
  double P = 0, q = 0;
  double lin = 0, E = 0, dbl = 0;
  double D = 0;
  int eta = 1;
};

inline ClosedTerms closed_terms(const CanalSurface& c, double u, double v, double w) {
  c.check_validity(u);
  const TypeTables& t = c.tables();
  const RadiusJet rj = c.radius().at(u);
  const Curvatures3 k = c.spine().k_at(u);
  const auto f = shape_functions(t, v, w);
  ClosedTerms x;
  x.r = rj.r;
  x.r1 = rj.r1;
  x.r2 = rj.r2;
  x.P = t.s + rj.r1 * rj.r1;
  x.q = std::sqrt(x.P);
  for (std::size_t i = 0; i < 3; ++i) {
    x.lin += t.mu[i] * k[i] * f[i];
    x.E += t.eps[i] * k[i] * f[i];
  }
  x.dbl = x.E * x.E;
  x.D = x.r * (x.r2 + x.lin * x.q) + x.P;
  x.eta = t.eta;
  const double scale = std::abs(x.P) + std::abs(x.r * x.r2) + std::abs(x.r * x.lin * x.q);
  if (x.D * x.D < 1e-14 * scale * scale)
    throw SingularPointError("closed forms: singular point (D = " + std::to_string(x.D) + ") at u = " +
                             std::to_string(u) + ", v = " + std::to_string(v) + ", w = " + std::to_string(w));
  return x;
}

struct InvariantSample {
  double u = 0, v = 0, w = 0;
  double K = 0, H = 0;
  double c1 = 0, c2 = 0, c3 = 0;
  double lin = 0;  // sum mu_i k_i f_i
  double dbl = 0;  // sum_ij eps_i eps_j k_i k_j f_i f_j
};

inline double gaussian_closed(const ClosedTerms& x) {
  const double rr2 = x.r * x.r2;
  return (x.r2 * (x.P + rr2) + x.dbl * x.r * x.P + x.lin * x.q * (x.P + 2.0 * rr2)) /
         (x.eta * x.r * x.r * x.D * x.D);
}

inline double mean_closed(const ClosedTerms& x) {
  const double rr2 = x.r * x.r2;
  return ((x.P + rr2) * (2.0 * x.P + 3.0 * rr2) + 3.0 * x.dbl * x.r * x.r * x.P +
          x.lin * x.r * x.q * (5.0 * x.P + 6.0 * rr2)) /
         (3.0 * x.eta * x.r * x.D * x.D);
}

inline double gaussian_closed(const CanalSurface& c, double u, double v, double w) {
  return gaussian_closed(closed_terms(c, u, v, w));
}

inline double mean_closed(const CanalSurface& c, double u, double v, double w) {
  return mean_closed(closed_terms(c, u, v, w));
}

inline InvariantSample invariants(const CanalSurface& c, double u, double v, double w) {
  const ClosedTerms x = closed_terms(c, u, v, w);
  const int sg = c.tables().envelope_sign();
  InvariantSample s{u, v, w};
  s.K = gaussian_closed(x);
  s.H = mean_closed(x);
  s.c1 = s.c2 = sg * x.eta / x.r;
  s.c3 = sg * x.r * x.r * s.K;
  s.lin = x.lin;
  s.dbl = x.dbl;
  return s;
}

inline std::array<double, 3> principal_closed(const CanalSurface& c, double u, double v, double w) {
  const InvariantSample s = invariants(c, u, v, w);
  return {s.c1, s.c2, s.c3};
}

/// 3H - r^2 K - 2 eta / r
inline double identity_residual(const CanalSurface& c, double u, double v, double w) {
  const ClosedTerms x = closed_terms(c, u, v, w);
  return 3.0 * mean_closed(x) - x.r * x.r * gaussian_closed(x) - 2.0 * x.eta / x.r;
}

// Expanded forms for types 1 and 2, written against
//   A = k1 cosh v cosh w - k2 sinh w - k3 sinh v cosh w,  n = m, sn = (-1)^n.
namespace c12 {

struct Terms {
  double sn, r, r1, r2, q, P, A, D;
  double k1, k2, k3, chv, shv, chw, shw;
};

inline Terms terms(const CanalSurface& c, double u, double v, double w) {
  const int n = c.tables().m;
  if (n != 1 && n != 2) throw DomainError("type 1/2 expansions apply to m = 1, 2 only");
  c.check_validity(u);
  Terms t{};
  t.sn = n == 1 ? -1.0 : 1.0;
  const RadiusJet rj = c.radius().at(u);
  t.r = rj.r;
  t.r1 = rj.r1;
  t.r2 = rj.r2;
  t.q = std::sqrt(t.sn + t.r1 * t.r1);
  t.P = 2.0 * t.r * t.r2 + t.r1 * t.r1 + t.sn;
  const Curvatures3 k = c.spine().k_at(u);
  t.k1 = k[0];
  t.k2 = k[1];
  t.k3 = k[2];
  t.chv = std::cosh(v);
  t.shv = std::sinh(v);
  t.chw = std::cosh(w);
  t.shw = std::sinh(w);
  t.A = t.k1 * t.chv * t.chw - t.k2 * t.shw - t.k3 * t.shv * t.chw;
  t.D = t.r * (t.sn * t.q * t.A + t.r2) + t.sn + t.r1 * t.r1;
  return t;
}

inline double gaussian(const CanalSurface& c, double u, double v, double w) {
  const Terms t = terms(c, u, v, w);
  const double Q2 = t.sn + t.r1 * t.r1;
  return -(Q2 * (t.r2 + t.sn * t.A * (t.sn * t.r * t.A + t.q)) + t.r * t.r2 * (2.0 * t.sn * t.q * t.A + t.r2)) /
         (t.r * t.r * t.D * t.D);
}

inline double mean(const CanalSurface& c, double u, double v, double w) {
  const Terms t = terms(c, u, v, w);
  const double Q2 = t.sn + t.r1 * t.r1;
  const double quad = (t.k1 * t.k1 * t.chv * t.chv + t.k3 * t.k3 * t.shv * t.shv) * t.chw * t.chw +
                      t.k2 * t.k2 * t.shw * t.shw;
  const double inner_sum =
      t.r * Q2 * (-t.sn * quad) +
      t.sn * (2.0 * t.r * Q2 * (t.k2 * t.shw + t.k3 * t.shv * t.chw) - t.sn * t.q * t.P) * t.k1 * t.chv * t.chw +
      (t.q * t.P - t.sn * 2.0 * t.r * Q2 * t.k2 * t.shw) * t.k3 * t.shv * t.chw + t.q * t.P * t.k2 * t.shw -
      t.sn * t.r2 * (t.r * t.r2 + t.r1 * t.r1 + t.sn);
  return (t.r * inner_sum - t.sn * 2.0 * t.D * t.D) / (t.sn * 3.0 * t.r * t.D * t.D);
}

/// (c1, c2, c3) with c1 = c2 = (-1)^n / r.
inline std::array<double, 3> principal(const CanalSurface& c, double u, double v, double w) {
  const Terms t = terms(c, u, v, w);
  const double Q2 = t.sn + t.r1 * t.r1;
  const double c3 =
      (-t.sn * (2.0 * t.r * Q2 * (t.k2 * t.shw + t.k3 * t.shv * t.chw) - t.sn * t.q * t.P) * t.k1 * t.chv * t.chw +
       t.sn * t.r * Q2 * t.k1 * t.k1 * t.chv * t.chv * t.chw * t.chw -
       (t.q * t.P - t.sn * 2.0 * t.r * Q2 * t.k2 * t.shw) * t.k3 * t.shv * t.chw +
       t.sn * t.r * Q2 * (t.k2 * t.k2 * t.shw * t.shw + t.k3 * t.k3 * t.shv * t.shv * t.chw * t.chw) -
       t.q * t.P * t.k2 * t.shw + t.sn * t.r2 * (t.r * t.r2 + t.r1 * t.r1 + t.sn)) /
      (t.D * t.D);
  return {t.sn / t.r, t.sn / t.r, c3};
}

/// H_u K_v - H_v K_u for constant curvatures.
inline double weingarten_uv(const CanalSurface& c, double u, double v, double w) {
  const Terms t = terms(c, u, v, w);
  const double Q2 = t.sn + t.r1 * t.r1;
  return t.sn * 2.0 * t.r1 * std::pow(Q2, 2.5) * (t.k3 * t.chv - t.k1 * t.shv) * t.chw /
         (3.0 * std::pow(t.r, 4) * t.D * t.D * t.D);
}

/// H_u K_w - H_w K_u for constant curvatures.
inline double weingarten_uw(const CanalSurface& c, double u, double v, double w) {
  const Terms t = terms(c, u, v, w);
  const double Q2 = t.sn + t.r1 * t.r1;
  return t.sn * 2.0 * t.r1 * std::pow(Q2, 2.5) * ((t.k3 * t.shv - t.k1 * t.chv) * t.shw + t.k2 * t.chw) /
         (3.0 * std::pow(t.r, 4) * t.D * t.D * t.D);
}

}  // namespace c12

enum class WeingartenStatus { Weingarten, NotWeingarten, Marginal };

inline const char* to_string(WeingartenStatus s) {
  switch (s) {
    case WeingartenStatus::Weingarten: return "weingarten";
    case WeingartenStatus::NotWeingarten: return "not_weingarten";
    case WeingartenStatus::Marginal: return "marginal";
  }
  return "?";
}

struct WeingartenReport {
  double R_uv = 0, R_uw = 0, R_vw = 0;
  std::array<double, 3> grad_H{}, grad_K{};
  double threshold = 0;  // 1e-8 (1 + |grad H| |grad K|)
  WeingartenStatus uv{}, uw{}, vw{};
};

/// Central differences of the closed-form H and K, combined pairwise. A pair is
/// Weingarten below the threshold, not Weingarten above 10x the threshold and
/// marginal in between.
inline WeingartenReport weingarten_residuals(const CanalSurface& c, double u, double v, double w,
                                             double step = 1e-5) {
  WeingartenReport rep;
  const std::array<double, 3> x{u, v, w};
  for (int i = 0; i < 3; ++i) {
    auto p = x, m = x;
    p[i] += step;
    m[i] -= step;
    ClosedTerms tp, tm;
    try {
      tp = closed_terms(c, p[0], p[1], p[2]);
      tm = closed_terms(c, m[0], m[1], m[2]);
    } catch (const Error& e) {
      throw DomainError(std::string("weingarten_residuals: stencil leaves the valid domain: ") + e.what());
    }
    rep.grad_H[i] = (mean_closed(tp) - mean_closed(tm)) / (2 * step);
    rep.grad_K[i] = (gaussian_closed(tp) - gaussian_closed(tm)) / (2 * step);
  }
  const auto& gH = rep.grad_H;
  const auto& gK = rep.grad_K;
  rep.R_uv = gH[0] * gK[1] - gH[1] * gK[0];
  rep.R_uw = gH[0] * gK[2] - gH[2] * gK[0];
  rep.R_vw = gH[1] * gK[2] - gH[2] * gK[1];
  const double nH = std::sqrt(gH[0] * gH[0] + gH[1] * gH[1] + gH[2] * gH[2]);
  const double nK = std::sqrt(gK[0] * gK[0] + gK[1] * gK[1] + gK[2] * gK[2]);
  rep.threshold = 1e-8 * (1.0 + nH * nK);
  auto classify = [&](double r) {
    if (std::abs(r) < rep.threshold) return WeingartenStatus::Weingarten;
    if (std::abs(r) > 10.0 * rep.threshold) return WeingartenStatus::NotWeingarten;
    return WeingartenStatus::Marginal;
  };
  rep.uv = classify(rep.R_uv);
  rep.uw = classify(rep.R_uw);
  rep.vw = classify(rep.R_vw);
  return rep;
}

}  // namespace canal4d
