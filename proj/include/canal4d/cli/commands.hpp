#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "canal4d/canal.hpp"
#include "canal4d/cli/config.hpp"
#include "canal4d/closedform.hpp"
#include "canal4d/diffgeo.hpp"
#include "canal4d/families.hpp"
#include "canal4d/grid.hpp"

namespace canal4d::cli {

/// Shortest round-trip decimal, locale independent.
inline std::string format(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

/// Renders rows [0, n) on `workers` threads over contiguous chunks and joins
/// the chunks in index order.
template <class RowFn>
std::string render_rows(std::size_t n, int workers, RowFn&& row) {
  const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(workers), n));
  const std::size_t chunk = (n + w - 1) / std::max<std::size_t>(w, 1);
  std::vector<std::string> parts(w);
  std::vector<std::exception_ptr> errors(w);
  auto work = [&](std::size_t c) {
    try {
      const std::size_t lo = c * chunk, hi = std::min(n, lo + chunk);
      for (std::size_t i = lo; i < hi; ++i) parts[c] += row(i);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (w == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t c = 0; c < w; ++c) pool.emplace_back(work, c);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::string out;
  for (auto& p : parts) out += p;
  return out;
}

/// mu with its first entry negated: a deliberate transcription fault that only
/// the closed forms see.
inline TypeTables with_flipped_mu(TypeTables t) {
  t.mu[0] = -t.mu[0];
  return t;
}

struct Job {
  JobConfig config;
  std::optional<FamilyProfile> family;
  CanalSurface surface;
};

namespace detail {

inline double stencil_pad(const JobConfig& c) { return 4.0 * std::max(c.derivatives.step, 1e-5); }

inline SpineCurve make_spine(const JobConfig& c, Interval need) {
  const TypeTables t = TypeTables::for_type(c.type);
  const FrameKind kind = t.spine_kind();
  ParallelFrame frame = standard_frame(kind);
  if (c.spine.frame0) frame.b = *c.spine.frame0;
  const SpineConfig& s = c.spine;
  try {
    if (!s.integrated) {
      if (*s.constants == Curvatures3{0.0, 0.0, 0.0}) return SpineCurve::line(kind, s.gamma0, frame, s.u0);
      return SpineCurve::constant_k(kind, *s.constants, s.gamma0, frame, s.u0);
    }
    const CurvatureFunctions curv =
        s.polynomials ? CurvatureFunctions::polynomials(*s.polynomials) : CurvatureFunctions::constants(*s.constants);
    const Interval domain = s.interval ? *s.interval : Interval{std::min(s.u0, need.lo), std::max(s.u0, need.hi)};
    return SpineCurve::integrated(kind, curv, s.gamma0, frame, s.u0, domain, {s.step, 16});
  } catch (const Error& e) {
    throw ConfigError("spine", e.what());
  }
}

inline FamilyProfile make_family(const RadiusFamily& fam, int m, Interval span) {
  const bool flat = fam.kind == FamilyKind::Linear || fam.kind == FamilyKind::FlatRoot;
  return flat ? flat_radius(fam, m, span) : minimal_radius(fam, m, span);
}

}  // namespace detail

/// Builds the surface over the grid's u range, widened for difference stencils
/// when the radius and spine allow it.
inline Job build_job(const JobConfig& c, bool inject_fault = false) {
  const Interval exact{c.grid.u.min, c.grid.u.max};
  const double pad = detail::stencil_pad(c);
  const Interval padded{exact.lo - pad, exact.hi + pad};
  TypeTables tables = TypeTables::for_type(c.type);
  if (inject_fault) tables = with_flipped_mu(tables);

  std::string last;
  for (const Interval& span : {padded, exact}) {
    try {
      SpineCurve spine = detail::make_spine(c, padded);
      std::optional<FamilyProfile> fam;
      RadiusProfile radius = RadiusProfile::constant(1.0);
      if (c.radius.family) {
        fam = detail::make_family(*c.radius.family, c.type, span);
        radius = fam->profile;
      } else {
        radius = RadiusProfile::polynomial(*c.radius.polynomial);
      }
      CanalSurface surface(tables, spine, radius, span);
      return Job{c, fam, std::move(surface)};
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      last = e.what();
    }
  }
  throw ConfigError("radius", last);
}

// ---------------------------------------------------------------- generate

inline std::string cmd_generate(const Job& job) {
  const auto nodes = job.config.grid.nodes();
  std::string out = "u,v,w,x1,x2,x3,x4\n";
  out += render_rows(nodes.size(), job.config.workers, [&](std::size_t i) {
    const auto& n = nodes[i];
    const Point4 x = job.surface.evaluate(n[0], n[1], n[2]);
    std::string row = format(n[0]) + "," + format(n[1]) + "," + format(n[2]);
    for (std::size_t k = 0; k < 4; ++k) row += "," + format(x[k]);
    return row + "\n";
  });
  return out;
}

// --------------------------------------------------------------- curvature

inline constexpr const char* kCurvatureHeader =
    "u,v,w,x1,x2,x3,x4,K_closed,H_closed,c1,c2,c3,K_num,H_num,identity_residual,membership_residual,error\n";

/// One record; failures of a node are collected in the error column and the
/// affected fields stay empty.
inline std::string curvature_row(const CanalSurface& c, const std::array<double, 3>& n, const JetOptions& opts,
                                 bool oracle) {
  const double u = n[0], v = n[1], w = n[2];
  std::vector<std::string> f(16);
  std::string err;
  auto note = [&](const std::string& what) { err += (err.empty() ? "" : "; ") + what; };
  f[0] = format(u);
  f[1] = format(v);
  f[2] = format(w);
  try {
    const Point4 x = c.evaluate(u, v, w);
    for (std::size_t k = 0; k < 4; ++k) f[3 + k] = format(x[k]);
    f[15] = format(c.membership_residual(u, v, w));
  } catch (const Error& e) {
    note(e.what());
  }
  try {
    const InvariantSample s = invariants(c, u, v, w);
    f[7] = format(s.K);
    f[8] = format(s.H);
    f[9] = format(s.c1);
    f[10] = format(s.c2);
    f[11] = format(s.c3);
    f[14] = format(identity_residual(c, u, v, w));
  } catch (const Error& e) {
    note(e.what());
  }
  if (oracle) {
    try {
      const OracleSample o = analyze(c, u, v, w, opts, c.gauss_map_closed(u, v, w));
      f[12] = format(o.curv.K);
      f[13] = format(o.curv.H);
    } catch (const Error& e) {
      note(std::string("oracle: ") + e.what());
    }
  }
  std::string row;
  for (std::size_t i = 0; i < f.size(); ++i) row += (i ? "," : "") + f[i];
  return row + "," + csv_escape(err) + "\n";
}

inline std::string cmd_curvature(const Job& job, bool oracle = true) {
  const auto nodes = job.config.grid.nodes();
  return kCurvatureHeader + render_rows(nodes.size(), job.config.workers, [&](std::size_t i) {
           return curvature_row(job.surface, nodes[i], job.config.derivatives, oracle);
         });
}

// -------------------------------------------------------------- export-obj

struct Slice {
  char axis = 'w';
  double value = 0.0;
};

inline Slice parse_slice(const std::string& s) {
  const auto eq = s.find('=');
  if (eq != 1 || (s[0] != 'u' && s[0] != 'v' && s[0] != 'w'))
    throw ConfigError("--slice", "expected axis=value with axis u, v or w");
  double value = 0.0;
  const char* b = s.data() + 2;
  const char* e = s.data() + s.size();
  const auto res = std::from_chars(b, e, value);
  if (res.ec != std::errc() || res.ptr != e || !std::isfinite(value))
    throw ConfigError("--slice", "cannot read value '" + s.substr(2) + "'");
  return {s[0], value};
}

inline std::string cmd_export_obj(const Job& job, const Slice& slice) {
  const Grid& g = job.config.grid;
  const int fixed = slice.axis == 'u' ? 0 : slice.axis == 'v' ? 1 : 2;
  const std::array<const Axis*, 3> axes{&g.u, &g.v, &g.w};
  const std::string path = std::string("grid.") + slice.axis;
  const Axis& sa = *axes[static_cast<std::size_t>(fixed)];
  if (sa.count < 2) throw ConfigError(path, "cannot slice an axis with a single grid point");
  if (slice.value < sa.min || slice.value > sa.max)
    throw ConfigError("--slice", "value " + format(slice.value) + " outside [" + format(sa.min) + ", " +
                                     format(sa.max) + "]");
  std::array<int, 2> free{};
  for (int a = 0, j = 0; a < 3; ++a)
    if (a != fixed) free[static_cast<std::size_t>(j++)] = a;
  const auto as = axes[static_cast<std::size_t>(free[0])]->values();
  const auto bs = axes[static_cast<std::size_t>(free[1])]->values();
  if (as.size() < 2 || bs.size() < 2) throw ConfigError("grid", "the two remaining axes need at least 2 points each");

  const std::size_t nb = bs.size();
  std::string out = render_rows(as.size() * nb, job.config.workers, [&](std::size_t i) {
    std::array<double, 3> p{};
    p[static_cast<std::size_t>(fixed)] = slice.value;
    p[static_cast<std::size_t>(free[0])] = as[i / nb];
    p[static_cast<std::size_t>(free[1])] = bs[i % nb];
    const auto q = job.config.projection.apply(job.surface.evaluate(p[0], p[1], p[2]));
    return "v " + format(q[0]) + " " + format(q[1]) + " " + format(q[2]) + "\n";
  });
  for (std::size_t i = 0; i + 1 < as.size(); ++i)
    for (std::size_t j = 0; j + 1 < nb; ++j) {
      const std::size_t a = i * nb + j + 1, b = a + 1, c = a + nb, d = c + 1;
      out += "f " + std::to_string(a) + " " + std::to_string(b) + " " + std::to_string(d) + "\n";
      out += "f " + std::to_string(a) + " " + std::to_string(d) + " " + std::to_string(c) + "\n";
    }
  return out;
}

// ------------------------------------------------------------------ verify

using Node = std::array<double, 3>;

/// Running maximum; NaN counts as +inf.
struct Worst {
  double value = 0.0;
  std::optional<Node> at;

  void add(double x, const Node& n) {
    if (std::isnan(x)) x = std::numeric_limits<double>::infinity();
    if (!at || x > value) {
      value = x;
      at = n;
    }
  }
};

struct Check {
  std::string label;
  std::string name;
  Worst worst;
  double tol = 0.0;
  std::string detail;

  bool pass() const { return worst.value < tol; }
};

struct VerifyReport {
  std::vector<Check> checks;

  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
  }

  const Check* worst_failure() const {
    const Check* w = nullptr;
    for (const auto& c : checks)
      if (!c.pass() && (!w || c.worst.value / c.tol > w->worst.value / w->tol)) w = &c;
    return w;
  }

  void print(std::ostream& os) const {
    for (const auto& c : checks) {
      os << (c.pass() ? "PASS " : "FAIL ") << c.label << " " << c.name << " max=" << format(c.worst.value)
         << " tol=" << format(c.tol);
      if (!c.detail.empty()) os << " (" << c.detail << ")";
      os << "\n";
    }
    if (const Check* w = worst_failure()) {
      os << "worst offender: " << w->label << " " << w->name;
      if (w->worst.at)
        os << " at u=" << format((*w->worst.at)[0]) << " v=" << format((*w->worst.at)[1])
           << " w=" << format((*w->worst.at)[2]);
      os << "\n";
    }
    os << (ok() ? "verify: ok" : "verify: FAILED") << "\n";
  }
};

/// Oracle, identity, membership, orthogonality and R_vw over every grid node
/// plus the spine Gram residual at the grid's u values.
inline void surface_suite(VerifyReport& rep, const std::string& label, const CanalSurface& c, const Grid& grid,
                          const JetOptions& opts, const Tolerances& tol) {
  Check K{label, "oracle.K", {}, tol.oracle, "|K_closed-K_num|/(1+|K_closed|)"};
  Check H{label, "oracle.H", {}, tol.oracle, "|H_closed-H_num|/(1+|H_closed|)"};
  Check P{label, "oracle.principal", {}, tol.principal, ""};
  Check I{label, "identity", {}, tol.identity, "|3H-r^2K-2eta/r|/(1+|H|+r^2|K|)"};
  Check M{label, "membership", {}, tol.membership, ""};
  Check O{label, "orthogonality", {}, tol.orthogonality, ""};
  Check W{label, "weingarten.vw", {}, tol.weingarten, ""};
  int sign = 0;
  bool mixed = false;
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (const Node& n : grid.nodes()) {
    const double u = n[0], v = n[1], w = n[2];
    try {
      const InvariantSample s = invariants(c, u, v, w);
      const double r = c.radius()(u);
      I.worst.add(std::abs(identity_residual(c, u, v, w)) / (1 + std::abs(s.H) + r * r * std::abs(s.K)), n);
      try {
        const OracleSample o = analyze(c, u, v, w, opts, c.gauss_map_closed(u, v, w));
        K.worst.add(std::abs(s.K - o.curv.K) / (1 + std::abs(s.K)), n);
        H.worst.add(std::abs(s.H - o.curv.H) / (1 + std::abs(s.H)), n);
        std::array<double, 3> closed{s.c1, s.c2, s.c3};
        std::sort(closed.begin(), closed.end(), std::greater<>());
        double d = 0.0;
        for (std::size_t k = 0; k < 3; ++k) d = std::max(d, std::abs(closed[k] - o.curv.principal[k]));
        P.worst.add(d, n);
        if (sign == 0) sign = o.orientation;
        mixed = mixed || o.orientation != sign;
      } catch (const Error&) {
        K.worst.add(inf, n);
        H.worst.add(inf, n);
        P.worst.add(inf, n);
      }
      W.worst.add(std::abs(weingarten_residuals(c, u, v, w).R_vw), n);
    } catch (const Error&) {
      for (Check* ch : {&K, &H, &P, &I, &W}) ch->worst.add(inf, n);
    }
    try {
      const double r = c.radius()(u);
      M.worst.add(std::abs(c.membership_residual(u, v, w)) / (1 + r * r), n);
      O.worst.add(std::abs(c.tangent_radial_orthogonality(u, v, w)), n);
    } catch (const Error&) {
      M.worst.add(inf, n);
      O.worst.add(inf, n);
    }
  }
  P.detail = mixed ? "orientation sign mixed" : "orientation sign " + std::to_string(sign);
  if (mixed) P.worst.add(inf, *P.worst.at);

  Check G{label, "frame.gram", {}, tol.gram, ""};
  for (double u : grid.u.values()) G.worst.add(gram_residual(c.spine().frame_at(u).frame), {u, 0.0, 0.0});
  for (Check* ch : {&K, &H, &P, &I, &M, &O, &W, &G}) rep.checks.push_back(std::move(*ch));
}

inline void family_suite(VerifyReport& rep, const std::string& label, const FamilyProfile& f, const Grid& grid,
                         const Tolerances& tol) {
  const bool flat = f.family.kind == FamilyKind::Linear || f.family.kind == FamilyKind::FlatRoot;
  const double t = flat                                         ? tol.flat
                   : f.family.kind == FamilyKind::MinimalRoot ? tol.minimal_root
                                                                : tol.minimal_ode;
  const FamilyCheck chk = verify_family(f.profile, f.m, grid, flat ? FamilyTarget::Gaussian : FamilyTarget::Mean);
  Check c{label, std::string("family.") + to_string(f.family.kind) + (flat ? ".K" : ".H"), {}, t, ""};
  c.worst.value = chk.max_abs;
  c.worst.at = chk.worst;
  c.detail = "branch " + std::string(to_string(f.branch)) + ", " + std::to_string(chk.singular) + "/" +
             std::to_string(chk.nodes) + " singular nodes";
  rep.checks.push_back(c);
  if (f.ode) {
    Check q{label, "family.quadrature_mismatch", {}, tol.quadrature, "|u_quadrature(r(u)) - u|"};
    q.worst.value = f.ode->quadrature_mismatch();
    rep.checks.push_back(q);
  }
}

inline VerifyReport verify_job(const Job& job) {
  VerifyReport rep;
  const std::string label = "m=" + std::to_string(job.config.type);
  surface_suite(rep, label, job.surface, job.config.grid, job.config.derivatives, job.config.tolerances);
  if (job.family && job.surface.spine().straight())
    family_suite(rep, label, *job.family, job.config.grid, job.config.tolerances);
  return rep;
}

/// Grid used for the standard surfaces: u in [0.1, 1] and v, w covering the
/// regular region of each shape.
inline Grid standard_grid(const TypeTables& t, int n = 10) {
  if (t.shape == ShapeKind::Circular)
    return {{0.1, 1.0, n}, {0.0, 2.0 * std::numbers::pi, n, false},
            {-std::numbers::pi / 2 + 0.2, std::numbers::pi / 2 - 0.2, n}};
  return {{0.1, 1.0, n}, {-0.5, 0.5, n}, {-0.5, 0.5, n}};
}

/// Constant-k spine (0.3, 0.2, 0.1) with r = 1.5 + 0.2u, or 0.2 + 1.5u when
/// s = -1, on u in [0.1 - pad, 1 + pad].
inline CanalSurface standard_surface(const TypeTables& t, double pad = 4e-4) {
  const FrameKind kind = t.spine_kind();
  const RadiusProfile r = t.s > 0 ? RadiusProfile::polynomial({1.5, 0.2}) : RadiusProfile::polynomial({0.2, 1.5});
  return CanalSurface(t, SpineCurve::constant_k(kind, {0.3, 0.2, 0.1}, {}, standard_frame(kind)), r,
                      {0.1 - pad, 1.0 + pad});
}

/// Built-in battery over all eight types.
inline VerifyReport verify_all_types(const Tolerances& tol, bool inject_fault = false) {
  VerifyReport rep;
  for (int m = 1; m <= 8; ++m) {
    const TypeTables base = TypeTables::for_type(m);
    const TypeTables t = inject_fault ? with_flipped_mu(base) : base;
    const CanalSurface c = standard_surface(t);
    const Grid grid = standard_grid(t);
    const std::string label = "m=" + std::to_string(m);
    surface_suite(rep, label, c, grid, {}, tol);
    if (m <= 2) {
      Check tr{label, "transcription", {}, tol.transcription, "general vs expanded K, H, c1, c3 (relative)"};
      auto rel = [](double a, double b) {
        return std::abs(a - b) / std::max(std::numeric_limits<double>::min(), std::max(std::abs(a), std::abs(b)));
      };
      for (const Node& n : standard_grid(t, 6).nodes()) {
        try {
          const InvariantSample s = invariants(c, n[0], n[1], n[2]);
          const auto p = c12::principal(c, n[0], n[1], n[2]);
          tr.worst.add(std::max({rel(s.K, c12::gaussian(c, n[0], n[1], n[2])),
                                 rel(s.H, c12::mean(c, n[0], n[1], n[2])), rel(s.c1, p[0]), rel(s.c3, p[2])}),
                       n);
        } catch (const Error&) {
          tr.worst.add(std::numeric_limits<double>::infinity(), n);
        }
      }
      rep.checks.push_back(tr);
    }
    const FamilyProfile lin = flat_radius(RadiusFamily::linear(2.0, 0.5), m, Interval{0.1, 1.0});
    family_suite(rep, label, lin, grid, tol);
    const RadiusFamily mq = RadiusFamily::minimal_quadrature(2.0, 0.0, 1, 1.0);
    const Interval nat = natural_interval(mq, m);
    const Interval span{std::max(nat.lo, -0.3), std::min(nat.hi, 0.3)};
    Grid g = grid;
    g.u = {span.lo, span.hi, grid.u.count};
    family_suite(rep, label, minimal_radius(mq, m, span), g, tol);
  }
  for (FrameKind kind : {FrameKind::TimelikeCurve, FrameKind::SpacelikeB2Timelike, FrameKind::SpacelikeB3Timelike,
                         FrameKind::SpacelikeB4Timelike}) {
    const std::string label = to_string(kind);
    const Curvatures3 k{0.3, 0.2, 0.1};
    const SpineCurve num =
        SpineCurve::integrated(kind, CurvatureFunctions::constants(k), {}, standard_frame(kind), 0.0, {0.0, 10.0});
    const SpineCurve exact = SpineCurve::constant_k(kind, k, {}, standard_frame(kind));
    Check g{label, "frame.gram", {}, tol.gram, "integrated, u in [0, 10]"};
    for (int i = 0; i <= 1000; ++i) {
      const double u = 10.0 * i / 1000;
      g.worst.add(gram_residual(num.frame_at(u).frame), {u, 0.0, 0.0});
    }
    Check d{label, "frame.deviation", {}, tol.frame_deviation, "integrated vs constant-k, u in [0, 1]"};
    for (int i = 0; i <= 100; ++i) {
      const double u = i / 100.0;
      const SpineState a = num.frame_at(u), b = exact.frame_at(u);
      double dev = 0.0;
      for (std::size_t q = 0; q < 4; ++q) {
        dev = std::max(dev, std::abs(a.point[q] - b.point[q]));
        for (std::size_t j = 0; j < 4; ++j) dev = std::max(dev, std::abs(a.frame.b[j][q] - b.frame.b[j][q]));
      }
      d.worst.add(dev, {u, 0.0, 0.0});
    }
    rep.checks.push_back(g);
    rep.checks.push_back(d);
  }
  return rep;
}

}  // namespace canal4d::cli
