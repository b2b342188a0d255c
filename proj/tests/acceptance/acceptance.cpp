#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "../unit/support.hpp"
#include "canal4d/cli/commands.hpp"
#include "canal4d/families.hpp"

using namespace canal4d;
using canal4d::cli::format;
using canal4d::cli::json;
using canal4d::cli::Node;
using canal4d::testing::PointSampler;
using canal4d::testing::std_surface;

namespace {

constexpr double kOracleTol = 1e-6;
constexpr double kPrincipalTol = 1e-6;
constexpr double kOracleStep = 1e-4;
constexpr double kOracleSeconds = 30.0;
constexpr double kIdentityTol = 1e-10;
constexpr int kIdentityPoints = 10000;
constexpr double kMembershipTol = 1e-9;
constexpr double kOrthogonalityTol = 1e-7;
constexpr double kTranscriptionTol = 1e-12;
constexpr int kTranscriptionPoints = 1000;
constexpr double kFlatTol = 1e-9;
constexpr double kNegativeControlMin = 1e-2;
constexpr double kMinimalRootTol = 1e-10;
constexpr double kMinimalOdeTol = 1e-7;
constexpr double kQuadratureTol = 1e-6;
constexpr double kVwTol = 1e-9;
constexpr double kUvTol = 1e-8;
constexpr double kUwMin = 1e-4;
constexpr double kStraightTol = 1e-8;
constexpr double kClosedExprRelTol = 1e-4;
constexpr double kGramTol = 1e-9;
constexpr double kDeviationTol = 1e-8;
constexpr double kTubeTol = 1e-6;

constexpr double inf = std::numeric_limits<double>::infinity();

/// A sub-measurement: pass when `value < bound` (or `value > bound` for a lower bound).
struct Part {
  std::string name;
  double value;
  double bound;
  bool lower = false;
  std::string note{};

  bool pass() const { return lower ? value > bound : value < bound; }
};

struct Outcome {
  std::vector<Part> parts;
  bool pass() const {
    return !parts.empty() && std::all_of(parts.begin(), parts.end(), [](const Part& p) { return p.pass(); });
  }
};

double nan_to_inf(double x) { return std::isnan(x) ? inf : x; }

void raise(double& worst, double x) { worst = std::max(worst, nan_to_inf(x)); }

double rel12(double a, double b) {
  return std::abs(a - b) / std::max(std::numeric_limits<double>::min(), std::max(std::abs(a), std::abs(b)));
}

Grid family_grid(const TypeTables& t, Interval u, int n = 10) {
  if (t.shape == ShapeKind::Circular) return {{u.lo, u.hi, n}, {0.0, 2 * std::numbers::pi, n, false}, {-1.2, 1.2, n}};
  return {{u.lo, u.hi, n}, {-0.5, 0.5, n}, {-0.5, 0.5, n}};
}

Interval clip(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

// Criteria 1 and 2 share the oracle sweep.
struct OracleSweep {
  double K = 0, H = 0, P = 0, seconds = 0;
  std::string signs;
};

const OracleSweep& oracle_sweep() {
  static const OracleSweep sweep = [] {
    OracleSweep s;
    const auto t0 = std::chrono::steady_clock::now();
    for (int m = 1; m <= 8; ++m) {
      const TypeTables t = TypeTables::for_type(m);
      const CanalSurface c = cli::standard_surface(t);
      int sign = 0;
      bool mixed = false;
      for (const Node& n : cli::standard_grid(t).nodes()) {
        try {
          const InvariantSample x = invariants(c, n[0], n[1], n[2]);
          const OracleSample o = analyze(c, n[0], n[1], n[2], {DerivativeMode::FiniteDifference, kOracleStep},
                                         c.gauss_map_closed(n[0], n[1], n[2]));
          raise(s.K, std::abs(x.K - o.curv.K) / (1 + std::abs(x.K)));
          raise(s.H, std::abs(x.H - o.curv.H) / (1 + std::abs(x.H)));
          std::array<double, 3> closed{x.c1, x.c2, x.c3};
          std::sort(closed.begin(), closed.end(), std::greater<>());
          for (std::size_t k = 0; k < 3; ++k) raise(s.P, std::abs(closed[k] - o.curv.principal[k]));
          if (sign == 0) sign = o.orientation;
          mixed = mixed || o.orientation != sign;
        } catch (const Error&) {
          s.K = s.H = s.P = inf;
        }
      }
      if (mixed) s.P = inf;
      s.signs += (m > 1 ? "," : "") + (mixed ? std::string("mixed") : std::to_string(sign));
    }
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
  }();
  return sweep;
}

Outcome c1_gaussian_oracle() {
  const OracleSweep& s = oracle_sweep();
  return {{{"max rel |K_closed-K_num|", s.K, kOracleTol}, {"runtime s", s.seconds, kOracleSeconds}}};
}

Outcome c2_mean_principal_oracle() {
  const OracleSweep& s = oracle_sweep();
  return {{{"max rel |H_closed-H_num|", s.H, kOracleTol},
           {"principal distance", s.P, kPrincipalTol, false, "orientation signs " + s.signs}}};
}

// Random points shared by criteria 3 and 4: even indices on the linear radius,
// odd ones on a cubic radius.
template <class F>
void for_random_points(F&& visit) {
  PointSampler ps(20261017);
  std::vector<CanalSurface> surfaces;
  for (int m = 1; m <= 8; ++m) {
    surfaces.push_back(std_surface(m));
    surfaces.push_back(std_surface(m, canal4d::testing::kStdK, true));
  }
  for (int i = 0; i < kIdentityPoints; ++i) {
    const int m = 1 + i % 8;
    const CanalSurface& c = surfaces[2 * (m - 1) + (i / 8) % 2];
    visit(c, ps.point(c.tables()));
  }
}

Outcome c3_identity() {
  double worst = 0;
  int count = 0;
  for_random_points([&](const CanalSurface& c, const std::array<double, 3>& p) {
    try {
      const InvariantSample x = invariants(c, p[0], p[1], p[2]);
      const double r = c.radius()(p[0]);
      const double res = 3 * x.H - r * r * x.K - 2 * c.tables().eta / r;
      raise(worst, std::abs(res) / (1 + std::abs(x.H) + r * r * std::abs(x.K)));
      ++count;
    } catch (const Error&) {
      worst = inf;
    }
  });
  return {{{"max |3H-r^2K-2eta/r|/(1+|H|+r^2|K|)", worst, kIdentityTol, false,
            std::to_string(count) + " points, 8 types"}}};
}

Outcome c4_membership() {
  double mem = 0, orth = 0;
  for_random_points([&](const CanalSurface& c, const std::array<double, 3>& p) {
    try {
      const Vec4 d = c.evaluate(p[0], p[1], p[2]) - c.spine().frame_at(p[0]).point;
      const double r = c.radius()(p[0]);
      const double sign = (c.tables().m % 2 == 1) ? 1.0 : -1.0;  // (-1)^(m+1)
      raise(mem, std::abs(inner(d, d) - sign * r * r) / (1 + r * r));
      raise(orth, std::abs(c.tangent_radial_orthogonality(p[0], p[1], p[2])));
    } catch (const Error&) {
      mem = orth = inf;
    }
  });
  return {{{"max |<C-g,C-g>-(-1)^(m+1)r^2|/(1+r^2)", mem, kMembershipTol},
           {"max |<C-g,C_u>| (FD tangent)", orth, kOrthogonalityTol}}};
}

// H is a signed sum of principal curvatures; its deviation is scaled by the
// summands so zero crossings of H do not inflate the measure.
Outcome c5_transcription() {
  PointSampler ps(5);
  double worst = 0, plain = 0;
  for (int m : {1, 2}) {
    for (bool curved : {false, true}) {
      const CanalSurface c = std_surface(m, canal4d::testing::kStdK, curved);
      for (int i = 0; i < kTranscriptionPoints / 4; ++i) {
        const auto p = ps.point(c.tables());
        try {
          const InvariantSample x = invariants(c, p[0], p[1], p[2]);
          const auto pr = c12::principal(c, p[0], p[1], p[2]);
          const double h = c12::mean(c, p[0], p[1], p[2]);
          const double h_scale = (std::abs(x.c1) + std::abs(x.c2) + std::abs(x.c3)) / 3;
          for (double d : {rel12(x.K, c12::gaussian(c, p[0], p[1], p[2])), rel12(x.c1, pr[0]), rel12(x.c2, pr[1]),
                           rel12(x.c3, pr[2]), std::abs(x.H - h) / std::max({std::abs(x.H), std::abs(h), h_scale})})
            raise(worst, d);
          raise(plain, rel12(x.H, h));
        } catch (const Error&) {
          worst = inf;
        }
      }
    }
  }
  return {{{"max relative deviation K, H, c1..c3", worst, kTranscriptionTol, false,
            std::to_string(kTranscriptionPoints) + " points, m=1,2; H against |H| alone: " + format(plain)}}};
}

std::string singular_note(const FamilyCheck& chk) {
  return std::to_string(chk.singular) + "/" + std::to_string(chk.nodes) + " singular";
}

Outcome c6_flat() {
  Outcome out;
  double lin = 0;
  std::size_t lin_singular = 0;
  for (int m = 1; m <= 8; ++m) {
    const FamilyProfile f = flat_radius(RadiusFamily::linear(2.0, 0.5), m, Interval{0.1, 1.0});
    const FamilyCheck chk = verify_family(f.profile, m, family_grid(TypeTables::for_type(m), f.interval), FamilyTarget::Gaussian);
    raise(lin, chk.max_abs);
    lin_singular += chk.singular;
  }
  out.parts.push_back({"Linear max |K|", lin, kFlatTol, false, std::to_string(lin_singular) + " singular, 8 types"});

  double root = 0;
  std::size_t sing = 0, nodes = 0;
  for (int m = 1; m <= 8; ++m) {
    const RadiusFamily fam = RadiusFamily::flat_root(0.0, 0.0);
    const Interval span = clip(natural_interval(fam, m), {-0.9, 3.0});
    const FamilyProfile f = flat_radius(fam, m, Interval{span.lo + 0.05, span.hi - 0.05});
    const FamilyCheck chk =
        verify_family(f.profile, m, family_grid(TypeTables::for_type(m), f.interval), FamilyTarget::Gaussian);
    raise(root, chk.max_abs);
    sing += chk.singular;
    nodes += chk.nodes;
  }
  out.parts.push_back({"FlatRoot max |K|", root, kFlatTol, false,
                       std::to_string(sing) + "/" + std::to_string(nodes) + " singular, 8 types"});

  const FamilyCheck neg = verify_family(RadiusProfile::polynomial({0, 0, 1}), 2,
                                        family_grid(TypeTables::for_type(2), {0.5, 1.5}), FamilyTarget::Gaussian);
  out.parts.push_back({"r=u^2 m=2 max |K|", nan_to_inf(neg.max_abs), kNegativeControlMin, true, singular_note(neg)});
  return out;
}

Outcome c7_minimal() {
  Outcome out;
  double root = 0;
  std::size_t sing = 0, nodes = 0;
  for (int m = 1; m <= 8; ++m) {
    const RadiusFamily fam = RadiusFamily::minimal_root(0.0, 0.0);
    const Interval span = clip(natural_interval(fam, m), {-0.9, 3.0});
    const FamilyProfile f = minimal_radius(fam, m, Interval{span.lo + 0.05, span.hi - 0.05});
    const FamilyCheck chk =
        verify_family(f.profile, m, family_grid(TypeTables::for_type(m), f.interval), FamilyTarget::Mean);
    raise(root, chk.max_abs);
    sing += chk.singular;
    nodes += chk.nodes;
  }
  out.parts.push_back({"MinimalRoot max |H|", root, kMinimalRootTol, false,
                       std::to_string(sing) + "/" + std::to_string(nodes) + " singular, 8 types"});

  double ode = 0, mismatch = 0;
  std::size_t ode_singular = 0;
  for (int m = 1; m <= 8; ++m) {
    const RadiusFamily fam = RadiusFamily::minimal_quadrature(2.0, 0.0, 1, 1.0);
    const FamilyProfile f = minimal_radius(fam, m, clip(natural_interval(fam, m), {-0.5, 0.5}));
    const FamilyCheck chk =
        verify_family(f.profile, m, family_grid(TypeTables::for_type(m), f.interval), FamilyTarget::Mean);
    raise(ode, chk.max_abs);
    ode_singular += chk.singular;
    raise(mismatch, f.ode ? f.ode->quadrature_mismatch() : inf);
  }
  out.parts.push_back(
      {"MinimalQuadrature max |H|", ode, kMinimalOdeTol, false, std::to_string(ode_singular) + " singular, 8 types"});
  out.parts.push_back({"quadrature u-mismatch", mismatch, kQuadratureTol});
  return out;
}

Outcome c8_weingarten() {
  Outcome out;
  double vw = 0;
  PointSampler ps(8);
  for (int m = 1; m <= 8; ++m)
    for (bool curved : {false, true}) {
      const CanalSurface c = std_surface(m, canal4d::testing::kStdK, curved);
      for (int i = 0; i < 100; ++i) {
        const auto p = ps.point(c.tables());
        raise(vw, std::abs(weingarten_residuals(c, p[0], p[1], p[2]).R_vw));
      }
    }
  out.parts.push_back({"max |R_vw|", vw, kVwTol});

  const CanalSurface k2 = std_surface(1, {0, 1, 0}, true);
  const WeingartenReport w = weingarten_residuals(k2, 0.5, 0.3, 0.2);
  out.parts.push_back({"k=(0,1,0) |R_uv|", std::abs(w.R_uv), kUvTol});
  out.parts.push_back({"k=(0,1,0) |R_uw|", std::abs(w.R_uw), kUwMin, true});

  double straight = 0;
  for (int m = 1; m <= 8; ++m) {
    const CanalSurface c = std_surface(m, {0, 0, 0}, true);
    for (const Node& n : cli::standard_grid(c.tables(), 5).nodes()) {
      const WeingartenReport r = weingarten_residuals(c, n[0], n[1], n[2]);
      raise(straight, std::max({std::abs(r.R_uv), std::abs(r.R_uw), std::abs(r.R_vw)}));
    }
  }
  out.parts.push_back({"straight spine max residual", straight, kStraightTol});

  double expr = 0;
  for (int m : {1, 2}) {
    const CanalSurface c = std_surface(m, canal4d::testing::kStdK, true);
    for (const Node& n : cli::standard_grid(c.tables()).nodes()) {
      const double fd = weingarten_residuals(c, n[0], n[1], n[2]).R_uv;
      raise(expr, rel12(fd, c12::weingarten_uv(c, n[0], n[1], n[2])));
    }
  }
  out.parts.push_back({"m=1,2 R_uv vs closed expression (rel)", expr, kClosedExprRelTol});
  return out;
}

Outcome c9_frames() {
  double gram = 0, dev = 0;
  const Curvatures3 k{0.3, 0.2, 0.1};
  for (FrameKind kind : {FrameKind::TimelikeCurve, FrameKind::SpacelikeB2Timelike, FrameKind::SpacelikeB3Timelike,
                         FrameKind::SpacelikeB4Timelike}) {
    const SpineCurve num =
        SpineCurve::integrated(kind, CurvatureFunctions::constants(k), {}, standard_frame(kind), 0.0, {0.0, 10.0});
    const SpineCurve exact = SpineCurve::constant_k(kind, k, {}, standard_frame(kind));
    for (int i = 0; i <= 2000; ++i) raise(gram, gram_residual(num.frame_at(10.0 * i / 2000).frame));
    for (int i = 0; i <= 200; ++i) {
      const double u = i / 200.0;
      const SpineState a = num.frame_at(u), b = exact.frame_at(u);
      for (std::size_t q = 0; q < 4; ++q) {
        raise(dev, std::abs(a.point[q] - b.point[q]));
        for (std::size_t j = 0; j < 4; ++j) raise(dev, std::abs(a.frame.b[j][q] - b.frame.b[j][q]));
      }
    }
  }
  return {{{"Gram residual u in [0,10]", gram, kGramTol, false, "4 frame kinds"},
           {"integrated vs constant-k u in [0,1]", dev, kDeviationTol}}};
}

Outcome c10_tubes() {
  Outcome out;
  for (auto [m, H] : {std::pair{2, -2.0 / 3.0}, std::pair{7, 2.0 / 3.0}}) {
    const CanalSurface c = canal4d::testing::unit_tube(m);
    double closed = 0, oracle = 0;
    for (const Node& n : family_grid(c.tables(), {-1.0, 1.0}, 6).nodes()) {
      const InvariantSample x = invariants(c, n[0], n[1], n[2]);
      std::array<double, 3> p{x.c1, x.c2, x.c3};
      std::sort(p.begin(), p.end(), std::greater<>());
      raise(closed, std::max({std::abs(x.K), std::abs(x.H - H), std::abs(p[0] - 1), std::abs(p[1] - 1),
                              std::abs(p[2])}));
      const OracleSample o = analyze(c, n[0], n[1], n[2], {}, c.gauss_map_closed(n[0], n[1], n[2]));
      raise(oracle, std::max({std::abs(o.curv.K), std::abs(o.curv.H - H), std::abs(o.curv.principal[0] - 1),
                              std::abs(o.curv.principal[1] - 1), std::abs(o.curv.principal[2])}));
    }
    const std::string tag = "m=" + std::to_string(m) + " (0," + format(H) + ",{1,1,0})";
    out.parts.push_back({tag + " closed", closed, 1e-14});
    out.parts.push_back({tag + " oracle", oracle, kTubeTol});
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c11_determinism(const std::string& cli_path) {
  const json doc = json::parse(R"({
    "type": 3, "spine": {"curvatures": [0.3, 0.2, 0.1]},
    "radius": {"polynomial": [0.2, 1.5, 0.1]},
    "grid": {"u": {"min": 0.1, "max": 1, "count": 12},
             "v": {"min": -0.5, "max": 0.5, "count": 11},
             "w": {"min": -0.5, "max": 0.5, "count": 10}}})");
  Outcome out;
  std::vector<std::string> runs;
  for (int workers : {1, 1, 4, 8}) {
    cli::JobConfig cfg = cli::parse_config(doc);
    cfg.workers = workers;
    runs.push_back(cli::cmd_curvature(cli::build_job(cfg), true));
  }
  const auto differing = std::count_if(runs.begin(), runs.end(), [&](const std::string& r) { return r != runs[0]; });
  out.parts.push_back({"in-process runs differing (workers 1,1,4,8)", double(differing), 0.5, false,
                       std::to_string(runs[0].size()) + " bytes"});

  if (!cli_path.empty()) {
    const auto dir = std::filesystem::temp_directory_path() / "canal4d_acceptance_c11";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "job.json") << doc.dump();
    std::size_t bad = 0;
    std::string first;
    for (int i = 0; i < 3; ++i) {
      const auto csv = dir / ("run" + std::to_string(i) + ".csv");
      const std::string cmd = "\"" + cli_path + "\" curvature --config \"" + (dir / "job.json").string() +
                              "\" --workers " + std::to_string(i == 0 ? 1 : 4) + " --out \"" + csv.string() + "\"";
      const int rc = std::system(cmd.c_str());
      const std::string text = rc == 0 ? slurp(csv) : "";
      if (i == 0) first = text;
      bad += text.empty() || text != first || text != runs[0];
    }
    std::filesystem::remove_all(dir);
    out.parts.push_back({"CLI runs differing (workers 1,4,4)", double(bad), 0.5});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  std::string cli_path;
  app.add_option("--criterion", only, "criteria to run (default: all)")->check(CLI::Range(1, 11));
  app.add_option("--cli", cli_path, "canal4d executable for the determinism criterion");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence (Gaussian)", c1_gaussian_oracle},
      {"oracle equivalence (mean, principal)", c2_mean_principal_oracle},
      {"linear identity", c3_identity},
      {"envelope membership, radial orthogonality", c4_membership},
      {"type 1/2 specialization", c5_transcription},
      {"flat families", c6_flat},
      {"minimal families", c7_minimal},
      {"Weingarten residuals", c8_weingarten},
      {"frame integrity", c9_frames},
      {"tube values", c10_tubes},
      {"determinism", [&] { return c11_determinism(cli_path); }},
  };
  if (only.empty())
    for (int i = 1; i <= 11; ++i) only.push_back(i);

  bool all = true;
  for (int id : only) {
    const auto& [title, fn] = criteria[id - 1];
    Outcome o;
    std::string error;
    try {
      o = fn();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const bool pass = error.empty() && o.pass();
    all = all && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << "\n";
    for (const Part& p : o.parts)
      std::cout << "    " << (p.pass() ? "ok  " : "bad ") << p.name << " = " << format(p.value)
                << (p.lower ? " > " : " < ") << format(p.bound) << (p.note.empty() ? "" : " (" + p.note + ")")
                << "\n";
    if (!error.empty()) std::cout << "    error: " << error << "\n";
  }
  return all ? 0 : 1;
}
