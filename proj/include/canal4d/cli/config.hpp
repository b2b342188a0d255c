#pragma once

// JSON job description. Every object rejects keys it does not know; errors
// carry the dotted path of the offending field.

#include <array>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "canal4d/canal.hpp"
#include "canal4d/diffgeo.hpp"
#include "canal4d/errors.hpp"
#include "canal4d/families.hpp"
#include "canal4d/grid.hpp"

namespace canal4d::cli {

using json = nlohmann::json;

class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error((path.empty() ? std::string("config") : path) + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Cursor into the document that knows its own path.
class Field {
 public:
  Field(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return *j_; }

  void expect_object(std::initializer_list<const char*> keys) const {
    if (!j_->is_object()) fail("expected an object");
    for (const auto& [k, _] : j_->items()) {
      bool known = false;
      for (const char* a : keys) known = known || k == a;
      if (!known) throw ConfigError(child(k), "unknown key");
    }
  }

  bool has(const char* key) const { return j_->is_object() && j_->contains(key); }

  Field at(const char* key) const {
    if (!has(key)) throw ConfigError(child(key), "required field missing");
    return {(*j_)[key], child(key)};
  }

  std::optional<Field> opt(const char* key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  std::size_t size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }

  Field operator[](std::size_t i) const { return {(*j_)[i], path_ + "[" + std::to_string(i) + "]"}; }

  double number() const {
    if (!j_->is_number()) fail("expected a number");
    const double x = j_->get<double>();
    if (!std::isfinite(x)) fail("expected a finite number");
    return x;
  }

  int integer() const {
    if (!j_->is_number_integer()) fail("expected an integer");
    return j_->get<int>();
  }

  bool boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }

  std::string string() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  std::vector<double> numbers(std::size_t exact = 0) const {
    const std::size_t n = size();
    if (exact != 0 && n != exact) fail("expected " + std::to_string(exact) + " numbers");
    if (exact == 0 && n == 0) fail("expected a non-empty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back((*this)[i].number());
    return out;
  }

  Vec4 vec4() const {
    const auto x = numbers(4);
    return {x[0], x[1], x[2], x[3]};
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_, what); }

 private:
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* j_;
  std::string path_;
};

struct SpineConfig {
  std::optional<FrameKind> kind;
  std::optional<Curvatures3> constants;
  std::optional<std::array<std::vector<double>, 3>> polynomials;
  bool integrated = false;
  Point4 gamma0{};
  std::optional<Tetrad> frame0;
  double u0 = 0.0;
  double step = 1e-3;
  std::optional<Interval> interval;
};

struct RadiusConfig {
  std::optional<std::vector<double>> polynomial;
  std::optional<RadiusFamily> family;
};

struct Tolerances {
  double oracle = 1e-6;
  double principal = 1e-6;
  double identity = 1e-10;
  double membership = 1e-9;
  double orthogonality = 1e-7;
  double weingarten = 1e-9;
  double gram = 1e-9;
  double flat = 1e-9;
  double minimal_root = 1e-10;
  double minimal_ode = 1e-7;
  double quadrature = 1e-6;
  double transcription = 1e-12;
  double frame_deviation = 1e-8;

  void set_all(double t) {
    oracle = principal = identity = membership = orthogonality = weingarten = gram = flat = minimal_root = minimal_ode =
        quadrature = transcription = frame_deviation = t;
  }
};

/// Coordinate drop (index into x1..x4) or a 3x4 matrix.
struct Projection {
  int drop = 0;
  std::optional<std::array<Vec4, 3>> matrix;

  std::array<double, 3> apply(const Vec4& x) const {
    if (matrix) {
      std::array<double, 3> out{};
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 4; ++k) out[i] += (*matrix)[i][k] * x[k];
      return out;
    }
    std::array<double, 3> out{};
    std::size_t j = 0;
    for (int k = 0; k < 4; ++k)
      if (k != drop) out[j++] = x[static_cast<std::size_t>(k)];
    return out;
  }
};

struct JobConfig {
  int type = 1;
  SpineConfig spine;
  RadiusConfig radius;
  Grid grid;
  JetOptions derivatives;
  Tolerances tolerances;
  std::string csv_out;
  std::string obj_out;
  Projection projection;
  int workers = 1;
};

namespace detail {

inline FrameKind parse_kind(const Field& f) {
  const std::string s = f.string();
  for (FrameKind k : {FrameKind::TimelikeCurve, FrameKind::SpacelikeB2Timelike, FrameKind::SpacelikeB3Timelike,
                      FrameKind::SpacelikeB4Timelike})
    if (s == to_string(k)) return k;
  f.fail("unknown spine kind '" + s +
         "' (timelike, spacelike_b2_timelike, spacelike_b3_timelike, spacelike_b4_timelike)");
}

inline SpineConfig parse_spine(const Field& f, int m) {
  f.expect_object({"kind", "curvatures", "polynomials", "mode", "gamma0", "frame0", "u0", "step", "interval"});
  SpineConfig s;
  const FrameKind required = TypeTables::for_type(m).spine_kind();
  if (auto k = f.opt("kind")) {
    s.kind = parse_kind(*k);
    if (*s.kind != required)
      k->fail("type " + std::to_string(m) + " requires a " + to_string(required) + " spine");
  }
  if (f.has("curvatures") && f.has("polynomials")) f.fail("give either curvatures or polynomials");
  if (auto c = f.opt("curvatures")) {
    const auto x = c->numbers(3);
    s.constants = Curvatures3{x[0], x[1], x[2]};
  } else if (auto p = f.opt("polynomials")) {
    if (p->size() != 3) p->fail("expected three coefficient arrays");
    std::array<std::vector<double>, 3> coeffs;
    for (std::size_t i = 0; i < 3; ++i) coeffs[i] = (*p)[i].numbers();
    s.polynomials = coeffs;
    s.integrated = true;
  } else {
    s.constants = Curvatures3{0.0, 0.0, 0.0};
  }
  if (auto mode = f.opt("mode")) {
    const std::string v = mode->string();
    if (v == "integrated")
      s.integrated = true;
    else if (v == "analytic") {
      if (s.polynomials) mode->fail("polynomial curvatures need mode 'integrated'");
      s.integrated = false;
    } else
      mode->fail("expected 'analytic' or 'integrated'");
  }
  if (auto g = f.opt("gamma0")) s.gamma0 = g->vec4();
  if (auto fr = f.opt("frame0")) {
    if (fr->size() != 4) fr->fail("expected four vectors B1..B4");
    ParallelFrame pf;
    pf.signature = signature_of(required);
    for (std::size_t i = 0; i < 4; ++i) pf.b[i] = (*fr)[i].vec4();
    if (gram_residual(pf) > 1e-9)
      fr->fail("not orthonormal for the " + std::string(to_string(required)) + " signature");
    s.frame0 = pf.b;
  }
  if (auto u0 = f.opt("u0")) s.u0 = u0->number();
  if (auto st = f.opt("step")) {
    s.step = st->number();
    if (!(s.step > 0.0)) st->fail("must be positive");
  }
  if (auto iv = f.opt("interval")) {
    const auto x = iv->numbers(2);
    if (!(x[0] <= s.u0 && s.u0 <= x[1])) iv->fail("must contain u0");
    s.interval = Interval{x[0], x[1]};
  }
  return s;
}

inline RadiusConfig parse_radius(const Field& f) {
  if (!f.raw().is_object()) f.fail("expected an object");
  RadiusConfig r;
  if (f.has("polynomial")) {
    f.expect_object({"polynomial"});
    r.polynomial = f.at("polynomial").numbers();
    return r;
  }
  const Field fam = f.at("family");
  const std::string kind = fam.string();
  auto sign_of = [&] {
    const int s = f.has("sign") ? f.at("sign").integer() : 1;
    if (s != 1 && s != -1) f.at("sign").fail("must be +1 or -1");
    return s;
  };
  if (kind == "linear") {
    f.expect_object({"family", "c1", "c2"});
    r.family = RadiusFamily::linear(f.at("c1").number(), f.at("c2").number());
  } else if (kind == "flat_root" || kind == "minimal_root") {
    f.expect_object({"family", "c1", "c2", "sign"});
    const double c1 = f.at("c1").number(), c2 = f.at("c2").number();
    r.family = kind == "flat_root" ? RadiusFamily::flat_root(c1, c2, sign_of())
                                   : RadiusFamily::minimal_root(c1, c2, sign_of());
  } else if (kind == "minimal_quadrature") {
    f.expect_object({"family", "c3", "c4", "sign", "r0"});
    r.family = RadiusFamily::minimal_quadrature(f.at("c3").number(), f.at("c4").number(), sign_of(),
                                                f.has("r0") ? f.at("r0").number() : 1.0);
  } else {
    fam.fail("unknown family '" + kind + "' (linear, flat_root, minimal_root, minimal_quadrature)");
  }
  return r;
}

inline Axis parse_axis(const Field& f) {
  f.expect_object({"min", "max", "count", "endpoint"});
  Axis a;
  a.min = f.at("min").number();
  a.max = f.at("max").number();
  a.count = f.at("count").integer();
  if (a.count < 1) f.at("count").fail("must be at least 1");
  if (a.min > a.max) f.fail("min exceeds max");
  if (auto e = f.opt("endpoint")) a.endpoint = e->boolean();
  return a;
}

inline Tolerances parse_tolerances(const Field& f) {
  f.expect_object({"oracle", "principal", "identity", "membership", "orthogonality", "weingarten", "gram", "flat",
                   "minimal_root", "minimal_ode", "quadrature", "transcription", "frame_deviation"});
  Tolerances t;
  auto read = [&](const char* key, double& out) {
    if (auto x = f.opt(key)) {
      out = x->number();
      if (!(out > 0.0)) x->fail("must be positive");
    }
  };
  read("oracle", t.oracle);
  read("principal", t.principal);
  read("identity", t.identity);
  read("membership", t.membership);
  read("orthogonality", t.orthogonality);
  read("weingarten", t.weingarten);
  read("gram", t.gram);
  read("flat", t.flat);
  read("minimal_root", t.minimal_root);
  read("minimal_ode", t.minimal_ode);
  read("quadrature", t.quadrature);
  read("transcription", t.transcription);
  read("frame_deviation", t.frame_deviation);
  return t;
}

inline Projection parse_projection(const Field& f) {
  f.expect_object({"drop", "matrix"});
  if (f.has("drop") && f.has("matrix")) f.fail("give either drop or matrix");
  Projection p;
  if (auto d = f.opt("drop")) {
    const std::string s = d->string();
    if (s.size() != 2 || s[0] != 'x' || s[1] < '1' || s[1] > '4') d->fail("expected one of x1, x2, x3, x4");
    p.drop = s[1] - '1';
  }
  if (auto mt = f.opt("matrix")) {
    if (mt->size() != 3) mt->fail("expected three rows of four numbers");
    std::array<Vec4, 3> rows;
    for (std::size_t i = 0; i < 3; ++i) rows[i] = (*mt)[i].vec4();
    p.matrix = rows;
  }
  return p;
}

}  // namespace detail

inline JobConfig parse_config(const json& doc) {
  const Field root(doc, "");
  root.expect_object({"type", "spine", "radius", "grid", "derivatives", "tolerances", "output", "projection", "workers"});
  JobConfig c;
  const Field type = root.at("type");
  c.type = type.integer();
  if (c.type < 1 || c.type > 8) type.fail("canal type must be 1..8");
  c.spine = root.has("spine") ? detail::parse_spine(root.at("spine"), c.type) : SpineConfig{};
  c.radius = detail::parse_radius(root.at("radius"));

  const Field grid = root.at("grid");
  grid.expect_object({"u", "v", "w"});
  c.grid = {detail::parse_axis(grid.at("u")), detail::parse_axis(grid.at("v")), detail::parse_axis(grid.at("w"))};

  if (auto d = root.opt("derivatives")) {
    d->expect_object({"mode", "step"});
    if (auto mode = d->opt("mode")) {
      const std::string v = mode->string();
      if (v == "finite_difference")
        c.derivatives.mode = DerivativeMode::FiniteDifference;
      else if (v == "analytic")
        c.derivatives.mode = DerivativeMode::Analytic;
      else
        mode->fail("expected 'finite_difference' or 'analytic'");
    }
    if (auto st = d->opt("step")) {
      c.derivatives.step = st->number();
      if (!(c.derivatives.step > 0.0)) st->fail("must be positive");
    }
  }
  if (auto t = root.opt("tolerances")) c.tolerances = detail::parse_tolerances(*t);
  if (auto o = root.opt("output")) {
    o->expect_object({"csv", "obj"});
    if (auto x = o->opt("csv")) c.csv_out = x->string();
    if (auto x = o->opt("obj")) c.obj_out = x->string();
  }
  if (auto p = root.opt("projection")) c.projection = detail::parse_projection(*p);
  if (auto w = root.opt("workers")) {
    c.workers = w->integer();
    if (c.workers < 1 || c.workers > 256) w->fail("must be in 1..256");
  }
  return c;
}

inline JobConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace canal4d::cli
