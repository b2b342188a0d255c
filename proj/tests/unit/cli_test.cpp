#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "canal4d/cli/app.hpp"

using namespace canal4d;
using namespace canal4d::cli;

namespace {

struct CliResult {
  int code;
  std::string out, err;
};

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("canal4d_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }

  std::string write(const std::string& name, const json& doc) const {
    const auto p = path_ / name;
    std::ofstream(p) << doc.dump(2);
    return p.string();
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

CliResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

json axis(double lo, double hi, int n, bool endpoint = true) {
  json a{{"min", lo}, {"max", hi}, {"count", n}};
  if (!endpoint) a["endpoint"] = false;
  return a;
}

json tube(int m, int n = 3) {
  json c{{"type", m}, {"radius", {{"polynomial", {1.0}}}}};
  if (m == 7)
    c["grid"] = {{"u", axis(-1, 1, n)}, {"v", axis(0, 2 * std::numbers::pi, n, false)}, {"w", axis(-1, 1, n)}};
  else
    c["grid"] = {{"u", axis(-1, 1, n)}, {"v", axis(-1, 1, n)}, {"w", axis(-1, 1, n)}};
  return c;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') {
        quoted = !quoted;
      } else if (c == ',' && !quoted) {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    f.push_back(cur);
    rows.push_back(f);
  }
  return rows;
}

}  // namespace

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format(1.0), "1");
  EXPECT_EQ(format(-2.0 / 3.0), "-0.6666666666666666");
  EXPECT_EQ(format(0.1), "0.1");
  EXPECT_EQ(std::stod(format(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format(1e-300), "1e-300");
}

TEST(Config, UnknownKeysNameTheirPath) {
  json c = tube(2);
  c["grid"]["u"]["cnt"] = 3;
  try {
    parse_config(c);
    FAIL() << "no error";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "grid.u.cnt");
  }
  c = tube(2);
  c["colour"] = "red";
  EXPECT_THROW(parse_config(c), ConfigError);
}

TEST(Config, FieldErrors) {
  auto path_of = [](const json& c) {
    try {
      parse_config(c);
    } catch (const ConfigError& e) {
      return e.path();
    }
    return std::string("<none>");
  };
  json c = tube(2);
  c["type"] = 9;
  EXPECT_EQ(path_of(c), "type");
  c = tube(2);
  c["spine"] = {{"kind", "timelike"}};
  EXPECT_EQ(path_of(c), "spine.kind");
  c = tube(2);
  c["spine"] = {{"curvatures", {1, 2}}};
  EXPECT_EQ(path_of(c), "spine.curvatures");
  c = tube(2);
  c["radius"] = {{"family", "cubic"}};
  EXPECT_EQ(path_of(c), "radius.family");
  c = tube(2);
  c["derivatives"] = {{"mode", "spectral"}};
  EXPECT_EQ(path_of(c), "derivatives.mode");
  c = tube(2);
  c["spine"] = {{"frame0", {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}}};
  EXPECT_EQ(path_of(c), "spine.frame0");
  c = tube(2);
  c["projection"] = {{"drop", "x5"}};
  EXPECT_EQ(path_of(c), "projection.drop");
  c = tube(2);
  c.erase("radius");
  EXPECT_EQ(path_of(c), "radius");
}

TEST(Generate, UnitTubeTypeTwo) {
  TempDir d;
  json c = tube(2);
  c["spine"] = {{"gamma0", {0.5, 0, 0, 2}}};
  const CliResult r = run_cli({"generate", "--config", d.write("c.json", c)});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 28u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"u", "v", "w", "x1", "x2", "x3", "x4"}));
  // Node (0, 0, 0) is index 13 (u middle, v middle, w middle).
  EXPECT_EQ(rows[14], (std::vector<std::string>{"0", "0", "0", "1.5", "0", "0", "2"}));
}

TEST(Generate, InvalidPairingExitsTwo) {
  TempDir d;
  json c = tube(1);
  c["spine"] = {{"kind", "timelike"}};
  const CliResult r = run_cli({"generate", "--config", d.write("c.json", c)});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("spine.kind"), std::string::npos);
}

TEST(Generate, EmptyAxisExitsTwo) {
  TempDir d;
  json c = tube(2);
  c["grid"]["v"]["count"] = 0;
  const CliResult r = run_cli({"generate", "--config", d.write("c.json", c)});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("grid.v.count"), std::string::npos);
}

TEST(Generate, InvalidRadiusExitsTwo) {
  TempDir d;
  json c = tube(1);  // s = -1 with r' = 0
  const CliResult r = run_cli({"generate", "--config", d.write("c.json", c)});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("radius"), std::string::npos);
}

TEST(Generate, MissingConfigAndBadArguments) {
  EXPECT_EQ(run_cli({"generate"}).code, 2);
  EXPECT_EQ(run_cli({"generate", "--config", "/nonexistent/c.json"}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
}

TEST(Curvature, UnitTubes) {
  TempDir d;
  for (int m : {2, 7}) {
    const CliResult r = run_cli({"curvature", "--config", d.write("c.json", tube(m))});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 28u);
    EXPECT_EQ(rows[0].size(), 17u);
    EXPECT_EQ(rows[0][7], "K_closed");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_EQ(std::stod(rows[i][7]), 0.0);
      EXPECT_NEAR(std::stod(rows[i][8]), m == 2 ? -2.0 / 3.0 : 2.0 / 3.0, 1e-15);
      EXPECT_NEAR(std::stod(rows[i][12]), 0.0, 1e-6);
      EXPECT_NEAR(std::stod(rows[i][13]), std::stod(rows[i][8]), 1e-6);
      EXPECT_LT(std::abs(std::stod(rows[i][14])), 1e-14);
      EXPECT_EQ(rows[i][16], "");
    }
  }
}

TEST(Curvature, NoOracleLeavesColumnsEmpty) {
  TempDir d;
  const CliResult r = run_cli({"curvature", "--no-oracle", "--config", d.write("c.json", tube(2))});
  ASSERT_EQ(r.code, 0);
  for (const auto& row : parse_csv(r.out)) {
    ASSERT_EQ(row.size(), 17u);
    if (row[0] == "u") continue;
    EXPECT_EQ(row[12], "");
    EXPECT_EQ(row[13], "");
    EXPECT_NE(row[7], "");
  }
}

TEST(Curvature, NodeOnValidityBoundaryRecordsError) {
  // w = +-pi/2 is where the circular shape functions lose rank.
  TempDir d;
  json c = tube(7, 5);
  c["grid"]["w"] = axis(-std::numbers::pi / 2, std::numbers::pi / 2, 5);
  const CliResult r = run_cli({"curvature", "--config", d.write("c.json", c)});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 126u);
  int errors = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double w = std::stod(rows[i][2]);
    const bool edge = std::abs(std::abs(w) - std::numbers::pi / 2) < 1e-12;
    EXPECT_EQ(!rows[i][16].empty(), edge) << "row " << i;
    if (edge) {
      ++errors;
      EXPECT_EQ(rows[i][12], "");
    } else {
      EXPECT_NE(rows[i][12], "");
    }
    EXPECT_NE(rows[i][3], "");
  }
  EXPECT_EQ(errors, 50);
}

TEST(Curvature, SingularNodesRecordedAndRunContinues) {
  TempDir d;
  json c{{"type", 1},
         {"radius", {{"family", "flat_root"}, {"c1", 0}, {"c2", 0}}},
         {"grid", {{"u", axis(1.5, 2.5, 2)}, {"v", axis(-0.5, 0.5, 2)}, {"w", axis(-0.5, 0.5, 2)}}}};
  const CliResult r = run_cli({"curvature", "--config", d.write("c.json", c)});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 9u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][7], "");
    EXPECT_NE(rows[i][16].find("singular"), std::string::npos) << rows[i][16];
    EXPECT_NE(rows[i][3], "");
  }
}

TEST(Curvature, DeterministicAcrossWorkers) {
  TempDir d;
  const json c = json::parse(R"({"type": 3, "spine": {"curvatures": [0.3, 0.2, 0.1]},
      "radius": {"polynomial": [0.2, 1.5]},
      "grid": {"u": {"min": 0.1, "max": 1, "count": 5}, "v": {"min": -0.5, "max": 0.5, "count": 4},
               "w": {"min": -0.5, "max": 0.5, "count": 3}}})");
  const std::string cfg = d.write("c.json", c);
  const CliResult a = run_cli({"curvature", "--config", cfg, "--workers", "1"});
  const CliResult b = run_cli({"curvature", "--config", cfg, "--workers", "7"});
  const CliResult e = run_cli({"curvature", "--config", cfg, "--workers", "7"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(b.out, e.out);
  EXPECT_EQ(parse_csv(a.out).size(), 61u);
}

TEST(Curvature, WritesToOutPath) {
  TempDir d;
  const std::string out = d.file("k.csv");
  const CliResult r = run_cli({"curvature", "--config", d.write("c.json", tube(2)), "--out", out});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(parse_csv(ss.str()).size(), 28u);
}

TEST(Verify, ConfigJobPassesAndFails) {
  TempDir d;
  const std::string cfg = d.write("c.json", tube(2));
  const CliResult ok = run_cli({"verify", "--config", cfg});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("verify: ok"), std::string::npos);
  const CliResult tight = run_cli({"verify", "--config", cfg, "--tol", "1e-15"});
  EXPECT_EQ(tight.code, 1);
  EXPECT_NE(tight.out.find("worst offender"), std::string::npos);
}

TEST(Verify, BuiltinBattery) {
  const CliResult ok = run_cli({"verify", "--all-types"});
  EXPECT_EQ(ok.code, 0) << ok.out;
  const CliResult tight = run_cli({"verify", "--all-types", "--tol", "1e-15"});
  EXPECT_EQ(tight.code, 1);
  const CliResult fault = run_cli({"verify", "--all-types", "--inject-fault"});
  EXPECT_EQ(fault.code, 1);
  EXPECT_NE(fault.out.find("FAIL m=1 oracle.K"), std::string::npos);
  EXPECT_NE(fault.out.find("worst offender: m="), std::string::npos);
  EXPECT_NE(fault.out.find(" at u="), std::string::npos);
}

TEST(ExportObj, TwoByTwoGridIsTwoTriangles) {
  TempDir d;
  json c = tube(2, 2);
  const CliResult r = run_cli({"export-obj", "--config", d.write("c.json", c), "--slice", "u=0"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  int v = 0, f = 0;
  while (std::getline(in, line)) {
    v += line.rfind("v ", 0) == 0;
    f += line.rfind("f ", 0) == 0;
  }
  EXPECT_EQ(v, 4);
  EXPECT_EQ(f, 2);
}

TEST(ExportObj, TypeSevenTubeSlice) {
  TempDir d;
  json c = tube(7, 6);
  const CliResult r = run_cli({"export-obj", "--config", d.write("c.json", c), "--slice", "w=0"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string tag;
  int v = 0, f = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      ls >> x >> y >> z;
      // Dropping x1 leaves (cos v, sin v, 0) on the unit circle.
      EXPECT_NEAR(x * x + y * y, 1.0, 1e-14);
      EXPECT_NEAR(z, 0.0, 1e-15);
      ++v;
    } else if (tag == "f") {
      int a, b, e;
      ls >> a >> b >> e;
      EXPECT_GE(std::min({a, b, e}), 1);
      EXPECT_LE(std::max({a, b, e}), 36);
      ++f;
    }
  }
  EXPECT_EQ(v, 36);
  EXPECT_EQ(f, 2 * 5 * 5);
}

TEST(ExportObj, ProjectionMatrix) {
  TempDir d;
  json c = tube(7, 2);
  c["projection"] = {{"matrix", {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}}}};
  const CliResult r = run_cli({"export-obj", "--config", d.write("c.json", c), "--slice", "v=0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "v -1 0.5403023058681398 -0.8414709848078965");
}

TEST(ExportObj, Errors) {
  TempDir d;
  json c = tube(2, 3);
  c["grid"]["u"] = axis(0, 0, 1);
  const std::string one = d.write("one.json", c);
  EXPECT_EQ(run_cli({"export-obj", "--config", one, "--slice", "u=0"}).code, 2);
  const std::string cfg = d.write("c.json", tube(2, 3));
  EXPECT_EQ(run_cli({"export-obj", "--config", cfg, "--slice", "u=5"}).code, 2);
  EXPECT_EQ(run_cli({"export-obj", "--config", cfg, "--slice", "x=0"}).code, 2);
  EXPECT_EQ(run_cli({"export-obj", "--config", cfg, "--slice", "u=abc"}).code, 2);
  EXPECT_EQ(run_cli({"export-obj", "--config", cfg}).code, 2);
}

TEST(ExportObj, Deterministic) {
  TempDir d;
  json c = tube(7, 9);
  c["workers"] = 4;
  const std::string cfg = d.write("c.json", c);
  EXPECT_EQ(run_cli({"export-obj", "--config", cfg, "--slice", "u=0.5"}).out,
            run_cli({"export-obj", "--config", cfg, "--slice", "u=0.5", "--workers", "1"}).out);
}
