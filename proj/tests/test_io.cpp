#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace cft;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("curveflow_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

const std::string kMinimal = R"({"curve": {"kind": "kubire", "n_vertices": 30},
  "run": {"flow": "willmore", "dt": 1e-4, "max_steps": 10}})";

std::string field_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST(GenerateCurve, KubireLastVertexIsParameterOne) {
  const auto c = generate_curve({CurveKind::kubire, 30});
  ASSERT_EQ(c.size(), 30u);
  EXPECT_GT(signed_area(c), 0.0);
  EXPECT_NEAR(c[29].x, 0.9, 1e-15);
  EXPECT_NEAR(c[29].y, 0.54 * std::sin(1.8), 1e-15);
}

TEST(GenerateCurve, RegularPolygon) {
  CurveSpec s;
  s.kind = CurveKind::regular_polygon;
  s.n_vertices = 64;
  s.radius = 0.5;
  const auto f = functionals(generate_curve(s), 0.0);
  EXPECT_NEAR(f.L, 64 * std::sin(std::numbers::pi / 64), 1e-13);
  EXPECT_NEAR(f.A, 0.5 * 64 * 0.25 * std::sin(2 * std::numbers::pi / 64), 1e-14);
}

TEST(GenerateCurve, RectanglePreservesPerimeterAndArea) {
  CurveSpec s;
  s.kind = CurveKind::rectangle;
  s.n_vertices = 40;
  const auto c = generate_curve(s);
  ASSERT_EQ(c.size(), 40u);
  const auto f = functionals(c, 0.0);
  EXPECT_NEAR(f.L, 6.0, 1e-14);
  EXPECT_NEAR(f.A, 2.0, 1e-14);
  for (Point2 corner : {Point2{-1, -0.5}, Point2{1, -0.5}, Point2{1, 0.5}, Point2{-1, 0.5}})
    EXPECT_NE(std::find(c.vertices().begin(), c.vertices().end(), corner), c.vertices().end());
}

TEST(GenerateCurve, RectangleAllocationIsProportional) {
  // sides 3 and 1, N = 16: 6 + 2 + 6 + 2 segments
  const auto c = rectangle_curve(16, 3.0, 1.0);
  const auto r = edge_quantities(c).r;
  int long_edges = 0;
  for (double x : r) long_edges += std::abs(x - 0.5) < 1e-14;
  EXPECT_EQ(long_edges, 16);
}

TEST(GenerateCurve, RejectsBadSpecs) {
  CurveSpec s;
  s.n_vertices = 4;
  EXPECT_THROW(generate_curve(s), BadSpec);
  s = {};
  s.kind = CurveKind::rectangle;
  s.width = 0.0;
  EXPECT_THROW(generate_curve(s), BadSpec);
  s = {};
  s.kind = CurveKind::circle;
  s.radius = -1.0;
  EXPECT_THROW(generate_curve(s), BadSpec);
  s = {};
  s.kind = CurveKind::file;
  s.path = "/nonexistent/curve.csv";
  EXPECT_THROW(generate_curve(s), ParseError);
}

TEST(CurveCsv, RoundTripIsBitExact) {
  TempDir tmp;
  std::mt19937_64 rng(1);
  const auto c = star_curve(rng, 23);
  write_curve_csv(tmp.path() / "c.csv", c);
  CurveSpec s;
  s.kind = CurveKind::file;
  s.path = (tmp.path() / "c.csv").string();
  EXPECT_EQ(generate_curve(s), c);
}

TEST(CurveCsv, ClockwiseFileIsReversed) {
  TempDir tmp;
  const auto c = regular_polygon(9, 1.0);
  write_curve_csv(tmp.path() / "cw.csv", c.reversed());
  CurveSpec s;
  s.kind = CurveKind::file;
  s.path = (tmp.path() / "cw.csv").string();
  const auto g = generate_curve(s);
  EXPECT_GT(signed_area(g), 0.0);
}

TEST(CurveCsv, MalformedFilesReportTheLine) {
  TempDir tmp;
  const auto p = tmp.path() / "bad.csv";
  spit(p, "i,x,y\n1,0,0\n2,1,zero\n");
  try {
    read_curve_csv(p);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  spit(p, "x,y\n0,0\n");
  EXPECT_THROW(read_curve_csv(p), ParseError);
  spit(p, "i,x,y\n1,0,0,9\n");
  EXPECT_THROW(read_curve_csv(p), ParseError);
}

TEST(Config, MinimalConfigGetsDefaults) {
  const auto c = parse_config_text(kMinimal);
  EXPECT_EQ(c.run.solver.rel_tol, 1e-6);
  EXPECT_EQ(c.run.snapshot_every, 100);
  EXPECT_EQ(c.run.params.c0, 0.0);
  EXPECT_EQ(c.run.params.alpha, 0.0);
  EXPECT_EQ(c.run.params.scaling, SecondDifferenceScaling::per_du_squared);
  EXPECT_FALSE(c.run.stop_epsilon);
  EXPECT_FALSE(c.relocation);
  EXPECT_EQ(c.output.formats, (std::vector<std::string>{"csv", "json"}));
}

TEST(Config, ValidationErrorsNameTheField) {
  EXPECT_EQ(field_of(R"({"curve": {"kind": "kubire", "n_vertices": 30},
    "run": {"flow": "willmore", "dt": 0, "max_steps": 10}})"),
            "run.dt");
  EXPECT_EQ(field_of(R"({"curve": {"kind": "kubire", "n_vertices": 3},
    "run": {"flow": "willmore", "dt": 1e-4, "max_steps": 10}})"),
            "curve.n_vertices");
  EXPECT_EQ(field_of(R"({"curve": {"kind": "kubire", "n_vertices": 30},
    "run": {"flow": "willmore", "dt": 1e-4, "max_steps": 10, "solver": {"max_iters": 0}}})"),
            "run.solver.max_iters");
  EXPECT_EQ(field_of(R"({"curve": {"kind": "kubire", "n_vertices": 30},
    "run": {"flow": "sideways", "dt": 1e-4, "max_steps": 10}})"),
            "run.flow");
  EXPECT_EQ(field_of(R"({"curve": {"kind": "kubire", "n_vertices": 30},
    "run": {"flow": "willmore", "dt": 1e-4}})"),
            "run.max_steps");
  EXPECT_EQ(field_of(R"({"curve": {"kind": "kubire", "n_vertices": 30.5},
    "run": {"flow": "willmore", "dt": 1e-4, "max_steps": 10}})"),
            "curve.n_vertices");
  EXPECT_EQ(field_of(R"({"curve": {"kind": "kubire", "n_vertices": 30},
    "run": {"flow": "willmore", "dt": "small", "max_steps": 10}})"),
            "run.dt");
}

TEST(Config, UnknownKeysAreRejected) {
  EXPECT_EQ(field_of(R"({"curve": {"kind": "kubire", "n_vertices": 30, "colour": "red"},
    "run": {"flow": "willmore", "dt": 1e-4, "max_steps": 10}})"),
            "curve.colour");
  EXPECT_EQ(field_of(R"({"curve": {"kind": "kubire", "n_vertices": 30},
    "run": {"flow": "willmore", "dt": 1e-4, "max_steps": 10}, "extra": 1})"),
            "extra");
}

TEST(Config, SyntaxErrorsCarryLineAndColumn) {
  try {
    parse_config_text("{\n  \"curve\": {\"kind\": \"kubire\",,}\n}", "broken.json");
    FAIL();
  } catch (const ParseError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("broken.json"), std::string::npos);
    EXPECT_NE(m.find("line 2"), std::string::npos) << m;
    EXPECT_NE(m.find("column"), std::string::npos) << m;
  }
}

TEST(Config, ShippedExamOneConfig) {
  const auto c = parse_config(fs::path(CURVEFLOW_SOURCE_DIR) / "experiments" / "exam1.json");
  EXPECT_EQ(c.run.flow, Flow::willmore);
  EXPECT_EQ(c.curve.kind, CurveKind::kubire);
  EXPECT_EQ(c.curve.n_vertices, 30);
  EXPECT_EQ(c.run.params.dt, 1e-4);
  EXPECT_EQ(c.run.params.c0, 2.0);
  EXPECT_EQ(c.run.params.alpha, 50.0);
  EXPECT_EQ(c.run.max_steps, 3000);
  ASSERT_TRUE(c.relocation);
  EXPECT_EQ(c.relocation->alpha, 5.0);
  EXPECT_EQ(c.relocation->until_time, 0.1);
}

TEST(Config, AllShippedConfigsParse) {
  int count = 0;
  for (const auto& e : fs::directory_iterator(fs::path(CURVEFLOW_SOURCE_DIR) / "experiments")) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(parse_config(e.path())) << e.path();
    ++count;
  }
  EXPECT_GE(count, 5);
}

TEST(Config, EchoReparses) {
  const auto c = parse_config(fs::path(CURVEFLOW_SOURCE_DIR) / "experiments" / "exam4_rectangle.json");
  const auto d = parse_config_text(to_json(c).dump());
  EXPECT_EQ(to_json(d), to_json(c));
}

TEST(Outputs, OneStepRun) {
  TempDir tmp;
  const auto cfg = parse_config_text(R"({"curve": {"kind": "kubire", "n_vertices": 30},
    "relocation": {},
    "run": {"flow": "willmore", "dt": 1e-4, "c0": 2, "alpha": 50, "max_steps": 1}})");
  const auto ts = run(prepare_initial_curve(cfg), cfg.run);
  write_outputs(ts, tmp.path(), cfg.output.formats, to_json(cfg));

  const auto diag = lines(slurp(tmp.path() / "diagnostics.csv"));
  ASSERT_EQ(diag.size(), 2u);
  EXPECT_EQ(diag[0], "step,B,L,A,lambda,mu,gamma,mesh_ratio,solver_iters,residual");
  EXPECT_EQ(diag[1].rfind("1,", 0), 0u);
  EXPECT_NE(diag[1].find(",,,"), std::string::npos);  // lambda and mu are empty for Willmore
  EXPECT_TRUE(fs::exists(tmp.path() / "snapshot_0.csv"));
  EXPECT_TRUE(fs::exists(tmp.path() / "snapshot_1.csv"));

  const auto summary = nlohmann::json::parse(slurp(tmp.path() / "run_summary.json"));
  EXPECT_EQ(summary["termination"], "max_steps");
  EXPECT_EQ(summary["steps"], 1);
  EXPECT_EQ(summary["config"]["run"]["flow"], "willmore");
  EXPECT_DOUBLE_EQ(summary["final"]["B"].get<double>(), ts.diagnostics.back().B);

  // snapshot re-ingestion is bit exact
  EXPECT_EQ(read_curve_csv(tmp.path() / "snapshot_1.csv"), ts.final_curve());
  for (const auto& e : fs::directory_iterator(tmp.path())) EXPECT_NE(e.path().extension(), ".tmp");
}

TEST(Outputs, HelfrichColumnsAndConservation) {
  TempDir tmp;
  const auto cfg = parse_config_text(R"({"curve": {"kind": "kubire", "n_vertices": 30},
    "relocation": {"alpha": 5, "dt": 1e-4, "until_time": 0.1},
    "run": {"flow": "helfrich", "dt": 1e-4, "c0": 2, "alpha": 100, "max_steps": 10},
    "output": {"formats": ["csv"]}})");
  const auto ts = run(prepare_initial_curve(cfg), cfg.run);
  write_outputs(ts, tmp.path(), cfg.output.formats);
  EXPECT_FALSE(fs::exists(tmp.path() / "run_summary.json"));
  const auto rows = lines(slurp(tmp.path() / "diagnostics.csv"));
  ASSERT_EQ(rows.size(), 11u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<std::string> f;
    std::stringstream ss(rows[i]);
    for (std::string t; std::getline(ss, t, ',');) f.push_back(t);
    ASSERT_EQ(f.size(), 10u);
    const double L = std::stod(f[2]), A = std::stod(f[3]), gamma = std::stod(f[6]);
    EXPECT_TRUE(std::isfinite(gamma));
    EXPECT_NEAR(L, ts.L0, 1e-8 * ts.L0);
    EXPECT_NEAR(A, ts.A0, 1e-8 * ts.A0);
  }
}

TEST(Outputs, UnwritableDirectoryIsAnIoError) {
  TempDir tmp;
  spit(tmp.path() / "file", "x");
  TimeSeries ts;
  ts.snapshots.push_back({0, regular_polygon(6, 1.0)});
  EXPECT_THROW(write_outputs(ts, tmp.path() / "file" / "sub", {"csv"}), IoError);
}

TEST(Format, SeventeenSignificantDigits) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_real(1.0 / 3.0)), 1.0 / 3.0);
}
