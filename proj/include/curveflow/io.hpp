#pragma once

// Initial curves, experiment configuration and result files.
//
// Config files are JSON objects; see experiments/README.md for the schema.
// Unknown keys are rejected and every validation error names the offending
// field by its dotted path (e.g. "run.dt").

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "curveflow/curve.hpp"
#include "curveflow/driver.hpp"
#include "curveflow/errors.hpp"
#include "curveflow/point.hpp"

namespace curveflow {

enum class CurveKind { kubire, rectangle, circle, regular_polygon, file };

struct CurveSpec {
  CurveKind kind = CurveKind::kubire;
  int n_vertices = 30;
  double width = 2.0;   ///< rectangle
  double height = 1.0;  ///< rectangle
  double radius = 0.5;  ///< circle, regular_polygon
  Point2 center{};      ///< rectangle, circle, regular_polygon
  std::string path;     ///< file
};

/// 17 significant digits: enough for a lossless double round trip.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// The closed test curve
///   x1 = 0.5 a1,  x2 = 0.54 a3,  a1 = 1.8 cos(2 pi t),
///   a2 = 0.2 + sin(pi t) sin(6 pi t) sin(2 a1),
///   a3 = 0.5 sin(2 pi t) + sin(a1) + a2 sin(2 pi t),
/// sampled at t = i / N for i = 1..N.
inline PolygonalCurve kubire_curve(int n) {
  using std::numbers::pi;
  std::vector<Point2> v;
  v.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double a1 = 1.8 * std::cos(2.0 * pi * t);
    const double a2 = 0.2 + std::sin(pi * t) * std::sin(6.0 * pi * t) * std::sin(2.0 * a1);
    const double a3 = 0.5 * std::sin(2.0 * pi * t) + std::sin(a1) + a2 * std::sin(2.0 * pi * t);
    v.push_back({0.5 * a1, 0.54 * a3});
  }
  return PolygonalCurve(std::move(v));
}

/// Vertices at angles 2 pi i / N, counterclockwise.
inline PolygonalCurve regular_polygon(int n, double radius, Point2 center = {}) {
  using std::numbers::pi;
  std::vector<Point2> v;
  v.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * pi * i / n;
    v.push_back(center + radius * Point2{std::cos(a), std::sin(a)});
  }
  return PolygonalCurve(std::move(v));
}

/// Axis-aligned rectangle, counterclockwise from the lower-left corner.
/// Each side gets a share of the N segments proportional to its length
/// (largest remainder, at least one), so all four corners are vertices.
inline PolygonalCurve rectangle_curve(int n, double width, double height, Point2 center = {}) {
  if (n < 4) throw BadSpec("a rectangle needs at least 4 vertices");
  const double sides[4] = {width, height, width, height};
  const double perimeter = 2.0 * (width + height);
  int count[4];
  double remainder[4];
  int used = 0;
  for (int s = 0; s < 4; ++s) {
    const double exact = n * sides[s] / perimeter;
    count[s] = std::max(1, static_cast<int>(std::floor(exact)));
    remainder[s] = exact - count[s];
    used += count[s];
  }
  while (used < n) {
    int best = 0;
    for (int s = 1; s < 4; ++s)
      if (remainder[s] > remainder[best]) best = s;
    ++count[best];
    remainder[best] -= 1.0;
    ++used;
  }
  while (used > n) {
    int best = -1;
    for (int s = 0; s < 4; ++s)
      if (count[s] > 1 && (best < 0 || remainder[s] < remainder[best])) best = s;
    --count[best];
    remainder[best] += 1.0;
    --used;
  }
  const Point2 corners[4] = {center + Point2{-width / 2, -height / 2}, center + Point2{width / 2, -height / 2},
                             center + Point2{width / 2, height / 2}, center + Point2{-width / 2, height / 2}};
  std::vector<Point2> v;
  v.reserve(static_cast<std::size_t>(n));
  for (int s = 0; s < 4; ++s) {
    const Point2 a = corners[s], b = corners[(s + 1) % 4];
    for (int j = 0; j < count[s]; ++j) v.push_back(a + (static_cast<double>(j) / count[s]) * (b - a));
  }
  return PolygonalCurve(std::move(v));
}

/// Reads the `i,x,y` snapshot format. Rows are taken in file order.
inline PolygonalCurve read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open");
  std::string line;
  int lineno = 0;
  std::vector<Point2> v;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "i,x,y") throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected header 'i,x,y'");
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string fields[3];
    int nf = 0;
    for (std::string tok; std::getline(ss, tok, ',');) {
      if (nf == 3) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": too many fields");
      fields[nf++] = tok;
    }
    if (nf != 3) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 3 fields");
    double xy[2];
    for (int k = 0; k < 2; ++k) {
      const char* s = fields[k + 1].c_str();
      char* end = nullptr;
      errno = 0;
      xy[k] = std::strtod(s, &end);
      if (end == s || *end != '\0' || errno == ERANGE || !std::isfinite(xy[k]))
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + fields[k + 1] + "'");
    }
    v.push_back({xy[0], xy[1]});
  }
  if (!header) throw ParseError(path.string() + ": empty file");
  if (v.size() < 3) throw ParseError(path.string() + ": fewer than 3 vertices");
  return PolygonalCurve(std::move(v));
}

namespace detail {

/// Writes via a temporary file and rename so readers never see a partial file.
inline void write_atomically(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string() + ": cannot open for writing");
    out << content;
    out.close();
    if (!out) throw IoError(tmp.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(path.string() + ": " + ec.message());
}

}  // namespace detail

inline std::string curve_csv(const PolygonalCurve& c) {
  std::string s = "i,x,y\n";
  for (std::size_t i = 0; i < c.size(); ++i)
    s += std::to_string(i + 1) + "," + format_real(c[i].x) + "," + format_real(c[i].y) + "\n";
  return s;
}

inline void write_curve_csv(const std::filesystem::path& path, const PolygonalCurve& c) {
  detail::write_atomically(path, curve_csv(c));
}

/// Builds the initial curve. The result is counterclockwise and passes
/// validate_for_flow, or this throws.
inline PolygonalCurve generate_curve(const CurveSpec& spec) {
  PolygonalCurve c;
  if (spec.kind == CurveKind::file) {
    c = read_curve_csv(spec.path);
  } else {
    if (spec.n_vertices < static_cast<int>(kMinSimulationVertices))
      throw BadSpec("n_vertices must be at least " + std::to_string(kMinSimulationVertices));
    switch (spec.kind) {
      case CurveKind::kubire:
        c = kubire_curve(spec.n_vertices);
        break;
      case CurveKind::rectangle:
        if (!(spec.width > 0.0) || !(spec.height > 0.0)) throw BadSpec("rectangle width and height must be positive");
        c = rectangle_curve(spec.n_vertices, spec.width, spec.height, spec.center);
        break;
      case CurveKind::circle:
      case CurveKind::regular_polygon:
        if (!(spec.radius > 0.0)) throw BadSpec("radius must be positive");
        c = regular_polygon(spec.n_vertices, spec.radius, spec.center);
        break;
      case CurveKind::file:
        break;
    }
  }
  if (normalize_orientation(c) && spec.kind == CurveKind::file)
    std::clog << "warning: " << spec.path << " is clockwise; vertex order reversed\n";
  validate_for_flow(c);
  return c;
}

struct RelocationConfig {
  double alpha = 5.0;
  double dt = 1e-4;
  double until_time = 0.1;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};
};

struct ExperimentConfig {
  CurveSpec curve;
  std::optional<RelocationConfig> relocation;
  RunConfig run;
  OutputConfig output;
};

namespace detail {

using nlohmann::json;

/// Typed, path-aware access to one JSON object; rejects keys nobody asked for.
class FieldReader {
 public:
  FieldReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "must be a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ValidationError(field(key), "is required");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) throw ValidationError(field(key), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(field(key), "must be finite");
    return d;
  }
  double number(const std::string& key, double fallback) {
    seen_.insert(key);
    return has(key) ? number(key) : fallback;
  }

  int integer(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_integer()) throw ValidationError(field(key), "must be an integer");
    return v.get<int>();
  }
  int integer(const std::string& key, int fallback) {
    seen_.insert(key);
    return has(key) ? integer(key) : fallback;
  }

  std::string string(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) throw ValidationError(field(key), "must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, std::string fallback) {
    seen_.insert(key);
    return has(key) ? string(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw ValidationError(field(key), "must be true or false");
    return v.get<bool>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ValidationError(field(key), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline CurveKind parse_curve_kind(const std::string& s, const std::string& field) {
  if (s == "kubire") return CurveKind::kubire;
  if (s == "rectangle") return CurveKind::rectangle;
  if (s == "circle") return CurveKind::circle;
  if (s == "regular_polygon") return CurveKind::regular_polygon;
  if (s == "file") return CurveKind::file;
  throw ValidationError(field, "unknown curve kind '" + s + "'");
}

inline const char* to_string(CurveKind k) {
  switch (k) {
    case CurveKind::kubire: return "kubire";
    case CurveKind::rectangle: return "rectangle";
    case CurveKind::circle: return "circle";
    case CurveKind::regular_polygon: return "regular_polygon";
    case CurveKind::file: return "file";
  }
  return "?";
}

inline const char* to_string(SecondDifferenceScaling s) {
  return s == SecondDifferenceScaling::per_du ? "per_du" : "per_du_squared";
}

inline CurveSpec parse_curve(const json& j, const std::string& path) {
  FieldReader r(j, path);
  CurveSpec s;
  s.kind = parse_curve_kind(r.string("kind"), r.field("kind"));
  if (s.kind == CurveKind::file) {
    s.path = r.string("path");
    s.n_vertices = 0;
  } else {
    s.n_vertices = r.integer("n_vertices");
    if (s.n_vertices < static_cast<int>(kMinSimulationVertices))
      throw ValidationError(r.field("n_vertices"), "must be at least " + std::to_string(kMinSimulationVertices));
  }
  s.width = r.number("width", s.width);
  s.height = r.number("height", s.height);
  s.radius = r.number("radius", s.radius);
  if (r.has("center")) {
    const auto& c = r.raw("center");
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
      throw ValidationError(r.field("center"), "must be [x, y]");
    s.center = {c[0].get<double>(), c[1].get<double>()};
  } else {
    r.number("center", 0.0);  // mark as known
  }
  if (!(s.width > 0.0)) throw ValidationError(r.field("width"), "must be positive");
  if (!(s.height > 0.0)) throw ValidationError(r.field("height"), "must be positive");
  if (!(s.radius > 0.0)) throw ValidationError(r.field("radius"), "must be positive");
  r.finish();
  return s;
}

inline SolverConfig parse_solver(const json& j, const std::string& path) {
  FieldReader r(j, path);
  SolverConfig s;
  s.rel_tol = r.number("rel_tol", s.rel_tol);
  s.abs_tol = r.number("abs_tol", s.abs_tol);
  s.max_iters = r.integer("max_iters", s.max_iters);
  s.fd_step = r.number("fd_step", s.fd_step);
  s.damping = r.boolean("damping", s.damping);
  s.max_halvings = r.integer("max_halvings", s.max_halvings);
  r.finish();
  try {
    validate(s);
  } catch (const ValidationError& e) {
    throw ValidationError(path + e.field().substr(std::string("solver").size()),
                          std::string(e.what()).substr(e.field().size() + 2));
  }
  return s;
}

inline RunConfig parse_run(const json& j, const std::string& path) {
  FieldReader r(j, path);
  RunConfig c;
  const auto flow = r.string("flow");
  if (flow == "willmore")
    c.flow = Flow::willmore;
  else if (flow == "helfrich")
    c.flow = Flow::helfrich;
  else if (flow == "relocate")
    c.flow = Flow::relocate;
  else
    throw ValidationError(r.field("flow"), "must be willmore, helfrich or relocate");

  c.params.dt = r.number("dt");
  if (!(c.params.dt > 0.0)) throw ValidationError(r.field("dt"), "must be positive");
  c.params.c0 = r.number("c0", 0.0);
  c.params.alpha = r.number("alpha", 0.0);
  if (!(c.params.alpha >= 0.0)) throw ValidationError(r.field("alpha"), "must be non-negative");
  const auto scaling = r.string("second_difference", "per_du_squared");
  if (scaling == "per_du_squared")
    c.params.scaling = SecondDifferenceScaling::per_du_squared;
  else if (scaling == "per_du")
    c.params.scaling = SecondDifferenceScaling::per_du;
  else
    throw ValidationError(r.field("second_difference"), "must be per_du or per_du_squared");

  c.max_steps = r.integer("max_steps");
  if (c.max_steps < 1) throw ValidationError(r.field("max_steps"), "must be at least 1");
  if (r.has("stop_epsilon")) {
    c.stop_epsilon = r.number("stop_epsilon");
    if (!(*c.stop_epsilon > 0.0)) throw ValidationError(r.field("stop_epsilon"), "must be positive");
  } else {
    r.number("stop_epsilon", 0.0);
  }
  c.snapshot_every = r.integer("snapshot_every", 100);
  if (c.snapshot_every < 1) throw ValidationError(r.field("snapshot_every"), "must be at least 1");
  if (r.has("solver"))
    c.solver = parse_solver(r.raw("solver"), r.field("solver"));
  else
    r.number("solver", 0.0);
  r.finish();
  return c;
}

}  // namespace detail

/// Parses and validates a config from text; `source` prefixes messages.
inline ExperimentConfig parse_config_text(std::string_view text, const std::string& source = "<config>") {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  detail::FieldReader r(j, "");
  ExperimentConfig c;
  c.curve = detail::parse_curve(r.raw("curve"), "curve");
  if (r.has("relocation")) {
    detail::FieldReader rr(r.raw("relocation"), "relocation");
    RelocationConfig rc;
    rc.alpha = rr.number("alpha", rc.alpha);
    rc.dt = rr.number("dt", rc.dt);
    rc.until_time = rr.number("until_time", rc.until_time);
    if (!(rc.alpha >= 0.0)) throw ValidationError("relocation.alpha", "must be non-negative");
    if (!(rc.dt > 0.0)) throw ValidationError("relocation.dt", "must be positive");
    if (!(rc.until_time >= 0.0)) throw ValidationError("relocation.until_time", "must be non-negative");
    rr.finish();
    c.relocation = rc;
  } else {
    r.number("relocation", 0.0);
  }
  c.run = detail::parse_run(r.raw("run"), "run");
  if (r.has("output")) {
    detail::FieldReader ro(r.raw("output"), "output");
    c.output.directory = ro.string("directory", c.output.directory);
    if (ro.has("formats")) {
      const auto& f = ro.raw("formats");
      if (!f.is_array()) throw ValidationError("output.formats", "must be an array of strings");
      c.output.formats.clear();
      for (const auto& e : f) {
        if (!e.is_string() || (e != "csv" && e != "json"))
          throw ValidationError("output.formats", "entries must be \"csv\" or \"json\"");
        c.output.formats.push_back(e.get<std::string>());
      }
    } else {
      ro.number("formats", 0.0);
    }
    ro.finish();
  } else {
    r.number("output", 0.0);
  }
  r.finish();
  return c;
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

/// Curve spec for `curveflow generate --spec`: either a bare curve object
/// or a full experiment config, whose "curve" member is then used.
inline CurveSpec parse_curve_spec_text(std::string_view text, const std::string& source = "<spec>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  if (j.is_object() && j.contains("curve") && !j.contains("kind")) return parse_config_text(text, source).curve;
  return detail::parse_curve(j, "curve");
}

inline CurveSpec parse_curve_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_curve_spec_text(ss.str(), path.string());
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["curve"] = {{"kind", detail::to_string(c.curve.kind)}};
  if (c.curve.kind == CurveKind::file) {
    j["curve"]["path"] = c.curve.path;
  } else {
    j["curve"]["n_vertices"] = c.curve.n_vertices;
  }
  if (c.curve.kind == CurveKind::rectangle) {
    j["curve"]["width"] = c.curve.width;
    j["curve"]["height"] = c.curve.height;
  }
  if (c.curve.kind == CurveKind::circle || c.curve.kind == CurveKind::regular_polygon)
    j["curve"]["radius"] = c.curve.radius;
  if (c.curve.kind != CurveKind::file && c.curve.kind != CurveKind::kubire)
    j["curve"]["center"] = {c.curve.center.x, c.curve.center.y};
  if (c.relocation)
    j["relocation"] = {{"alpha", c.relocation->alpha}, {"dt", c.relocation->dt}, {"until_time", c.relocation->until_time}};
  const auto& r = c.run;
  j["run"] = {{"flow", to_string(r.flow)},
              {"dt", r.params.dt},
              {"c0", r.params.c0},
              {"alpha", r.params.alpha},
              {"second_difference", detail::to_string(r.params.scaling)},
              {"max_steps", r.max_steps},
              {"snapshot_every", r.snapshot_every},
              {"solver",
               {{"rel_tol", r.solver.rel_tol},
                {"abs_tol", r.solver.abs_tol},
                {"max_iters", r.solver.max_iters},
                {"fd_step", r.solver.fd_step},
                {"damping", r.solver.damping},
                {"max_halvings", r.solver.max_halvings}}}};
  if (r.stop_epsilon) j["run"]["stop_epsilon"] = *r.stop_epsilon;
  j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  return j;
}

/// Generated curve, relocated first when the config asks for it.
inline PolygonalCurve prepare_initial_curve(const ExperimentConfig& c) {
  auto curve = generate_curve(c.curve);
  if (c.relocation) curve = relocate(curve, c.relocation->alpha, c.relocation->dt, c.relocation->until_time, c.run.solver);
  return curve;
}

inline std::string diagnostics_csv(const TimeSeries& ts) {
  std::string s = "step,B,L,A,lambda,mu,gamma,mesh_ratio,solver_iters,residual\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  for (const auto& d : ts.diagnostics) {
    s += std::to_string(d.step) + "," + format_real(d.B) + "," + format_real(d.L) + "," + format_real(d.A) + "," +
         opt(d.lambda) + "," + opt(d.mu) + "," + opt(d.gamma) + "," + format_real(d.mesh_ratio) + "," +
         std::to_string(d.solver_iterations) + "," + format_real(d.residual) + "\n";
  }
  return s;
}

/// Writes diagnostics.csv and snapshot_<step>.csv ("csv") and
/// run_summary.json ("json") into `dir`, creating it if needed.
inline void write_outputs(const TimeSeries& ts, const std::filesystem::path& dir,
                          const std::vector<std::string>& formats, const nlohmann::json& config_echo = {}) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string() + ": " + ec.message());
  auto wants = [&](const char* f) { return std::find(formats.begin(), formats.end(), f) != formats.end(); };

  if (wants("csv")) {
    detail::write_atomically(dir / "diagnostics.csv", diagnostics_csv(ts));
    for (const auto& s : ts.snapshots)
      write_curve_csv(dir / ("snapshot_" + std::to_string(s.step) + ".csv"), s.curve);
  }
  if (wants("json")) {
    nlohmann::json j;
    j["config"] = config_echo;
    j["termination"] = to_string(ts.termination);
    if (!ts.failure_message.empty()) j["failure"] = ts.failure_message;
    j["steps"] = ts.diagnostics.empty() ? 0 : ts.diagnostics.back().step;
    j["initial"] = {{"B", ts.B0}, {"L", ts.L0}, {"A", ts.A0}};
    if (!ts.diagnostics.empty()) {
      const auto& d = ts.diagnostics.back();
      j["final"] = {{"B", d.B}, {"L", d.L}, {"A", d.A}, {"mesh_ratio", d.mesh_ratio}};
      if (d.gamma) j["final"]["gamma"] = *d.gamma;
      if (d.lambda) j["final"]["lambda"] = *d.lambda;
      if (d.mu) j["final"]["mu"] = *d.mu;
    }
    detail::write_atomically(dir / "run_summary.json", j.dump(2) + "\n");
  }
}

}  // namespace curveflow
