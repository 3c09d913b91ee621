#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <curveflow/io.hpp>

namespace fs = std::filesystem;
using namespace curveflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFailure = 3;

int exit_code(Termination t) {
  return t == Termination::max_steps || t == Termination::epsilon_stop ? kExitOk : kExitFailure;
}

int cmd_generate(const std::string& spec_path, const std::string& out) {
  const auto curve = generate_curve(parse_curve_spec(spec_path));
  write_curve_csv(out, curve);
  const auto f = functionals(curve, 0.0, SecondDifferenceScaling::per_du_squared);
  std::printf("wrote %zu vertices to %s (L=%.10g A=%.10g mesh_ratio=%.4f)\n", curve.size(), out.c_str(), f.L, f.A,
              mesh_ratio(curve));
  return kExitOk;
}

int cmd_relocate(const std::string& config_path, std::string out) {
  const auto cfg = parse_config(config_path);
  if (!cfg.relocation) throw ValidationError("relocation", "is required for the relocate command");
  const auto before = generate_curve(cfg.curve);
  const auto after = prepare_initial_curve(cfg);
  if (out.empty()) {
    fs::create_directories(cfg.output.directory);
    out = (fs::path(cfg.output.directory) / "relocated.csv").string();
  }
  write_curve_csv(out, after);
  std::printf("mesh_ratio %.4f -> %.4f, wrote %s\n", mesh_ratio(before), mesh_ratio(after), out.c_str());
  return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  auto cfg = parse_config(config_path);
  if (!out_dir.empty()) cfg.output.directory = out_dir;
  const auto initial = prepare_initial_curve(cfg);
  const auto ts = run(initial, cfg.run);
  write_outputs(ts, cfg.output.directory, cfg.output.formats, to_json(cfg));

  const int steps = ts.diagnostics.empty() ? 0 : ts.diagnostics.back().step;
  std::printf("%s: %s after %d steps", to_string(cfg.run.flow), to_string(ts.termination), steps);
  if (!ts.diagnostics.empty()) {
    const auto& d = ts.diagnostics.back();
    std::printf(", B %.6g -> %.6g, L %.10g, A %.10g", ts.B0, d.B, d.L, d.A);
    if (d.gamma) std::printf(", gamma %.6g", *d.gamma);
  }
  std::printf("\n");
  if (!ts.failure_message.empty()) std::fprintf(stderr, "%s\n", ts.failure_message.c_str());
  std::printf("outputs in %s\n", cfg.output.directory.c_str());
  return exit_code(ts.termination);
}

int cmd_study_gamma(const std::string& config_path, const std::string& axis_name, const std::vector<double>& values,
                    const std::string& out) {
  const auto cfg = parse_config(config_path);
  GammaAxis axis;
  if (axis_name == "dt")
    axis = GammaAxis::dt;
  else if (axis_name == "n")
    axis = GammaAxis::n_vertices;
  else
    throw ValidationError("--axis", "must be dt or n");
  if (cfg.curve.kind == CurveKind::file && axis == GammaAxis::n_vertices)
    throw ValidationError("curve.kind", "a file curve cannot be resampled for the n axis");

  auto make_curve = [&](int n) {
    ExperimentConfig c = cfg;
    c.curve.n_vertices = n;
    return prepare_initial_curve(c);
  };
  const auto rows = gamma_study(cfg.run, axis, values, make_curve, cfg.curve.n_vertices);

  std::string table = axis_name + ",abs_gamma,steps,termination\n";
  int code = kExitOk;
  for (const auto& r : rows) {
    table += format_real(r.axis_value) + "," + (r.final_gamma ? format_real(*r.final_gamma) : std::string()) + "," +
             std::to_string(r.steps) + "," + to_string(r.termination) + "\n";
    if (!r.message.empty()) std::fprintf(stderr, "%s=%g: %s\n", axis_name.c_str(), r.axis_value, r.message.c_str());
    code = std::max(code, exit_code(r.termination));
  }
  std::fputs(table.c_str(), stdout);
  if (!out.empty()) {
    std::ofstream f(out);
    if (!(f << table)) throw IoError(out + ": write failed");
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving Willmore and Helfrich flows of closed polygonal curves"};
  app.require_subcommand(1);

  std::string spec, config, out, out_dir, axis;
  std::vector<double> values;

  auto* gen = app.add_subcommand("generate", "Write an initial curve as CSV");
  gen->add_option("--spec", spec, "Curve spec or experiment config (JSON)")->required();
  gen->add_option("--out", out, "Output CSV")->required();

  auto* rel = app.add_subcommand("relocate", "Even out vertex spacing of the configured initial curve");
  rel->add_option("--config", config, "Experiment config (JSON)")->required();
  rel->add_option("--out", out, "Output CSV (default: <output.directory>/relocated.csv)");

  auto* run_cmd = app.add_subcommand("run", "Run a Willmore, Helfrich or relocation flow");
  run_cmd->add_option("--config", config, "Experiment config (JSON)")->required();
  run_cmd->add_option("--out-dir", out_dir, "Output directory (default: output.directory)");

  auto* study = app.add_subcommand("study-gamma", "Final |gamma| across time steps or vertex counts");
  study->add_option("--config", config, "Experiment config (JSON)")->required();
  study->add_option("--axis", axis, "dt or n")->required()->check(CLI::IsMember({"dt", "n"}));
  study->add_option("--values", values, "Axis values, comma or space separated")->required()->delimiter(',');
  study->add_option("--out", out, "Also write the table to this CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_generate(spec, out);
    if (*rel) return cmd_relocate(config, out);
    if (*run_cmd) return cmd_run(config, out_dir);
    if (*study) return cmd_study_gamma(config, axis, values, out);
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BadSpec& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
