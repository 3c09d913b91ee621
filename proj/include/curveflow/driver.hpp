#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "curveflow/curve.hpp"
#include "curveflow/discrete_gradients.hpp"
#include "curveflow/errors.hpp"
#include "curveflow/geometry.hpp"
#include "curveflow/schemes.hpp"
#include "curveflow/solver.hpp"

namespace curveflow {

enum class Flow { willmore, helfrich, relocate };

inline const char* to_string(Flow f) noexcept {
  switch (f) {
    case Flow::willmore: return "willmore";
    case Flow::helfrich: return "helfrich";
    case Flow::relocate: return "relocate";
  }
  return "?";
}

struct RunConfig {
  Flow flow = Flow::willmore;
  FlowParams params;
  int max_steps = 1;
  std::optional<double> stop_epsilon;  ///< stop once (B_n - B_{n+1}) / B_n < epsilon
  int snapshot_every = 100;
  SolverConfig solver;
};

inline void validate(const RunConfig& c) {
  validate(c.params);
  validate(c.solver);
  if (c.max_steps < 1) throw ValidationError("max_steps", "must be at least 1");
  if (c.snapshot_every < 1) throw ValidationError("snapshot_every", "must be at least 1");
  if (c.stop_epsilon && !(*c.stop_epsilon > 0.0)) throw ValidationError("stop_epsilon", "must be positive");
}

/// Chain-rule residuals above this abort a run: they mean the gradient
/// assembly is broken.
inline constexpr double kChainRuleSelfCheck = 1e-9;

struct Multipliers {
  double lambda = 0.0;
  double mu = 0.0;
  double gamma = 0.0;
};

struct StepDiagnostics {
  int step = 0;
  double B = 0.0;
  double L = 0.0;
  double A = 0.0;
  std::optional<double> lambda;
  std::optional<double> mu;
  std::optional<double> gamma;
  double mesh_ratio = 0.0;
  int solver_iterations = 0;
  double residual = 0.0;
  ChainRuleResiduals chain_rule;
  /// (dB, dB)_w for Willmore, the Gram ratio D for Helfrich, 0 for relocation.
  double dissipation_rate = 0.0;
};

struct StepResult {
  PolygonalCurve curve;
  StepDiagnostics diagnostics;
  Multipliers multipliers;
};

/// Newton failed to converge within its budgets.
class SolverFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Advances one time level. `warm` seeds the multipliers of the Newton
/// guess; the vertices start from the old curve.
inline StepResult step(const PolygonalCurve& curve, const RunConfig& config, int step_index = 1,
                       const Multipliers& warm = {}) {
  const auto& params = config.params;
  const std::size_t n = curve.size();
  const FrozenExplicitData frozen = freeze(curve, params);
  const std::vector<Point2> start(curve.vertices().begin(), curve.vertices().end());

  ResidualSystem sys;
  std::vector<double> guess;
  switch (config.flow) {
    case Flow::willmore:
      sys.dimension = 2 * n + 1;
      sys.evaluate = [&](std::span<const double> u) {
        return willmore_residual(WillmoreUnknowns::unpack(u), frozen, params);
      };
      guess = WillmoreUnknowns{start, warm.gamma}.pack();
      break;
    case Flow::helfrich:
      sys.dimension = 2 * n + 3;
      sys.evaluate = [&](std::span<const double> u) {
        return helfrich_residual(HelfrichUnknowns::unpack(u), frozen, params);
      };
      guess = HelfrichUnknowns{start, warm.lambda, warm.mu, warm.gamma}.pack();
      break;
    case Flow::relocate:
      sys.dimension = 2 * n;
      sys.evaluate = [&](std::span<const double> u) {
        return relocation_residual(detail::unpack_vertices(u, n), frozen, params);
      };
      guess.reserve(2 * n);
      detail::pack_vertices(start, guess);
      break;
  }

  const SolverReport rep = solve(sys, std::move(guess), config.solver);
  if (!rep.converged)
    throw SolverFailure("step " + std::to_string(step_index) + ": Newton did not converge (residual " +
                        std::to_string(rep.final_residual_norm) + " after " + std::to_string(rep.iterations) +
                        " iterations)");

  StepResult out;
  auto& d = out.diagnostics;
  d.step = step_index;
  d.solver_iterations = rep.iterations;
  d.residual = rep.final_residual_norm;

  switch (config.flow) {
    case Flow::willmore: {
      auto u = WillmoreUnknowns::unpack(rep.solution);
      d.dissipation_rate = evaluate_willmore(u, frozen, params).dissipation;
      d.gamma = u.gamma;
      out.multipliers.gamma = u.gamma;
      out.curve = PolygonalCurve(std::move(u.new_vertices));
      break;
    }
    case Flow::helfrich: {
      auto u = HelfrichUnknowns::unpack(rep.solution);
      d.dissipation_rate = evaluate_helfrich(u, frozen, params).dissipation;
      d.lambda = u.lambda;
      d.mu = u.mu;
      d.gamma = u.gamma;
      out.multipliers = {u.lambda, u.mu, u.gamma};
      out.curve = PolygonalCurve(std::move(u.new_vertices));
      break;
    }
    case Flow::relocate:
      out.curve = PolygonalCurve(detail::unpack_vertices(rep.solution, n));
      break;
  }

  const CurvePair pair(frozen.old_side, out.curve, params.scaling);
  d.chain_rule = chain_rule_residual(pair, params.c0);
  const auto f = functionals(out.curve, params.c0, params.scaling);
  d.B = f.B;
  d.L = f.L;
  d.A = f.A;
  d.mesh_ratio = mesh_ratio(out.curve);
  return out;
}

enum class Termination { max_steps, epsilon_stop, solver_failure, geometry_failure };

inline const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::max_steps: return "max_steps";
    case Termination::epsilon_stop: return "epsilon_stop";
    case Termination::solver_failure: return "solver_failure";
    case Termination::geometry_failure: return "geometry_failure";
  }
  return "?";
}

struct Snapshot {
  int step = 0;
  PolygonalCurve curve;
};

struct TimeSeries {
  RunConfig config;
  double B0 = 0.0, L0 = 0.0, A0 = 0.0;  ///< functionals of the initial curve
  std::vector<StepDiagnostics> diagnostics;
  std::vector<Snapshot> snapshots;
  Termination termination = Termination::max_steps;
  std::string failure_message;

  /// Last accepted curve.
  const PolygonalCurve& final_curve() const { return snapshots.back().curve; }
};

/// Runs `step` until max_steps, the epsilon stop, or a failure. Failures
/// end the run and are recorded; they are not thrown.
inline TimeSeries run(const PolygonalCurve& initial, const RunConfig& config) {
  validate(config);
  TimeSeries ts;
  ts.config = config;
  const auto f0 = functionals(initial, config.params.c0, config.params.scaling);
  ts.B0 = f0.B;
  ts.L0 = f0.L;
  ts.A0 = f0.A;
  ts.snapshots.push_back({0, initial});

  PolygonalCurve curve = initial;
  Multipliers warm;
  double b_prev = f0.B;
  for (int n = 1; n <= config.max_steps; ++n) {
    StepResult r;
    try {
      r = step(curve, config, n, warm);
    } catch (const SolverError& e) {
      ts.termination = Termination::solver_failure;
      ts.failure_message = e.what();
      break;
    } catch (const Error& e) {
      ts.termination = Termination::geometry_failure;
      ts.failure_message = std::string("step ") + std::to_string(n) + ": " + e.what();
      break;
    }
    const auto& cr = r.diagnostics.chain_rule;
    if (cr.B > kChainRuleSelfCheck || cr.L > kChainRuleSelfCheck || cr.A > kChainRuleSelfCheck) {
      ts.termination = Termination::geometry_failure;
      ts.failure_message = "step " + std::to_string(n) + ": chain-rule self-check failed";
      break;
    }
    ts.diagnostics.push_back(r.diagnostics);
    curve = std::move(r.curve);
    warm = r.multipliers;
    if (n % config.snapshot_every == 0) ts.snapshots.push_back({n, curve});

    const double b_new = r.diagnostics.B;
    if (config.stop_epsilon && (b_prev - b_new) / b_prev < *config.stop_epsilon) {
      ts.termination = Termination::epsilon_stop;
      break;
    }
    b_prev = b_new;
  }
  if (!ts.diagnostics.empty() && ts.snapshots.back().step != ts.diagnostics.back().step)
    ts.snapshots.push_back({ts.diagnostics.back().step, curve});
  return ts;
}

/// Evens out vertex spacing by pure tangential motion for
/// ceil(until_time / dt) steps.
inline PolygonalCurve relocate(const PolygonalCurve& curve, double alpha, double dt, double until_time,
                               const SolverConfig& solver = {}) {
  if (!(until_time >= 0.0)) throw ValidationError("relocation.until_time", "must be non-negative");
  RunConfig cfg;
  cfg.flow = Flow::relocate;
  cfg.params.alpha = alpha;
  cfg.params.dt = dt;
  cfg.solver = solver;
  validate(cfg.params);
  const int steps = static_cast<int>(std::ceil(until_time / dt - 1e-9));
  PolygonalCurve c = curve;
  for (int n = 1; n <= steps; ++n) c = step(c, cfg, n).curve;
  return c;
}

enum class GammaAxis { dt, n_vertices };

struct GammaStudyRow {
  double axis_value = 0.0;
  std::optional<double> final_gamma;  ///< |gamma| at the last accepted step
  int steps = 0;
  Termination termination = Termination::max_steps;
  std::string message;
};

/// One run per axis value; the dt axis overrides params.dt, the vertex
/// axis asks `make_curve` for a fresh initial curve with that many vertices.
inline std::vector<GammaStudyRow> gamma_study(const RunConfig& base, GammaAxis axis, std::span<const double> values,
                                              const std::function<PolygonalCurve(int)>& make_curve,
                                              int base_vertices) {
  std::vector<GammaStudyRow> rows;
  rows.reserve(values.size());
  for (double v : values) {
    GammaStudyRow row;
    row.axis_value = v;
    RunConfig cfg = base;
    int nv = base_vertices;
    if (axis == GammaAxis::dt)
      cfg.params.dt = v;
    else
      nv = static_cast<int>(std::lround(v));
    try {
      const auto ts = run(make_curve(nv), cfg);
      row.termination = ts.termination;
      row.message = ts.failure_message;
      row.steps = ts.diagnostics.empty() ? 0 : ts.diagnostics.back().step;
      if (!ts.diagnostics.empty() && ts.diagnostics.back().gamma) row.final_gamma = std::abs(*ts.diagnostics.back().gamma);
    } catch (const Error& e) {
      row.termination = Termination::geometry_failure;
      row.message = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace curveflow
