#pragma once

// Residuals of the structure-preserving time steps.
//
// Willmore, unknowns u = (x_1, y_1, ..., x_N, y_N, gamma):
//   (X_i - X~_i)/dt + dB_i - w_i T_i - gamma dB_i = 0          (2N rows)
//   (dB, w T + gamma dB)_w = 0                                  (1 row)
//
// Helfrich, unknowns u = (x_1, y_1, ..., x_N, y_N, lambda, mu, gamma), with
// V = -dB + lambda dL + mu dA + w T + gamma dB:
//   (X_i - X~_i)/dt - V_i = 0                                   (2N rows)
//   (dL, V)_w = 0,  (dA, V)_w = 0,  (dB, V)_w + D = 0           (3 rows)
//
// Gradients and weights w = r_hat^(n+1/2) are evaluated on the pair
// (old curve, candidate curve); w and T come from the old curve only.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "curveflow/curve.hpp"
#include "curveflow/discrete_gradients.hpp"
#include "curveflow/errors.hpp"
#include "curveflow/geometry.hpp"
#include "curveflow/point.hpp"

namespace curveflow {

namespace detail {

inline std::vector<Point2> unpack_vertices(std::span<const double> u, std::size_t n) {
  if (u.size() < 2 * n) throw LengthMismatch("unknown vector is shorter than 2N");
  std::vector<Point2> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = {u[2 * i], u[2 * i + 1]};
  return v;
}

inline void pack_vertices(std::span<const Point2> v, std::vector<double>& out) {
  for (const auto& p : v) {
    out.push_back(p.x);
    out.push_back(p.y);
  }
}

}  // namespace detail

struct WillmoreUnknowns {
  std::vector<Point2> new_vertices;
  double gamma = 0.0;

  std::vector<double> pack() const {
    std::vector<double> u;
    u.reserve(2 * new_vertices.size() + 1);
    detail::pack_vertices(new_vertices, u);
    u.push_back(gamma);
    return u;
  }
  static WillmoreUnknowns unpack(std::span<const double> u) {
    if (u.size() % 2 != 1) throw LengthMismatch("Willmore unknowns must have length 2N + 1");
    const std::size_t n = (u.size() - 1) / 2;
    return {detail::unpack_vertices(u, n), u[2 * n]};
  }
};

struct HelfrichUnknowns {
  std::vector<Point2> new_vertices;
  double lambda = 0.0;
  double mu = 0.0;
  double gamma = 0.0;

  std::vector<double> pack() const {
    std::vector<double> u;
    u.reserve(2 * new_vertices.size() + 3);
    detail::pack_vertices(new_vertices, u);
    u.push_back(lambda);
    u.push_back(mu);
    u.push_back(gamma);
    return u;
  }
  static HelfrichUnknowns unpack(std::span<const double> u) {
    if (u.size() < 3 || (u.size() - 3) % 2 != 0) throw LengthMismatch("Helfrich unknowns must have length 2N + 3");
    const std::size_t n = (u.size() - 3) / 2;
    return {detail::unpack_vertices(u, n), u[2 * n], u[2 * n + 1], u[2 * n + 2]};
  }
};

/// Explicit data of one time level, taken from the old curve.
struct FrozenExplicitData {
  std::vector<double> w;  ///< tangential speeds
  std::vector<Point2> T;  ///< vertex tangents
  PolygonalCurve old;
  CurvePair::Side old_side;  ///< stencil data of `old`, reused by every residual evaluation
};

inline FrozenExplicitData freeze(const PolygonalCurve& old, const FlowParams& params) {
  FrozenExplicitData f;
  f.w = tangential_velocity(old, params.alpha);
  f.T = vertex_tangents(edge_quantities(old).t);
  f.old = old;
  f.old_side = CurvePair::make_side(old, params.scaling);
  return f;
}

/// det(Gram(dB, dL, dA)) / det(Gram(dL, dA)) in the weighted inner
/// product: the squared norm of the part of dB orthogonal to span{dL, dA}.
/// Computed as the Schur complement, which is the same quantity.
inline double gram_ratio(std::span<const Point2> dB, std::span<const Point2> dL, std::span<const Point2> dA,
                         std::span<const double> weights) {
  const double bb = discrete_inner_product(dB, dB, weights);
  const double bl = discrete_inner_product(dB, dL, weights);
  const double ba = discrete_inner_product(dB, dA, weights);
  const double ll = discrete_inner_product(dL, dL, weights);
  const double la = discrete_inner_product(dL, dA, weights);
  const double aa = discrete_inner_product(dA, dA, weights);
  const double det2 = ll * aa - la * la;
  if (!(ll > 0.0) || !(aa > 0.0) || !(det2 >= 1e-12 * ll * aa))
    throw SingularGram("Gram matrix of (dL, dA) is singular: length and area gradients are parallel");
  return bb - (aa * bl * bl - 2.0 * la * bl * ba + ll * ba * ba) / det2;
}

/// Everything computed while evaluating one scheme residual.
struct SchemeEvaluation {
  std::vector<double> residual;
  GradientField grads;          ///< dL, dA left empty for Willmore and relocation
  std::vector<double> weights;  ///< r_hat^(n+1/2)
  double dissipation = 0.0;     ///< (dB, dB)_w for Willmore, D for Helfrich
};

inline SchemeEvaluation evaluate_willmore(const WillmoreUnknowns& u, const FrozenExplicitData& frozen,
                                          const FlowParams& params) {
  const std::size_t n = frozen.old.size();
  if (u.new_vertices.size() != n) throw LengthMismatch("Willmore unknowns do not match the old curve");
  const CurvePair pair(frozen.old_side, PolygonalCurve(u.new_vertices), params.scaling);
  SchemeEvaluation ev;
  ev.grads.dB = grad_bending(pair, params.c0);
  ev.weights.assign(pair.weights().begin(), pair.weights().end());
  const auto& dB = ev.grads.dB;

  ev.residual.resize(2 * n + 1);
  std::vector<Point2> correction(n);  // w T + gamma dB
  for (std::size_t i = 0; i < n; ++i) {
    correction[i] = frozen.w[i] * frozen.T[i] + u.gamma * dB[i];
    const Point2 r = (u.new_vertices[i] - frozen.old[i]) / params.dt + dB[i] - correction[i];
    ev.residual[2 * i] = r.x;
    ev.residual[2 * i + 1] = r.y;
  }
  ev.residual[2 * n] = discrete_inner_product(dB, correction, ev.weights);
  ev.dissipation = discrete_inner_product(dB, dB, ev.weights);
  return ev;
}

inline std::vector<double> willmore_residual(const WillmoreUnknowns& u, const FrozenExplicitData& frozen,
                                             const FlowParams& params) {
  return evaluate_willmore(u, frozen, params).residual;
}

inline SchemeEvaluation evaluate_helfrich(const HelfrichUnknowns& u, const FrozenExplicitData& frozen,
                                          const FlowParams& params) {
  const std::size_t n = frozen.old.size();
  if (u.new_vertices.size() != n) throw LengthMismatch("Helfrich unknowns do not match the old curve");
  const CurvePair pair(frozen.old_side, PolygonalCurve(u.new_vertices), params.scaling);
  SchemeEvaluation ev;
  ev.grads = gradients(pair, params.c0);
  ev.weights.assign(pair.weights().begin(), pair.weights().end());
  const auto& [dB, dL, dA] = ev.grads;

  ev.residual.resize(2 * n + 3);
  std::vector<Point2> velocity(n);
  for (std::size_t i = 0; i < n; ++i) {
    velocity[i] = -dB[i] + u.lambda * dL[i] + u.mu * dA[i] + frozen.w[i] * frozen.T[i] + u.gamma * dB[i];
    const Point2 r = (u.new_vertices[i] - frozen.old[i]) / params.dt - velocity[i];
    ev.residual[2 * i] = r.x;
    ev.residual[2 * i + 1] = r.y;
  }
  ev.dissipation = gram_ratio(dB, dL, dA, ev.weights);
  ev.residual[2 * n] = discrete_inner_product(dL, velocity, ev.weights);
  ev.residual[2 * n + 1] = discrete_inner_product(dA, velocity, ev.weights);
  ev.residual[2 * n + 2] = discrete_inner_product(dB, velocity, ev.weights) + ev.dissipation;
  return ev;
}

inline std::vector<double> helfrich_residual(const HelfrichUnknowns& u, const FrozenExplicitData& frozen,
                                             const FlowParams& params) {
  return evaluate_helfrich(u, frozen, params).residual;
}

/// Pure tangential motion: the Willmore step with dB forced to zero and
/// the (then vacuous) gamma row dropped. 2N rows.
inline std::vector<double> relocation_residual(std::span<const Point2> new_vertices,
                                               const FrozenExplicitData& frozen, const FlowParams& params) {
  const std::size_t n = frozen.old.size();
  if (new_vertices.size() != n) throw LengthMismatch("relocation unknowns do not match the old curve");
  std::vector<double> res(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 r = (new_vertices[i] - frozen.old[i]) / params.dt - frozen.w[i] * frozen.T[i];
    res[2 * i] = r.x;
    res[2 * i + 1] = r.y;
  }
  return res;
}

}  // namespace curveflow
