#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "curveflow/curve.hpp"
#include "curveflow/errors.hpp"
#include "curveflow/point.hpp"
#include "curveflow/stencil.hpp"

namespace curveflow {

/// Parameters shared by both flows.
struct FlowParams {
  double c0 = 0.0;     ///< spontaneous curvature
  double alpha = 0.0;  ///< tangential-velocity strength, >= 0
  double dt = 1e-4;    ///< time step, > 0
  SecondDifferenceScaling scaling = SecondDifferenceScaling::per_du_squared;
};

inline void validate(const FlowParams& p) {
  if (!(p.dt > 0.0) || !std::isfinite(p.dt)) throw ValidationError("dt", "must be positive and finite");
  if (!(p.alpha >= 0.0) || !std::isfinite(p.alpha)) throw ValidationError("alpha", "must be non-negative");
  if (!std::isfinite(p.c0)) throw ValidationError("c0", "must be finite");
}

// Indexing convention (0-based): edge i joins X[i-1] and X[i], so r[i] and
// t[i] belong to the edge ending at vertex i and r[i+1] to the one leaving it.

struct EdgeQuantities {
  std::vector<double> r;  ///< |X_i - X_{i-1}|
  std::vector<Point2> t;  ///< (X_i - X_{i-1}) / r_i
};

inline EdgeQuantities edge_quantities(const PolygonalCurve& c) {
  const std::size_t n = c.size();
  const double floor = kDegeneracyFloor * c.diameter();
  EdgeQuantities e{std::vector<double>(n), std::vector<Point2>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 d = c[i] - c.at(static_cast<std::ptrdiff_t>(i) - 1);
    const double r = norm(d);
    if (!(r > floor)) throw DegenerateEdge("edge ending at vertex " + std::to_string(i) + " has zero length");
    e.r[i] = r;
    e.t[i] = d / r;
  }
  return e;
}

/// T_i = (t_i + t_{i+1}) / |t_i + t_{i+1}|.
inline std::vector<Point2> vertex_tangents(std::span<const Point2> t) {
  const std::size_t n = t.size();
  std::vector<Point2> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 s = t[i] + t[wrap(static_cast<std::ptrdiff_t>(i) + 1, n)];
    const double m = norm(s);
    if (m < 1e-10) throw CuspAtVertex("edges meeting at vertex " + std::to_string(i) + " are anti-parallel");
    out[i] = s / m;
  }
  return out;
}

/// Per-vertex pieces of the curvature formula. The discrete gradient of
/// the bending energy is assembled from exactly these arrays.
struct CurvatureTerms {
  std::vector<Point2> d1;   ///< central first difference
  std::vector<Point2> d2;   ///< central second difference
  std::vector<double> det;  ///< det[d1, d2]
  std::vector<double> g;    ///< |d1|
  std::vector<double> k;    ///< det / g^3
};

inline CurvatureTerms curvature_terms(const PolygonalCurve& c,
                                      SecondDifferenceScaling scaling = SecondDifferenceScaling::per_du_squared) {
  const std::size_t n = c.size();
  const double du = c.du();
  CurvatureTerms ct;
  ct.d1 = periodic_difference(c.vertices(), Difference::central1, du, scaling);
  ct.d2 = periodic_difference(c.vertices(), Difference::central2, du, scaling);
  ct.det.resize(n);
  ct.g.resize(n);
  ct.k.resize(n);
  // |X_{i+1} - X_{i-1}| below the floor means g_i is zero.
  const double floor = kDegeneracyFloor * c.diameter() / (2.0 * du);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = norm(ct.d1[i]);
    if (!(g > floor))
      throw DegenerateStencil("neighbours of vertex " + std::to_string(i) + " coincide (|d1 X| = 0)");
    ct.g[i] = g;
    ct.det[i] = det(ct.d1[i], ct.d2[i]);
    ct.k[i] = ct.det[i] / (g * g * g);
  }
  return ct;
}

struct Curvature {
  std::vector<double> k;
  std::vector<double> g;
};

/// k_i = det[d1 X_i, d2 X_i] / |d1 X_i|^3, positive on convex
/// counterclockwise curves.
inline Curvature discrete_curvature(const PolygonalCurve& c,
                                    SecondDifferenceScaling scaling = SecondDifferenceScaling::per_du_squared) {
  auto ct = curvature_terms(c, scaling);
  return {std::move(ct.k), std::move(ct.g)};
}

/// r_hat_i = (r_i + r_{i+1}) / 2, the length attributed to vertex i.
inline std::vector<double> vertex_lengths(std::span<const double> r) {
  const std::size_t n = r.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (r[i] + r[wrap(static_cast<std::ptrdiff_t>(i) + 1, n)]);
  return out;
}

struct Functionals {
  double B = 0.0;  ///< bending energy 1/2 sum (k_i - c0)^2 r_hat_i
  double L = 0.0;  ///< perimeter
  double A = 0.0;  ///< signed enclosed area
  std::vector<double> r_hat;
};

inline Functionals functionals(const PolygonalCurve& c, double c0,
                               SecondDifferenceScaling scaling = SecondDifferenceScaling::per_du_squared) {
  const auto e = edge_quantities(c);
  const auto k = discrete_curvature(c, scaling).k;
  Functionals f;
  f.r_hat = vertex_lengths(e.r);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double dk = k[i] - c0;
    f.B += 0.5 * dk * dk * f.r_hat[i];
    f.L += e.r[i];
  }
  f.A = signed_area(c);
  return f;
}

/// Weighted inner product sum_i u_i . v_i w_i.
inline double discrete_inner_product(std::span<const Point2> u, std::span<const Point2> v,
                                     std::span<const double> weights) {
  if (u.size() != v.size() || u.size() != weights.size())
    throw LengthMismatch("inner product operands have different lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += dot(u[i], v[i]) * weights[i];
  return s;
}

/// Discrete tangential speed w_i = -alpha * backward_difference(1 / |forward_difference X|)_i.
/// Positive w_i moves X_i along T_i, toward the longer of its two edges.
inline std::vector<double> tangential_velocity(const PolygonalCurve& c, double alpha) {
  const std::size_t n = c.size();
  const double du = c.du();
  const double floor = kDegeneracyFloor * c.diameter();
  std::vector<double> inv_speed(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double len = norm(c.at(static_cast<std::ptrdiff_t>(i) + 1) - c[i]);
    if (!(len > floor)) throw DegenerateEdge("edge leaving vertex " + std::to_string(i) + " has zero length");
    inv_speed[i] = du / len;  // 1 / |(X_{i+1} - X_i) / du|
  }
  auto w = periodic_difference(std::span<const double>(inv_speed), Difference::backward, du);
  for (auto& v : w) v *= -alpha;
  return w;
}

/// Everything derivable from one curve at once.
struct GeometricCache {
  std::vector<double> r;
  std::vector<Point2> t;
  std::vector<Point2> T;
  std::vector<double> g;
  std::vector<double> k;
  std::vector<double> r_hat;
  double du = 0.0;
  double B = 0.0;
  double L = 0.0;
  double A = 0.0;
};

inline GeometricCache geometric_cache(const PolygonalCurve& c, double c0,
                                      SecondDifferenceScaling scaling = SecondDifferenceScaling::per_du_squared) {
  GeometricCache gc;
  auto e = edge_quantities(c);
  auto curv = discrete_curvature(c, scaling);
  gc.T = vertex_tangents(e.t);
  gc.r_hat = vertex_lengths(e.r);
  gc.du = c.du();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double dk = curv.k[i] - c0;
    gc.B += 0.5 * dk * dk * gc.r_hat[i];
    gc.L += e.r[i];
  }
  gc.A = signed_area(c);
  gc.r = std::move(e.r);
  gc.t = std::move(e.t);
  gc.g = std::move(curv.g);
  gc.k = std::move(curv.k);
  return gc;
}

}  // namespace curveflow
