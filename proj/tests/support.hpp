#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <curveflow/curveflow.hpp>

namespace cft {

using namespace curveflow;

inline PolygonalCurve square() { return PolygonalCurve({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

/// Star-shaped, counterclockwise, radii in [1 - jitter, 1 + jitter].
inline PolygonalCurve star_curve(std::mt19937_64& rng, int n, double jitter = 0.3) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point2> v;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * (i + 0.25 * u(rng)) / n;
    const double rho = 1.0 + jitter * u(rng);
    v.push_back({rho * std::cos(a), rho * std::sin(a)});
  }
  return PolygonalCurve(std::move(v));
}

inline PolygonalCurve perturbed(const PolygonalCurve& c, std::mt19937_64& rng, double magnitude) {
  std::uniform_real_distribution<double> u(-magnitude, magnitude);
  std::vector<Point2> v(c.vertices().begin(), c.vertices().end());
  for (auto& p : v) p = p + Point2{u(rng), u(rng)};
  return PolygonalCurve(std::move(v));
}

inline PolygonalCurve rotated(const PolygonalCurve& c, double theta, Point2 shift = {}) {
  const double cs = std::cos(theta), sn = std::sin(theta);
  std::vector<Point2> v;
  for (auto p : c.vertices()) v.push_back(Point2{cs * p.x - sn * p.y, sn * p.x + cs * p.y} + shift);
  return PolygonalCurve(std::move(v));
}

/// Central-difference gradient of f with respect to every vertex.
inline std::vector<Point2> fd_gradient(const std::function<double(const PolygonalCurve&)>& f, const PolygonalCurve& c,
                                       double h = 1e-7) {
  std::vector<Point2> g(c.size());
  std::vector<Point2> v(c.vertices().begin(), c.vertices().end());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int comp = 0; comp < 2; ++comp) {
      double& x = comp == 0 ? v[i].x : v[i].y;
      const double x0 = x;
      x = x0 + h;
      const double fp = f(PolygonalCurve(v));
      x = x0 - h;
      const double fm = f(PolygonalCurve(v));
      x = x0;
      (comp == 0 ? g[i].x : g[i].y) = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 d = b - a;
  const double len2 = dot(d, d);
  const double s = len2 > 0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
  return norm(p - (a + s * d));
}

/// Hausdorff distance between two closed polygons, sampled at vertices
/// and edge midpoints.
inline double hausdorff(const PolygonalCurve& a, const PolygonalCurve& b) {
  auto one_way = [](const PolygonalCurve& from, const PolygonalCurve& to) {
    double worst = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
      for (const Point2 p : {from[i], 0.5 * (from[i] + from.at(static_cast<std::ptrdiff_t>(i) + 1))}) {
        double best = INFINITY;
        for (std::size_t j = 0; j < to.size(); ++j)
          best = std::min(best, point_segment_distance(p, to[j], to.at(static_cast<std::ptrdiff_t>(j) + 1)));
        worst = std::max(worst, best);
      }
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

inline double max_edge(const PolygonalCurve& c) {
  const auto r = edge_quantities(c).r;
  return *std::max_element(r.begin(), r.end());
}

inline PolygonalCurve relocated_kubire(int n = 30) { return relocate(generate_curve({CurveKind::kubire, n}), 5.0, 1e-4, 0.1); }

}  // namespace cft
