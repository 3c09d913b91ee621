#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "curveflow/errors.hpp"
#include "curveflow/point.hpp"
#include "curveflow/stencil.hpp"

namespace curveflow {

/// Smallest vertex count accepted for simulation. With N >= 5 the
/// curvature stencils of neighbouring vertices never share both ends.
inline constexpr std::size_t kMinSimulationVertices = 5;

/// Relative floor (times the curve diameter) below which edge lengths and
/// stencil magnitudes count as zero.
inline constexpr double kDegeneracyFloor = 1e-14;

/// Closed polygon X_1..X_N with periodic indexing (X_0 == X_N).
///
/// Only finiteness and N >= 3 are enforced here so that small test
/// shapes (the unit square) stay representable; `validate_for_flow`
/// applies the full set of simulation invariants.
class PolygonalCurve {
 public:
  PolygonalCurve() = default;
  explicit PolygonalCurve(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) throw InvalidCurve("a closed polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      if (!is_finite(vertices_[i]))
        throw InvalidCurve("vertex " + std::to_string(i) + " is not finite");
    }
  }

  std::size_t size() const noexcept { return vertices_.size(); }
  double du() const noexcept { return 1.0 / static_cast<double>(vertices_.size()); }

  const Point2& operator[](std::size_t i) const noexcept { return vertices_[i]; }
  /// Periodic access; at(-1) is the last vertex.
  const Point2& at(std::ptrdiff_t i) const noexcept { return vertices_[wrap(i, vertices_.size())]; }

  std::span<const Point2> vertices() const noexcept { return vertices_; }

  /// Bounding-box diagonal; the length scale for degeneracy floors.
  double diameter() const noexcept {
    if (vertices_.empty()) return 0.0;
    auto [xmin, xmax] = std::minmax_element(vertices_.begin(), vertices_.end(),
                                            [](const Point2& a, const Point2& b) { return a.x < b.x; });
    auto [ymin, ymax] = std::minmax_element(vertices_.begin(), vertices_.end(),
                                            [](const Point2& a, const Point2& b) { return a.y < b.y; });
    return std::hypot(xmax->x - xmin->x, ymax->y - ymin->y);
  }

  PolygonalCurve reversed() const {
    std::vector<Point2> v(vertices_.rbegin(), vertices_.rend());
    return PolygonalCurve(std::move(v));
  }

  PolygonalCurve translated(const Point2& offset) const {
    std::vector<Point2> v = vertices_;
    for (auto& p : v) p += offset;
    return PolygonalCurve(std::move(v));
  }

  friend bool operator==(const PolygonalCurve&, const PolygonalCurve&) = default;

 private:
  std::vector<Point2> vertices_;
};

/// Shoelace area, positive for counterclockwise order.
inline double signed_area(const PolygonalCurve& c) noexcept {
  double twice = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) twice += det(c.at(static_cast<std::ptrdiff_t>(i) - 1), c[i]);
  return 0.5 * twice;
}

/// min edge / max edge, in (0, 1].
inline double mesh_ratio(const PolygonalCurve& c) noexcept {
  double lo = INFINITY, hi = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double r = norm(c[i] - c.at(static_cast<std::ptrdiff_t>(i) - 1));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return hi > 0.0 ? lo / hi : 0.0;
}

/// Reverses the vertex order if the curve is clockwise. Returns true when
/// it flipped.
inline bool normalize_orientation(PolygonalCurve& c) {
  if (signed_area(c) < 0.0) {
    c = c.reversed();
    return true;
  }
  return false;
}

/// Throws unless the curve is usable by the flow schemes: N >= 5, no
/// coincident consecutive vertices, counterclockwise.
inline void validate_for_flow(const PolygonalCurve& c) {
  if (c.size() < kMinSimulationVertices)
    throw InvalidCurve("curve has " + std::to_string(c.size()) + " vertices; at least " +
                       std::to_string(kMinSimulationVertices) + " are required");
  const double floor = kDegeneracyFloor * c.diameter();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (norm(c[i] - c.at(static_cast<std::ptrdiff_t>(i) - 1)) <= floor)
      throw DegenerateEdge("edge " + std::to_string(i) + " has zero length");
  }
  if (!(signed_area(c) > 0.0)) throw InvalidCurve("curve is not counterclockwise (enclosed area <= 0)");
}

}  // namespace curveflow
