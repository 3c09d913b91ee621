#pragma once

#include <cmath>

namespace curveflow {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Point2& operator+=(const Point2& o) noexcept {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Point2& operator-=(const Point2& o) noexcept {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Point2& operator*=(double s) noexcept {
    x *= s;
    y *= s;
    return *this;
  }
  constexpr Point2& operator/=(double s) noexcept {
    x /= s;
    y /= s;
    return *this;
  }
  friend constexpr bool operator==(const Point2&, const Point2&) = default;
};

constexpr Point2 operator+(Point2 a, const Point2& b) noexcept { return a += b; }
constexpr Point2 operator-(Point2 a, const Point2& b) noexcept { return a -= b; }
constexpr Point2 operator-(const Point2& a) noexcept { return {-a.x, -a.y}; }
constexpr Point2 operator*(Point2 a, double s) noexcept { return a *= s; }
constexpr Point2 operator*(double s, Point2 a) noexcept { return a *= s; }
constexpr Point2 operator/(Point2 a, double s) noexcept { return a /= s; }

constexpr double dot(const Point2& a, const Point2& b) noexcept { return a.x * b.x + a.y * b.y; }

/// det[a, b] with a and b as columns: a.x * b.y - a.y * b.x.
constexpr double det(const Point2& a, const Point2& b) noexcept { return a.x * b.y - a.y * b.x; }

inline double norm(const Point2& a) noexcept { return std::hypot(a.x, a.y); }

inline bool is_finite(const Point2& a) noexcept { return std::isfinite(a.x) && std::isfinite(a.y); }

}  // namespace curveflow
