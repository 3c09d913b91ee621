#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace curveflow {

/// Periodic index: wrap(-1, n) == n - 1, wrap(n, n) == 0.
constexpr std::size_t wrap(std::ptrdiff_t i, std::size_t n) noexcept {
  const auto m = static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

enum class Difference { forward, backward, central1, central2 };

/// How the three-point second difference is normalized.
///
/// `per_du` divides (v[i+1] - 2 v[i] + v[i-1]) by du once, which makes the
/// resulting curvature of a regular N-gon 2 / (N R (1 + cos(2 pi / N))),
/// i.e. du times the geometric curvature. `per_du_squared` is the standard
/// normalization; there the N-gon curvature is 2 / (R (1 + cos(2 pi / N)))
/// and tends to 1 / R. Every discrete identity in this library (chain rule,
/// summation by parts) holds for either choice as long as it is used
/// consistently, which is why the choice travels with the flow parameters.
enum class SecondDifferenceScaling { per_du, per_du_squared };

inline double second_difference_divisor(double du, SecondDifferenceScaling s) noexcept {
  return s == SecondDifferenceScaling::per_du ? du : du * du;
}

/// Finite difference of a periodic sequence. T is double or Point2.
template <class T>
std::vector<T> periodic_difference(std::span<const T> v, Difference mode, double du,
                                   SecondDifferenceScaling scaling = SecondDifferenceScaling::per_du_squared) {
  const std::size_t n = v.size();
  std::vector<T> out(n);
  const double d2 = second_difference_divisor(du, scaling);
  for (std::size_t i = 0; i < n; ++i) {
    const T& next = v[wrap(static_cast<std::ptrdiff_t>(i) + 1, n)];
    const T& prev = v[wrap(static_cast<std::ptrdiff_t>(i) - 1, n)];
    switch (mode) {
      case Difference::forward:
        out[i] = (next - v[i]) / du;
        break;
      case Difference::backward:
        out[i] = (v[i] - prev) / du;
        break;
      case Difference::central1:
        out[i] = (next - prev) / (2.0 * du);
        break;
      case Difference::central2:
        out[i] = (next - 2.0 * v[i] + prev) / d2;
        break;
    }
  }
  return out;
}

template <class T>
std::vector<T> periodic_difference(const std::vector<T>& v, Difference mode, double du,
                                   SecondDifferenceScaling scaling = SecondDifferenceScaling::per_du_squared) {
  return periodic_difference(std::span<const T>(v), mode, du, scaling);
}

}  // namespace curveflow
