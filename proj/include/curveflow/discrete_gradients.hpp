#pragma once

// Two-point discrete variational derivatives of the bending energy, the
// length and the enclosed area. For a pair (old, new) each gradient field
// dF satisfies, for arbitrary pairs and not only for scheme solutions,
//
//   F(new) - F(old) = sum_i dF_i . (X_i^new - X_i^old) * w_i,
//   w_i = (r_hat_i^new + r_hat_i^old) / 2.
//
// The bending gradient is assembled term by term in the same factorized
// form that makes this identity exact; do not simplify the algebra.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "curveflow/curve.hpp"
#include "curveflow/errors.hpp"
#include "curveflow/geometry.hpp"
#include "curveflow/point.hpp"
#include "curveflow/stencil.hpp"

namespace curveflow {

/// The (old, new) pair on which the discrete gradients live, together with
/// the per-curve stencil data and the midpoint weights.
class CurvePair {
 public:
  struct Side {
    PolygonalCurve curve;
    EdgeQuantities edges;
    CurvatureTerms terms;
    std::vector<double> r_hat;
  };

  CurvePair(PolygonalCurve old_curve, PolygonalCurve new_curve,
            SecondDifferenceScaling scaling = SecondDifferenceScaling::per_du_squared)
      : scaling_(scaling), old_(make_side(std::move(old_curve), scaling)) {
    set_new(std::move(new_curve));
  }

  /// Reuses precomputed data for the old curve.
  CurvePair(Side old_side, PolygonalCurve new_curve,
            SecondDifferenceScaling scaling = SecondDifferenceScaling::per_du_squared)
      : scaling_(scaling), old_(std::move(old_side)) {
    set_new(std::move(new_curve));
  }

  static Side make_side(PolygonalCurve c, SecondDifferenceScaling scaling) {
    Side s{std::move(c), {}, {}, {}};
    s.edges = edge_quantities(s.curve);
    s.terms = curvature_terms(s.curve, scaling);
    s.r_hat = vertex_lengths(s.edges.r);
    return s;
  }

  /// Replaces the new curve and recomputes the weights.
  void set_new(PolygonalCurve new_curve) {
    if (new_curve.size() != old_.curve.size())
      throw LengthMismatch("curve pair: old has " + std::to_string(old_.curve.size()) + " vertices, new has " +
                           std::to_string(new_curve.size()));
    new_ = make_side(std::move(new_curve), scaling_);
    weights_.resize(size());
    for (std::size_t i = 0; i < size(); ++i) weights_[i] = 0.5 * (new_.r_hat[i] + old_.r_hat[i]);
  }

  std::size_t size() const noexcept { return old_.curve.size(); }
  double du() const noexcept { return old_.curve.du(); }
  SecondDifferenceScaling scaling() const noexcept { return scaling_; }

  const PolygonalCurve& old_curve() const noexcept { return old_.curve; }
  const PolygonalCurve& new_curve() const noexcept { return new_.curve; }
  const Side& old_side() const noexcept { return old_; }
  const Side& new_side() const noexcept { return new_; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// X_i^new - X_i^old.
  std::vector<Point2> displacement() const {
    std::vector<Point2> d(size());
    for (std::size_t i = 0; i < size(); ++i) d[i] = new_.curve[i] - old_.curve[i];
    return d;
  }

 private:
  SecondDifferenceScaling scaling_;
  Side old_;
  Side new_;
  std::vector<double> weights_;
};

/// Intermediate arrays of the bending-energy difference. Names follow the
/// factorization B - B~ = sum D.dX + sum E (H.d1(dX) + I.d2(dX) + Lvec.d1(dX)).
struct BendingIntermediates {
  std::vector<double> C_new;  ///< ((k_i - c0)^2 + (k_{i-1} - c0)^2) / 4 on the new curve
  std::vector<double> C_old;  ///< same on the old curve
  std::vector<Point2> D;      ///< edge-length part
  std::vector<double> E;      ///< averaged curvature deviation times averaged lengths
  std::vector<Point2> H;      ///< coefficient of d1(dX) from the det difference
  std::vector<Point2> I;      ///< coefficient of d2(dX) from the det difference
  std::vector<double> G2;     ///< factor of (g - g~) from the 1/g^3 difference
  std::vector<Point2> Lvec;   ///< coefficient of d1(dX) from the 1/g^3 difference
};

inline BendingIntermediates bending_intermediates(const CurvePair& pair, double c0) {
  const std::size_t n = pair.size();
  const auto& nw = pair.new_side();
  const auto& ol = pair.old_side();
  auto next = [n](std::size_t i) { return wrap(static_cast<std::ptrdiff_t>(i) + 1, n); };
  auto prev = [n](std::size_t i) { return wrap(static_cast<std::ptrdiff_t>(i) - 1, n); };

  BendingIntermediates b;
  b.C_new.resize(n);
  b.C_old.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = nw.terms.k[i] - c0, ap = nw.terms.k[prev(i)] - c0;
    const double o = ol.terms.k[i] - c0, op = ol.terms.k[prev(i)] - c0;
    b.C_new[i] = (a * a + ap * ap) / 4.0;
    b.C_old[i] = (o * o + op * op) / 4.0;
  }

  // Averaged edge vector (r t + r~ t~) / (r + r~) per edge.
  std::vector<Point2> edge_mean(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rs = nw.edges.r[i] + ol.edges.r[i];
    if (!(rs > 0.0)) throw DegenerateEdge("r + r~ vanishes on edge " + std::to_string(i));
    edge_mean[i] = (nw.edges.r[i] * nw.edges.t[i] + ol.edges.r[i] * ol.edges.t[i]) / rs;
  }

  b.D.resize(n);
  b.E.resize(n);
  b.H.resize(n);
  b.I.resize(n);
  b.G2.resize(n);
  b.Lvec.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = next(i);
    b.D[i] = (b.C_new[i] + b.C_old[i]) / 2.0 * edge_mean[i] - (b.C_new[j] + b.C_old[j]) / 2.0 * edge_mean[j];

    b.E[i] = ((nw.edges.r[i] + ol.edges.r[i]) / 8.0 + (nw.edges.r[j] + ol.edges.r[j]) / 8.0) *
             (nw.terms.k[i] - c0 + ol.terms.k[i] - c0);

    const double g = nw.terms.g[i], gt = ol.terms.g[i];
    const double g3 = g * g * g, gt3 = gt * gt * gt;
    const double factor = 0.5 * (1.0 / g3 + 1.0 / gt3);
    const Point2 d1m = (nw.terms.d1[i] + ol.terms.d1[i]) / 2.0;
    const Point2 d2m = (nw.terms.d2[i] + ol.terms.d2[i]) / 2.0;
    b.H[i] = factor * Point2{d2m.y, -d2m.x};
    b.I[i] = factor * Point2{-d1m.y, d1m.x};

    if (!(g + gt > 0.0)) throw DegenerateStencil("g + g~ vanishes at vertex " + std::to_string(i));
    b.G2[i] = -(g * g + g * gt + gt * gt) / (2.0 * g3 * gt3) * (nw.terms.det[i] + ol.terms.det[i]);
    b.Lvec[i] = b.G2[i] / (g + gt) * (nw.terms.d1[i] + ol.terms.d1[i]);
  }
  return b;
}

/// Discrete variational derivative of the bending energy.
inline std::vector<Point2> grad_bending(const CurvePair& pair, double c0) {
  const std::size_t n = pair.size();
  const auto b = bending_intermediates(pair, c0);
  std::vector<Point2> eh(n), ei(n), el(n);
  for (std::size_t i = 0; i < n; ++i) {
    eh[i] = b.E[i] * b.H[i];
    ei[i] = b.E[i] * b.I[i];
    el[i] = b.E[i] * b.Lvec[i];
  }
  // Summation by parts on the periodic index set: the adjoint of the
  // central first difference is its negative, the second difference is
  // self-adjoint.
  const auto d_eh = periodic_difference(eh, Difference::central1, pair.du(), pair.scaling());
  const auto d_ei = periodic_difference(ei, Difference::central2, pair.du(), pair.scaling());
  const auto d_el = periodic_difference(el, Difference::central1, pair.du(), pair.scaling());
  const auto w = pair.weights();
  std::vector<Point2> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (b.D[i] - d_eh[i] + d_ei[i] - d_el[i]) / w[i];
  return out;
}

/// Discrete variational derivative of the length.
inline std::vector<Point2> grad_length(const CurvePair& pair) {
  const std::size_t n = pair.size();
  const auto& nw = pair.new_side().edges;
  const auto& ol = pair.old_side().edges;
  std::vector<Point2> edge_mean(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rs = nw.r[i] + ol.r[i];
    if (!(rs > 0.0)) throw DegenerateEdge("r + r~ vanishes on edge " + std::to_string(i));
    edge_mean[i] = (nw.r[i] * nw.t[i] + ol.r[i] * ol.t[i]) / rs;
  }
  const auto w = pair.weights();
  std::vector<Point2> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = (edge_mean[i] - edge_mean[wrap(static_cast<std::ptrdiff_t>(i) + 1, n)]) / w[i];
  return out;
}

/// Discrete variational derivative of the enclosed area.
inline std::vector<Point2> grad_area(const CurvePair& pair) {
  const std::size_t n = pair.size();
  const auto& X = pair.new_curve();
  const auto& Xt = pair.old_curve();
  const auto w = pair.weights();
  std::vector<Point2> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    const Point2 p = X.at(ii - 1), pt = Xt.at(ii - 1), q = X.at(ii + 1), qt = Xt.at(ii + 1);
    out[i] = Point2{(-p.y - pt.y + q.y + qt.y) / 4.0, (p.x + pt.x - q.x - qt.x) / 4.0} / w[i];
  }
  return out;
}

struct GradientField {
  std::vector<Point2> dB;
  std::vector<Point2> dL;
  std::vector<Point2> dA;
};

inline GradientField gradients(const CurvePair& pair, double c0) {
  return {grad_bending(pair, c0), grad_length(pair), grad_area(pair)};
}

struct ChainRuleResiduals {
  double B = 0.0;
  double L = 0.0;
  double A = 0.0;
};

/// |(dF, X^new - X^old)_w - (F(new) - F(old))| / (1 + |F(new)|) for
/// F in {B, L, A}. Zero up to round-off whenever the gradients are right.
inline ChainRuleResiduals chain_rule_residual(const CurvePair& pair, double c0, const GradientField& grads) {
  const auto dx = pair.displacement();
  const auto w = pair.weights();
  const auto f_new = functionals(pair.new_curve(), c0, pair.scaling());
  const auto f_old = functionals(pair.old_curve(), c0, pair.scaling());
  auto residual = [&](const std::vector<Point2>& g, double fn, double fo) {
    return std::abs(discrete_inner_product(g, dx, w) - (fn - fo)) / (1.0 + std::abs(fn));
  };
  return {residual(grads.dB, f_new.B, f_old.B), residual(grads.dL, f_new.L, f_old.L),
          residual(grads.dA, f_new.A, f_old.A)};
}

inline ChainRuleResiduals chain_rule_residual(const CurvePair& pair, double c0) {
  return chain_rule_residual(pair, c0, gradients(pair, c0));
}

}  // namespace curveflow
