#pragma once

// Damped Newton iteration with a forward-difference Jacobian and a dense
// partially pivoted LU solve. The systems produced by the flow schemes are
// small (2N + 3 unknowns) and dense, so nothing cleverer is needed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "curveflow/errors.hpp"

namespace curveflow {

/// Row-major square matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
  DenseMatrix(std::size_t n, std::vector<double> row_major) : n_(n), data_(std::move(row_major)) {
    if (data_.size() != n * n) throw LengthMismatch("matrix data does not have n*n entries");
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * n_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * n_ + c]; }

  std::vector<double> operator*(std::span<const double> x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t c = 0; c < n_; ++c) y[r] += (*this)(r, c) * x[c];
    return y;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Solves A x = b by Gaussian elimination with partial pivoting. Throws
/// SingularMatrix when a pivot falls below 1e-14 times the largest entry
/// of its original row.
inline std::vector<double> lu_solve(DenseMatrix a, std::vector<double> b) {
  const std::size_t n = a.size();
  if (n == 0) throw LengthMismatch("lu_solve: empty system");
  if (b.size() != n) throw LengthMismatch("lu_solve: rhs length differs from matrix size");

  std::vector<double> row_scale(n, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) row_scale[r] = std::max(row_scale[r], std::abs(a(r, c)));

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(piv, c));
      std::swap(b[col], b[piv]);
      std::swap(row_scale[col], row_scale[piv]);
    }
    const double p = a(col, col);
    if (!(std::abs(p) > 1e-14 * row_scale[col]) || row_scale[col] == 0.0)
      throw SingularMatrix("pivot breakdown in column " + std::to_string(col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / p;
      if (f == 0.0) continue;
      a(r, col) = 0.0;
      for (std::size_t c = col + 1; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
    x[i] = s / a(i, i);
  }
  return x;
}

using ResidualFunction = std::function<std::vector<double>(std::span<const double>)>;

struct ResidualSystem {
  std::size_t dimension = 0;
  ResidualFunction evaluate;
};

struct SolverConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-12;
  int max_iters = 50;
  double fd_step = 1e-7;  ///< relative; column j uses fd_step * (1 + |u_j|)
  bool damping = true;
  int max_halvings = 20;
};

inline void validate(const SolverConfig& c) {
  if (!(c.rel_tol > 0.0)) throw ValidationError("solver.rel_tol", "must be positive");
  if (!(c.abs_tol >= 0.0)) throw ValidationError("solver.abs_tol", "must be non-negative");
  if (c.max_iters < 1) throw ValidationError("solver.max_iters", "must be at least 1");
  if (!(c.fd_step > 0.0)) throw ValidationError("solver.fd_step", "must be positive");
  if (c.max_halvings < 0) throw ValidationError("solver.max_halvings", "must be non-negative");
}

struct SolverReport {
  std::vector<double> solution;
  int iterations = 0;
  double initial_residual_norm = 0.0;
  double final_residual_norm = 0.0;
  bool converged = false;
  std::vector<double> residual_history;  ///< norm after each accepted iterate, starting with the guess
};

inline double euclidean_norm(std::span<const double> v) noexcept {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

namespace detail {

inline bool all_finite(std::span<const double> v) noexcept {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Forward-difference Jacobian, one column per unknown.
inline DenseMatrix fd_jacobian(const ResidualSystem& sys, std::span<const double> u, std::span<const double> f,
                               double fd_step) {
  const std::size_t n = sys.dimension;
  DenseMatrix j(n);
  std::vector<double> up(u.begin(), u.end());
  for (std::size_t c = 0; c < n; ++c) {
    const double h = fd_step * (1.0 + std::abs(u[c]));
    const double saved = up[c];
    up[c] = saved + h;
    const double actual_h = up[c] - saved;
    const auto fp = sys.evaluate(up);
    if (fp.size() != n) throw LengthMismatch("residual has the wrong length");
    if (!all_finite(fp)) throw NonFiniteResidual("non-finite residual while differencing column " + std::to_string(c));
    for (std::size_t r = 0; r < n; ++r) j(r, c) = (fp[r] - f[r]) / actual_h;
    up[c] = saved;
  }
  return j;
}

}  // namespace detail

/// Newton's method. Never reports converged with a residual above
/// rel_tol * (1 + |F(guess)|) (or abs_tol). Exhausted iteration or
/// halving budgets return converged = false rather than throwing.
inline SolverReport solve(const ResidualSystem& sys, std::vector<double> guess, const SolverConfig& cfg = {}) {
  if (guess.size() != sys.dimension) throw LengthMismatch("initial guess length differs from system dimension");
  SolverReport rep;
  auto f = sys.evaluate(guess);
  if (f.size() != sys.dimension) throw LengthMismatch("residual has the wrong length");
  if (!detail::all_finite(f)) throw NonFiniteResidual("residual is not finite at the initial guess");

  double fn = euclidean_norm(f);
  rep.initial_residual_norm = fn;
  rep.residual_history.push_back(fn);
  const double target = std::max(cfg.rel_tol * (1.0 + fn), cfg.abs_tol);
  auto done = [&](double r) { return r <= target; };

  std::vector<double> u = std::move(guess);
  if (done(fn)) {
    rep.solution = std::move(u);
    rep.final_residual_norm = fn;
    rep.converged = true;
    return rep;
  }

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const DenseMatrix jac = detail::fd_jacobian(sys, u, f, cfg.fd_step);
    std::vector<double> rhs(f.size());
    std::transform(f.begin(), f.end(), rhs.begin(), [](double x) { return -x; });
    std::vector<double> delta;
    try {
      delta = lu_solve(jac, std::move(rhs));
    } catch (const SingularMatrix& e) {
      throw SingularJacobian(std::string("Newton iteration ") + std::to_string(it) + ": " + e.what());
    }

    bool accepted = false;
    double step = 1.0;
    const int halvings = cfg.damping ? cfg.max_halvings : 0;
    std::vector<double> trial(u.size());
    for (int h = 0; h <= halvings; ++h, step *= 0.5) {
      for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + step * delta[i];
      std::vector<double> ft;
      try {
        ft = sys.evaluate(trial);
      } catch (const Error&) {
        continue;  // the trial left the admissible set (e.g. a degenerate curve)
      }
      if (ft.size() != sys.dimension || !detail::all_finite(ft)) continue;
      const double tn = euclidean_norm(ft);
      if (tn < fn || !cfg.damping) {
        u = trial;
        f = std::move(ft);
        fn = tn;
        accepted = true;
        break;
      }
    }
    rep.iterations = it;
    if (!accepted) break;
    rep.residual_history.push_back(fn);
    if (done(fn)) {
      rep.converged = true;
      break;
    }
  }
  rep.solution = std::move(u);
  rep.final_residual_norm = fn;
  return rep;
}

}  // namespace curveflow
