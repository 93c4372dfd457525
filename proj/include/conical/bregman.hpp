#pragma once

#include <cmath>
#include <vector>

#include "conical/divergence.hpp"
#include "conical/matrix.hpp"
#include "conical/nnls.hpp"
#include "conical/parallel.hpp"
#include "conical/solver_types.hpp"

namespace conical {

namespace detail {

// dD/dy and d2D/dy2 of the elementwise divergence, forward direction
// D(x, y) with y = (X_A b)_i. Evaluated at clipped arguments.
inline void bregman_forward_derivs(const DivergenceSpec& spec, double x, double y, double* d1,
                                   double* d2) {
  const double yc = spec.clip(y);
  switch (spec.kind) {
    case DivergenceKind::SquaredEuclidean:
      *d1 = 2.0 * (y - x);
      *d2 = 2.0;
      return;
    case DivergenceKind::GeneralizedKL: {
      const double xc = x < 0.0 ? 0.0 : x;
      *d1 = 1.0 - xc / yc;
      *d2 = xc / (yc * yc);
      return;
    }
    case DivergenceKind::ItakuraSaito: {
      const double xc = spec.clip(x);
      *d1 = 1.0 / yc - xc / (yc * yc);
      *d2 = 2.0 * xc / (yc * yc * yc) - 1.0 / (yc * yc);
      return;
    }
  }
}

// Reverse direction D(y, x): dD/dy = phi'(y) - phi'(x), d2D/dy2 = phi''(y).
inline void bregman_reverse_derivs(const DivergenceSpec& spec, double x, double y, double* d1,
                                   double* d2) {
  *d1 = spec.phi_prime(y) - spec.phi_prime(x);
  *d2 = spec.phi_second(y);
}

inline double bregman_objective_col(const DivergenceSpec& spec, std::span<const double> xj,
                                    std::span<const double> y, bool reverse) {
  double s = 0.0;
  for (std::size_t i = 0; i < xj.size(); ++i) {
    s += reverse ? spec.point(y[i], xj[i]) : spec.point(xj[i], y[i]);
  }
  return s;
}

inline ProjectionResult bregman_projection_impl(const DivergenceSpec& spec, const DenseMatrix& xa,
                                                const DenseMatrix& x, const SolverOptions& opts,
                                                const DenseMatrix* warm, bool reverse) {
  if (xa.rows() != x.rows()) throw ShapeMismatch("bregman_projection: row counts differ");
  check_anchor_matrix(xa);
  const std::size_t m = x.rows();
  const std::size_t k = xa.cols();
  const std::size_t n = x.cols();
  const DenseMatrix gram_xa = gram(xa);

  ProjectionResult res;
  res.H = DenseMatrix(k, n);
  res.R = DenseMatrix(m, n);
  res.column_objectives.assign(n, 0.0);
  res.column_converged.assign(n, 0);
  std::vector<std::size_t> sweeps_used(n, 0);

  parallel_for(n, [&](std::size_t j) {
    auto xj = x.col(j);
    std::vector<double> b(k, 0.0);
    if (warm && warm->rows() == k && warm->cols() == n) {
      auto w = warm->col(j);
      for (std::size_t a = 0; a < k; ++a) b[a] = w[a] > 0.0 ? w[a] : 0.0;
    }
    std::vector<double> y(m, 0.0);
    auto rebuild_y = [&]() {
      std::fill(y.begin(), y.end(), 0.0);
      for (std::size_t a = 0; a < k; ++a) {
        if (b[a] == 0.0) continue;
        auto col = xa.col(a);
        for (std::size_t i = 0; i < m; ++i) y[i] += b[a] * col[i];
      }
    };
    rebuild_y();
    double fval = bregman_objective_col(spec, xj, y, reverse);

    // Cold start: from y = 0 the clipped KL/IS derivatives leave Newton with
    // vanishing steps. Seed with the non-negative least-squares fit when it
    // improves the divergence.
    if (max_abs(y) == 0.0 && l1_norm(xj) > 0.0) {
      std::vector<double> seed(k, 0.0), grad(k);
      std::vector<double> rhs(k);
      for (std::size_t a = 0; a < k; ++a) rhs[a] = dot(xa.col(a), xj);
      for (std::size_t a = 0; a < k; ++a) grad[a] = -rhs[a];
      nnls_cd_sweeps(gram_xa, seed, grad, 50, 1e-12);
      std::vector<double> y_seed(m, 0.0);
      for (std::size_t a = 0; a < k; ++a) {
        if (seed[a] == 0.0) continue;
        auto col = xa.col(a);
        for (std::size_t i = 0; i < m; ++i) y_seed[i] += seed[a] * col[i];
      }
      const double f_seed = bregman_objective_col(spec, xj, y_seed, reverse);
      if (f_seed < fval) {
        b = std::move(seed);
        y = std::move(y_seed);
        fval = f_seed;
      }
    }
    const double tol = opts.cd_tol * column_scale(xj);

    std::vector<double> trial(m);
    auto coord_derivs = [&](std::size_t a, double* g, double* h) {
      auto col = xa.col(a);
      double gs = 0.0, hs = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double d1 = 0.0, d2 = 0.0;
        if (reverse) {
          bregman_reverse_derivs(spec, xj[i], y[i], &d1, &d2);
        } else {
          bregman_forward_derivs(spec, xj[i], y[i], &d1, &d2);
        }
        gs += col[i] * d1;
        hs += col[i] * col[i] * d2;
      }
      *g = gs;
      *h = hs;
    };

    bool done = false;
    std::size_t sweep = 0;
    for (; sweep < opts.max_cd_sweeps && !done; ++sweep) {
      bool moved = false;
      for (std::size_t a = 0; a < k; ++a) {
        double g, h;
        coord_derivs(a, &g, &h);
        if (b[a] == 0.0 && g >= 0.0) continue;
        double step = h > 1e-300 ? -g / h : -g;
        double target = b[a] + step;
        if (target < 0.0) target = 0.0;
        if (target == b[a]) continue;
        auto col = xa.col(a);
        // Near the optimum the per-move decrease falls below the rounding
        // noise of the summed objective; a short guarded Newton step is a
        // guaranteed descent direction there, so skip the comparison.
        if (h > 0.0 && std::fabs(target - b[a]) <= 1e-7 * (1.0 + std::fabs(b[a]))) {
          const double delta = target - b[a];
          for (std::size_t i = 0; i < m; ++i) y[i] += delta * col[i];
          b[a] = target;
          moved = true;
          continue;
        }
        // Backtrack along [b_a, target] until the 1-D objective decreases.
        double t = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
          const double cand = b[a] + t * (target - b[a]);
          const double delta = cand - b[a];
          if (cand == b[a]) break;
          for (std::size_t i = 0; i < m; ++i) trial[i] = y[i] + delta * col[i];
          const double fnew = bregman_objective_col(spec, xj, trial, reverse);
          if (fnew < fval) {
            y.swap(trial);
            b[a] = cand;
            fval = fnew;
            accepted = true;
            break;
          }
        }
        moved = moved || accepted;
      }
      fval = bregman_objective_col(spec, xj, y, reverse);
      // KKT: grad >= -tol everywhere and |b_a * grad_a| <= tol.
      double worst = 0.0;
      for (std::size_t a = 0; a < k; ++a) {
        double g, h;
        coord_derivs(a, &g, &h);
        if (-g > worst) worst = -g;
        const double comp = std::fabs(b[a] * g);
        if (comp > worst) worst = comp;
      }
      if (worst <= tol) {
        done = true;
      } else if (!moved) {
        break;  // stalled at floating-point resolution
      }
    }
    sweeps_used[j] = sweep;
    res.column_converged[j] = done ? 1 : 0;

    auto hj = res.H.col(j);
    for (std::size_t a = 0; a < k; ++a) hj[a] = b[a];
    auto rj = res.R.col(j);
    for (std::size_t i = 0; i < m; ++i) rj[i] = xj[i];
    for (std::size_t a = 0; a < k; ++a) {
      if (b[a] == 0.0) continue;
      auto col = xa.col(a);
      for (std::size_t i = 0; i < m; ++i) rj[i] -= b[a] * col[i];
    }
    res.column_objectives[j] = bregman_objective_col(spec, xj, y, reverse);
  });

  res.objective = 0.0;
  res.converged = true;
  for (std::size_t j = 0; j < n; ++j) {
    res.objective += res.column_objectives[j];
    res.iterations = sweeps_used[j] > res.iterations ? sweeps_used[j] : res.iterations;
    if (!res.column_converged[j]) res.converged = false;
  }
  ensure_nonnegative(res.H);
  return res;
}

}  // namespace detail

// H = argmin_{B>=0} D(X, X_A B), columnwise cyclic coordinate descent with
// exact 1-D Newton steps backtracked onto b >= 0. The objective never
// increases across sweeps; exit requires the per-column KKT conditions.
inline ProjectionResult bregman_projection(const DivergenceSpec& spec, const DenseMatrix& xa,
                                           const DenseMatrix& x, const SolverOptions& opts,
                                           const DenseMatrix* warm = nullptr) {
  return detail::bregman_projection_impl(spec, xa, x, opts, warm, false);
}

// Reverse-argument variant: H = argmin_{B>=0} D(X_A B, X).
inline ProjectionResult bregman_projection_reverse(const DivergenceSpec& spec,
                                                   const DenseMatrix& xa, const DenseMatrix& x,
                                                   const SolverOptions& opts,
                                                   const DenseMatrix* warm = nullptr) {
  return detail::bregman_projection_impl(spec, xa, x, opts, warm, true);
}

// Per-coordinate gradient of D(X_j, X_A b) at b = H_j; used for stationarity
// diagnostics and selection weights. Entry (a) is d/db_a.
inline std::vector<double> bregman_gradient_col(const DivergenceSpec& spec, const DenseMatrix& xa,
                                                std::span<const double> xj,
                                                std::span<const double> hj) {
  const std::size_t m = xa.rows();
  const std::size_t k = xa.cols();
  std::vector<double> y(m, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    if (hj[a] == 0.0) continue;
    auto col = xa.col(a);
    for (std::size_t i = 0; i < m; ++i) y[i] += hj[a] * col[i];
  }
  std::vector<double> grad(k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    auto col = xa.col(a);
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double d1 = 0.0, d2 = 0.0;
      detail::bregman_forward_derivs(spec, xj[i], y[i], &d1, &d2);
      s += col[i] * d1;
    }
    grad[a] = s;
  }
  return grad;
}

// Max entry of [phi''(X_A H) . R]^T X_A over all columns and anchors. At a
// stationary point this matrix equals minus the multipliers, so it must not
// exceed ~0.
inline double bregman_stationarity_max(const DivergenceSpec& spec, const DenseMatrix& xa,
                                       const DenseMatrix& h, const DenseMatrix& x) {
  double worst = -1e300;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    auto grad = bregman_gradient_col(spec, xa, x.col(j), h.col(j));
    for (double g : grad) {
      const double entry = -g;
      if (entry > worst) worst = entry;
    }
  }
  return worst;
}

}  // namespace conical
