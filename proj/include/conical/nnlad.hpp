#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "conical/matrix.hpp"
#include "conical/nnls.hpp"
#include "conical/parallel.hpp"
#include "conical/solver_types.hpp"

namespace conical {

namespace detail {

// Dense least squares min |A x - y|_2 via normal equations with partially
// pivoted Gaussian elimination. Returns nullopt when the system is too
// ill-conditioned to trust.
inline std::optional<std::vector<double>> solve_least_squares(
    const std::vector<std::vector<double>>& a_cols, const std::vector<double>& y) {
  const std::size_t k = a_cols.size();
  if (k == 0) return std::vector<double>{};
  std::vector<std::vector<double>> ata(k, std::vector<double>(k + 1, 0.0));
  double diag_scale = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t q = p; q < k; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += a_cols[p][i] * a_cols[q][i];
      ata[p][q] = s;
      ata[q][p] = s;
    }
    double rhs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) rhs += a_cols[p][i] * y[i];
    ata[p][k] = rhs;
    diag_scale = std::max(diag_scale, std::fabs(ata[p][p]));
  }
  if (diag_scale == 0.0) return std::nullopt;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::fabs(ata[r][col]) > std::fabs(ata[pivot][col])) pivot = r;
    }
    if (std::fabs(ata[pivot][col]) < 1e-13 * diag_scale) return std::nullopt;
    if (pivot != col) std::swap(ata[pivot], ata[col]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = ata[r][col] / ata[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= k; ++c) ata[r][c] -= f * ata[col][c];
    }
  }
  std::vector<double> x(k);
  for (std::size_t p = 0; p < k; ++p) x[p] = ata[p][k] / ata[p][p];
  return x;
}

struct LadColumnState {
  std::vector<double> b;  // coefficients, >= 0
  std::vector<double> r;  // residual x - X_A b, kept in sync with b
  double objective = 0.0;
};

inline double lad_objective(const DenseMatrix& xa, std::span<const double> xj,
                            const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < xj.size(); ++i) {
    double ri = xj[i];
    for (std::size_t a = 0; a < b.size(); ++a) {
      if (b[a] != 0.0) ri -= b[a] * xa(i, a);
    }
    s += std::fabs(ri);
  }
  return s;
}

inline void lad_refresh(const DenseMatrix& xa, std::span<const double> xj, LadColumnState& st) {
  st.r.assign(xj.begin(), xj.end());
  for (std::size_t a = 0; a < st.b.size(); ++a) {
    if (st.b[a] == 0.0) continue;
    auto col = xa.col(a);
    for (std::size_t i = 0; i < st.r.size(); ++i) st.r[i] -= st.b[a] * col[i];
  }
  st.objective = 0.0;
  for (double v : st.r) st.objective += std::fabs(v);
}

// Exact coordinate descent for the l1 objective: along each coordinate the
// minimizer is a weighted median of the residual breakpoints, clamped at
// b_a >= 0. Moves are accepted only on strict objective decrease, so sweeps
// are monotone. Returns true when anything moved.
inline bool lad_coordinate_refine(const DenseMatrix& xa, std::span<const double> xj,
                                  LadColumnState& st, std::size_t max_sweeps) {
  const std::size_t m = xj.size();
  const std::size_t k = st.b.size();
  bool any_move = false;
  std::vector<std::pair<double, double>> breaks;
  breaks.reserve(m);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    bool moved = false;
    for (std::size_t a = 0; a < k; ++a) {
      auto col = xa.col(a);
      breaks.clear();
      double total_weight = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double c = col[i];
        if (std::fabs(c) < 1e-300) continue;
        breaks.emplace_back(st.r[i] / c, std::fabs(c));
        total_weight += std::fabs(c);
      }
      if (breaks.empty()) continue;
      std::sort(breaks.begin(), breaks.end());
      double cum = 0.0;
      double t = breaks.back().first;
      for (const auto& [pos, w] : breaks) {
        cum += w;
        if (cum >= 0.5 * total_weight) {
          t = pos;
          break;
        }
      }
      if (t < -st.b[a]) t = -st.b[a];
      if (t == 0.0) continue;
      double fnew = 0.0;
      for (std::size_t i = 0; i < m; ++i) fnew += std::fabs(st.r[i] - t * col[i]);
      if (fnew < st.objective) {
        for (std::size_t i = 0; i < m; ++i) st.r[i] -= t * col[i];
        st.b[a] += t;
        if (st.b[a] < 0.0) st.b[a] = 0.0;
        st.objective = fnew;
        moved = true;
      }
    }
    any_move = any_move || moved;
    if (!moved) break;
  }
  return any_move;
}

// Vertex polish: interpolate the |S| smallest-residual rows over the support
// S exactly, which zeroes the active rows to machine precision. Falls back
// to least squares over all near-zero rows when the square system is
// unusable. Accepted only when feasible and the objective does not worsen.
inline bool polish_lad_column(const DenseMatrix& xa, std::span<const double> xj,
                              LadColumnState& st) {
  const std::size_t m = xj.size();
  const std::size_t k = st.b.size();
  std::vector<std::size_t> support;
  for (std::size_t a = 0; a < k; ++a)
    if (st.b[a] > 0.0) support.push_back(a);
  if (support.empty() || support.size() > m) return false;

  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(st.r[a]) < std::fabs(st.r[b]);
  });

  auto try_rows = [&](std::span<const std::size_t> rows) -> bool {
    std::vector<std::vector<double>> cols(support.size(), std::vector<double>(rows.size()));
    std::vector<double> rhs(rows.size());
    for (std::size_t c = 0; c < support.size(); ++c) {
      auto col = xa.col(support[c]);
      for (std::size_t t = 0; t < rows.size(); ++t) cols[c][t] = col[rows[t]];
    }
    for (std::size_t t = 0; t < rows.size(); ++t) rhs[t] = xj[rows[t]];
    auto solved = solve_least_squares(cols, rhs);
    if (!solved) return false;
    std::vector<double> candidate(k, 0.0);
    for (std::size_t c = 0; c < support.size(); ++c) {
      double v = (*solved)[c];
      if (v < 0.0) {
        if (v < -1e-9) return false;
        v = 0.0;
      }
      candidate[support[c]] = v;
    }
    const double fnew = lad_objective(xa, xj, candidate);
    if (fnew <= st.objective * (1.0 + 1e-12) + 1e-15 && fnew < st.objective) {
      st.b = std::move(candidate);
      lad_refresh(xa, xj, st);
      return true;
    }
    return false;
  };

  // Square interpolation on the most-nearly-active rows first.
  std::vector<std::size_t> rows(order.begin(), order.begin() + support.size());
  std::sort(rows.begin(), rows.end());
  if (try_rows(rows)) return true;

  double xmax = 0.0;
  for (double v : xj) xmax = std::fabs(v) > xmax ? std::fabs(v) : xmax;
  const double near_zero = 1e-8 * std::max(1.0, xmax);
  std::vector<std::size_t> loose;
  for (std::size_t i = 0; i < m; ++i)
    if (std::fabs(st.r[i]) <= near_zero) loose.push_back(i);
  if (loose.size() >= support.size() && loose != rows) return try_rows(loose);
  return false;
}

}  // namespace detail

// Non-negative least absolute deviations per column: min_{b>=0} |x - X_A b|_1
// through the split min |z|_1 s.t. X_A b + z = x, solved by ADMM with a fixed
// penalty. The b subproblem is warm-started coordinate-descent NNLS, the z
// update is elementwise soft thresholding, and convergence uses the usual
// primal/dual residual criteria. After termination an exact coordinate
// refinement plus a vertex polish sharpen the iterate, which the certificate
// checks downstream rely on.
inline ProjectionResult nnlad_admm(const DenseMatrix& xa, const DenseMatrix& x,
                                   const SolverOptions& opts, const DenseMatrix* warm = nullptr) {
  if (xa.rows() != x.rows()) throw ShapeMismatch("nnlad_admm: row counts differ");
  check_anchor_matrix(xa);
  const std::size_t m = x.rows();
  const std::size_t k = xa.cols();
  const std::size_t n = x.cols();
  const DenseMatrix g = detail::gram(xa);
  const double rho = opts.admm_rho;
  const double sqrt_m = std::sqrt(static_cast<double>(m));
  const double sqrt_k = std::sqrt(static_cast<double>(k));

  ProjectionResult res;
  res.H = DenseMatrix(k, n);
  res.R = DenseMatrix(m, n);
  res.column_objectives.assign(n, 0.0);
  res.column_converged.assign(n, 0);
  std::vector<std::size_t> iters_used(n, 0);

  parallel_for(n, [&](std::size_t j) {
    auto xj = x.col(j);
    const double x_norm2 = l2_norm(xj);

    detail::LadColumnState st;
    st.b.assign(k, 0.0);
    bool has_warm = false;
    if (warm && warm->rows() == k && warm->cols() == n) {
      auto wcol = warm->col(j);
      for (std::size_t a = 0; a < k; ++a) st.b[a] = wcol[a] > 0.0 ? wcol[a] : 0.0;
      has_warm = true;
    }
    const std::vector<double> warm_b = st.b;
    detail::lad_refresh(xa, xj, st);
    const double warm_objective = st.objective;

    std::vector<double> y(m, 0.0);
    auto refresh_y = [&]() {
      std::fill(y.begin(), y.end(), 0.0);
      for (std::size_t a = 0; a < k; ++a) {
        if (st.b[a] == 0.0) continue;
        auto col = xa.col(a);
        for (std::size_t i = 0; i < m; ++i) y[i] += st.b[a] * col[i];
      }
    };
    refresh_y();

    std::vector<double> z(m), u(m, 0.0), z_old(m), rhs(k), grad(k), diff(k);
    for (std::size_t i = 0; i < m; ++i) z[i] = xj[i] - y[i];

    bool converged = false;
    std::size_t it = 0;
    for (; it < opts.max_admm_iters; ++it) {
      // b update: min_{b>=0} |X_A b - (x - z - u)|_2^2, warm started
      for (std::size_t a = 0; a < k; ++a) {
        auto col = xa.col(a);
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += col[i] * (xj[i] - z[i] - u[i]);
        rhs[a] = s;
      }
      for (std::size_t a = 0; a < k; ++a) grad[a] = dot(g.col(a), st.b) - rhs[a];
      detail::nnls_cd_sweeps(g, st.b, grad, opts.admm_inner_sweeps, 1e-12);
      refresh_y();

      // z update: soft thresholding
      z_old.swap(z);
      for (std::size_t i = 0; i < m; ++i) z[i] = soft_threshold(xj[i] - y[i] - u[i], 1.0 / rho);

      // dual update and residuals
      double rnorm2 = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double r = y[i] + z[i] - xj[i];
        u[i] += r;
        rnorm2 += r * r;
      }
      for (std::size_t a = 0; a < k; ++a) {
        auto col = xa.col(a);
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += col[i] * (z[i] - z_old[i]);
        diff[a] = rho * s;
      }
      const double snorm = l2_norm(diff);
      double atu = 0.0;
      for (std::size_t a = 0; a < k; ++a) {
        auto col = xa.col(a);
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += col[i] * u[i];
        atu += s * s;
      }
      const double eps_pri =
          sqrt_m * opts.eps_abs +
          opts.eps_rel * std::max(l2_norm(y), std::max(l2_norm(z), x_norm2));
      const double eps_dual = sqrt_k * opts.eps_abs + opts.eps_rel * rho * std::sqrt(atu);
      if (std::sqrt(rnorm2) <= eps_pri && snorm <= eps_dual) {
        converged = true;
        ++it;
        break;
      }
    }
    iters_used[j] = it;

    // Endgame: exact coordinate descent recovers truncated support entries,
    // the vertex polish zeroes the active rows to machine precision.
    detail::lad_refresh(xa, xj, st);
    for (int round = 0; round < 4; ++round) {
      const bool refined = detail::lad_coordinate_refine(xa, xj, st, 16);
      const bool polished = detail::polish_lad_column(xa, xj, st);
      if (!refined && !polished) break;
    }

    if (has_warm && st.objective > warm_objective) {
      st.b = warm_b;
      detail::lad_refresh(xa, xj, st);
    }

    auto hj = res.H.col(j);
    for (std::size_t a = 0; a < k; ++a) hj[a] = st.b[a];
    auto rj = res.R.col(j);
    for (std::size_t i = 0; i < m; ++i) rj[i] = st.r[i];
    res.column_objectives[j] = st.objective;
    res.column_converged[j] = converged ? 1 : 0;
  });

  res.objective = 0.0;
  res.converged = true;
  for (std::size_t j = 0; j < n; ++j) {
    res.objective += res.column_objectives[j];
    res.iterations = iters_used[j] > res.iterations ? iters_used[j] : res.iterations;
    if (!res.column_converged[j]) res.converged = false;
  }
  ensure_nonnegative(res.H);
  return res;
}

}  // namespace conical
