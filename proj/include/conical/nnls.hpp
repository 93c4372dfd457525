#pragma once

#include <cmath>
#include <vector>

#include "conical/matrix.hpp"
#include "conical/parallel.hpp"
#include "conical/solver_types.hpp"

namespace conical {

namespace detail {

// Gram matrix X_A^T X_A, computed once per solve and shared by all columns.
inline DenseMatrix gram(const DenseMatrix& xa) {
  DenseMatrix g(xa.cols(), xa.cols());
  for (std::size_t a = 0; a < xa.cols(); ++a) {
    for (std::size_t b = a; b < xa.cols(); ++b) {
      const double v = dot(xa.col(a), xa.col(b));
      g(a, b) = v;
      g(b, a) = v;
    }
  }
  return g;
}

// Cyclic coordinate descent sweeps for min_{b>=0} 0.5|X_A b - v|_2^2 given
// gram = X_A^T X_A and rhs = X_A^T v. grad is maintained as gram*b - rhs.
// Returns the number of sweeps run.
inline std::size_t nnls_cd_sweeps(const DenseMatrix& gram, std::span<double> b,
                                  std::span<double> grad, std::size_t max_sweeps, double tol) {
  const std::size_t k = b.size();
  std::size_t sweeps = 0;
  while (sweeps < max_sweeps) {
    ++sweeps;
    for (std::size_t a = 0; a < k; ++a) {
      const double step = b[a] - grad[a] / gram(a, a);
      const double nb = step > 0.0 ? step : 0.0;
      if (nb == b[a]) continue;
      const double delta = nb - b[a];
      auto gcol = gram.col(a);
      for (std::size_t t = 0; t < k; ++t) grad[t] += delta * gcol[t];
      b[a] = nb;
    }
    double kkt = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      const double active = b[a] < grad[a] ? b[a] : grad[a];
      kkt = std::fabs(active) > kkt ? std::fabs(active) : kkt;
    }
    if (kkt <= tol) break;
  }
  return sweeps;
}

}  // namespace detail

// Non-negative least squares per column of X against the anchor columns X_A,
// by cyclic coordinate descent on the normal equations. Exit per column when
// max_a |min(b_a, grad_a)| <= cd_tol * max(1, |X_j|_1). The reported
// objective is sum_j |X_j - X_A b_j|_2^2.
inline ProjectionResult nnls_cd(const DenseMatrix& xa, const DenseMatrix& x,
                                const SolverOptions& opts, const DenseMatrix* warm = nullptr) {
  if (xa.rows() != x.rows()) throw ShapeMismatch("nnls_cd: row counts differ");
  check_anchor_matrix(xa);
  const std::size_t k = xa.cols();
  const std::size_t n = x.cols();
  const DenseMatrix g = detail::gram(xa);

  ProjectionResult res;
  res.H = DenseMatrix(k, n);
  res.R = DenseMatrix(x.rows(), n);
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
    std::vector<double> rhs(k), grad(k);
    for (std::size_t a = 0; a < k; ++a) rhs[a] = dot(xa.col(a), xj);
    for (std::size_t a = 0; a < k; ++a) grad[a] = dot(g.col(a), b) - rhs[a];

    const double tol = opts.cd_tol * column_scale(xj);
    sweeps_used[j] = detail::nnls_cd_sweeps(g, b, grad, opts.max_cd_sweeps, tol);
    double kkt = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      const double active = b[a] < grad[a] ? b[a] : grad[a];
      kkt = std::fabs(active) > kkt ? std::fabs(active) : kkt;
    }
    res.column_converged[j] = kkt <= tol ? 1 : 0;

    auto hj = res.H.col(j);
    for (std::size_t a = 0; a < k; ++a) hj[a] = b[a];
    auto rj = res.R.col(j);
    for (std::size_t i = 0; i < xj.size(); ++i) rj[i] = xj[i];
    for (std::size_t a = 0; a < k; ++a) {
      if (b[a] == 0.0) continue;
      auto col = xa.col(a);
      for (std::size_t i = 0; i < rj.size(); ++i) rj[i] -= b[a] * col[i];
    }
    double sq = 0.0;
    for (double v : rj) sq += v * v;
    res.column_objectives[j] = sq;
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

}  // namespace conical
