#pragma once

#include <cstddef>
#include <vector>

#include "conical/errors.hpp"
#include "conical/matrix.hpp"

namespace conical {

struct SolverOptions {
  double admm_rho = 1.0;       // fixed penalty, no adaptive scheme
  double eps_abs = 1e-6;       // ADMM absolute stopping tolerance
  double eps_rel = 1e-4;       // ADMM relative stopping tolerance
  std::size_t max_admm_iters = 2000;
  std::size_t admm_inner_sweeps = 3;  // NNLS sweeps per ADMM iteration
  std::size_t max_cd_sweeps = 500;
  double cd_tol = 1e-9;        // per-column KKT tolerance, scaled by max(1, |X_j|_1)

  SolverOptions tightened(double factor) const {
    SolverOptions o = *this;
    o.eps_abs *= factor;
    o.eps_rel *= factor;
    o.cd_tol *= factor;
    o.max_admm_iters *= 2;
    o.max_cd_sweeps *= 2;
    return o;
  }
};

struct ProjectionResult {
  DenseMatrix H;  // k x n, non-negative
  DenseMatrix R;  // m x n, recomputed as X - X_A * H
  double objective = 0.0;
  std::size_t iterations = 0;  // max over columns
  bool converged = true;
  std::vector<double> column_objectives;
  std::vector<unsigned char> column_converged;
};

// H >= 0 is a hard contract for every projection solver, not a tolerance.
inline void ensure_nonnegative(const DenseMatrix& h) {
  for (double v : h.data()) {
    if (v < 0.0) throw std::logic_error("projection produced a negative coefficient");
  }
}

inline void check_anchor_matrix(const DenseMatrix& xa) {
  if (xa.cols() == 0) throw ValidationError("anchor matrix has no columns");
  for (std::size_t a = 0; a < xa.cols(); ++a) {
    if (l1_norm(xa.col(a)) == 0.0) {
      throw DegenerateAnchor("anchor column " + std::to_string(a) + " is identically zero");
    }
  }
}

// Tolerances are relative per column so columns of very different magnitude
// converge uniformly.
inline double column_scale(std::span<const double> x) {
  const double n = l1_norm(x);
  return n > 1.0 ? n : 1.0;
}

}  // namespace conical
