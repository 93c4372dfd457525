#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "conical/errors.hpp"

namespace conical {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

// min c^T x, subject to eq_rows * x = eq_rhs, le_rows * x <= le_rhs, x >= 0.
struct LpProblem {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> le_rows;
  std::vector<double> le_rhs;
};

struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  std::vector<double> x;
  double objective = 0.0;
};

// Dense two-phase tableau simplex with Bland's rule. Intended for the small
// certificate-feasibility programs (tens of variables); not a general
// production LP code.
class DenseSimplex {
 public:
  explicit DenseSimplex(const LpProblem& p) : p_(p) {}

  LpSolution solve() {
    build_tableau();
    LpSolution out;
    if (!phase(true)) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    if (phase1_value() > kFeasTol) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    drive_out_artificials();
    const bool ok = phase(false);
    out.status = ok ? LpStatus::Optimal : status_;
    if (out.status != LpStatus::Optimal) return out;
    out.x.assign(p_.num_vars, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] < p_.num_vars) out.x[basis_[r]] = tab_[r][cols_];
    }
    out.objective = 0.0;
    for (std::size_t j = 0; j < p_.num_vars; ++j) out.objective += p_.objective[j] * out.x[j];
    return out;
  }

 private:
  static constexpr double kPivTol = 1e-11;
  static constexpr double kFeasTol = 1e-9;
  static constexpr std::size_t kMaxPivots = 20000;

  const LpProblem& p_;
  std::vector<std::vector<double>> tab_;  // rows_ x (cols_ + 1)
  std::vector<double> cost_;              // cols_ + 1
  std::vector<std::size_t> basis_;
  std::size_t rows_ = 0, cols_ = 0, slack_begin_ = 0, art_begin_ = 0;
  LpStatus status_ = LpStatus::Optimal;

  void build_tableau() {
    const std::size_t n_eq = p_.eq_rows.size();
    const std::size_t n_le = p_.le_rows.size();
    rows_ = n_eq + n_le;
    slack_begin_ = p_.num_vars;
    art_begin_ = p_.num_vars + n_le;
    cols_ = art_begin_ + rows_;
    tab_.assign(rows_, std::vector<double>(cols_ + 1, 0.0));
    basis_.assign(rows_, 0);
    for (std::size_t r = 0; r < n_eq; ++r) {
      for (std::size_t j = 0; j < p_.num_vars; ++j) tab_[r][j] = p_.eq_rows[r][j];
      tab_[r][cols_] = p_.eq_rhs[r];
    }
    for (std::size_t r = 0; r < n_le; ++r) {
      const std::size_t row = n_eq + r;
      for (std::size_t j = 0; j < p_.num_vars; ++j) tab_[row][j] = p_.le_rows[r][j];
      tab_[row][slack_begin_ + r] = 1.0;
      tab_[row][cols_] = p_.le_rhs[r];
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      if (tab_[r][cols_] < 0.0) {
        for (std::size_t j = 0; j <= cols_; ++j) tab_[r][j] = -tab_[r][j];
      }
      tab_[r][art_begin_ + r] = 1.0;
      basis_[r] = art_begin_ + r;
    }
  }

  double phase1_value() const {
    double v = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] >= art_begin_) v += tab_[r][cols_];
    }
    return v;
  }

  void rebuild_cost(bool phase1) {
    cost_.assign(cols_ + 1, 0.0);
    std::vector<double> c(cols_, 0.0);
    if (phase1) {
      for (std::size_t j = art_begin_; j < cols_; ++j) c[j] = 1.0;
    } else {
      for (std::size_t j = 0; j < p_.num_vars; ++j) c[j] = p_.objective[j];
    }
    for (std::size_t j = 0; j < cols_; ++j) cost_[j] = c[j];
    for (std::size_t r = 0; r < rows_; ++r) {
      const double cb = c[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) cost_[j] -= cb * tab_[r][j];
    }
  }

  void pivot(std::size_t prow, std::size_t pcol) {
    const double pv = tab_[prow][pcol];
    for (std::size_t j = 0; j <= cols_; ++j) tab_[prow][j] /= pv;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == prow) continue;
      const double f = tab_[r][pcol];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) tab_[r][j] -= f * tab_[prow][j];
    }
    const double cf = cost_[pcol];
    if (cf != 0.0) {
      for (std::size_t j = 0; j <= cols_; ++j) cost_[j] -= cf * tab_[prow][j];
    }
    basis_[prow] = pcol;
  }

  // Returns false on unbounded/iteration-limit; infeasibility is signalled
  // by the phase-1 objective.
  bool phase(bool phase1) {
    rebuild_cost(phase1);
    const std::size_t col_limit = phase1 ? cols_ : art_begin_;
    for (std::size_t iter = 0; iter < kMaxPivots; ++iter) {
      // Bland: lowest-index improving column.
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < col_limit; ++j) {
        if (!phase1 && j >= art_begin_) break;
        if (cost_[j] < -kFeasTol) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return true;
      std::size_t leave = rows_;
      double best_ratio = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) {
        const double a = tab_[r][enter];
        if (a <= kPivTol) continue;
        const double ratio = tab_[r][cols_] / a;
        if (leave == rows_ || ratio < best_ratio - 1e-15 ||
            (std::fabs(ratio - best_ratio) <= 1e-15 && basis_[r] < basis_[leave])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (leave == rows_) {
        status_ = LpStatus::Unbounded;
        return false;
      }
      pivot(leave, enter);
    }
    status_ = LpStatus::IterationLimit;
    return false;
  }

  // After phase 1, swap any artificial still in the basis for a structural
  // column when possible; rows with no eligible pivot are redundant and the
  // artificial stays at value zero.
  void drive_out_artificials() {
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] < art_begin_) continue;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (std::fabs(tab_[r][j]) > 1e-9) {
          rebuild_cost(true);
          pivot(r, j);
          break;
        }
      }
    }
  }
};

inline LpSolution solve_lp(const LpProblem& problem) { return DenseSimplex(problem).solve(); }

}  // namespace conical
