#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "conical/divergence.hpp"
#include "conical/errors.hpp"
#include "conical/matrix.hpp"
#include "conical/parallel.hpp"
#include "conical/simplex.hpp"

namespace conical {

enum class ExteriorMode { Rand, Max };

struct SelectionOptions {
  double exterior_tol_rel = 1e-6;  // |R_i|_1 > tol * |X_i|_1 defines exterior
  double zero_tol_rel = 1e-8;      // residual-zero detection, scaled by max|X_i|
  double anchor_tol_rel = 1e-8;    // d*^T X_a <= tol * max(1, |X_a|_1)
  double identity_tol_abs = 1e-6;  // d*^T X_i >= |R_i|_1 - tol
  double active_tol = 1e-10;       // H_a > tol * max(1, max H) marks an active anchor
  double strict_eps = 1e-9;        // relaxation of strict multiplier positivity in the LP
  // Relative tie tolerance on criterion values. Kept at rounding scale:
  // a looser band (1e-9) provably misfires on near-one-hot mixture columns,
  // which then enter as bogus anchors next to the real one.
  double tie_rel = 1e-12;
  std::size_t max_p_resample = 16;
  std::size_t max_tie_recursion = 8;
};

// Subgradient certificate for the l1 projection of one exterior column:
// sign(R_i) off the zero set, a feasible u in [-1,1] on it. The two recorded
// checks are the stationarity inequality against the anchors and the
// certificate-residual identity d*^T X_i = |R_i|_1.
struct SignMatrixChoice {
  std::vector<double> d_star;
  std::vector<std::size_t> zero_set;
  bool used_lp_fallback = false;
  double anchor_alignment = 0.0;  // max_a d*^T X_a, <= ~0 when valid
  double identity_gap = 0.0;      // |R_i|_1 - d*^T X_i, <= ~0 .. tol when valid
  bool anchor_ok = true;
  bool identity_ok = true;
};

struct SelectionOutcome {
  std::vector<std::size_t> chosen;
  std::vector<double> criterion_values;  // -inf marks ineligible columns
  std::size_t exterior_index = 0;
  std::vector<std::size_t> tied;
};

using TieResolver = std::function<std::vector<std::size_t>(const std::vector<std::size_t>&)>;

// Picks an exterior column. residual_l1 gates exteriority relative to the
// column norms; rank_scores orders candidates in max mode (l1 residual for
// the robust driver, divergence for Bregman drivers).
inline std::optional<std::size_t> select_exterior(const std::vector<double>& residual_l1,
                                                  const std::vector<double>& rank_scores,
                                                  const std::vector<double>& x_l1,
                                                  ExteriorMode mode, RandomStream* rng,
                                                  const SelectionOptions& opts = {}) {
  std::vector<std::size_t> exterior;
  for (std::size_t i = 0; i < residual_l1.size(); ++i) {
    if (x_l1[i] > 0.0 && residual_l1[i] > opts.exterior_tol_rel * x_l1[i]) exterior.push_back(i);
  }
  if (exterior.empty()) return std::nullopt;
  if (mode == ExteriorMode::Rand) {
    if (!rng) throw ValidationError("rand exterior mode requires an RNG");
    return exterior[rng->index(exterior.size())];
  }
  std::size_t best = exterior[0];
  for (std::size_t i : exterior) {
    if (rank_scores[i] > rank_scores[best]) best = i;
  }
  return best;
}

inline std::optional<std::size_t> select_exterior(const DenseMatrix& r, const DenseMatrix& x,
                                                  ExteriorMode mode, RandomStream* rng,
                                                  const SelectionOptions& opts = {}) {
  const std::vector<double> rl1 = column_l1_norms(r);
  return select_exterior(rl1, rl1, column_l1_norms(x), mode, rng, opts);
}

// Feasibility program for the free certificate entries u on the zero set I:
// min 1^T u over -1 <= u <= 1, with the multiplier rows fixed to zero on the
// active anchors and bounded away from zero on the inactive ones. Strict
// positivity is relaxed to >= strict_eps.
inline std::vector<double> lp_feasibility(const DenseMatrix& xa,
                                          const std::vector<std::size_t>& zero_set,
                                          const std::vector<double>& fixed_d,
                                          const std::vector<std::size_t>& active_anchors,
                                          const std::vector<std::size_t>& inactive_anchors,
                                          const SelectionOptions& opts = {}) {
  const std::size_t nu = zero_set.size();
  // beta_a = -sum_{j not in I} X_A[j,a] * d_j; constraint sum_I X_A[j,a] u_j (= / <=) beta_a.
  auto beta = [&](std::size_t a) {
    auto col = xa.col(a);
    double s = 0.0;
    for (std::size_t j = 0; j < col.size(); ++j) s += col[j] * fixed_d[j];
    for (std::size_t t = 0; t < nu; ++t) s -= col[zero_set[t]] * fixed_d[zero_set[t]];
    return -s;
  };
  if (nu == 0) {
    for (std::size_t a : active_anchors) {
      if (std::fabs(beta(a)) > 1e-8) throw LpInfeasible("certificate equality unsatisfiable");
    }
    for (std::size_t a : inactive_anchors) {
      if (beta(a) < opts.strict_eps - 1e-12) {
        throw LpInfeasible("certificate inequality unsatisfiable");
      }
    }
    return {};
  }

  // Shift u = v - 1 so v >= 0 with v <= 2 as explicit rows.
  LpProblem lp;
  lp.num_vars = nu;
  lp.objective.assign(nu, 1.0);
  for (std::size_t a : active_anchors) {
    std::vector<double> row(nu);
    double shift = 0.0;
    auto col = xa.col(a);
    for (std::size_t t = 0; t < nu; ++t) {
      row[t] = col[zero_set[t]];
      shift += col[zero_set[t]];
    }
    lp.eq_rows.push_back(std::move(row));
    lp.eq_rhs.push_back(beta(a) + shift);
  }
  for (std::size_t a : inactive_anchors) {
    std::vector<double> row(nu);
    double shift = 0.0;
    auto col = xa.col(a);
    for (std::size_t t = 0; t < nu; ++t) {
      row[t] = col[zero_set[t]];
      shift += col[zero_set[t]];
    }
    lp.le_rows.push_back(std::move(row));
    lp.le_rhs.push_back(beta(a) + shift - opts.strict_eps);
  }
  for (std::size_t t = 0; t < nu; ++t) {
    std::vector<double> row(nu, 0.0);
    row[t] = 1.0;
    lp.le_rows.push_back(std::move(row));
    lp.le_rhs.push_back(2.0);
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) throw LpInfeasible("certificate LP has no solution");
  std::vector<double> u(nu);
  for (std::size_t t = 0; t < nu; ++t) {
    double v = sol.x[t] - 1.0;
    if (v > 1.0) v = 1.0;
    if (v < -1.0) v = -1.0;
    u[t] = v;
  }
  return u;
}

namespace detail {

inline void evaluate_certificate(const DenseMatrix& xa, std::span<const double> x_i,
                                 double r_l1, SignMatrixChoice& choice,
                                 const SelectionOptions& opts) {
  choice.anchor_alignment = -std::numeric_limits<double>::infinity();
  choice.anchor_ok = true;
  for (std::size_t a = 0; a < xa.cols(); ++a) {
    const double s = dot(choice.d_star, xa.col(a));
    if (s > choice.anchor_alignment) choice.anchor_alignment = s;
    const double scale = std::max(1.0, l1_norm(xa.col(a)));
    if (s > opts.anchor_tol_rel * scale) choice.anchor_ok = false;
  }
  if (xa.cols() == 0) choice.anchor_alignment = 0.0;
  const double ident = dot(choice.d_star, x_i);
  choice.identity_gap = r_l1 - ident;
  choice.identity_ok = choice.identity_gap <= opts.identity_tol_abs;
}

}  // namespace detail

// Builds the sign certificate for exterior column i from its residual and
// coefficients. The default fills the zero set with u = -1, which keeps the
// anchor inequality automatically (X >= 0); the LP fallback runs only when
// the residual identity is violated.
inline SignMatrixChoice build_sign_choice(std::span<const double> r_i,
                                          std::span<const double> h_i, const DenseMatrix& xa,
                                          const SelectionOptions& opts = {}) {
  const std::size_t m = r_i.size();
  std::vector<double> x_i(m);
  for (std::size_t j = 0; j < m; ++j) x_i[j] = r_i[j];
  for (std::size_t a = 0; a < xa.cols(); ++a) {
    if (h_i[a] == 0.0) continue;
    auto col = xa.col(a);
    for (std::size_t j = 0; j < m; ++j) x_i[j] += h_i[a] * col[j];
  }
  double xmax = 0.0;
  for (double v : x_i) xmax = std::fabs(v) > xmax ? std::fabs(v) : xmax;
  const double zero_tol = opts.zero_tol_rel * std::max(1.0, xmax);

  SignMatrixChoice choice;
  choice.d_star.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (r_i[j] > zero_tol) {
      choice.d_star[j] = 1.0;
    } else if (r_i[j] < -zero_tol) {
      choice.d_star[j] = -1.0;
    } else {
      choice.d_star[j] = -1.0;
      choice.zero_set.push_back(j);
    }
  }

  const double r_l1 = l1_norm(r_i);
  detail::evaluate_certificate(xa, x_i, r_l1, choice, opts);
  if (choice.anchor_ok && choice.identity_ok) return choice;

  double hmax = 0.0;
  for (double v : h_i) hmax = v > hmax ? v : hmax;
  const double h_tol = opts.active_tol * std::max(1.0, hmax);
  std::vector<std::size_t> active, inactive;
  for (std::size_t a = 0; a < xa.cols(); ++a) {
    (h_i[a] > h_tol ? active : inactive).push_back(a);
  }
  const std::vector<double> u = lp_feasibility(xa, choice.zero_set, choice.d_star, active,
                                               inactive, opts);
  for (std::size_t t = 0; t < choice.zero_set.size(); ++t) choice.d_star[choice.zero_set[t]] = u[t];
  choice.used_lp_fallback = true;
  detail::evaluate_certificate(xa, x_i, r_l1, choice, opts);
  if (!choice.identity_ok) {
    throw LpInfeasible("certificate repair failed; projection not converged tightly enough");
  }
  return choice;
}

// Shared selection core: maximize (w^T X_j) / (p^T X_j) over eligible
// columns. Two-way ties return both indices; wider ties go to the resolver.
inline SelectionOutcome select_anchor_weighted(const DenseMatrix& x, std::span<const double> w,
                                               const PositiveVector& p,
                                               const std::vector<std::size_t>& anchors,
                                               const std::vector<unsigned char>& excluded,
                                               std::size_t exterior_index,
                                               const SelectionOptions& opts,
                                               const TieResolver& resolver = nullptr) {
  const std::size_t n = x.cols();
  const double w_norm = l2_norm(w);
  if (w_norm == 0.0) throw ValidationError("selection weights are identically zero");
  const double p_norm = l2_norm(p.values);
  const double cosine = std::fabs(dot(w, p.values)) / (w_norm * p_norm);
  if (cosine > 1.0 - 1e-12) {
    throw CollinearPerturbation("selection weights collinear with p; resample perturbation");
  }

  SelectionOutcome out;
  out.exterior_index = exterior_index;
  out.criterion_values.assign(n, -std::numeric_limits<double>::infinity());
  parallel_for(n, [&](std::size_t j) {
    if (j < excluded.size() && excluded[j]) return;
    auto col = x.col(j);
    if (l1_norm(col) == 0.0) return;
    out.criterion_values[j] = dot(w, col) / dot(p.values, col);
  });

  double cmax = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isinf(out.criterion_values[j])) continue;
    any = true;
    if (out.criterion_values[j] > cmax) cmax = out.criterion_values[j];
  }
  if (!any) throw AllColumnsZero("no eligible column with positive l1 norm");

  const double tie_band = opts.tie_rel * std::max(std::fabs(cmax), 1e-30);
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isinf(out.criterion_values[j])) continue;
    if (cmax - out.criterion_values[j] <= tie_band) out.tied.push_back(j);
  }

  if (out.tied.size() <= 2) {
    out.chosen = out.tied;
  } else if (resolver) {
    out.chosen = resolver(out.tied);
  } else {
    throw ValidationError("criterion tie wider than two columns and no tie resolver given");
  }
  for (std::size_t c : out.chosen) {
    for (std::size_t a : anchors) {
      if (a == c) throw std::logic_error("selection returned an already chosen anchor");
    }
  }
  return out;
}

inline SelectionOutcome select_anchor_l1(const DenseMatrix& x, const SignMatrixChoice& choice,
                                         const PositiveVector& p,
                                         const std::vector<std::size_t>& anchors,
                                         const std::vector<unsigned char>& excluded,
                                         std::size_t exterior_index,
                                         const SelectionOptions& opts = {},
                                         const TieResolver& resolver = nullptr) {
  return select_anchor_weighted(x, choice.d_star, p, anchors, excluded, exterior_index, opts,
                                resolver);
}

// Criterion weights phi''(X_A H_i) . R_i for the forward Bregman driver.
inline std::vector<double> bregman_selection_weights(const DivergenceSpec& spec,
                                                     const DenseMatrix& xa,
                                                     std::span<const double> h_i,
                                                     std::span<const double> r_i) {
  const std::size_t m = r_i.size();
  std::vector<double> y(m, 0.0);
  for (std::size_t a = 0; a < xa.cols(); ++a) {
    if (h_i[a] == 0.0) continue;
    auto col = xa.col(a);
    for (std::size_t j = 0; j < m; ++j) y[j] += h_i[a] * col[j];
  }
  std::vector<double> w(m);
  for (std::size_t j = 0; j < m; ++j) w[j] = spec.phi_second(y[j]) * r_i[j];
  return w;
}

// Criterion weights phi'(X_i) - phi'(X_A H_i) for the reverse variant.
inline std::vector<double> bregman_reverse_selection_weights(const DivergenceSpec& spec,
                                                             const DenseMatrix& xa,
                                                             std::span<const double> h_i,
                                                             std::span<const double> x_i) {
  const std::size_t m = x_i.size();
  std::vector<double> y(m, 0.0);
  for (std::size_t a = 0; a < xa.cols(); ++a) {
    if (h_i[a] == 0.0) continue;
    auto col = xa.col(a);
    for (std::size_t j = 0; j < m; ++j) y[j] += h_i[a] * col[j];
  }
  std::vector<double> w(m);
  for (std::size_t j = 0; j < m; ++j) w[j] = spec.phi_prime(x_i[j]) - spec.phi_prime(y[j]);
  return w;
}

inline SelectionOutcome select_anchor_bregman(const DivergenceSpec& spec, const DenseMatrix& x,
                                              const DenseMatrix& xa, const DenseMatrix& h,
                                              const DenseMatrix& r, std::size_t exterior_index,
                                              const PositiveVector& p,
                                              const std::vector<std::size_t>& anchors,
                                              const std::vector<unsigned char>& excluded,
                                              const SelectionOptions& opts = {},
                                              const TieResolver& resolver = nullptr) {
  const std::vector<double> w =
      bregman_selection_weights(spec, xa, h.col(exterior_index), r.col(exterior_index));
  return select_anchor_weighted(x, w, p, anchors, excluded, exterior_index, opts, resolver);
}

inline SelectionOutcome select_anchor_bregman_reverse(
    const DivergenceSpec& spec, const DenseMatrix& x, const DenseMatrix& xa, const DenseMatrix& h,
    std::size_t exterior_index, const PositiveVector& p, const std::vector<std::size_t>& anchors,
    const std::vector<unsigned char>& excluded, const SelectionOptions& opts = {},
    const TieResolver& resolver = nullptr) {
  const std::vector<double> w =
      bregman_reverse_selection_weights(spec, xa, h.col(exterior_index), x.col(exterior_index));
  return select_anchor_weighted(x, w, p, anchors, excluded, exterior_index, opts, resolver);
}

}  // namespace conical
