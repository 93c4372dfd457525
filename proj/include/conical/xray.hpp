#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conical/bregman.hpp"
#include "conical/matrix.hpp"
#include "conical/nnlad.hpp"
#include "conical/nnls.hpp"
#include "conical/selection.hpp"
#include "conical/solver_types.hpp"

namespace conical {

enum class LossKind { L1, Bregman, BregmanReverse };

struct RunConfig {
  std::size_t rank = 1;
  LossKind loss = LossKind::L1;
  DivergenceSpec divergence{};  // ignored for L1
  ExteriorMode exterior = ExteriorMode::Max;
  std::uint64_t seed = 0;
  SolverOptions solver{};
  SelectionOptions selection{};
};

struct IterationDiag {
  std::size_t exterior_index = 0;
  std::vector<std::size_t> added;
  bool used_lp_fallback = false;
  std::size_t reproject_retries = 0;
  bool certificate_ok = true;
  double anchor_alignment = 0.0;   // l1: max_a d*^T X_a
  double identity_gap = 0.0;       // l1: |R_i|_1 - d*^T X_i
  double weighted_exterior = 0.0;  // w^T X_i, positive for a true exterior point
  double stationarity_max = 0.0;   // Bregman: max entry of [phi''.R]^T X_A
  double objective = 0.0;
  bool projection_converged = true;
};

// Result of one driver run: ordered anchors, coefficients against W = X_A,
// the per-iteration objective trace, and per-iteration certificate
// diagnostics.
struct Factorization {
  std::vector<std::size_t> anchors;
  DenseMatrix H;
  std::vector<double> residual_norm_trace;
  std::vector<IterationDiag> iterations;
  std::vector<std::string> warnings;
};

namespace detail {

inline ProjectionResult project_loss(const RunConfig& cfg, const DenseMatrix& xa,
                                     const DenseMatrix& x, const SolverOptions& opts,
                                     const DenseMatrix* warm) {
  switch (cfg.loss) {
    case LossKind::L1:
      return nnlad_admm(xa, x, opts, warm);
    case LossKind::Bregman:
      return bregman_projection(cfg.divergence, xa, x, opts, warm);
    case LossKind::BregmanReverse:
      return bregman_projection_reverse(cfg.divergence, xa, x, opts, warm);
  }
  throw ValidationError("unknown loss");
}

inline DenseMatrix pad_warm(const DenseMatrix& h, std::size_t new_rows, std::size_t cols) {
  DenseMatrix warm(new_rows, cols);
  for (std::size_t j = 0; j < h.cols(); ++j) {
    for (std::size_t a = 0; a < h.rows(); ++a) warm(a, j) = h(a, j);
  }
  return warm;
}

}  // namespace detail

Factorization run_xray_impl(const DenseMatrix& x, const RunConfig& cfg, std::size_t depth,
                            const PositiveVector* inherited_p);

// Tie resolution: two tied columns are both extreme and both kept; wider
// ties are resolved by running the driver on the tied subset and keeping the
// anchors it finds. Recursion inherits the parent's p and is depth-capped.
inline std::vector<std::size_t> resolve_ties(const std::vector<std::size_t>& tied,
                                             const DenseMatrix& x, const RunConfig& cfg,
                                             const PositiveVector& p, std::size_t depth,
                                             std::vector<std::string>* warnings) {
  if (tied.size() < 2) throw ValidationError("resolve_ties requires at least two tied columns");
  if (tied.size() == 2) return tied;
  if (depth >= cfg.selection.max_tie_recursion) {
    if (warnings) {
      warnings->push_back("tie recursion limit reached; picked lowest tied index " +
                          std::to_string(tied.front()));
    }
    return {tied.front()};
  }
  const DenseMatrix sub = select_columns(x, tied);
  RunConfig sub_cfg = cfg;
  sub_cfg.rank = tied.size();
  const Factorization f = run_xray_impl(sub, sub_cfg, depth + 1, &p);
  std::vector<std::size_t> mapped;
  mapped.reserve(f.anchors.size());
  for (std::size_t local : f.anchors) mapped.push_back(tied[local]);
  if (warnings) {
    for (const std::string& w : f.warnings) warnings->push_back("tie recursion: " + w);
  }
  return mapped;
}

inline Factorization run_xray_impl(const DenseMatrix& x, const RunConfig& cfg, std::size_t depth,
                                   const PositiveVector* inherited_p) {
  if (x.min_entry() < 0.0) throw ValidationError("data matrix must be non-negative");
  if (cfg.rank < 1 || cfg.rank > x.cols()) {
    throw ValidationError("rank must satisfy 1 <= r <= number of columns");
  }
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();

  Factorization fact;
  PositiveVector p = inherited_p ? *inherited_p : make_p(m, cfg.seed);
  RandomStream ext_rng = substream(cfg.seed, "exterior");
  const std::vector<double> x_l1 = column_l1_norms(x);

  std::vector<unsigned char> excluded(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    if (x_l1[j] == 0.0) excluded[j] = 1;
  }

  DenseMatrix h(0, n);
  DenseMatrix r = x;
  std::optional<ProjectionResult> proj;
  SolverOptions solver_opts = cfg.solver;

  auto mask_anchor = [&](std::size_t a) {
    excluded[a] = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (!excluded[j] && columns_equal(x, j, x, a)) excluded[j] = 1;
    }
  };

  while (fact.anchors.size() < cfg.rank) {
    const bool first = fact.anchors.empty();
    const std::vector<double> residual_l1 = first ? x_l1 : column_l1_norms(r);
    const std::vector<double>& rank_scores =
        (cfg.loss == LossKind::L1 || first) ? residual_l1 : proj->column_objectives;

    const std::optional<std::size_t> ext =
        select_exterior(residual_l1, rank_scores, x_l1, cfg.exterior, &ext_rng, cfg.selection);
    if (!ext) {
      fact.warnings.push_back("no exterior column left after " +
                              std::to_string(fact.anchors.size()) + " anchors");
      break;
    }
    const std::size_t i = *ext;
    IterationDiag diag;
    diag.exterior_index = i;

    const DenseMatrix xa = select_columns(x, fact.anchors);
    std::vector<double> weights;
    if (cfg.loss == LossKind::L1) {
      // Build the sign certificate; if the LP repair reports the projection
      // is too loose, re-project with tightened tolerances and try again.
      std::optional<SignMatrixChoice> choice;
      for (std::size_t attempt = 0; attempt <= 2 && !choice; ++attempt) {
        try {
          choice = build_sign_choice(r.col(i), h.col(i), xa, cfg.selection);
        } catch (const LpInfeasible&) {
          if (attempt == 2 || first) break;
          ++diag.reproject_retries;
          solver_opts = solver_opts.tightened(1e-2);
          proj = detail::project_loss(cfg, xa, x, solver_opts, &h);
          h = proj->H;
          r = proj->R;
        }
      }
      if (!choice) {
        // Accept the default certificate and record the violation.
        SelectionOptions loose = cfg.selection;
        loose.identity_tol_abs = 1e300;
        choice = build_sign_choice(r.col(i), h.col(i), xa, loose);
        choice->identity_ok = false;
        fact.warnings.push_back("certificate repair failed at iteration " +
                                std::to_string(fact.iterations.size()));
      }
      diag.used_lp_fallback = choice->used_lp_fallback;
      diag.anchor_alignment = choice->anchor_alignment;
      diag.identity_gap = choice->identity_gap;
      diag.certificate_ok = choice->anchor_ok && choice->identity_ok;
      weights = choice->d_star;
    } else if (cfg.loss == LossKind::Bregman) {
      weights = bregman_selection_weights(cfg.divergence, xa, h.col(i), r.col(i));
    } else {
      weights = bregman_reverse_selection_weights(cfg.divergence, xa, h.col(i), x.col(i));
    }
    diag.weighted_exterior = dot(weights, x.col(i));

    TieResolver resolver = [&](const std::vector<std::size_t>& tied) {
      return resolve_ties(tied, x, cfg, p, depth, &fact.warnings);
    };
    std::optional<SelectionOutcome> outcome;
    for (std::size_t attempt = 0; !outcome; ++attempt) {
      try {
        outcome = select_anchor_weighted(x, weights, p, fact.anchors, excluded, i, cfg.selection,
                                         resolver);
      } catch (const CollinearPerturbation&) {
        if (attempt >= cfg.selection.max_p_resample) throw;
        p = make_p(m, stream_seed(cfg.seed, "p-resample") + attempt);
      }
    }

    for (std::size_t c : outcome->chosen) {
      if (fact.anchors.size() >= cfg.rank) break;
      fact.anchors.push_back(c);
      diag.added.push_back(c);
      mask_anchor(c);
    }

    const DenseMatrix xa_new = select_columns(x, fact.anchors);
    const DenseMatrix warm = detail::pad_warm(h, fact.anchors.size(), n);
    proj = detail::project_loss(cfg, xa_new, x, solver_opts, &warm);
    h = proj->H;
    r = proj->R;
    diag.objective = proj->objective;
    diag.projection_converged = proj->converged;
    if (cfg.loss == LossKind::Bregman) {
      diag.stationarity_max = bregman_stationarity_max(cfg.divergence, xa_new, h, x);
    }
    fact.residual_norm_trace.push_back(proj->objective);
    fact.iterations.push_back(std::move(diag));
  }

  fact.H = h;
  return fact;
}

inline Factorization run_xray(const DenseMatrix& x, const RunConfig& cfg) {
  return run_xray_impl(x, cfg, 0, nullptr);
}

// Near-separable NMF with elementwise l1 loss.
inline Factorization robust_xray(const DenseMatrix& x, RunConfig cfg) {
  cfg.loss = LossKind::L1;
  return run_xray(x, cfg);
}

// Near-separable NMF under a Bregman divergence; exterior points are ranked
// by per-column divergence in max mode.
inline Factorization bregman_xray(const DenseMatrix& x, RunConfig cfg) {
  if (cfg.loss == LossKind::L1) cfg.loss = LossKind::Bregman;
  return run_xray(x, cfg);
}

namespace detail {

// One projection with zero anchor columns masked out; masked coefficient
// rows keep their warm values (their anchors contribute nothing).
inline ProjectionResult project_masked(const RunConfig& cfg, const DenseMatrix& anchors,
                                       const DenseMatrix& x, const SolverOptions& opts,
                                       const DenseMatrix* warm) {
  std::vector<std::size_t> nz;
  for (std::size_t a = 0; a < anchors.cols(); ++a) {
    if (l1_norm(anchors.col(a)) > 0.0) nz.push_back(a);
  }
  if (nz.size() == anchors.cols()) return project_loss(cfg, anchors, x, opts, warm);
  if (nz.empty()) throw DegenerateAnchor("all anchor columns are zero");
  const DenseMatrix sub = select_columns(anchors, nz);
  DenseMatrix warm_sub(nz.size(), x.cols());
  if (warm) {
    for (std::size_t j = 0; j < x.cols(); ++j)
      for (std::size_t t = 0; t < nz.size(); ++t) warm_sub(t, j) = (*warm)(nz[t], j);
  }
  ProjectionResult res = project_loss(cfg, sub, x, opts, warm ? &warm_sub : nullptr);
  DenseMatrix full_h(anchors.cols(), x.cols());
  if (warm) full_h = *warm;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    for (std::size_t t = 0; t < nz.size(); ++t) full_h(nz[t], j) = res.H(t, j);
  }
  res.H = std::move(full_h);
  return res;
}

}  // namespace detail

// Alternating polish of a finished factorization: H-solve against W, then
// W-solve against H, each under the run's loss and warm started, so neither
// half-step can increase the objective.
inline std::pair<DenseMatrix, DenseMatrix> refit(const DenseMatrix& x,
                                                 const std::vector<std::size_t>& anchors,
                                                 std::size_t steps, const RunConfig& cfg) {
  if (anchors.empty()) throw ValidationError("refit requires a non-empty anchor set");
  DenseMatrix w = select_columns(x, anchors);
  ProjectionResult ph = detail::project_loss(cfg, w, x, cfg.solver, nullptr);
  DenseMatrix h = ph.H;
  double obj = ph.objective;
  const auto check = [&](double next, const char* half) {
    if (next > obj + 1e-8 * std::max(1.0, obj)) {
      throw std::logic_error(std::string("refit ") + half + " increased the objective");
    }
    obj = next;
  };
  for (std::size_t s = 0; s < steps; ++s) {
    ProjectionResult step_h = detail::project_masked(cfg, w, x, cfg.solver, &h);
    check(step_h.objective, "h-step");
    h = step_h.H;

    const DenseMatrix ht = transpose(h);
    const DenseMatrix xt = transpose(x);
    const DenseMatrix wt = transpose(w);
    ProjectionResult step_w = detail::project_masked(cfg, ht, xt, cfg.solver, &wt);
    check(step_w.objective, "w-step");
    w = transpose(step_w.H);
  }
  return {std::move(w), std::move(h)};
}

}  // namespace conical
