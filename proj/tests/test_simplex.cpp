#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "conical/selection.hpp"
#include "conical/simplex.hpp"

using namespace conical;

TEST_CASE("simplex solves a small bounded LP") {
  // min -x0 - 2 x1 s.t. x0 + x1 <= 4, x0 <= 3, x1 <= 2, x >= 0  -> (2, 2)
  LpProblem p;
  p.num_vars = 2;
  p.objective = {-1.0, -2.0};
  p.le_rows = {{1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}};
  p.le_rhs = {4.0, 3.0, 2.0};
  const auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] == Catch::Approx(2.0).margin(1e-9));
  CHECK(sol.x[1] == Catch::Approx(2.0).margin(1e-9));
  CHECK(sol.objective == Catch::Approx(-6.0).margin(1e-9));
}

TEST_CASE("simplex handles equalities and detects infeasibility") {
  LpProblem p;
  p.num_vars = 2;
  p.objective = {1.0, 1.0};
  p.eq_rows = {{1.0, 1.0}};
  p.eq_rhs = {2.0};
  const auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == Catch::Approx(2.0).margin(1e-9));

  LpProblem q;
  q.num_vars = 1;
  q.objective = {1.0};
  q.eq_rows = {{1.0}};
  q.eq_rhs = {-3.0};  // x >= 0 cannot reach -3
  CHECK(solve_lp(q).status == LpStatus::Infeasible);
}

TEST_CASE("certificate LP with no free variables checks the fixed part") {
  // Single anchor [1,1], fixed certificate [1,-1]: X_A^T d = 0, active anchor ok.
  const DenseMatrix xa = DenseMatrix::from_rows({{1}, {1}});
  const std::vector<double> fixed{1.0, -1.0};
  CHECK(lp_feasibility(xa, {}, fixed, {0}, {}).empty());
  // As an inactive anchor the multiplier must be strictly positive: 0 fails.
  CHECK_THROWS_AS(lp_feasibility(xa, {}, fixed, {}, {0}), LpInfeasible);
}

TEST_CASE("one free variable against a hand-solved inequality") {
  // Anchor [1,1], coordinate 0 fixed at 0.5, coordinate 1 free. Inactive
  // anchor needs 0.5 + u <= -eps, so u <= -0.5 - eps; the dummy objective
  // drives u to -1.
  const DenseMatrix xa = DenseMatrix::from_rows({{1}, {1}});
  const std::vector<double> fixed{0.5, 0.0};
  SelectionOptions opts;
  const auto u = lp_feasibility(xa, {1}, fixed, {}, {0}, opts);
  REQUIRE(u.size() == 1);
  CHECK(u[0] == Catch::Approx(-1.0).margin(1e-9));

  // Exhaustive scan at step 1e-4 confirms both feasibility and the optimum.
  double best = 2.0;
  for (double cand = -1.0; cand <= 1.0 + 1e-12; cand += 1e-4) {
    if (0.5 + cand <= -opts.strict_eps) best = std::min(best, cand);
  }
  CHECK(best == Catch::Approx(-1.0).margin(1e-4));
  CHECK(0.5 + u[0] <= -opts.strict_eps + 1e-12);
}

TEST_CASE("infeasible certificate program is reported") {
  // Fixed part pushes the multiplier constraint beyond what u in [-1,1] can fix.
  const DenseMatrix xa = DenseMatrix::from_rows({{1}, {1}});
  const std::vector<double> fixed{2.5, 0.0};
  CHECK_THROWS_AS(lp_feasibility(xa, {1}, fixed, {}, {0}), LpInfeasible);
}
