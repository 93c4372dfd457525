#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "conical/nnls.hpp"
#include "support/test_util.hpp"

using namespace conical;

TEST_CASE("nnls exact scalar fit") {
  const DenseMatrix xa = DenseMatrix::from_rows({{1}, {0}});
  const DenseMatrix x = DenseMatrix::from_rows({{2}, {0}});
  const auto res = nnls_cd(xa, x, {});
  CHECK(res.H(0, 0) == Catch::Approx(2.0).margin(1e-12));
  CHECK(res.objective == Catch::Approx(0.0).margin(1e-12));
  CHECK(res.converged);
}

TEST_CASE("nnls clamps at the constraint for an orthogonal target") {
  const DenseMatrix xa = DenseMatrix::from_rows({{1}, {0}});
  const DenseMatrix x = DenseMatrix::from_rows({{0}, {1}});
  const auto res = nnls_cd(xa, x, {});
  CHECK(res.H(0, 0) == 0.0);
  CHECK(res.objective == Catch::Approx(1.0));
}

TEST_CASE("nnls agrees with a brute-force grid oracle") {
  const DenseMatrix xa = DenseMatrix::from_rows({{1, 0}, {0, 1}, {1, 1}});
  const DenseMatrix x = DenseMatrix::from_rows({{1}, {2}, {5}});
  const auto res = nnls_cd(xa, x, {});

  // Grid search with step 1e-3 over [0,6]^2, written independently.
  double best = 1e300, b0 = 0, b1 = 0;
  for (int i = 0; i <= 6000; ++i) {
    const double u = i * 1e-3;
    for (int j = 0; j <= 6000; ++j) {
      const double v = j * 1e-3;
      const double r0 = 1 - u, r1 = 2 - v, r2 = 5 - u - v;
      const double f = r0 * r0 + r1 * r1 + r2 * r2;
      if (f < best) {
        best = f;
        b0 = u;
        b1 = v;
      }
    }
  }
  CHECK(res.H(0, 0) == Catch::Approx(b0).margin(1e-2));
  CHECK(res.H(1, 0) == Catch::Approx(b1).margin(1e-2));
  CHECK(res.objective <= best + 1e-6);
}

TEST_CASE("nnls satisfies the per-column KKT conditions") {
  const DenseMatrix xa = testutil::random_nonneg(12, 4, 5);
  const DenseMatrix x = testutil::random_nonneg(12, 7, 6);
  SolverOptions opts;
  const auto res = nnls_cd(xa, x, opts);
  REQUIRE(res.converged);
  const DenseMatrix g = detail::gram(xa);
  for (std::size_t j = 0; j < x.cols(); ++j) {
    std::vector<double> rhs(xa.cols());
    for (std::size_t a = 0; a < xa.cols(); ++a) rhs[a] = dot(xa.col(a), x.col(j));
    const double tol = opts.cd_tol * column_scale(x.col(j));
    for (std::size_t a = 0; a < xa.cols(); ++a) {
      const double grad = dot(g.col(a), res.H.col(j)) - rhs[a];
      const double active = std::min(res.H(a, j), grad);
      CHECK(std::fabs(active) <= tol + 1e-15);
    }
  }
  for (double v : res.H.data()) CHECK(v >= 0.0);
}

TEST_CASE("nnls rejects a zero anchor column") {
  DenseMatrix xa(3, 2);
  xa(0, 0) = 1.0;  // second column stays zero
  CHECK_THROWS_AS(nnls_cd(xa, testutil::random_nonneg(3, 2, 8), {}), DegenerateAnchor);
}

TEST_CASE("nnls warm start does not change the solution") {
  const DenseMatrix xa = testutil::random_nonneg(10, 3, 15);
  const DenseMatrix x = testutil::random_nonneg(10, 5, 16);
  const auto cold = nnls_cd(xa, x, {});
  const auto warm = nnls_cd(xa, x, {}, &cold.H);
  for (std::size_t idx = 0; idx < cold.H.data().size(); ++idx) {
    CHECK(warm.H.data()[idx] == Catch::Approx(cold.H.data()[idx]).margin(1e-8));
  }
}
