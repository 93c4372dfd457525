#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "conical/nnlad.hpp"
#include "conical/nnls.hpp"
#include "conical/selection.hpp"
#include "conical/synthetic.hpp"
#include "support/test_util.hpp"

using namespace conical;

TEST_CASE("exterior selection") {
  const std::vector<double> x_l1{1.0, 1.0, 1.0};
  SECTION("all interior") {
    const std::vector<double> zeros{0.0, 0.0, 0.0};
    CHECK_FALSE(select_exterior(zeros, zeros, x_l1, ExteriorMode::Max, nullptr).has_value());
  }
  SECTION("max picks the largest residual") {
    const std::vector<double> norms{0.0, 5.0, 2.0};
    const auto idx = select_exterior(norms, norms, x_l1, ExteriorMode::Max, nullptr);
    REQUIRE(idx.has_value());
    CHECK(*idx == 1);
  }
  SECTION("rand is deterministic given a seeded stream") {
    const std::vector<double> norms{0.0, 5.0, 2.0};
    RandomStream rng1(123), rng2(123);
    const auto a = select_exterior(norms, norms, x_l1, ExteriorMode::Rand, &rng1);
    const auto b = select_exterior(norms, norms, x_l1, ExteriorMode::Rand, &rng2);
    REQUIRE(a.has_value());
    CHECK(*a == *b);
    CHECK((*a == 1 || *a == 2));
  }
}

TEST_CASE("sign choice without zeros is the plain sign map") {
  // Interior point of the flat optimum of min_h |x - h*[1,1]|_1 with x=[1,3]:
  // residual has no zeros and the certificate is forced to the sign map.
  const DenseMatrix xa = DenseMatrix::from_rows({{1}, {1}});
  const std::vector<double> r{-1.0, 1.0};
  const std::vector<double> h{2.0};
  const auto choice = build_sign_choice(r, h, xa);
  CHECK(choice.d_star == std::vector<double>{-1.0, 1.0});
  CHECK(choice.zero_set.empty());
  CHECK_FALSE(choice.used_lp_fallback);
  CHECK(choice.anchor_ok);
  CHECK(choice.identity_ok);
}

TEST_CASE("pure separable toy: certificate satisfies both inequalities") {
  // X = [[1,0,1],[0,1,1]], anchors {0}; project and certify column 1.
  const DenseMatrix x = DenseMatrix::from_rows({{1, 0, 1}, {0, 1, 1}});
  const std::vector<std::size_t> anchors{0};
  const DenseMatrix xa = select_columns(x, anchors);
  const auto proj = nnlad_admm(xa, x, {});
  const auto choice = build_sign_choice(proj.R.col(1), proj.H.col(1), xa);
  CHECK(choice.anchor_ok);
  CHECK(choice.identity_ok);
  const double d_dot_x0 = dot(choice.d_star, x.col(0));
  const double d_dot_x1 = dot(choice.d_star, x.col(1));
  CHECK(d_dot_x0 <= 1e-9);
  CHECK(d_dot_x1 == Catch::Approx(l1_norm(proj.R.col(1))).margin(1e-9));
}

TEST_CASE("default certificate fails on a median fit and the LP repairs it") {
  // Anchor [1,1,1], target [2,1,1]: the l1 fit is h = 1 with residual
  // [1,0,0]. u = -1 on the two zero rows breaks the residual identity; the
  // feasibility program must restore it.
  const DenseMatrix xa = DenseMatrix::from_rows({{1}, {1}, {1}});
  const DenseMatrix x = DenseMatrix::from_rows({{2}, {1}, {1}});
  const auto proj = nnlad_admm(xa, x, {});
  REQUIRE(proj.H(0, 0) == Catch::Approx(1.0).margin(1e-8));
  const auto choice = build_sign_choice(proj.R.col(0), proj.H.col(0), xa);
  CHECK(choice.used_lp_fallback);
  CHECK(choice.anchor_ok);
  CHECK(choice.identity_ok);
  CHECK(dot(choice.d_star, x.col(0)) == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("random search also reaches the LP fallback path") {
  bool found = false;
  for (std::uint64_t seed = 0; seed < 60 && !found; ++seed) {
    const DenseMatrix xa = testutil::random_nonneg(5, 2, seed * 7 + 1, 0.05, 1.0);
    const DenseMatrix x = testutil::random_nonneg(5, 1, seed * 7 + 2);
    const auto proj = nnlad_admm(xa, x, {});
    if (l1_norm(proj.R.col(0)) < 1e-8) continue;
    const auto choice = build_sign_choice(proj.R.col(0), proj.H.col(0), xa);
    if (choice.used_lp_fallback) {
      found = true;
      CHECK(choice.anchor_ok);
      CHECK(choice.identity_ok);
    }
  }
  CHECK(found);
}

TEST_CASE("l1 selection finds the remaining anchor on the separable toy") {
  const DenseMatrix x = DenseMatrix::from_rows({{1, 0, 1}, {0, 1, 1}});
  const std::vector<std::size_t> anchors{0};
  const DenseMatrix xa = select_columns(x, anchors);
  const auto proj = nnlad_admm(xa, x, {});
  const auto choice = build_sign_choice(proj.R.col(1), proj.H.col(1), xa);
  const PositiveVector p = make_p(2, 0);
  std::vector<unsigned char> excluded(3, 0);
  excluded[0] = 1;
  const auto outcome = select_anchor_l1(x, choice, p, anchors, excluded, 1);
  REQUIRE(outcome.chosen.size() == 1);
  CHECK(outcome.chosen[0] == 1);  // never the interior mixture column 2
  // enumerate: criterion for the mixture column must be strictly below
  CHECK(outcome.criterion_values[1] > outcome.criterion_values[2]);
}

TEST_CASE("duplicated columns tie and both are returned") {
  const DenseMatrix x = DenseMatrix::from_rows({{1, 0, 1, 0}, {0, 1, 1, 1}});
  const std::vector<std::size_t> anchors{0};
  const DenseMatrix xa = select_columns(x, anchors);
  const auto proj = nnlad_admm(xa, x, {});
  const auto choice = build_sign_choice(proj.R.col(1), proj.H.col(1), xa);
  const PositiveVector p = make_p(2, 0);
  std::vector<unsigned char> excluded(4, 0);
  excluded[0] = 1;
  const auto outcome = select_anchor_l1(x, choice, p, anchors, excluded, 1);
  REQUIRE(outcome.chosen.size() == 2);
  CHECK(outcome.chosen[0] == 1);
  CHECK(outcome.chosen[1] == 3);
}

TEST_CASE("single eligible column is chosen") {
  const DenseMatrix x = DenseMatrix::from_rows({{2}, {1}});
  const std::vector<double> w{1.0, 0.2};
  const PositiveVector p = make_p(2, 0);
  const auto outcome = select_anchor_weighted(x, w, p, {}, {0}, 0, {});
  REQUIRE(outcome.chosen.size() == 1);
  CHECK(outcome.chosen[0] == 0);
}

TEST_CASE("criterion argmax is invariant to positive column rescaling") {
  const DenseMatrix x = testutil::random_nonneg(6, 10, 17, 0.05, 1.0);
  const std::vector<double> w = testutil::random_vector(6, 18, -1.0, 1.0);
  const PositiveVector p = make_p(6, 2);
  const std::vector<unsigned char> excluded(10, 0);
  const auto base = select_anchor_weighted(x, w, p, {}, excluded, 0, {});
  DenseMatrix scaled = x;
  RandomStream rng(19);
  for (std::size_t j = 0; j < scaled.cols(); ++j) {
    const double c = rng.uniform(0.1, 9.0);
    for (std::size_t i = 0; i < scaled.rows(); ++i) scaled(i, j) *= c;
  }
  const auto after = select_anchor_weighted(scaled, w, p, {}, excluded, 0, {});
  REQUIRE(base.chosen.size() == 1);
  REQUIRE(after.chosen.size() == 1);
  CHECK(base.chosen[0] == after.chosen[0]);
}

TEST_CASE("collinear weights trigger a resample request") {
  const DenseMatrix x = DenseMatrix::from_rows({{1, 2}, {1, 3}});
  const PositiveVector p = make_p(2, 0);
  const std::vector<double> w = p.values;  // exactly collinear
  CHECK_THROWS_AS(select_anchor_weighted(x, w, p, {}, {0, 0}, 0, {}), CollinearPerturbation);
}

TEST_CASE("weighted exterior term is positive for every generator") {
  for (DivergenceKind kind : {DivergenceKind::SquaredEuclidean, DivergenceKind::GeneralizedKL,
                              DivergenceKind::ItakuraSaito}) {
    const DivergenceSpec spec{kind};
    const SeparableInstance inst = gen_separable(12, 3, 16, 9);
    const std::vector<std::size_t> anchors{0, 1};
    const DenseMatrix xa = select_columns(inst.X, anchors);
    const auto proj = bregman_projection(spec, xa, inst.X, {});
    // column 2 (the unpicked planted anchor) is exterior
    const std::size_t i = 2;
    REQUIRE(l1_norm(proj.R.col(i)) > 1e-6);
    const auto w = bregman_selection_weights(spec, xa, proj.H.col(i), proj.R.col(i));
    CHECK(dot(w, inst.X.col(i)) > 0.0);
  }
}

TEST_CASE("squared-euclidean weights rank columns exactly like the residual criterion") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const SeparableInstance inst = gen_separable(10, 3, 14, 1000 + seed);
    const std::vector<std::size_t> anchors{0};
    const DenseMatrix xa = select_columns(inst.X, anchors);
    const auto proj = nnls_cd(xa, inst.X, {});
    std::size_t ext = 1;
    for (std::size_t j = 0; j < inst.X.cols(); ++j) {
      if (proj.column_objectives[j] > proj.column_objectives[ext]) ext = j;
    }
    const PositiveVector p = make_p(10, seed);
    std::vector<unsigned char> excluded(inst.X.cols(), 0);
    excluded[0] = 1;
    const auto via_phi = select_anchor_bregman(DivergenceSpec{DivergenceKind::SquaredEuclidean},
                                               inst.X, xa, proj.H, proj.R, ext, p, anchors,
                                               excluded);
    std::vector<double> res_w(proj.R.col(ext).begin(), proj.R.col(ext).end());
    const auto via_res = select_anchor_weighted(inst.X, res_w, p, anchors, excluded, ext, {});
    REQUIRE(via_phi.chosen.size() == 1);
    REQUIRE(via_res.chosen.size() == 1);
    CHECK(via_phi.chosen[0] == via_res.chosen[0]);
  }
}

TEST_CASE("reverse weights under x^2 reduce to twice the residual") {
  const SeparableInstance inst = gen_separable(8, 2, 10, 5);
  const std::vector<std::size_t> anchors{0};
  const DenseMatrix xa = select_columns(inst.X, anchors);
  const auto proj = bregman_projection_reverse(DivergenceSpec{DivergenceKind::SquaredEuclidean},
                                               xa, inst.X, {});
  const std::size_t i = 1;
  const auto w = bregman_reverse_selection_weights(DivergenceSpec{DivergenceKind::SquaredEuclidean},
                                                   xa, proj.H.col(i), inst.X.col(i));
  for (std::size_t row = 0; row < 8; ++row) {
    CHECK(w[row] == Catch::Approx(2.0 * proj.R(row, i)).margin(1e-9));
  }
}

TEST_CASE("interior candidates never win on separable instances") {
  for (std::uint64_t seed = 50; seed < 58; ++seed) {
    const SeparableInstance inst = gen_separable(12, 4, 18, seed);
    const DivergenceSpec spec{DivergenceKind::GeneralizedKL};
    const std::vector<std::size_t> anchors{0, 1};
    const DenseMatrix xa = select_columns(inst.X, anchors);
    const auto proj = bregman_projection(spec, xa, inst.X, {});
    std::size_t ext = 0;
    double best = -1.0;
    for (std::size_t j = 0; j < inst.X.cols(); ++j) {
      if (proj.column_objectives[j] > best) {
        best = proj.column_objectives[j];
        ext = j;
      }
    }
    const PositiveVector p = make_p(12, seed);
    std::vector<unsigned char> excluded(inst.X.cols(), 0);
    excluded[0] = excluded[1] = 1;
    const auto outcome =
        select_anchor_bregman(spec, inst.X, xa, proj.H, proj.R, ext, p, anchors, excluded);
    for (std::size_t c : outcome.chosen) CHECK(c < 4);  // always a true planted anchor
  }
}
