#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "conical/nnls.hpp"
#include "conical/synthetic.hpp"

using namespace conical;

TEST_CASE("separable generator shapes and identity block") {
  const SeparableInstance inst = gen_separable(200, 20, 210, 5);
  CHECK(inst.W.rows() == 200);
  CHECK(inst.W.cols() == 20);
  CHECK(inst.H.rows() == 20);
  CHECK(inst.H.cols() == 210);
  CHECK(inst.X.rows() == 200);
  CHECK(inst.X.cols() == 210);
  REQUIRE(inst.true_anchors.size() == 20);
  for (std::size_t a = 0; a < 20; ++a) {
    CHECK(columns_equal(inst.X, a, inst.W, a));  // first r columns are W
  }
}

TEST_CASE("mixture columns live in the anchor cone") {
  const SeparableInstance inst = gen_separable(25, 4, 32, 9);
  const DenseMatrix xa = select_columns(inst.X, inst.true_anchors);
  const auto proj = nnls_cd(xa, inst.X, {});
  for (std::size_t j = 4; j < inst.X.cols(); ++j) {
    CHECK(proj.column_objectives[j] <= 1e-8);
  }
}

TEST_CASE("dirichlet mixture columns sum to one") {
  const SeparableInstance inst = gen_separable(10, 5, 40, 3);
  for (std::size_t j = 5; j < 40; ++j) {
    double s = 0.0;
    for (std::size_t a = 0; a < 5; ++a) s += inst.H(a, j);
    CHECK(s == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("zero noise leaves the matrix untouched") {
  const SeparableInstance inst = gen_separable(12, 3, 15, 1);
  const DenseMatrix out = add_sparse_laplace_noise(inst.X, 0.0, 42);
  CHECK(out == inst.X);
}

TEST_CASE("clipped laplace noise zeroes about half the entries") {
  DenseMatrix zeros(200, 210);
  const DenseMatrix noisy = add_sparse_laplace_noise(zeros, 1.0, 7);
  std::size_t zero_count = 0;
  for (double v : noisy.data()) {
    CHECK(v >= 0.0);
    if (v == 0.0) ++zero_count;
  }
  const double frac = static_cast<double>(zero_count) / static_cast<double>(noisy.data().size());
  CHECK(frac >= 0.45);
  CHECK(frac <= 0.55);
}

TEST_CASE("laplace scale derives from the standard deviation") {
  // std dev delta implies scale delta/sqrt(2); check the sample variance.
  RandomStream rng = substream(1234, "laplace");
  const double delta = 1.5;
  const double scale = delta / std::sqrt(2.0);
  double sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.laplace(scale);
    sq += v * v;
  }
  CHECK(sq / n == Catch::Approx(delta * delta).epsilon(0.05));
}

TEST_CASE("exponential data matches its mean parameterization") {
  const SeparableInstance inst = gen_separable(30, 4, 36, 17);
  const double lambda = 3.0;
  const DenseMatrix mean = multiply(inst.W, inst.H);
  // redraw a single entry many times through fresh streams
  const std::size_t i = 7, j = 11;
  double sum = 0.0;
  const int redraws = 100000;
  RandomStream rng = substream(99, "expdata");
  for (int t = 0; t < redraws; ++t) sum += rng.exponential_mean(lambda * mean(i, j));
  CHECK(sum / redraws == Catch::Approx(lambda * mean(i, j)).epsilon(0.02));

  // matrix-level averaged ratio; exponential draws have unit relative
  // variance, so the band is a few standard errors wide
  const DenseMatrix x = gen_exponential_data(inst.W, inst.H, lambda, 5);
  double ratio = 0.0;
  for (std::size_t idx = 0; idx < x.data().size(); ++idx) {
    ratio += x.data()[idx] / (lambda * mean.data()[idx]);
  }
  const double n_entries = static_cast<double>(x.data().size());
  CHECK(ratio / n_entries == Catch::Approx(1.0).margin(4.0 / std::sqrt(n_entries)));
}

TEST_CASE("doubling lambda doubles the draws exactly") {
  const SeparableInstance inst = gen_separable(8, 2, 10, 2);
  const DenseMatrix a = gen_exponential_data(inst.W, inst.H, 2.0, 9);
  const DenseMatrix b = gen_exponential_data(inst.W, inst.H, 4.0, 9);
  for (std::size_t idx = 0; idx < a.data().size(); ++idx) {
    CHECK(b.data()[idx] == Catch::Approx(2.0 * a.data()[idx]).epsilon(1e-12));
  }
}

TEST_CASE("recovery rate definition") {
  CHECK(anchor_recovery_rate({0, 1, 2}, {0, 1, 2}) == 1.0);
  CHECK(anchor_recovery_rate({5, 6}, {0, 1}) == 0.0);
  std::vector<std::size_t> found, truth;
  for (std::size_t i = 0; i < 20; ++i) truth.push_back(i);
  for (std::size_t i = 0; i < 10; ++i) found.push_back(i);
  for (std::size_t i = 100; i < 110; ++i) found.push_back(i);
  CHECK(anchor_recovery_rate(found, truth) == 0.5);
  CHECK_THROWS_AS(anchor_recovery_rate({0}, {}), ValidationError);
}

TEST_CASE("sweep over a small grid") {
  BenchConfig cfg;
  cfg.m = 20;
  cfg.r = 3;
  cfg.n = 24;
  cfg.noise = NoiseModel::Laplace;
  cfg.params = {0.0, 0.4};
  cfg.algorithms = {"l1", "l2"};
  cfg.seeds = {1, 2, 3};
  const auto rows = bench_sweep(cfg);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CHECK(row.seed_count == 3);
    if (row.param == 0.0) CHECK(row.mean_recovery == 1.0);  // noiseless: full recovery
  }
}

TEST_CASE("empty algorithm list produces an empty table") {
  BenchConfig cfg;
  cfg.params = {0.0};
  cfg.algorithms = {};
  cfg.seeds = {1};
  CHECK(bench_sweep(cfg).empty());
}
