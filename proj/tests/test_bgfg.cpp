#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "conical/bgfg.hpp"
#include "conical/synthetic.hpp"
#include "support/scene.hpp"
#include "support/test_util.hpp"

using namespace conical;

TEST_CASE("static scene has an empty foreground") {
  // every frame identical
  Image frame;
  frame.height = 6;
  frame.width = 6;
  frame.pixels.resize(36);
  RandomStream rng(3);
  for (auto& p : frame.pixels) p = static_cast<std::uint8_t>(40 + rng.index(150));
  const FrameStack st = stack_from_images({frame, frame, frame, frame});
  for (std::size_t r : {std::size_t{1}, std::size_t{3}}) {
    RunConfig cfg;
    cfg.loss = LossKind::L1;
    auto [b, s] = bg_model(st, r, cfg, 0);
    CHECK(max_abs(std::span<const double>(s.data())) <= 1e-8);
  }
}

TEST_CASE("moving block pixels score above the background") {
  const testscene::Scene scene = testscene::make_block_scene(24, 24, 4, 5);
  RunConfig cfg;
  cfg.loss = LossKind::L1;
  auto [b, s] = bg_model(scene.stack, 4, cfg, 1);

  std::vector<double> fg_scores, bg_scores;
  for (std::size_t idx = 0; idx < s.data().size(); ++idx) {
    const double v = std::fabs(s.data()[idx]);
    if (scene.truth.data()[idx] > 0.5) {
      fg_scores.push_back(v);
    } else {
      bg_scores.push_back(v);
    }
  }
  std::sort(bg_scores.begin(), bg_scores.end());
  const double q95 = bg_scores[static_cast<std::size_t>(0.95 * (bg_scores.size() - 1))];
  std::sort(fg_scores.begin(), fg_scores.end());
  // allow the few block cells absorbed by anchor pixels
  std::size_t above = 0;
  for (double v : fg_scores) above += v > q95 ? 1 : 0;
  CHECK(static_cast<double>(above) / fg_scores.size() >= 0.95);
}

TEST_CASE("rank-1 fit against a constant anchor reproduces the scaled median") {
  const DenseMatrix x = testutil::random_nonneg(7, 12, 21, 0.0, 1.0);
  const double c = 0.5;
  DenseMatrix anchor(7, 1);
  for (std::size_t i = 0; i < 7; ++i) anchor(i, 0) = c;
  const auto proj = nnlad_admm(anchor, x, {});
  const std::vector<double> med = median_filter_baseline(x);
  for (std::size_t q = 0; q < x.cols(); ++q) {
    CHECK(c * proj.H(0, q) == Catch::Approx(med[q]).margin(1e-4));
  }
}

TEST_CASE("median baseline basics") {
  const DenseMatrix x = DenseMatrix::from_rows({{1, 4}, {2, 6}, {9, 5}});
  CHECK(median_filter_baseline(x) == std::vector<double>{2.0, 5.0});

  const DenseMatrix flat = DenseMatrix::from_rows({{3, 7}, {3, 7}, {3, 7}});
  CHECK(median_filter_baseline(flat) == std::vector<double>{3.0, 7.0});

  // permutation invariance in the frame order
  const DenseMatrix shuffled = DenseMatrix::from_rows({{9, 5}, {1, 4}, {2, 6}});
  CHECK(median_filter_baseline(shuffled) == median_filter_baseline(x));
}

TEST_CASE("even frame count uses the lower median") {
  const DenseMatrix x = DenseMatrix::from_rows({{1}, {2}, {7}, {9}});
  CHECK(median_filter_baseline(x) == std::vector<double>{2.0});
}

TEST_CASE("all-ones solve equals the median on odd stacks") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DenseMatrix x = testutil::random_nonneg(5, 30, seed * 13);
    const MedianCheckReport report = median_check(x);
    CHECK_FALSE(report.even_frames);
    CHECK(report.max_gap <= 1e-4);
    CHECK(report.pass);
  }
}

TEST_CASE("even stacks check membership in the flat interval") {
  const DenseMatrix x = testutil::random_nonneg(6, 20, 77);
  const MedianCheckReport report = median_check(x);
  CHECK(report.even_frames);
  CHECK(report.pass);
}

TEST_CASE("roc endpoints and monotonicity") {
  DenseMatrix s(4, 4);
  DenseMatrix truth(4, 4);
  RandomStream rng(55);
  for (std::size_t idx = 0; idx < 16; ++idx) {
    const bool fg = idx % 3 == 0;
    truth.data()[idx] = fg ? 1.0 : 0.0;
    s.data()[idx] = fg ? 10.0 + rng.uniform01() : rng.uniform01();
  }
  const auto points = roc_curve(s, truth, {0.0, 5.0, 100.0});
  REQUIRE(points.size() == 3);
  CHECK(points[0].true_positive_rate == 1.0);   // threshold below every score
  CHECK(points[0].false_positive_rate == 1.0);
  CHECK(points[1].true_positive_rate == 1.0);   // margin-separated scene
  CHECK(points[1].false_positive_rate == 0.0);
  CHECK(points[2].true_positive_rate == 0.0);   // threshold above every score
  CHECK(points[2].false_positive_rate == 0.0);
  for (std::size_t t = 1; t < points.size(); ++t) {
    CHECK(points[t].true_positive_rate <= points[t - 1].true_positive_rate);
    CHECK(points[t].false_positive_rate <= points[t - 1].false_positive_rate);
  }
}

TEST_CASE("degenerate truth is rejected") {
  DenseMatrix s(2, 2);
  DenseMatrix truth(2, 2);  // all background
  CHECK_THROWS_AS(roc_curve(s, truth, {0.5}), DegenerateTruth);
}

TEST_CASE("frame stack round trip through pgm io") {
  const testscene::Scene scene = testscene::make_block_scene(8, 4, 2, 9);
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "conical_pgm_roundtrip";
  fs::create_directories(dir);
  for (std::size_t t = 0; t < scene.frames.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "f-%03zu.pgm", t);
    write_pgm((dir / name).string(), scene.frames[t]);
  }
  const FrameStack loaded = load_frame_stack(dir.string());
  CHECK(loaded.X == scene.stack.X);
  fs::remove_all(dir);
}
