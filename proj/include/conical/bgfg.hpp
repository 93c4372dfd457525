#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "conical/matrix.hpp"
#include "conical/nnlad.hpp"
#include "conical/pgm.hpp"
#include "conical/xray.hpp"

namespace conical {

// Video stack: each frame is vectorized and stored as one row, so columns
// are per-pixel time series and the anchors picked by the drivers are
// pixels. 8-bit sources are scaled to [0, 1].
struct FrameStack {
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  DenseMatrix X;  // frames x (height*width)
};

inline FrameStack stack_from_images(const std::vector<Image>& images) {
  if (images.empty()) throw ValidationError("empty frame list");
  FrameStack st;
  st.frames = images.size();
  st.height = images.front().height;
  st.width = images.front().width;
  st.X = DenseMatrix(st.frames, st.height * st.width);
  for (std::size_t t = 0; t < images.size(); ++t) {
    const Image& img = images[t];
    if (img.height != st.height || img.width != st.width) {
      throw ValidationError("frame " + std::to_string(t) + " has inconsistent dimensions");
    }
    for (std::size_t q = 0; q < img.pixels.size(); ++q) {
      st.X(t, q) = static_cast<double>(img.pixels[q]) / 255.0;
    }
  }
  return st;
}

inline FrameStack load_frame_stack(const std::string& dir) {
  const std::vector<std::string> files = list_pgm_files(dir);
  std::vector<Image> images;
  images.reserve(files.size());
  for (const std::string& f : files) images.push_back(read_pgm(f));
  return stack_from_images(images);
}

inline Image frame_to_image(const FrameStack& st, std::span<const double> row_values) {
  Image img;
  img.height = st.height;
  img.width = st.width;
  img.pixels.resize(row_values.size());
  for (std::size_t q = 0; q < row_values.size(); ++q) {
    double v = row_values[q] * 255.0;
    if (v < 0.0) v = 0.0;
    if (v > 255.0) v = 255.0;
    img.pixels[q] = static_cast<std::uint8_t>(std::lround(v));
  }
  return img;
}

inline std::vector<double> stack_row(const DenseMatrix& x, std::size_t t) {
  std::vector<double> row(x.cols());
  for (std::size_t q = 0; q < x.cols(); ++q) row[q] = x(t, q);
  return row;
}

// Per-pixel median across frames; for an even frame count the lower median
// is taken so the result is a deterministic member of the l1-optimal set.
inline std::vector<double> median_filter_baseline(const DenseMatrix& x) {
  if (x.rows() < 1) throw ValidationError("median baseline needs at least one frame");
  std::vector<double> med(x.cols());
  std::vector<double> buf(x.rows());
  for (std::size_t q = 0; q < x.cols(); ++q) {
    auto col = x.col(q);
    buf.assign(col.begin(), col.end());
    const std::size_t lower = (x.rows() - 1) / 2;
    std::nth_element(buf.begin(), buf.begin() + lower, buf.end());
    med[q] = buf[lower];
  }
  return med;
}

// Background/foreground split: r anchor pixels are selected under the given
// loss, the background is the (optionally refitted) factorization, and the
// foreground is the residual.
inline std::pair<DenseMatrix, DenseMatrix> bg_model(const FrameStack& st, std::size_t r,
                                                    RunConfig cfg, std::size_t refit_steps) {
  if (r > st.X.cols()) throw ValidationError("rank exceeds pixel count");
  cfg.rank = r;
  const Factorization fact = run_xray(st.X, cfg);
  if (fact.anchors.empty()) throw ValidationError("no anchors found for background model");
  DenseMatrix w;
  DenseMatrix h;
  if (refit_steps > 0) {
    auto refined = refit(st.X, fact.anchors, refit_steps, cfg);
    w = std::move(refined.first);
    h = std::move(refined.second);
  } else {
    w = select_columns(st.X, fact.anchors);
    h = fact.H;
  }
  DenseMatrix background = multiply(w, h);
  DenseMatrix foreground = st.X;
  for (std::size_t idx = 0; idx < foreground.data().size(); ++idx) {
    foreground.data()[idx] -= background.data()[idx];
  }
  return {std::move(background), std::move(foreground)};
}

struct RocPoint {
  double threshold = 0.0;
  double true_positive_rate = 0.0;
  double false_positive_rate = 0.0;
};

// Foreground prediction is |S_ij| >= threshold, evaluated against binary
// truth over all labeled pixels. Points come back sorted by threshold.
inline std::vector<RocPoint> roc_curve(const DenseMatrix& s, const DenseMatrix& truth,
                                       std::vector<double> thresholds) {
  if (!s.same_shape(truth)) throw ShapeMismatch("roc_curve: score/truth shapes differ");
  std::size_t pos = 0, neg = 0;
  for (double v : truth.data()) {
    if (v > 0.5) {
      ++pos;
    } else {
      ++neg;
    }
  }
  if (pos == 0 || neg == 0) throw DegenerateTruth("truth labels contain a single class");
  std::sort(thresholds.begin(), thresholds.end());
  std::vector<RocPoint> points;
  points.reserve(thresholds.size());
  for (double t : thresholds) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t idx = 0; idx < s.data().size(); ++idx) {
      const bool predicted = std::fabs(s.data()[idx]) >= t;
      if (!predicted) continue;
      if (truth.data()[idx] > 0.5) {
        ++tp;
      } else {
        ++fp;
      }
    }
    RocPoint pt;
    pt.threshold = t;
    pt.true_positive_rate = static_cast<double>(tp) / static_cast<double>(pos);
    pt.false_positive_rate = static_cast<double>(fp) / static_cast<double>(neg);
    points.push_back(pt);
  }
  return points;
}

struct MedianCheckReport {
  bool even_frames = false;
  double max_gap = 0.0;  // odd: |h - median|_inf; even: distance outside the optimal interval
  bool pass = false;
};

// With the left factor pinned to the all-ones column the l1-optimal right
// factor is the per-pixel median, so the constrained solve and the direct
// median must agree. Even frame counts have a flat optimum between the two
// middle values; membership in that interval is checked instead.
inline MedianCheckReport median_check(const DenseMatrix& x, double tol = 1e-4,
                                      const SolverOptions& opts = {}) {
  DenseMatrix ones(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) ones(i, 0) = 1.0;
  const ProjectionResult proj = nnlad_admm(ones, x, opts);

  MedianCheckReport report;
  report.even_frames = (x.rows() % 2 == 0);
  std::vector<double> buf(x.rows());
  double gap = 0.0;
  for (std::size_t q = 0; q < x.cols(); ++q) {
    auto col = x.col(q);
    buf.assign(col.begin(), col.end());
    std::sort(buf.begin(), buf.end());
    const double solved = proj.H(0, q);
    if (!report.even_frames) {
      gap = std::max(gap, std::fabs(solved - buf[(x.rows() - 1) / 2]));
    } else {
      const double lo = buf[x.rows() / 2 - 1];
      const double hi = buf[x.rows() / 2];
      double outside = 0.0;
      if (solved < lo) outside = lo - solved;
      if (solved > hi) outside = solved - hi;
      gap = std::max(gap, outside);
    }
  }
  report.max_gap = gap;
  report.pass = gap <= tol;
  return report;
}

}  // namespace conical
