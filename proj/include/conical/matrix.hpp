#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conical/errors.hpp"
#include "conical/rng.hpp"

namespace conical {

// Dense real matrix, column-contiguous. Every algorithm in this library
// walks columns, so a column view is a contiguous span. Entries are
// validated finite at construction; summations over a column run left to
// right so repeated runs are bit-identical.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> column_major)
      : rows_(rows), cols_(cols), data_(std::move(column_major)) {
    if (data_.size() != rows_ * cols_) {
      throw ValidationError("matrix data size does not match rows*cols");
    }
    validate_finite();
  }

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t m = rows.size();
    const std::size_t n = m == 0 ? 0 : rows.begin()->size();
    DenseMatrix out(m, n);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != n) throw ValidationError("ragged row in matrix literal");
      std::size_t j = 0;
      for (double v : row) out(i, j++) = v;
      ++i;
    }
    out.validate_finite();
    return out;
  }

  // Construction guard for data that must be non-negative.
  static DenseMatrix nonneg(DenseMatrix m) {
    for (std::size_t idx = 0; idx < m.data_.size(); ++idx) {
      if (m.data_[idx] < 0.0) {
        throw ValidationError("negative entry at flat index " + std::to_string(idx) +
                              " in non-negative matrix");
      }
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  void validate_finite() const {
    for (std::size_t idx = 0; idx < data_.size(); ++idx) {
      if (!std::isfinite(data_[idx])) {
        throw ValidationError("non-finite entry at flat index " + std::to_string(idx));
      }
    }
  }

  double min_entry() const {
    double m = data_.empty() ? 0.0 : data_[0];
    for (double v : data_) m = v < m ? v : m;
    return m;
  }

  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Strictly positive normalization vector p = 1 + delta, delta ~ U(0, 1e-5).
struct PositiveVector {
  std::vector<double> values;
  std::uint64_t seed = 0;
};

inline PositiveVector make_p(std::size_t m, std::uint64_t seed) {
  PositiveVector p;
  p.seed = seed;
  p.values.resize(m);
  RandomStream rng = substream(seed, "p");
  for (std::size_t i = 0; i < m; ++i) p.values[i] = 1.0 + 1e-5 * rng.uniform01();
  return p;
}

inline std::vector<double> column_l1_norms(const DenseMatrix& x) {
  std::vector<double> norms(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double s = 0.0;
    for (double v : x.col(j)) s += std::fabs(v);
    norms[j] = s;
  }
  return norms;
}

inline double soft_threshold(double x, double tau) {
  const double mag = std::fabs(x) - tau;
  if (mag <= 0.0) return 0.0;
  return x < 0.0 ? -mag : mag;
}

inline double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

inline double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::fabs(x) > m ? std::fabs(x) : m;
  return m;
}

// C = A * B with deterministic per-column accumulation order.
inline DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw ShapeMismatch("multiply: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto out = c.col(j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double w = b(k, j);
      if (w == 0.0) continue;
      auto ak = a.col(k);
      for (std::size_t i = 0; i < a.rows(); ++i) out[i] += w * ak[i];
    }
  }
  return c;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
  return t;
}

inline DenseMatrix select_columns(const DenseMatrix& x, std::span<const std::size_t> idx) {
  DenseMatrix out(x.rows(), idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    auto src = x.col(idx[j]);
    auto dst = out.col(j);
    for (std::size_t i = 0; i < x.rows(); ++i) dst[i] = src[i];
  }
  return out;
}

// R = X - W * H, always recomputed from scratch.
inline DenseMatrix residual(const DenseMatrix& x, const DenseMatrix& w, const DenseMatrix& h) {
  if (w.cols() != h.rows() || w.rows() != x.rows() || h.cols() != x.cols()) {
    throw ShapeMismatch("residual: incompatible shapes");
  }
  DenseMatrix r = x;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    auto out = r.col(j);
    for (std::size_t k = 0; k < w.cols(); ++k) {
      const double c = h(k, j);
      if (c == 0.0) continue;
      auto wk = w.col(k);
      for (std::size_t i = 0; i < x.rows(); ++i) out[i] -= c * wk[i];
    }
  }
  return r;
}

inline bool columns_equal(const DenseMatrix& a, std::size_t ja, const DenseMatrix& b,
                          std::size_t jb) {
  auto ca = a.col(ja);
  auto cb = b.col(jb);
  if (ca.size() != cb.size()) return false;
  for (std::size_t i = 0; i < ca.size(); ++i)
    if (ca[i] != cb[i]) return false;
  return true;
}

}  // namespace conical
