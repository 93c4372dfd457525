#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "conical/errors.hpp"
#include "conical/matrix.hpp"

namespace conical {

enum class DivergenceKind { SquaredEuclidean, GeneralizedKL, ItakuraSaito };

// Bregman divergence family D(x, y) = phi(x) - phi(y) - phi'(y)(x - y).
// Generators: phi(x) = x^2 (squared Euclidean), phi(x) = x log x - x
// (generalized KL, with 0 log 0 = 0) and phi(x) = -log x (Itakura-Saito).
// KL and IS have singular derivatives at 0; arguments are clipped to
// eps_domain rather than rejected, since real data contains zeros.
struct DivergenceSpec {
  DivergenceKind kind = DivergenceKind::SquaredEuclidean;
  double eps_domain = 1e-12;

  double clip(double v) const { return v < eps_domain ? eps_domain : v; }

  double phi(double x) const {
    switch (kind) {
      case DivergenceKind::SquaredEuclidean:
        return x * x;
      case DivergenceKind::GeneralizedKL:
        return x <= 0.0 ? 0.0 : x * std::log(x) - x;
      case DivergenceKind::ItakuraSaito:
        return -std::log(clip(x));
    }
    return 0.0;
  }

  double phi_prime(double x) const {
    switch (kind) {
      case DivergenceKind::SquaredEuclidean:
        return 2.0 * x;
      case DivergenceKind::GeneralizedKL:
        return std::log(clip(x));
      case DivergenceKind::ItakuraSaito:
        return -1.0 / clip(x);
    }
    return 0.0;
  }

  double phi_second(double x) const {
    switch (kind) {
      case DivergenceKind::SquaredEuclidean:
        return 2.0;
      case DivergenceKind::GeneralizedKL:
        return 1.0 / clip(x);
      case DivergenceKind::ItakuraSaito: {
        const double c = clip(x);
        return 1.0 / (c * c);
      }
    }
    return 0.0;
  }

  // Elementwise divergence with domain clipping applied to singular spots.
  double point(double x, double y) const {
    switch (kind) {
      case DivergenceKind::SquaredEuclidean: {
        const double d = x - y;
        return d * d;
      }
      case DivergenceKind::GeneralizedKL: {
        const double yc = clip(y);
        if (x <= 0.0) return yc;
        return x * std::log(x / yc) - x + yc;
      }
      case DivergenceKind::ItakuraSaito: {
        const double xc = clip(x);
        const double yc = clip(y);
        const double ratio = xc / yc;
        return ratio - std::log(ratio) - 1.0;
      }
    }
    return 0.0;
  }
};

inline double phi_second_derivative(const DivergenceSpec& spec, double x) {
  return spec.phi_second(x);
}

inline double divergence(const DivergenceSpec& spec, const DenseMatrix& x, const DenseMatrix& y) {
  if (!x.same_shape(y)) throw ShapeMismatch("divergence: shapes differ");
  double total = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    auto xc = x.col(j);
    auto yc = y.col(j);
    for (std::size_t i = 0; i < xc.size(); ++i) total += spec.point(xc[i], yc[i]);
  }
  return total;
}

inline double divergence_cols(const DivergenceSpec& spec, std::span<const double> x,
                              std::span<const double> y) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += spec.point(x[i], y[i]);
  return total;
}

inline std::string to_string(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::SquaredEuclidean:
      return "l2";
    case DivergenceKind::GeneralizedKL:
      return "kl";
    case DivergenceKind::ItakuraSaito:
      return "is";
  }
  return "l2";
}

inline DivergenceKind parse_divergence(std::string_view name) {
  if (name == "l2") return DivergenceKind::SquaredEuclidean;
  if (name == "kl") return DivergenceKind::GeneralizedKL;
  if (name == "is") return DivergenceKind::ItakuraSaito;
  throw ValidationError("unknown divergence name: " + std::string(name));
}

}  // namespace conical
