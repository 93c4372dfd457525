#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace conical {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic sub-seed for a named stream. Every matrix (W, H', noise, p,
// ...) draws from its own stream so adding a consumer never shifts another
// stream's values.
inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return splitmix64(seed ^ h);
}

// mt19937_64 engine plus hand-rolled transforms. The engine is fully pinned
// by the standard and the transforms below avoid std::*_distribution, whose
// outputs are implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  // Zero-mean Laplace with the given scale b (std dev = b*sqrt(2)),
  // via inverse CDF.
  double laplace(double scale) {
    const double u = uniform01() - 0.5;
    const double mag = std::log1p(-2.0 * std::fabs(u));
    return u < 0.0 ? scale * mag : -scale * mag;
  }

  // Exponential with the given mean.
  double exponential_mean(double mean) { return -mean * std::log1p(-uniform01()); }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  // Gamma(shape, 1) via Marsaglia-Tsang, with the shape<1 boost.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform01(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Dirichlet(alpha) via normalized gamma draws. Columns whose draws all
  // underflow are redrawn; this keeps the support guarantee sum == 1.
  void dirichlet(std::span<const double> alpha, std::span<double> out) {
    for (;;) {
      double sum = 0.0;
      for (std::size_t i = 0; i < alpha.size(); ++i) {
        out[i] = gamma(alpha[i]);
        sum += out[i];
      }
      if (sum > 1e-250) {
        for (std::size_t i = 0; i < alpha.size(); ++i) out[i] /= sum;
        return;
      }
    }
  }

 private:
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

inline RandomStream substream(std::uint64_t seed, std::string_view label) {
  return RandomStream(stream_seed(seed, label));
}

}  // namespace conical
