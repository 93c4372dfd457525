#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "conical/matrix.hpp"
#include "conical/parallel.hpp"
#include "conical/rng.hpp"
#include "conical/xray.hpp"

namespace conical {

// Exactly r-separable instance: W is iid U(0,1), H = [I | H'] with H'
// columns Dirichlet (one parameter vector per instance, itself iid U(0,1)),
// X = W*H. The first r columns of X are the planted anchors.
struct SeparableInstance {
  DenseMatrix W;  // m x r
  DenseMatrix H;  // r x n
  DenseMatrix X;  // m x n
  std::vector<std::size_t> true_anchors;
  std::uint64_t seed = 0;
};

inline SeparableInstance gen_separable(std::size_t m, std::size_t r, std::size_t n,
                                       std::uint64_t seed) {
  if (r > n) throw ValidationError("gen_separable: r must not exceed n");
  SeparableInstance inst;
  inst.seed = seed;
  inst.W = DenseMatrix(m, r);
  RandomStream w_rng = substream(seed, "W");
  for (std::size_t j = 0; j < r; ++j) {
    auto col = inst.W.col(j);
    for (std::size_t i = 0; i < m; ++i) col[i] = w_rng.uniform01();
  }
  inst.H = DenseMatrix(r, n);
  for (std::size_t a = 0; a < r; ++a) inst.H(a, a) = 1.0;
  std::vector<double> alpha(r);
  RandomStream a_rng = substream(seed, "alpha");
  for (std::size_t a = 0; a < r; ++a) alpha[a] = a_rng.uniform01();
  RandomStream h_rng = substream(seed, "H");
  for (std::size_t j = r; j < n; ++j) {
    h_rng.dirichlet(alpha, inst.H.col(j));
  }
  inst.X = multiply(inst.W, inst.H);
  inst.true_anchors.resize(r);
  for (std::size_t a = 0; a < r; ++a) inst.true_anchors[a] = a;
  return inst;
}

// X + max(N1, 0) where N1 is iid zero-mean Laplace with standard deviation
// delta (scale delta/sqrt(2)). About half the noise entries are zeroed by
// the max.
inline DenseMatrix add_sparse_laplace_noise(const DenseMatrix& x, double delta,
                                            std::uint64_t seed) {
  if (delta < 0.0) throw ValidationError("noise standard deviation must be >= 0");
  DenseMatrix out = x;
  if (delta == 0.0) return out;
  const double scale = delta / std::sqrt(2.0);
  RandomStream rng = substream(seed, "laplace");
  for (std::size_t j = 0; j < out.cols(); ++j) {
    auto col = out.col(j);
    for (std::size_t i = 0; i < col.size(); ++i) {
      const double noise = rng.laplace(scale);
      if (noise > 0.0) col[i] += noise;
    }
  }
  return out;
}

// X_ij drawn from an exponential distribution with mean lambda * (W H)_ij.
inline DenseMatrix gen_exponential_data(const DenseMatrix& w, const DenseMatrix& h, double lambda,
                                        std::uint64_t seed) {
  if (lambda <= 0.0) throw ValidationError("lambda must be positive");
  const DenseMatrix mean = multiply(w, h);
  DenseMatrix out(mean.rows(), mean.cols());
  RandomStream rng = substream(seed, "expdata");
  for (std::size_t j = 0; j < out.cols(); ++j) {
    auto src = mean.col(j);
    auto dst = out.col(j);
    for (std::size_t i = 0; i < dst.size(); ++i) {
      const double mu = lambda * src[i];
      dst[i] = mu <= 0.0 ? 0.0 : rng.exponential_mean(mu);
    }
  }
  return out;
}

inline double anchor_recovery_rate(const std::vector<std::size_t>& found,
                                   const std::vector<std::size_t>& truth) {
  if (truth.empty()) throw ValidationError("anchor_recovery_rate: truth set is empty");
  const std::set<std::size_t> truth_set(truth.begin(), truth.end());
  std::size_t hits = 0;
  std::set<std::size_t> seen;
  for (std::size_t f : found) {
    if (truth_set.count(f) && seen.insert(f).second) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth_set.size());
}

enum class NoiseModel { Laplace, Exponential };

struct BenchConfig {
  std::size_t m = 200;
  std::size_t r = 20;
  std::size_t n = 210;
  NoiseModel noise = NoiseModel::Laplace;
  std::vector<double> params;           // delta or lambda grid
  std::vector<std::string> algorithms;  // l1, l2, kl, is
  std::vector<std::uint64_t> seeds;
  RunConfig base;  // solver/selection options and exterior mode
};

struct SweepRow {
  std::string algorithm;
  double param = 0.0;
  std::size_t seed_count = 0;
  double mean_recovery = 0.0;
  double stddev_recovery = 0.0;
};

inline RunConfig config_for_algorithm(const std::string& name, const RunConfig& base,
                                      std::size_t rank, std::uint64_t seed) {
  RunConfig cfg = base;
  cfg.rank = rank;
  cfg.seed = seed;
  if (name == "l1") {
    cfg.loss = LossKind::L1;
  } else {
    cfg.loss = LossKind::Bregman;
    cfg.divergence.kind = parse_divergence(name);
  }
  return cfg;
}

// One row per (algorithm, grid value); each row averages the recovery rate
// over the shared seed list. Deterministic: cell data depends only on
// (seed, grid value), never on evaluation order.
inline std::vector<SweepRow> bench_sweep(const BenchConfig& cfg) {
  std::vector<SweepRow> rows(cfg.algorithms.size() * cfg.params.size());
  const std::size_t cells = rows.size();
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t ai = cell / cfg.params.size();
    const std::size_t pi = cell % cfg.params.size();
    const double param = cfg.params[pi];
    std::vector<double> rates;
    rates.reserve(cfg.seeds.size());
    for (std::uint64_t seed : cfg.seeds) {
      const SeparableInstance inst = gen_separable(cfg.m, cfg.r, cfg.n, seed);
      DenseMatrix data;
      const std::uint64_t noise_seed =
          splitmix64(seed ^ stream_seed(0x5eed, std::to_string(param)));
      if (cfg.noise == NoiseModel::Laplace) {
        data = add_sparse_laplace_noise(inst.X, param, noise_seed);
      } else {
        data = gen_exponential_data(inst.W, inst.H, param, noise_seed);
      }
      const RunConfig run_cfg = config_for_algorithm(cfg.algorithms[ai], cfg.base, cfg.r, seed);
      const Factorization fact = run_xray(data, run_cfg);
      rates.push_back(anchor_recovery_rate(fact.anchors, inst.true_anchors));
    }
    SweepRow row;
    row.algorithm = cfg.algorithms[ai];
    row.param = param;
    row.seed_count = rates.size();
    double mean = 0.0;
    for (double v : rates) mean += v;
    mean = rates.empty() ? 0.0 : mean / static_cast<double>(rates.size());
    double var = 0.0;
    for (double v : rates) var += (v - mean) * (v - mean);
    row.mean_recovery = mean;
    row.stddev_recovery =
        rates.size() > 1 ? std::sqrt(var / static_cast<double>(rates.size() - 1)) : 0.0;
    rows[cell] = std::move(row);
  });
  return rows;
}

}  // namespace conical
