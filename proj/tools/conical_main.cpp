#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "conical/conical.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
};

GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  const std::size_t c1 = text.find(':');
  const std::size_t c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw conical::ValidationError("grid must be start:stop:step, got '" + text + "'");
  }
  auto num = [&](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
      throw conical::ValidationError("bad grid number '" + s + "'");
    }
    return v;
  };
  g.start = num(text.substr(0, c1));
  g.stop = num(text.substr(c1 + 1, c2 - c1 - 1));
  g.step = num(text.substr(c2 + 1));
  if (g.stop < g.start) throw conical::ValidationError("grid stop must be >= start");
  if (g.step <= 0.0 && g.stop != g.start) {
    throw conical::ValidationError("grid step must be positive");
  }
  return g;
}

std::vector<double> grid_points(const GridSpec& g) {
  std::vector<double> pts;
  if (g.stop == g.start) {
    pts.push_back(g.start);
    return pts;
  }
  const double slack = g.step * 1e-9;
  for (double v = g.start; v <= g.stop + slack; v += g.step) pts.push_back(v);
  return pts;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

conical::RunConfig make_run_config(const std::string& loss, const std::string& exterior,
                                   std::size_t rank, std::uint64_t seed) {
  conical::RunConfig cfg;
  cfg.rank = rank;
  cfg.seed = seed;
  if (loss == "l1") {
    cfg.loss = conical::LossKind::L1;
  } else {
    cfg.loss = conical::LossKind::Bregman;
    cfg.divergence.kind = conical::parse_divergence(loss);
  }
  if (exterior == "max") {
    cfg.exterior = conical::ExteriorMode::Max;
  } else if (exterior == "rand") {
    cfg.exterior = conical::ExteriorMode::Rand;
  } else {
    throw conical::ValidationError("exterior must be max or rand");
  }
  return cfg;
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand, const json& config,
                    const std::vector<std::string>& inputs) {
  json manifest{{"tool", "conical"},
                {"version", conical::kVersion},
                {"subcommand", subcommand},
                {"inputs", inputs},
                {"config", config}};
  conical::write_json((out_dir / "manifest.json").string(), manifest);
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

void write_roc_csv(const fs::path& path, const std::vector<conical::RocPoint>& points) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw conical::ValidationError("cannot write " + path.string());
  f << "threshold,tpr,fpr\n";
  for (const auto& p : points) {
    f << conical::format_value(p.threshold) << ',' << conical::format_value(p.true_positive_rate)
      << ',' << conical::format_value(p.false_positive_rate) << '\n';
  }
}

void write_sweep_csv(const fs::path& path, const std::vector<conical::SweepRow>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw conical::ValidationError("cannot write " + path.string());
  f << "algorithm,param,seed_count,mean_recovery,stddev_recovery\n";
  for (const auto& r : rows) {
    f << r.algorithm << ',' << conical::format_value(r.param) << ',' << r.seed_count << ','
      << conical::format_value(r.mean_recovery) << ','
      << conical::format_value(r.stddev_recovery) << '\n';
  }
}

std::string frame_name(const char* prefix, std::size_t t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-%04zu.pgm", prefix, t);
  return buf;
}

int run_factorize(const std::string& input, std::size_t rank, const std::string& loss,
                  const std::string& exterior, std::uint64_t seed, std::size_t refit_steps,
                  bool header, const std::string& out, bool dump_config) {
  conical::RunConfig cfg = make_run_config(loss, exterior, rank, seed);
  json config = conical::config_json(cfg);
  config["refit"] = refit_steps;
  config["input"] = input;
  if (dump_config) {
    std::cout << config.dump(2) << "\n";
    return 0;
  }
  const conical::DenseMatrix x =
      conical::DenseMatrix::nonneg(conical::read_matrix_csv(input, header));
  const fs::path dir = prepare_out_dir(out);
  const conical::Factorization fact = conical::run_xray(x, cfg);

  conical::DenseMatrix w;
  conical::DenseMatrix h = fact.H;
  if (refit_steps > 0 && !fact.anchors.empty()) {
    auto refined = conical::refit(x, fact.anchors, refit_steps, cfg);
    w = std::move(refined.first);
    h = std::move(refined.second);
  } else {
    w = conical::select_columns(x, fact.anchors);
  }

  conical::write_json((dir / "anchors.json").string(), conical::anchors_json(fact));
  conical::write_matrix_csv((dir / "W.csv").string(), w);
  conical::write_matrix_csv((dir / "H.csv").string(), h);
  conical::write_json((dir / "diagnostics.json").string(), conical::diagnostics_json(fact));
  write_manifest(dir, "factorize", config, {input});
  if (fact.anchors.size() < rank) {
    std::cerr << "warning: only " << fact.anchors.size() << " of " << rank
              << " anchors found (no exterior column left)\n";
    return 2;
  }
  return 0;
}

int run_bench(const std::string& noise, const std::string& grid, const std::string& algos,
              std::size_t seeds, std::uint64_t base_seed, std::size_t m, std::size_t r,
              std::size_t n, const std::string& exterior, const std::string& out,
              bool dump_config) {
  conical::BenchConfig cfg;
  cfg.m = m;
  cfg.r = r;
  cfg.n = n;
  if (noise == "laplace") {
    cfg.noise = conical::NoiseModel::Laplace;
  } else if (noise == "exponential") {
    cfg.noise = conical::NoiseModel::Exponential;
  } else {
    throw conical::ValidationError("noise must be laplace or exponential");
  }
  cfg.params = grid_points(parse_grid(grid));
  cfg.algorithms = split_list(algos);
  for (const auto& a : cfg.algorithms) {
    if (a != "l1") conical::parse_divergence(a);  // validates the name
  }
  for (std::size_t s = 0; s < seeds; ++s) cfg.seeds.push_back(base_seed + s);
  cfg.base = make_run_config("l1", exterior, r, base_seed);

  json config{{"noise", noise},     {"grid", grid}, {"algorithms", cfg.algorithms},
              {"seed_count", seeds}, {"seed", base_seed}, {"rows", m},
              {"rank", r},          {"cols", n},    {"exterior", exterior}};
  if (dump_config) {
    std::cout << config.dump(2) << "\n";
    return 0;
  }
  const fs::path dir = prepare_out_dir(out);
  const std::vector<conical::SweepRow> rows = conical::bench_sweep(cfg);
  write_sweep_csv(dir / "sweep.csv", rows);
  write_manifest(dir, "bench", config, {});
  return 0;
}

int run_exemplars(const std::string& input, std::size_t rank, const std::string& loss,
                  std::uint64_t seed, bool header, const std::string& out, bool dump_config) {
  conical::RunConfig cfg = make_run_config(loss, "max", rank, seed);
  json config = conical::config_json(cfg);
  config["input"] = input;
  if (dump_config) {
    std::cout << config.dump(2) << "\n";
    return 0;
  }
  const conical::DenseMatrix x =
      conical::DenseMatrix::nonneg(conical::read_matrix_csv(input, header));
  const fs::path dir = prepare_out_dir(out);
  const std::vector<std::size_t> picked = conical::exemplar_select(x, rank, cfg);
  conical::write_json((dir / "exemplars.json").string(), json{{"exemplars", picked}});
  write_manifest(dir, "exemplars", config, {input});
  if (picked.size() < rank) return 2;
  return 0;
}

int run_bgfg(const std::string& frames_dir, std::size_t rank, const std::string& loss,
             std::size_t refit_steps, const std::string& truth_dir, const std::string& thresholds,
             std::uint64_t seed, const std::string& out, bool dump_config) {
  conical::RunConfig cfg = make_run_config(loss, "max", rank, seed);
  json config = conical::config_json(cfg);
  config["refit"] = refit_steps;
  config["frames"] = frames_dir;
  config["truth"] = truth_dir;
  config["thresholds"] = thresholds;
  if (dump_config) {
    std::cout << config.dump(2) << "\n";
    return 0;
  }
  const conical::FrameStack stack = conical::load_frame_stack(frames_dir);
  const fs::path dir = prepare_out_dir(out);
  auto [background, foreground] = conical::bg_model(stack, rank, cfg, refit_steps);

  for (std::size_t t = 0; t < stack.frames; ++t) {
    conical::write_pgm((dir / frame_name("background", t)).string(),
                       conical::frame_to_image(stack, conical::stack_row(background, t)));
    std::vector<double> score = conical::stack_row(foreground, t);
    for (double& v : score) v = std::fabs(v);
    conical::write_pgm((dir / frame_name("foreground", t)).string(),
                       conical::frame_to_image(stack, score));
  }
  std::vector<std::string> inputs{frames_dir};
  if (!truth_dir.empty()) {
    const conical::FrameStack truth_stack = conical::load_frame_stack(truth_dir);
    if (truth_stack.frames != stack.frames || truth_stack.height != stack.height ||
        truth_stack.width != stack.width) {
      throw conical::ValidationError("truth frames do not match input frame dimensions");
    }
    conical::DenseMatrix truth = truth_stack.X;
    for (double& v : truth.data()) v = v >= 0.5 ? 1.0 : 0.0;
    const std::vector<conical::RocPoint> roc =
        conical::roc_curve(foreground, truth, grid_points(parse_grid(thresholds)));
    write_roc_csv(dir / "roc.csv", roc);
    inputs.push_back(truth_dir);
  }
  write_manifest(dir, "bgfg", config, inputs);
  return 0;
}

int run_median_check(const std::string& frames_dir, const std::string& out, bool dump_config) {
  json config{{"frames", frames_dir}, {"tolerance", 1e-4}};
  if (dump_config) {
    std::cout << config.dump(2) << "\n";
    return 0;
  }
  const conical::FrameStack stack = conical::load_frame_stack(frames_dir);
  const fs::path dir = prepare_out_dir(out);
  const conical::MedianCheckReport report = conical::median_check(stack.X);
  json rj{{"even_frames", report.even_frames},
          {"max_gap", report.max_gap},
          {"pass", report.pass},
          {"tolerance", 1e-4}};
  if (report.even_frames) {
    rj["note"] = "even frame count: flat optimum interval, membership checked instead of equality";
  }
  conical::write_json((dir / "report.json").string(), rj);
  write_manifest(dir, "median-check", config, {frames_dir});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-separable NMF by incremental conical hull expansion"};
  app.require_subcommand(1);

  std::string input, out = ".", loss = "l1", exterior = "max";
  std::string noise = "laplace", grid = "0:1.5:0.02", algos = "l1,l2";
  std::string truth_dir, thresholds = "0:1:0.01";
  std::size_t rank = 1, refit_steps = 0, seeds = 10;
  std::size_t bench_m = 200, bench_r = 20, bench_n = 210;
  std::uint64_t seed = 0;
  bool header = false, dump_config = false;

  auto* fact = app.add_subcommand("factorize", "Factor a CSV matrix into anchors and weights");
  fact->add_option("matrix", input, "input CSV matrix")->required();
  fact->add_option("--rank", rank, "number of anchors")->required();
  fact->add_option("--loss", loss, "l1, l2, kl or is")->default_val("l1");
  fact->add_option("--exterior", exterior, "exterior choice: max or rand")->default_val("max");
  fact->add_option("--seed", seed, "RNG seed");
  fact->add_option("--refit", refit_steps, "alternating refit steps after selection");
  fact->add_flag("--header", header, "skip one header line on read");
  fact->add_option("--out", out, "output directory");
  fact->add_flag("--dump-config", dump_config, "print the resolved configuration and exit");

  auto* bench = app.add_subcommand("bench", "Anchor-recovery sweep on synthetic data");
  bench->add_option("--noise", noise, "laplace or exponential")->default_val("laplace");
  bench->add_option("--grid", grid, "start:stop:step for the noise parameter");
  bench->add_option("--algos", algos, "comma list from l1,l2,kl,is");
  bench->add_option("--seeds", seeds, "number of seeds per grid point");
  bench->add_option("--seed", seed, "base seed");
  bench->add_option("--rows", bench_m, "data rows m");
  bench->add_option("--rank", bench_r, "inner dimension r");
  bench->add_option("--cols", bench_n, "data columns n");
  bench->add_option("--exterior", exterior, "exterior choice: max or rand")->default_val("max");
  bench->add_option("--out", out, "output directory");
  bench->add_flag("--dump-config", dump_config, "print the resolved configuration and exit");

  auto* exem = app.add_subcommand("exemplars", "Pick representative columns of a CSV matrix");
  exem->add_option("matrix", input, "input CSV matrix")->required();
  exem->add_option("--rank", rank, "number of exemplars")->required();
  exem->add_option("--loss", loss, "l1, l2, kl or is")->default_val("l1");
  exem->add_option("--seed", seed, "RNG seed");
  exem->add_flag("--header", header, "skip one header line on read");
  exem->add_option("--out", out, "output directory");
  exem->add_flag("--dump-config", dump_config, "print the resolved configuration and exit");

  auto* bgfg = app.add_subcommand("bgfg", "Background/foreground separation on PGM frames");
  bgfg->add_option("frames", input, "directory of PGM frames")->required();
  bgfg->add_option("--rank", rank, "number of anchor pixels")->required();
  bgfg->add_option("--loss", loss, "l1, l2, kl or is")->default_val("l1");
  bgfg->add_option("--refit", refit_steps, "alternating refit steps")->default_val(1);
  bgfg->add_option("--truth", truth_dir, "directory of ground-truth masks (0=bg, 255=fg)");
  bgfg->add_option("--thresholds", thresholds, "start:stop:step threshold grid for the ROC");
  bgfg->add_option("--seed", seed, "RNG seed");
  bgfg->add_option("--out", out, "output directory");
  bgfg->add_flag("--dump-config", dump_config, "print the resolved configuration and exit");

  auto* med = app.add_subcommand("median-check",
                                 "Compare the rank-1 all-ones fit with the per-pixel median");
  med->add_option("frames", input, "directory of PGM frames")->required();
  med->add_option("--out", out, "output directory");
  med->add_flag("--dump-config", dump_config, "print the resolved configuration and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(fact)) {
      return run_factorize(input, rank, loss, exterior, seed, refit_steps, header, out,
                           dump_config);
    }
    if (app.got_subcommand(bench)) {
      return run_bench(noise, grid, algos, seeds, seed, bench_m, bench_r, bench_n, exterior, out,
                       dump_config);
    }
    if (app.got_subcommand(exem)) {
      return run_exemplars(input, rank, loss, seed, header, out, dump_config);
    }
    if (app.got_subcommand(bgfg)) {
      return run_bgfg(input, rank, loss, refit_steps, truth_dir, thresholds, seed, out,
                      dump_config);
    }
    if (app.got_subcommand(med)) {
      return run_median_check(input, out, dump_config);
    }
  } catch (const conical::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
