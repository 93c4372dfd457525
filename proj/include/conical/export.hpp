#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "conical/synthetic.hpp"
#include "conical/xray.hpp"

namespace conical {

inline constexpr const char* kVersion = "0.1.0";

inline nlohmann::json to_json(const IterationDiag& d) {
  return nlohmann::json{{"exterior_index", d.exterior_index},
                        {"added", d.added},
                        {"used_lp_fallback", d.used_lp_fallback},
                        {"reproject_retries", d.reproject_retries},
                        {"certificate_ok", d.certificate_ok},
                        {"anchor_alignment", d.anchor_alignment},
                        {"identity_gap", d.identity_gap},
                        {"weighted_exterior", d.weighted_exterior},
                        {"stationarity_max", d.stationarity_max},
                        {"objective", d.objective},
                        {"projection_converged", d.projection_converged}};
}

inline nlohmann::json diagnostics_json(const Factorization& f) {
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& d : f.iterations) iters.push_back(to_json(d));
  return nlohmann::json{{"anchors", f.anchors},
                        {"residual_norm_trace", f.residual_norm_trace},
                        {"iterations", iters},
                        {"warnings", f.warnings}};
}

inline nlohmann::json anchors_json(const Factorization& f) {
  return nlohmann::json{{"anchors", f.anchors}, {"warnings", f.warnings}};
}

inline nlohmann::json config_json(const RunConfig& cfg) {
  std::string loss;
  switch (cfg.loss) {
    case LossKind::L1:
      loss = "l1";
      break;
    case LossKind::Bregman:
      loss = to_string(cfg.divergence.kind);
      break;
    case LossKind::BregmanReverse:
      loss = to_string(cfg.divergence.kind) + "-reverse";
      break;
  }
  return nlohmann::json{
      {"rank", cfg.rank},
      {"loss", loss},
      {"exterior", cfg.exterior == ExteriorMode::Max ? "max" : "rand"},
      {"seed", cfg.seed},
      {"eps_domain", cfg.divergence.eps_domain},
      {"solver",
       {{"admm_rho", cfg.solver.admm_rho},
        {"eps_abs", cfg.solver.eps_abs},
        {"eps_rel", cfg.solver.eps_rel},
        {"max_admm_iters", cfg.solver.max_admm_iters},
        {"admm_inner_sweeps", cfg.solver.admm_inner_sweeps},
        {"max_cd_sweeps", cfg.solver.max_cd_sweeps},
        {"cd_tol", cfg.solver.cd_tol}}},
      {"selection",
       {{"exterior_tol_rel", cfg.selection.exterior_tol_rel},
        {"zero_tol_rel", cfg.selection.zero_tol_rel},
        {"anchor_tol_rel", cfg.selection.anchor_tol_rel},
        {"identity_tol_abs", cfg.selection.identity_tol_abs},
        {"strict_eps", cfg.selection.strict_eps},
        {"tie_rel", cfg.selection.tie_rel},
        {"max_p_resample", cfg.selection.max_p_resample},
        {"max_tie_recursion", cfg.selection.max_tie_recursion}}}};
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace conical
