// SPDX-License-Identifier: MIT

#include "fmmkit/report.hpp"

#include <algorithm>
#include <cmath>

namespace fmm {

Json report_envelope(const std::string& command) {
  Json j;
  j["schema"] = kReportSchema;
  j["command"] = command;
  return j;
}

Json json_dims(const Dims& d) {
  return Json{{"m", d.m}, {"p", d.p}, {"n", d.n}};
}

Json json_rank_report(const RankReport& r, int sv_head) {
  Json j;
  j["rank"] = r.rank;
  j["tol"] = r.tol;
  j["sigma_max"] = r.sigma_max;
  j["gap"] = std::isfinite(r.gap) ? Json(r.gap) : Json("inf");
  Json head = Json::array();
  int keep = std::min<int>(sv_head, static_cast<int>(r.sv.size()));
  // The interesting values sit around the rank decision, not at the top.
  int from = std::max(0, r.rank - keep / 2);
  for (int i = from; i < from + keep && i < static_cast<int>(r.sv.size()); ++i)
    head.push_back(r.sv[i]);
  j["sv_window_start"] = from;
  j["sv_window"] = head;
  return j;
}

Json json_fingerprint(const Fingerprint& f) {
  Json j;
  j["traces"] = f.traces;
  j["product_ranks"] = f.product_ranks;
  Json fr = Json::array();
  for (const auto& t : f.factor_ranks) fr.push_back(Json{t[0], t[1], t[2]});
  j["factor_ranks"] = fr;
  j["jacobian_rank"] = f.jac_rank;
  return j;
}

Json json_stability(const StabilityReport& s) {
  Json j;
  j["q"] = s.q;
  j["e"] = s.e;
  j["q_row"] = s.q_argmax;
  j["e_row"] = s.e_argmax;
  j["zero_tol"] = s.zero_tol;
  return j;
}

Json json_lm_result(const LmResult& r) {
  Json j;
  j["status"] = to_string(r.status);
  j["cost"] = r.cost;
  j["grad_norm"] = r.grad_norm;
  j["mu"] = r.mu;
  j["iters"] = r.iters;
  j["solves"] = r.solves;
  return j;
}

Json json_al_result(const AlResult& r) {
  Json j;
  j["converged"] = r.converged;
  j["cost"] = r.cost;
  j["feasibility"] = r.feas;
  j["grad_norm"] = r.grad_norm;
  j["beta"] = r.state.beta;
  j["outer_iters"] = r.outer_iters;
  j["inner_iters_total"] = r.inner_iters_total;
  j["border_rank_suspect"] = r.border_rank_suspect;
  return j;
}

std::string dump_report(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace fmm
