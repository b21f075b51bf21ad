#include "report_json.hpp"

#include <fstream>
#include <system_error>

namespace multmean::cli {

ordered_json to_json(const SignReport& r) {
  ordered_json cps = ordered_json::array();
  for (const auto& c : r.checkpoints) {
    cps.push_back({{"x", c.x},
                   {"S", c.nonvanishing},
                   {"negative", c.negative},
                   {"positive", c.positive},
                   {"frac_neg", c.frac_neg},
                   {"frac_pos", c.frac_pos},
                   {"deviation", c.deviation}});
  }
  return {{"checkpoints", cps},
          {"gamma_const", r.gamma_const},
          {"slack", r.slack},
          {"trend_nonincreasing", r.trend_nonincreasing},
          {"generic", r.generic},
          {"vanishing", r.vanishing},
          {"note", "trend test only; the (log x)^(-1/24000) rate is not observable at this scale"}};
}

ordered_json to_json(const ExceptionalDetection& r) {
  ordered_json cands = ordered_json::array();
  for (const auto& c : r.candidates) {
    cands.push_back({{"character_index", c.character_index},
                     {"checkpoints", c.checkpoints},
                     {"partial_sums", c.partial_sums},
                     {"increments", c.increments},
                     {"flagged", c.flagged}});
  }
  ordered_json j{{"flagged", r.character.has_value()}};
  if (r.character) {
    j["character"] = {{"modulus", r.character->modulus()}, {"index", r.character->index()}};
  }
  j["threshold"] = r.threshold;
  j["window_count"] = r.window_count;
  j["candidates"] = cands;
  j["note"] = r.note;
  return j;
}

ordered_json to_json(const DensityReport& r) {
  ordered_json cps = ordered_json::array();
  for (const auto& c : r.checkpoints) {
    ordered_json classes = ordered_json::array();
    for (const auto& s : c.classes) {
      classes.push_back({{"a", s.residue},
                         {"sum", s.sum},
                         {"gamma_hat", s.gamma_hat},
                         {"terms", s.terms},
                         {"small_sample", s.small_sample}});
    }
    cps.push_back({{"x", c.x},
                   {"S_D", c.s_d},
                   {"scaled", c.scaled},
                   {"partition_error", c.partition_error},
                   {"max_uniform_error", c.max_uniform_error},
                   {"classes", classes}});
  }
  ordered_json j{{"modulus", r.modulus},
                 {"weighting", r.weighting},
                 {"nonnegative", r.nonnegative},
                 {"degenerate", r.degenerate},
                 {"small_sample_threshold", r.small_sample_threshold},
                 {"checkpoints", cps}};
  if (r.exceptional) j["exceptional"] = to_json(*r.exceptional);
  if (r.case_two) {
    ordered_json pred = ordered_json::array();
    for (const auto& [a, g] : r.case_two->predicted) pred.push_back({{"a", a}, {"gamma", g}});
    j["case_two"] = {{"character_index", r.case_two->character_index},
                     {"psi_cutoff", r.case_two->psi_cutoff},
                     {"psi_product", r.case_two->psi_product},
                     {"predicted", pred},
                     {"max_deviation", r.case_two->max_deviation}};
  }
  return j;
}

ordered_json to_json(const ScalingCheck& r) {
  return {{"x", r.x}, {"scaled", r.scaled}, {"step_ratios", r.step_ratios}, {"degenerate", r.degenerate}};
}

ordered_json to_json(const Lemma10Report& r) {
  ordered_json cps = ordered_json::array();
  for (const auto& c : r.checkpoints) {
    cps.push_back({{"x", c.x},
                   {"L", c.L},
                   {"square_sum", c.square_sum},
                   {"abs_sum", c.abs_sum},
                   {"negative_sum", c.negative_sum},
                   {"full_square_sum", c.full_square_sum},
                   {"diff_square", c.diff_square},
                   {"diff_abs", c.diff_abs},
                   {"diff_negative", c.diff_negative}});
  }
  return {{"checkpoints", cps},
          {"hypothesis_failure", r.hypothesis_failure},
          {"drift_square", r.drift_square},
          {"drift_abs", r.drift_abs},
          {"drift_negative", r.drift_negative}};
}

ordered_json to_json(const WirsingReport& r) {
  ordered_json cps = ordered_json::array();
  for (const auto& c : r.checkpoints) {
    cps.push_back({{"x", c.x},
                   {"sum", c.sum},
                   {"tau_hat", c.tau_hat},
                   {"euler_product", c.euler},
                   {"predicted", c.predicted},
                   {"ratio", c.ratio}});
  }
  ordered_json j{{"spec", r.spec_id}};
  j["declared_tau"] = r.declared_tau ? ordered_json(*r.declared_tau) : ordered_json(nullptr);
  j["tau_used"] = r.tau_used;
  j["checkpoints"] = cps;
  return j;
}

ordered_json to_json(const SweepReport& r) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"D", row.modulus},
                    {"max_error", row.max_error},
                    {"envelope", row.envelope},
                    {"small_classes", row.small_classes},
                    {"min_class_terms", row.min_class_terms}});
  }
  return {{"x", r.x}, {"all_finite", r.all_finite}, {"rows", rows}};
}

ordered_json to_json(const LambdaReport& r) {
  ordered_json j{{"lambda", r.lambda},
                 {"t_star", r.t_star},
                 {"T", r.T},
                 {"Y", r.Y},
                 {"x", r.x},
                 {"grid_step", r.grid_step},
                 {"refinement_iterations", r.refinement_iterations},
                 {"grid_points", r.grid_points},
                 {"refined_cells", r.refined_cells}};
  if (!r.rho_profile.empty()) {
    ordered_json prof = ordered_json::array();
    for (const auto& s : r.rho_profile) prof.push_back({s.t, s.rho});
    j["rho_profile"] = prof;
  }
  return j;
}

ordered_json to_json(const Theorem2Report& r) {
  return {{"M_abs", r.m_actual},
          {"P_x", r.p_x},
          {"c", r.c},
          {"beta", r.beta},
          {"c1", r.c1},
          {"worst_margin", r.worst_margin},
          {"worst_w", r.worst_w},
          {"max_abs_g", r.max_abs_g},
          {"beta_respected", r.beta_respected},
          {"gamma_exponent", r.gamma_exponent},
          {"lambda", to_json(r.lambda)},
          {"bound_factor", r.bound_factor},
          {"rhs", r.rhs},
          {"ratio", r.ratio}};
}

ordered_json to_json(const BracketingScan& r) {
  ordered_json j{{"scanned_from", r.scanned_from}, {"scanned_to", r.scanned_to}, {"failures", r.failures}};
  j["first_holding"] = r.first_holding ? ordered_json(*r.first_holding) : ordered_json(nullptr);
  return j;
}

ordered_json to_json(const LambdaGrowth& r) {
  return {{"x", r.x},
          {"defect_sum", r.defect_sum},
          {"beta_x", r.beta_x},
          {"defect_ratio", r.defect_ratio},
          {"mass_ratio", r.mass_ratio},
          {"lambda", to_json(r.lambda)},
          {"lambda_ratio", r.lambda_ratio}};
}

ordered_json to_json(const IntervalAssignment& r) {
  return {{"n", r.n},
          {"lo", r.lo},
          {"hi", r.hi},
          {"y", r.y},
          {"primes", r.prime_count},
          {"cap", r.cap},
          {"minus", r.minus_count},
          {"plus", r.plus_count},
          {"truncated", r.truncated}};
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("rename to " + path.string() + " failed: " + ec.message());
  }
}

}  // namespace multmean::cli
