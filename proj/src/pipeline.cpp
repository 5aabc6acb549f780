#include "mqo/pipeline.hpp"

#include <cmath>

namespace mqo {

uint64_t PipelineResult::selected_weight() const {
  uint64_t total = 0;
  for (size_t i : selected) total += static_cast<uint64_t>(std::ceil(covering.ces[i].weight));
  return total;
}

PipelineResult optimize_batch(const QueryBatch& batch, const Catalog& catalog, const StatsCatalog& stats,
                              const PipelineConfig& config) {
  PipelineResult out;
  out.ses = identify_ses(batch, config.k);
  out.covering = build_ces(out.ses, batch, catalog);
  Estimator est(stats, catalog, config.constants);
  evaluate_ces(out.covering.ces, batch, est);
  out.groups = generate_kp_items(out.covering.ces, config.max_group_items);
  out.instance = to_instance(out.groups, config.budget_bytes);
  out.selection = solve(out.instance, config.units);
  out.selected = selected_ces(out.selection, out.groups);
  out.optimized = rewrite_queries(batch, out.covering.ces, out.selected, catalog, config.rewrite);
  return out;
}

nlohmann::json pipeline_to_json(const PipelineResult& result) {
  using nlohmann::json;
  json selected = json::array();
  for (size_t i : result.selected) selected.push_back(result.covering.ces[i].id);
  json skipped = json::array();
  for (const auto& s : result.covering.skipped) {
    skipped.push_back({{"fingerprint", s.fingerprint.hex()}, {"reason", s.reason}});
  }
  return {{"se_count", result.ses.size()},
          {"ce_count", result.covering.ces.size()},
          {"skipped_ses", skipped},
          {"candidates", candidates_to_json(result.covering.ces, result.groups)},
          {"capacity", result.instance.capacity},
          {"selection", selection_to_json(result.selection)},
          {"selected_ces", selected},
          {"selected_weight", result.selected_weight()},
          {"estimated_savings", result.selection.total_value}};
}

}  // namespace mqo
