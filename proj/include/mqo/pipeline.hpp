#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqo/batch.hpp"
#include "mqo/cost.hpp"
#include "mqo/covering.hpp"
#include "mqo/mckp.hpp"
#include "mqo/rewrite.hpp"
#include "mqo/sharing.hpp"
#include "mqo/stats.hpp"

namespace mqo {

struct PipelineConfig {
  uint64_t budget_bytes = 0;
  size_t k = 2;
  uint64_t units = kDefaultUnits;
  size_t max_group_items = kMaxGroupItems;
  CostConstants constants;
  RewriteOptions rewrite;
};

struct PipelineResult {
  std::vector<SimilarSubexpr> ses;
  CoveringSet covering;  // CEs carry value, weight and cost breakdown
  std::vector<KnapsackGroup> groups;
  KnapsackInstance instance;
  Selection selection;
  std::vector<size_t> selected;  // CE indices
  OptimizedBatch optimized;

  /// Sum of the rounded weights of the selected CEs.
  uint64_t selected_weight() const;
};

/// Identify SEs, build and price CEs, solve the knapsack, rewrite.
PipelineResult optimize_batch(const QueryBatch& batch, const Catalog& catalog, const StatsCatalog& stats,
                              const PipelineConfig& config);

nlohmann::json pipeline_to_json(const PipelineResult& result);

}  // namespace mqo
