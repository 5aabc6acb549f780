#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqo/batch.hpp"
#include "mqo/covering.hpp"
#include "mqo/mckp.hpp"

namespace mqo {

/// Plan that materializes one CE; the root is CacheWrite(cache_id).
struct CachePlan {
  std::string cache_id;
  size_t ce_index = 0;
  PlanPtr plan;
  double estimated_bytes = 0;
  std::vector<std::string> depends_on;  // caches read by `plan`
};

/// One replaced sub-tree of a consumer query.
struct Consumer {
  std::string query_id;
  NodePath path;
  std::string cache_id;
  PlanPtr extraction;
};

struct OptimizedBatch {
  std::vector<CachePlan> cache_plans;  // dependencies precede dependents
  QueryBatch queries;                  // rewritten, in input order
  std::vector<Consumer> consumers;
  Catalog catalog;                     // input catalog plus cache schemas

  const CachePlan& cache_plan(const std::string& cache_id) const;
};

struct RewriteOptions {
  /// Test hook: duplicate every extraction's rows so results differ.
  bool corrupt_extraction = false;
};

std::string cache_id_for(const CoveringExpr& ce);

/// CE indices chosen by a selection; compound items contribute all members.
std::vector<size_t> selected_ces(const Selection& selection, const std::vector<KnapsackGroup>& groups);

/// One cache plan per selected CE. A covering plan containing a sub-tree that
/// another selected (smaller) CE can produce reads that CE's cache instead.
std::vector<CachePlan> build_cache_plans(const std::vector<size_t>& selected, const std::vector<CoveringExpr>& ces,
                                         const Catalog& catalog);

/// Replaces, in every query, the outermost members of selected CEs by
/// extraction plans over the cache. Cache plans nobody reads are dropped.
/// Throws SchemaMismatch if an extraction does not reproduce its member's
/// schema.
OptimizedBatch rewrite_queries(const QueryBatch& batch, const std::vector<CoveringExpr>& ces,
                               const std::vector<size_t>& selected, const Catalog& catalog,
                               const RewriteOptions& options = {});

struct ScheduleStep {
  enum class Kind { Cache, Query } kind;
  size_t index;  // into cache_plans or queries
};

/// Queries keep their order; each cache plan runs right before the first
/// step that reads it, after the caches it reads itself.
std::vector<ScheduleStep> schedule(const OptimizedBatch& optimized);

nlohmann::json optimized_to_json(const OptimizedBatch& optimized);

/// Cache ids read anywhere in a plan.
std::vector<std::string> cache_reads(const PlanPtr& plan);

}  // namespace mqo
