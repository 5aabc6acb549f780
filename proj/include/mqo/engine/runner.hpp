#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqo/batch.hpp"
#include "mqo/engine/executor.hpp"
#include "mqo/rewrite.hpp"

namespace mqo::engine {

enum class Mode { Baseline, FullCache, WorkSharing };

std::string_view to_string(Mode mode);
/// "baseline", "fc" or "ws".
std::optional<Mode> mode_from_string(std::string_view text);

struct QueryRun {
  std::string query_id;
  Relation result;
  ExecMetrics metrics;  // includes the cache plans this query triggered
};

struct BatchRun {
  Mode mode = Mode::Baseline;
  std::vector<QueryRun> queries;
  ExecMetrics total;
  uint64_t cache_bytes_used = 0;
  std::vector<SpillWarning> spills;
  std::vector<std::string> cache_writes;  // in execution order

  const QueryRun& query(const std::string& query_id) const;
};

inline constexpr uint64_t kUnlimitedBudget = std::numeric_limits<uint64_t>::max();

/// Baseline runs the queries as given; FullCache caches each base table at
/// its first scan.
BatchRun run_batch(const QueryBatch& batch, const Database& db, Mode mode, uint64_t budget = kUnlimitedBudget);

/// Runs the schedule of an optimized batch. Each cache plan is charged to the
/// query that triggers it.
BatchRun run_optimized(const OptimizedBatch& optimized, const Database& db, uint64_t budget = kUnlimitedBudget);

/// Result equality for one query: multisets must match; when the plan
/// orders its output (Sort, optionally under Limit), the sort keys must also
/// appear in the same sequence and rows may only differ within runs of equal
/// keys (the last run, under a Limit, only by count). Float64 values are
/// compared with a relative tolerance of 1e-9, since rewritten plans may sum
/// in a different order.
bool results_match(const PlanPtr& plan, const Relation& expected, const Relation& actual);

nlohmann::json batch_run_to_json(const BatchRun& run, const CostConstants& constants);

}  // namespace mqo::engine
