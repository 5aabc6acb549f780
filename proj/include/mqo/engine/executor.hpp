#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqo/cost.hpp"
#include "mqo/engine/relation.hpp"
#include "mqo/plan.hpp"

namespace mqo::engine {

/// Base tables by name.
class Database {
 public:
  void add(const std::string& name, Relation relation);
  /// Throws UnknownTable.
  const Relation& table(const std::string& name) const;
  bool contains(const std::string& name) const { return tables_.count(name) > 0; }
  const std::map<std::string, Relation>& tables() const { return tables_; }
  Catalog catalog() const;
  uint64_t byte_size() const;

 private:
  std::map<std::string, Relation> tables_;
};

struct SpillWarning {
  std::string cache_id;
  uint64_t bytes = 0;
  uint64_t used_after = 0;
  uint64_t budget = 0;
};

/// Write-once store of cached relations. Going over the budget is recorded
/// as a spill warning; the entry is still kept.
class CacheStore {
 public:
  explicit CacheStore(uint64_t budget = std::numeric_limits<uint64_t>::max()) : budget_(budget) {}

  /// Throws CacheRewrite if `cache_id` was already written.
  void put(const std::string& cache_id, const Relation& relation);
  /// Throws MissingCacheEntry.
  const Relation& get(const std::string& cache_id) const;
  bool contains(const std::string& cache_id) const { return entries_.count(cache_id) > 0; }

  uint64_t budget() const { return budget_; }
  uint64_t used_bytes() const { return used_; }
  uint64_t entry_bytes(const std::string& cache_id) const;
  const std::vector<SpillWarning>& spill_warnings() const { return spills_; }
  std::vector<std::string> ids() const;

 private:
  struct Entry {
    Relation relation;
    uint64_t bytes = 0;
  };
  uint64_t budget_;
  uint64_t used_ = 0;
  std::map<std::string, Entry> entries_;
  std::vector<SpillWarning> spills_;
};

struct ExecMetrics {
  uint64_t base_tuples_scanned = 0;
  uint64_t base_bytes_scanned = 0;
  uint64_t tuples_processed = 0;  // operator input rows (plus join output rows)
  uint64_t join_input_bytes = 0;
  uint64_t cache_bytes_written = 0;
  uint64_t cache_bytes_read = 0;
  uint64_t spill_warnings = 0;
  double wall_ms = 0;

  ExecMetrics& operator+=(const ExecMetrics& other);

  /// Cost-model weighted sum of the counters; wall time is not included.
  double proxy_cost(const CostConstants& c) const;
};

nlohmann::json metrics_to_json(const ExecMetrics& m, const CostConstants& c);

struct ExecOptions {
  /// Every base table is cached at its first scan and read from the cache
  /// afterwards (cache ids "fc:<table>").
  bool cache_base_tables = false;
};

struct ExecResult {
  Relation relation;
  ExecMetrics metrics;
};

/// Evaluates a plan. CacheWrite stores its input in `cache` and passes it
/// through; CacheRead fails with MissingCacheEntry for unknown ids.
ExecResult execute(const PlanPtr& plan, const Database& db, CacheStore& cache, const ExecOptions& options = {});

/// Row mask of a predicate over a relation.
std::vector<uint8_t> evaluate_predicate(const ExprPtr& predicate, const Relation& input);

}  // namespace mqo::engine
