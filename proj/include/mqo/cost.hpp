#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqo/batch.hpp"
#include "mqo/covering.hpp"
#include "mqo/stats.hpp"

namespace mqo {

struct CostConstants {
  double cpu_per_tuple = 1.0;
  double disk_read_per_byte = 0.5;
  double net_per_byte = 1.0;
  double cache_write_per_byte = 0.25;
  double cache_read_per_byte = 0.05;

  /// Throws InvalidArgument for non-positive constants, or when reading the
  /// cache is not cheaper than reading the disk unless `allow_slow_cache`.
  void validate(bool allow_slow_cache = false) const;
};

nlohmann::json constants_to_json(const CostConstants& c);
/// Missing keys keep their defaults.
CostConstants constants_from_json(const nlohmann::json& j);

struct CostEstimate {
  double exec_cost = 0;
  double out_rows = 0;
  double out_row_size = 0;

  double out_bytes() const { return out_rows * out_row_size; }
};

/// Statistics of one column flowing through a plan.
struct ColumnEstimate {
  const ColumnStats* base = nullptr;  // histogram source, if still meaningful
  DataType type = DataType::Int64;
  double distinct = 1;
  double width = 8;
};

struct NodeEstimate {
  CostEstimate cost;
  std::map<std::string, ColumnEstimate> columns;
  std::vector<std::string> order;
};

/// Bottom-up cardinality and cost estimation over table statistics.
class Estimator {
 public:
  Estimator(const StatsCatalog& stats, const Catalog& catalog, CostConstants constants);

  CostEstimate estimate(const PlanPtr& plan) const;
  NodeEstimate estimate_node(const PlanPtr& plan) const;

  /// Selectivity of a predicate over a node's columns, in [0, 1].
  double selectivity(const ExprPtr& predicate, const NodeEstimate& input) const;

  /// Makes CacheRead(cache_id) estimable (rows, size, column statistics of
  /// the plan that fills it).
  void register_cache(const std::string& cache_id, const PlanPtr& producer);

  const CostConstants& constants() const { return constants_; }
  const Catalog& catalog() const { return catalog_; }

 private:
  const StatsCatalog& stats_;
  Catalog catalog_;
  CostConstants constants_;
  std::map<std::string, NodeEstimate> caches_;
};

/// Sum of member execution costs.
double se_cost(const SimilarSubexpr& se, const QueryBatch& batch, const Estimator& est);

/// Execution of the covering plan, plus writing its output once and reading
/// it once per member.
double ce_cost(double exec_cost, double bytes, size_t m, const CostConstants& c);

/// Fills cost, value (saved cost, may be negative) and weight (estimated
/// output bytes, at least 1) of every CE.
void evaluate_ces(std::vector<CoveringExpr>& ces, const QueryBatch& batch, const Estimator& est);

}  // namespace mqo
