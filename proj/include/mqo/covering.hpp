#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqo/batch.hpp"
#include "mqo/sharing.hpp"

namespace mqo {

/// How a target sub-tree is recovered from the output of a covering plan:
/// keep the rows satisfying `predicate` (null = all rows) and read target
/// column `n` from covering column `columns[n]`.
struct Derivation {
  ExprPtr predicate;
  std::map<std::string, std::string> columns;

  std::string source_of(const std::string& name) const;
};

/// Checks whether `target` can be computed from `cover`'s output and returns
/// the recipe. Both trees must have equal fingerprints; `cover` must admit
/// every target row and keep every column the recipe needs. A cover filter
/// admits a target filter when each target disjunct contains all conjuncts of
/// some cover disjunct.
std::optional<Derivation> derive(const PlanPtr& cover, const PlanPtr& target);

/// Project[target names](Filter[predicate](CacheRead(cache_id))); the filter
/// is omitted when the derivation keeps every row.
PlanPtr extraction_plan(const Derivation& d, const std::string& cache_id, const Schema& target_schema);

struct CostBreakdown {
  double se_cost = 0;     // sum of member execution costs
  double exec_cost = 0;   // execution cost of the covering plan
  double write_cost = 0;
  double read_cost = 0;   // retrieval charged once per member
  double ce_cost = 0;     // exec + write + read
  double out_rows = 0;
  double out_row_size = 0;
};

struct CoveringExpr {
  std::string id;
  SimilarSubexpr source;
  PlanPtr plan;
  double value = 0;
  double weight = 1;
  CostBreakdown cost;
};

struct SkippedSe {
  Fingerprint fingerprint;
  std::string reason;
};

struct CoveringSet {
  std::vector<CoveringExpr> ces;  // ordered largest first, ids ce1, ce2, ...
  std::vector<SkippedSe> skipped;
};

/// Builds the covering plan of one SE: filters become the OR of the member
/// predicates, projections the union of member columns plus the columns of
/// member predicates that differ from the cover. Throws NotCoverable when no
/// single plan can serve every member (e.g. differing filters under an
/// aggregate) and InternalShapeMismatch when members are not aligned.
PlanPtr build_covering_plan(const SimilarSubexpr& se, const QueryBatch& batch, const Catalog& catalog);

/// Covers every SE; uncoverable ones are reported in `skipped`. CEs are
/// ordered by node count, then member count (both descending), then
/// fingerprint.
CoveringSet build_ces(const std::vector<SimilarSubexpr>& ses, const QueryBatch& batch, const Catalog& catalog);

/// CEs (other than `ce`) with a member strictly inside one of `ce`'s members.
std::vector<size_t> find_descendants(size_t ce, const std::vector<CoveringExpr>& all);

/// No member of one equals or contains a member of the other.
bool disjoint(const CoveringExpr& a, const CoveringExpr& b);

struct KnapsackItem {
  std::vector<size_t> members;  // indices into the CE list
  double value = 0;
  double weight = 0;
};

struct KnapsackGroup {
  size_t group_id = 0;
  std::vector<KnapsackItem> items;
};

inline constexpr size_t kMaxGroupItems = 64;

/// Groups of mutually exclusive options: the largest remaining CE, each of its
/// remaining descendants alone, and every disjoint compound of two or more
/// descendants. Oversized groups are thinned (dominated items first, then by
/// value density) to `max_items`.
std::vector<KnapsackGroup> generate_kp_items(const std::vector<CoveringExpr>& ces,
                                             size_t max_items = kMaxGroupItems);

nlohmann::json candidates_to_json(const std::vector<CoveringExpr>& ces, const std::vector<KnapsackGroup>& groups);

}  // namespace mqo
