#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqo/expr.hpp"
#include "mqo/schema.hpp"

namespace mqo {

struct ProjectItem {
  std::string column;
  std::string alias;  // empty: keep the source name

  const std::string& output_name() const { return alias.empty() ? column : alias; }
  bool operator==(const ProjectItem&) const = default;
};

enum class AggFunc { Sum, Count, Min, Max };
std::string_view to_string(AggFunc func);
AggFunc agg_func_from_string(std::string_view text);

struct AggregateSpec {
  AggFunc func;
  std::string column;  // empty for COUNT(*)
  ExprPtr condition;   // only rows satisfying it contribute (lowered CASE WHEN)
  std::string name;    // output column name
};

struct SortKey {
  std::string column;
  bool descending = false;
  bool operator==(const SortKey&) const = default;
};

struct ScanOp {
  std::string table;
};
struct FilterOp {
  ExprPtr predicate;
};
struct ProjectOp {
  std::vector<ProjectItem> items;
};
struct JoinOp {
  ExprPtr condition;  // conjunction of column equalities, one side per child
};
struct CartesianProductOp {};
struct UnionOp {};
struct AggregateOp {
  std::vector<std::string> group_by;
  std::vector<AggregateSpec> aggregates;
};
struct SortOp {
  std::vector<SortKey> keys;
};
struct LimitOp {
  uint64_t count = 0;
};
struct CacheReadOp {
  std::string cache_id;
};
struct CacheWriteOp {
  std::string cache_id;
};

enum class OpKind {
  Scan,
  Filter,
  Project,
  Join,
  CartesianProduct,
  Union,
  Aggregate,
  Sort,
  Limit,
  CacheRead,
  CacheWrite,
};
std::string_view to_string(OpKind kind);

class PlanNode;
using PlanPtr = std::shared_ptr<const PlanNode>;

/// Immutable relational operator with its inputs. Nodes are values: rewriting
/// produces new nodes and may reuse untouched sub-trees.
class PlanNode {
 public:
  using Op = std::variant<ScanOp, FilterOp, ProjectOp, JoinOp, CartesianProductOp, UnionOp,
                          AggregateOp, SortOp, LimitOp, CacheReadOp, CacheWriteOp>;

  PlanNode(Op op, std::vector<PlanPtr> children);

  const Op& op() const { return op_; }
  OpKind kind() const { return static_cast<OpKind>(op_.index()); }
  const std::vector<PlanPtr>& children() const { return children_; }
  const PlanPtr& child(size_t i = 0) const { return children_.at(i); }

  template <typename T>
  const T& as() const {
    return std::get<T>(op_);
  }
  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&op_);
  }

  /// Same operator with different inputs.
  PlanPtr with_children(std::vector<PlanPtr> children) const;

 private:
  Op op_;
  std::vector<PlanPtr> children_;
};

size_t arity(OpKind kind);

PlanPtr make_scan(std::string table);
PlanPtr make_filter(ExprPtr predicate, PlanPtr child);
PlanPtr make_project(std::vector<ProjectItem> items, PlanPtr child);
PlanPtr make_project(const std::vector<std::string>& columns, PlanPtr child);
PlanPtr make_join(ExprPtr condition, PlanPtr left, PlanPtr right);
PlanPtr make_cartesian(PlanPtr left, PlanPtr right);
PlanPtr make_union(PlanPtr left, PlanPtr right);
PlanPtr make_aggregate(std::vector<std::string> group_by, std::vector<AggregateSpec> aggs,
                       PlanPtr child);
PlanPtr make_sort(std::vector<SortKey> keys, PlanPtr child);
PlanPtr make_limit(uint64_t count, PlanPtr child);
PlanPtr make_cache_read(std::string cache_id);
PlanPtr make_cache_write(std::string cache_id, PlanPtr child);

struct LogicalPlan {
  std::string query_id;
  PlanPtr root;
};

/// Child indices from a root.
struct NodePath {
  std::vector<size_t> steps;

  bool is_prefix_of(const NodePath& other) const;
  bool is_proper_prefix_of(const NodePath& other) const {
    return steps.size() < other.steps.size() && is_prefix_of(other);
  }
  NodePath child(size_t index) const;
  std::string to_string() const;

  auto operator<=>(const NodePath&) const = default;
};

PlanPtr subtree_at(const PlanPtr& root, const NodePath& path);
/// Returns a copy of `root` with the sub-tree at `path` replaced.
PlanPtr replace_at(const PlanPtr& root, const NodePath& path, PlanPtr replacement);

size_t node_count(const PlanPtr& root);
bool structurally_equal(const PlanPtr& a, const PlanPtr& b);

/// Output schema of every node, keyed by node identity.
using SchemaAnnotation = std::unordered_map<const PlanNode*, Schema>;

SchemaAnnotation infer_schema(const PlanPtr& root, const Catalog& catalog);
Schema output_schema(const PlanPtr& root, const Catalog& catalog);

/// Canonical attribute string of a node (empty for attribute-free operators).
std::string canonical_attrs(const PlanNode& node);

/// Columns a node reads from its input(s), excluding pass-through.
std::set<std::string> columns_used(const PlanNode& node);

nlohmann::json plan_to_json(const PlanPtr& root);
PlanPtr plan_from_json(const nlohmann::json& j);
nlohmann::json logical_plan_to_json(const LogicalPlan& plan);
LogicalPlan logical_plan_from_json(const nlohmann::json& j);

/// Single-line debugging rendering, e.g. `Project[a,b](Filter[> col:a i:3](Scan[t]))`.
std::string plan_to_string(const PlanPtr& root);

}  // namespace mqo
