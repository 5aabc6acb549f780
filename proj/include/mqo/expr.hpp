#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqo/schema.hpp"
#include "mqo/types.hpp"

namespace mqo {

enum class CompareOp { Eq, Ne, Lt, Gt, Le, Ge };

std::string_view to_string(CompareOp op);
CompareOp compare_op_from_string(std::string_view text);
/// The operator obtained by swapping operands (`a < b` == `b > a`).
CompareOp mirror(CompareOp op);
bool apply_compare(CompareOp op, int three_way);

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct ColumnRef {
  std::string name;
};
struct Literal {
  Value value;
};
struct Compare {
  CompareOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct And {
  std::vector<ExprPtr> children;
};
struct Or {
  std::vector<ExprPtr> children;
};
struct Not {
  ExprPtr child;
};

/// Immutable scalar expression node. Boolean structure (And/Or/Not) sits on
/// top of comparisons between column references and typed literals.
class Expr {
 public:
  using Node = std::variant<ColumnRef, Literal, Compare, And, Or, Not>;

  explicit Expr(Node node) : node_(std::move(node)) {}

  const Node& node() const { return node_; }

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node_);
  }
  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(node_);
  }

 private:
  Node node_;
};

ExprPtr col(std::string name);
ExprPtr lit(Value value);
ExprPtr compare(CompareOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr conjunction(std::vector<ExprPtr> children);
ExprPtr disjunction(std::vector<ExprPtr> children);
ExprPtr negate(ExprPtr child);

/// Prefix-notation rendering of the tree as given (no normalization).
/// `= col:a i:1`, `and(= col:a i:1, > col:b i:2)`.
std::string serialize(const ExprPtr& expr);

/// Flattened, sorted, duplicate-free form. Single-child And/Or collapse to the
/// child; `lit op col` is flipped to `col op' lit`; operands of `=` and `!=`
/// are ordered by their serialization; double negation is removed.
ExprPtr canonicalize(const ExprPtr& expr);

/// Predicate equality: equality of canonical serializations.
bool equivalent(const ExprPtr& a, const ExprPtr& b);

/// Conjuncts of a canonical And, or the expression itself.
std::vector<ExprPtr> split_conjuncts(const ExprPtr& expr);

std::set<std::string> referenced_columns(const ExprPtr& expr);
void collect_columns(const ExprPtr& expr, std::set<std::string>& out);

ExprPtr rename_columns(const ExprPtr& expr, const std::map<std::string, std::string>& renames);

/// Type checks against an input schema. Throws UnknownColumn / TypeMismatch.
/// Returns the result type for scalar operands; boolean nodes report Int64.
DataType check_expr(const ExprPtr& expr, const Schema& input);

nlohmann::json expr_to_json(const ExprPtr& expr);
ExprPtr expr_from_json(const nlohmann::json& j);

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

}  // namespace mqo
