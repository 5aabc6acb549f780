#include "mqo/plan.hpp"

#include "mqo/error.hpp"

namespace mqo {

std::string_view to_string(AggFunc func) {
  switch (func) {
    case AggFunc::Sum: return "sum";
    case AggFunc::Count: return "count";
    case AggFunc::Min: return "min";
    case AggFunc::Max: return "max";
  }
  return "?";
}

AggFunc agg_func_from_string(std::string_view text) {
  if (text == "sum") return AggFunc::Sum;
  if (text == "count") return AggFunc::Count;
  if (text == "min") return AggFunc::Min;
  if (text == "max") return AggFunc::Max;
  throw Error(ErrorCode::ParseError, "unknown aggregate '" + std::string(text) + "'");
}

std::string_view to_string(OpKind kind) {
  static constexpr std::string_view names[] = {"Scan",  "Filter", "Project",   "Join",
                                               "CartesianProduct", "Union", "Aggregate",
                                               "Sort",  "Limit",  "CacheRead", "CacheWrite"};
  return names[static_cast<size_t>(kind)];
}

size_t arity(OpKind kind) {
  switch (kind) {
    case OpKind::Scan:
    case OpKind::CacheRead: return 0;
    case OpKind::Join:
    case OpKind::CartesianProduct:
    case OpKind::Union: return 2;
    default: return 1;
  }
}

PlanNode::PlanNode(Op op, std::vector<PlanPtr> children)
    : op_(std::move(op)), children_(std::move(children)) {
  if (children_.size() != arity(kind())) {
    throw Error(ErrorCode::InvalidPlan, std::string(to_string(kind())) + " expects " +
                                            std::to_string(arity(kind())) + " children, got " +
                                            std::to_string(children_.size()));
  }
  for (const auto& c : children_) {
    if (!c) throw Error(ErrorCode::InvalidPlan, "null child");
  }
}

PlanPtr PlanNode::with_children(std::vector<PlanPtr> children) const {
  return std::make_shared<PlanNode>(op_, std::move(children));
}

PlanPtr make_scan(std::string table) {
  return std::make_shared<PlanNode>(ScanOp{std::move(table)}, std::vector<PlanPtr>{});
}
PlanPtr make_filter(ExprPtr predicate, PlanPtr child) {
  return std::make_shared<PlanNode>(FilterOp{std::move(predicate)}, std::vector<PlanPtr>{std::move(child)});
}
PlanPtr make_project(std::vector<ProjectItem> items, PlanPtr child) {
  return std::make_shared<PlanNode>(ProjectOp{std::move(items)}, std::vector<PlanPtr>{std::move(child)});
}
PlanPtr make_project(const std::vector<std::string>& columns, PlanPtr child) {
  std::vector<ProjectItem> items;
  items.reserve(columns.size());
  for (const auto& c : columns) items.push_back({c, ""});
  return make_project(std::move(items), std::move(child));
}
PlanPtr make_join(ExprPtr condition, PlanPtr left, PlanPtr right) {
  return std::make_shared<PlanNode>(JoinOp{std::move(condition)},
                                    std::vector<PlanPtr>{std::move(left), std::move(right)});
}
PlanPtr make_cartesian(PlanPtr left, PlanPtr right) {
  return std::make_shared<PlanNode>(CartesianProductOp{},
                                    std::vector<PlanPtr>{std::move(left), std::move(right)});
}
PlanPtr make_union(PlanPtr left, PlanPtr right) {
  return std::make_shared<PlanNode>(UnionOp{}, std::vector<PlanPtr>{std::move(left), std::move(right)});
}
PlanPtr make_aggregate(std::vector<std::string> group_by, std::vector<AggregateSpec> aggs, PlanPtr child) {
  return std::make_shared<PlanNode>(AggregateOp{std::move(group_by), std::move(aggs)},
                                    std::vector<PlanPtr>{std::move(child)});
}
PlanPtr make_sort(std::vector<SortKey> keys, PlanPtr child) {
  return std::make_shared<PlanNode>(SortOp{std::move(keys)}, std::vector<PlanPtr>{std::move(child)});
}
PlanPtr make_limit(uint64_t count, PlanPtr child) {
  return std::make_shared<PlanNode>(LimitOp{count}, std::vector<PlanPtr>{std::move(child)});
}
PlanPtr make_cache_read(std::string cache_id) {
  return std::make_shared<PlanNode>(CacheReadOp{std::move(cache_id)}, std::vector<PlanPtr>{});
}
PlanPtr make_cache_write(std::string cache_id, PlanPtr child) {
  return std::make_shared<PlanNode>(CacheWriteOp{std::move(cache_id)}, std::vector<PlanPtr>{std::move(child)});
}

// ---------------------------------------------------------------------------
// Paths

bool NodePath::is_prefix_of(const NodePath& other) const {
  if (steps.size() > other.steps.size()) return false;
  return std::equal(steps.begin(), steps.end(), other.steps.begin());
}

NodePath NodePath::child(size_t index) const {
  NodePath p = *this;
  p.steps.push_back(index);
  return p;
}

std::string NodePath::to_string() const {
  std::string out = "[";
  for (size_t i = 0; i < steps.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(steps[i]);
  }
  return out + "]";
}

PlanPtr subtree_at(const PlanPtr& root, const NodePath& path) {
  PlanPtr cur = root;
  for (size_t depth = 0; depth < path.steps.size(); ++depth) {
    size_t step = path.steps[depth];
    if (step >= cur->children().size()) {
      throw Error(ErrorCode::InvalidPath, "path " + path.to_string() + " leaves the plan at depth " +
                                              std::to_string(depth));
    }
    cur = cur->child(step);
  }
  return cur;
}

namespace {

PlanPtr replace_rec(const PlanPtr& node, const NodePath& path, size_t depth, PlanPtr replacement) {
  if (depth == path.steps.size()) return replacement;
  size_t step = path.steps[depth];
  if (step >= node->children().size()) {
    throw Error(ErrorCode::InvalidPath, "path " + path.to_string() + " leaves the plan");
  }
  std::vector<PlanPtr> children = node->children();
  children[step] = replace_rec(children[step], path, depth + 1, std::move(replacement));
  return node->with_children(std::move(children));
}

}  // namespace

PlanPtr replace_at(const PlanPtr& root, const NodePath& path, PlanPtr replacement) {
  return replace_rec(root, path, 0, std::move(replacement));
}

size_t node_count(const PlanPtr& root) {
  size_t n = 1;
  for (const auto& c : root->children()) n += node_count(c);
  return n;
}

bool structurally_equal(const PlanPtr& a, const PlanPtr& b) {
  if (a == b) return true;
  if (a->kind() != b->kind() || a->children().size() != b->children().size()) return false;
  if (canonical_attrs(*a) != canonical_attrs(*b)) return false;
  // canonical_attrs normalizes predicates; structural equality is literal.
  if (const auto* fa = a->get_if<FilterOp>()) {
    if (serialize(fa->predicate) != serialize(b->as<FilterOp>().predicate)) return false;
  }
  if (const auto* ja = a->get_if<JoinOp>()) {
    if (serialize(ja->condition) != serialize(b->as<JoinOp>().condition)) return false;
  }
  for (size_t i = 0; i < a->children().size(); ++i) {
    if (!structurally_equal(a->child(i), b->child(i))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Schema inference

namespace {

Schema concat(const Schema& left, const Schema& right) {
  std::vector<ColumnDef> cols = left.columns();
  cols.insert(cols.end(), right.columns().begin(), right.columns().end());
  return Schema(std::move(cols));
}

void check_join_condition(const ExprPtr& condition, const Schema& left, const Schema& right) {
  auto check_one = [&](const ExprPtr& e) {
    const auto* cmp = e->as<Compare>();
    if (cmp == nullptr || cmp->op != CompareOp::Eq || !cmp->lhs->is<ColumnRef>() ||
        !cmp->rhs->is<ColumnRef>()) {
      throw Error(ErrorCode::InvalidPlan, "join condition must be column equalities: " + serialize(condition));
    }
    const auto& a = cmp->lhs->as<ColumnRef>()->name;
    const auto& b = cmp->rhs->as<ColumnRef>()->name;
    std::optional<DataType> ta, tb;
    if (left.contains(a) && right.contains(b)) {
      ta = left[left.index_of(a)].type;
      tb = right[right.index_of(b)].type;
    } else if (left.contains(b) && right.contains(a)) {
      ta = left[left.index_of(b)].type;
      tb = right[right.index_of(a)].type;
    } else {
      if (!left.contains(a) && !right.contains(a)) throw Error(ErrorCode::UnknownColumn, "unknown join column '" + a + "'");
      if (!left.contains(b) && !right.contains(b)) throw Error(ErrorCode::UnknownColumn, "unknown join column '" + b + "'");
      throw Error(ErrorCode::InvalidPlan, "join equality must relate both inputs: " + serialize(e));
    }
    if (!comparable(*ta, *tb)) throw Error(ErrorCode::TypeMismatch, "join keys of incompatible types: " + serialize(e));
  };
  if (const auto* conj = condition->as<And>()) {
    for (const auto& c : conj->children) check_one(c);
  } else {
    check_one(condition);
  }
}

const Schema& infer_rec(const PlanPtr& node, const Catalog& catalog, SchemaAnnotation& out) {
  if (auto it = out.find(node.get()); it != out.end()) return it->second;
  std::vector<const Schema*> inputs;
  for (const auto& c : node->children()) inputs.push_back(&infer_rec(c, catalog, out));

  Schema result = std::visit(
      [&](const auto& op) -> Schema {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, ScanOp>) {
          return catalog.table(op.table);
        } else if constexpr (std::is_same_v<T, FilterOp>) {
          if (op.predicate->template is<ColumnRef>() || op.predicate->template is<Literal>()) {
            throw Error(ErrorCode::TypeMismatch, "filter predicate must be boolean");
          }
          check_expr(op.predicate, *inputs[0]);
          return *inputs[0];
        } else if constexpr (std::is_same_v<T, ProjectOp>) {
          if (op.items.empty()) throw Error(ErrorCode::InvalidPlan, "empty projection");
          std::vector<ColumnDef> cols;
          for (const auto& item : op.items) {
            cols.push_back({item.output_name(), (*inputs[0])[inputs[0]->index_of(item.column)].type});
          }
          return Schema(std::move(cols));
        } else if constexpr (std::is_same_v<T, JoinOp>) {
          check_join_condition(op.condition, *inputs[0], *inputs[1]);
          return concat(*inputs[0], *inputs[1]);
        } else if constexpr (std::is_same_v<T, CartesianProductOp>) {
          return concat(*inputs[0], *inputs[1]);
        } else if constexpr (std::is_same_v<T, UnionOp>) {
          if (!(*inputs[0] == *inputs[1])) {
            throw Error(ErrorCode::UnionSchemaMismatch,
                        inputs[0]->to_string() + " vs " + inputs[1]->to_string());
          }
          return *inputs[0];
        } else if constexpr (std::is_same_v<T, AggregateOp>) {
          const Schema& in = *inputs[0];
          if (op.group_by.empty() && op.aggregates.empty()) {
            throw Error(ErrorCode::InvalidPlan, "aggregate without groups or aggregates");
          }
          std::vector<ColumnDef> cols;
          for (const auto& g : op.group_by) cols.push_back({g, in[in.index_of(g)].type});
          for (const auto& a : op.aggregates) {
            if (a.condition) check_expr(a.condition, in);
            DataType t = DataType::Int64;
            if (a.func != AggFunc::Count) {
              t = in[in.index_of(a.column)].type;
              if (a.func == AggFunc::Sum && !is_numeric(t)) {
                throw Error(ErrorCode::TypeMismatch, "SUM over non-numeric column '" + a.column + "'");
              }
            } else if (!a.column.empty()) {
              in.index_of(a.column);
            }
            cols.push_back({a.name, t});
          }
          return Schema(std::move(cols));
        } else if constexpr (std::is_same_v<T, SortOp>) {
          if (op.keys.empty()) throw Error(ErrorCode::InvalidPlan, "sort without keys");
          for (const auto& k : op.keys) inputs[0]->index_of(k.column);
          return *inputs[0];
        } else if constexpr (std::is_same_v<T, LimitOp>) {
          return *inputs[0];
        } else if constexpr (std::is_same_v<T, CacheReadOp>) {
          return catalog.cache(op.cache_id);
        } else {
          return *inputs[0];
        }
      },
      node->op());
  return out.emplace(node.get(), std::move(result)).first->second;
}

}  // namespace

SchemaAnnotation infer_schema(const PlanPtr& root, const Catalog& catalog) {
  SchemaAnnotation out;
  infer_rec(root, catalog, out);
  return out;
}

Schema output_schema(const PlanPtr& root, const Catalog& catalog) {
  SchemaAnnotation out;
  return infer_rec(root, catalog, out);
}

// ---------------------------------------------------------------------------
// Attributes

namespace {

std::string render_items(const std::vector<ProjectItem>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i].column;
    if (!items[i].alias.empty()) out += " as " + items[i].alias;
  }
  return out;
}

std::string render_aggregate(const AggregateSpec& a) {
  std::string out = std::string(to_string(a.func)) + "(" + (a.column.empty() ? "*" : a.column) + ")";
  if (a.condition) out += "[" + serialize(canonicalize(a.condition)) + "]";
  return out + "->" + a.name;
}

}  // namespace

std::string canonical_attrs(const PlanNode& node) {
  return std::visit(
      [](const auto& op) -> std::string {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, ScanOp>) {
          return op.table;
        } else if constexpr (std::is_same_v<T, FilterOp>) {
          return serialize(canonicalize(op.predicate));
        } else if constexpr (std::is_same_v<T, ProjectOp>) {
          return render_items(op.items);
        } else if constexpr (std::is_same_v<T, JoinOp>) {
          return serialize(canonicalize(op.condition));
        } else if constexpr (std::is_same_v<T, AggregateOp>) {
          std::string out = "group(";
          for (size_t i = 0; i < op.group_by.size(); ++i) out += (i ? "," : "") + op.group_by[i];
          out += ") aggs(";
          for (size_t i = 0; i < op.aggregates.size(); ++i) {
            out += (i ? ", " : "") + render_aggregate(op.aggregates[i]);
          }
          return out + ")";
        } else if constexpr (std::is_same_v<T, SortOp>) {
          std::string out;
          for (size_t i = 0; i < op.keys.size(); ++i) {
            out += (i ? ", " : "") + op.keys[i].column + (op.keys[i].descending ? " desc" : " asc");
          }
          return out;
        } else if constexpr (std::is_same_v<T, LimitOp>) {
          return std::to_string(op.count);
        } else if constexpr (std::is_same_v<T, CacheReadOp> || std::is_same_v<T, CacheWriteOp>) {
          return op.cache_id;
        } else {
          return "";
        }
      },
      node.op());
}

std::set<std::string> columns_used(const PlanNode& node) {
  std::set<std::string> out;
  std::visit(
      [&](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, FilterOp>) {
          collect_columns(op.predicate, out);
        } else if constexpr (std::is_same_v<T, ProjectOp>) {
          for (const auto& item : op.items) out.insert(item.column);
        } else if constexpr (std::is_same_v<T, JoinOp>) {
          collect_columns(op.condition, out);
        } else if constexpr (std::is_same_v<T, AggregateOp>) {
          out.insert(op.group_by.begin(), op.group_by.end());
          for (const auto& a : op.aggregates) {
            if (!a.column.empty()) out.insert(a.column);
            if (a.condition) collect_columns(a.condition, out);
          }
        } else if constexpr (std::is_same_v<T, SortOp>) {
          for (const auto& k : op.keys) out.insert(k.column);
        }
      },
      node.op());
  return out;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json plan_to_json(const PlanPtr& root) {
  using nlohmann::json;
  json attrs = std::visit(
      [](const auto& op) -> json {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, ScanOp>) {
          return json{{"table", op.table}};
        } else if constexpr (std::is_same_v<T, FilterOp>) {
          return json{{"predicate", expr_to_json(op.predicate)}};
        } else if constexpr (std::is_same_v<T, ProjectOp>) {
          json cols = json::array();
          for (const auto& item : op.items) {
            if (item.alias.empty()) {
              cols.push_back(item.column);
            } else {
              cols.push_back(json{{"column", item.column}, {"as", item.alias}});
            }
          }
          return json{{"columns", cols}};
        } else if constexpr (std::is_same_v<T, JoinOp>) {
          return json{{"kind", "inner"}, {"condition", expr_to_json(op.condition)}};
        } else if constexpr (std::is_same_v<T, AggregateOp>) {
          json aggs = json::array();
          for (const auto& a : op.aggregates) {
            json spec{{"func", std::string(to_string(a.func))}, {"column", a.column}, {"name", a.name}};
            if (a.condition) spec["condition"] = expr_to_json(a.condition);
            aggs.push_back(spec);
          }
          return json{{"group_by", op.group_by}, {"aggregates", aggs}};
        } else if constexpr (std::is_same_v<T, SortOp>) {
          json keys = json::array();
          for (const auto& k : op.keys) keys.push_back(json{{"column", k.column}, {"desc", k.descending}});
          return json{{"keys", keys}};
        } else if constexpr (std::is_same_v<T, LimitOp>) {
          return json{{"n", op.count}};
        } else if constexpr (std::is_same_v<T, CacheReadOp> || std::is_same_v<T, CacheWriteOp>) {
          return json{{"cache_id", op.cache_id}};
        } else {
          return json::object();
        }
      },
      root->op());
  json children = json::array();
  for (const auto& c : root->children()) children.push_back(plan_to_json(c));
  return json{{"op", std::string(to_string(root->kind()))}, {"attrs", attrs}, {"children", children}};
}

PlanPtr plan_from_json(const nlohmann::json& j) {
  const std::string op = j.at("op").get<std::string>();
  const auto& attrs = j.at("attrs");
  std::vector<PlanPtr> children;
  for (const auto& c : j.at("children")) children.push_back(plan_from_json(c));
  auto make = [&](PlanNode::Op node_op) { return std::make_shared<PlanNode>(std::move(node_op), std::move(children)); };

  if (op == "Scan") return make(ScanOp{attrs.at("table").get<std::string>()});
  if (op == "Filter") return make(FilterOp{expr_from_json(attrs.at("predicate"))});
  if (op == "Project") {
    std::vector<ProjectItem> items;
    for (const auto& c : attrs.at("columns")) {
      if (c.is_string()) {
        items.push_back({c.get<std::string>(), ""});
      } else {
        items.push_back({c.at("column").get<std::string>(), c.at("as").get<std::string>()});
      }
    }
    return make(ProjectOp{std::move(items)});
  }
  if (op == "Join") return make(JoinOp{expr_from_json(attrs.at("condition"))});
  if (op == "CartesianProduct") return make(CartesianProductOp{});
  if (op == "Union") return make(UnionOp{});
  if (op == "Aggregate") {
    AggregateOp agg;
    agg.group_by = attrs.at("group_by").get<std::vector<std::string>>();
    for (const auto& a : attrs.at("aggregates")) {
      AggregateSpec spec{agg_func_from_string(a.at("func").get<std::string>()),
                         a.at("column").get<std::string>(), nullptr, a.at("name").get<std::string>()};
      if (a.contains("condition")) spec.condition = expr_from_json(a.at("condition"));
      agg.aggregates.push_back(std::move(spec));
    }
    return make(std::move(agg));
  }
  if (op == "Sort") {
    SortOp sort;
    for (const auto& k : attrs.at("keys")) sort.keys.push_back({k.at("column").get<std::string>(), k.at("desc").get<bool>()});
    return make(std::move(sort));
  }
  if (op == "Limit") return make(LimitOp{attrs.at("n").get<uint64_t>()});
  if (op == "CacheRead") return make(CacheReadOp{attrs.at("cache_id").get<std::string>()});
  if (op == "CacheWrite") return make(CacheWriteOp{attrs.at("cache_id").get<std::string>()});
  throw Error(ErrorCode::ParseError, "unknown operator '" + op + "'");
}

nlohmann::json logical_plan_to_json(const LogicalPlan& plan) {
  return nlohmann::json{{"query_id", plan.query_id}, {"root", plan_to_json(plan.root)}};
}

LogicalPlan logical_plan_from_json(const nlohmann::json& j) {
  return LogicalPlan{j.at("query_id").get<std::string>(), plan_from_json(j.at("root"))};
}

std::string plan_to_string(const PlanPtr& root) {
  std::string out(to_string(root->kind()));
  std::string attrs = canonical_attrs(*root);
  if (!attrs.empty()) out += "[" + attrs + "]";
  if (root->children().empty()) return out;
  out += "(";
  for (size_t i = 0; i < root->children().size(); ++i) {
    if (i) out += ", ";
    out += plan_to_string(root->child(i));
  }
  return out + ")";
}

}  // namespace mqo
