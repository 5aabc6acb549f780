#include "mqo/sql/optimizer.hpp"

#include <algorithm>
#include <optional>

namespace mqo::sql {

namespace {

using Columns = std::set<std::string>;

bool subset_of(const Columns& cols, const Schema& schema) {
  return std::all_of(cols.begin(), cols.end(), [&](const auto& c) { return schema.contains(c); });
}

PlanPtr wrap_filter(std::vector<ExprPtr> conjuncts, PlanPtr child) {
  if (conjuncts.empty()) return child;
  return make_filter(canonicalize(conjunction(std::move(conjuncts))), std::move(child));
}

PlanPtr place(const PlanPtr& node, std::vector<ExprPtr> pending, const Catalog& catalog) {
  switch (node->kind()) {
    case OpKind::Filter: {
      for (auto& c : split_conjuncts(canonicalize(node->as<FilterOp>().predicate))) pending.push_back(c);
      return place(node->child(), std::move(pending), catalog);
    }
    case OpKind::Project: {
      std::map<std::string, std::string> renames;
      for (const auto& item : node->as<ProjectOp>().items) {
        if (!item.alias.empty()) renames[item.alias] = item.column;
      }
      for (auto& c : pending) c = rename_columns(c, renames);
      return node->with_children({place(node->child(), std::move(pending), catalog)});
    }
    case OpKind::Sort:
      return node->with_children({place(node->child(), std::move(pending), catalog)});
    case OpKind::Join:
    case OpKind::CartesianProduct: {
      Schema left = output_schema(node->child(0), catalog);
      Schema right = output_schema(node->child(1), catalog);
      std::vector<ExprPtr> to_left, to_right, stay;
      for (auto& c : pending) {
        Columns cols = referenced_columns(c);
        if (subset_of(cols, left)) {
          to_left.push_back(c);
        } else if (subset_of(cols, right)) {
          to_right.push_back(c);
        } else {
          stay.push_back(c);
        }
      }
      PlanPtr joined = node->with_children({place(node->child(0), std::move(to_left), catalog),
                                            place(node->child(1), std::move(to_right), catalog)});
      return wrap_filter(std::move(stay), std::move(joined));
    }
    default: {
      std::vector<PlanPtr> children;
      for (const auto& c : node->children()) children.push_back(place(c, {}, catalog));
      PlanPtr rebuilt = children.empty() ? node : node->with_children(std::move(children));
      return wrap_filter(std::move(pending), std::move(rebuilt));
    }
  }
}

// Keeps the columns of `schema` named in `required`, in schema order; at
// least one column survives so the projection stays valid.
std::vector<std::string> kept_columns(const Schema& schema, const Columns& required) {
  std::vector<std::string> out;
  for (const auto& c : schema.columns()) {
    if (required.count(c.name)) out.push_back(c.name);
  }
  if (out.empty()) out.push_back(schema.columns().front().name);
  return out;
}

class Pruner {
 public:
  explicit Pruner(const Catalog& catalog) : catalog_(catalog) {}

  // Returns a plan whose output contains every required column (all columns
  // when `required` is empty-optional).
  PlanPtr prune(const PlanPtr& node, const std::optional<Columns>& required) {
    switch (node->kind()) {
      case OpKind::Project:
        return prune_project(node, required);
      case OpKind::Filter:
      case OpKind::Scan:
      case OpKind::Join:
      case OpKind::CartesianProduct:
        return prune_chain(node, required);
      case OpKind::Sort: {
        std::optional<Columns> below = required;
        if (below) {
          for (const auto& k : node->as<SortOp>().keys) below->insert(k.column);
        }
        return node->with_children({prune(node->child(), below)});
      }
      case OpKind::Limit:
        return node->with_children({prune(node->child(), required)});
      case OpKind::Aggregate:
        return node->with_children({prune(node->child(), columns_used(*node))});
      case OpKind::CacheRead:
        return node;
      default: {
        std::vector<PlanPtr> children;
        for (const auto& c : node->children()) children.push_back(prune(c, std::nullopt));
        return node->with_children(std::move(children));
      }
    }
  }

 private:
  PlanPtr prune_project(const PlanPtr& node, const std::optional<Columns>& required) {
    const auto& items = node->as<ProjectOp>().items;
    std::vector<ProjectItem> kept;
    for (const auto& item : items) {
      if (!required || required->count(item.output_name())) kept.push_back(item);
    }
    if (kept.empty()) kept.push_back(items.front());
    Columns below;
    for (const auto& item : kept) below.insert(item.column);
    PlanPtr child = prune(node->child(), below);
    Schema child_schema = output_schema(child, catalog_);
    bool identity = child_schema.size() == kept.size();
    for (size_t i = 0; identity && i < kept.size(); ++i) {
      identity = kept[i].alias.empty() && child_schema.columns()[i].name == kept[i].column;
    }
    if (identity) return child;
    return make_project(std::move(kept), std::move(child));
  }

  // A run of Filters directly above a Scan, Join or CartesianProduct is
  // treated as one unit; a Project trimming it to the required columns is
  // placed above the run.
  PlanPtr prune_chain(const PlanPtr& node, const std::optional<Columns>& required) {
    std::vector<PlanPtr> filters;
    PlanPtr base = node;
    while (base->kind() == OpKind::Filter) {
      filters.push_back(base);
      base = base->child();
    }
    bool anchored = base->kind() == OpKind::Scan || base->kind() == OpKind::Join ||
                    base->kind() == OpKind::CartesianProduct;
    if (!anchored) {
      // Filter over something else (aggregate, union, ...): pass requirements down.
      std::optional<Columns> below = required;
      if (below) {
        for (const auto& f : filters) collect_columns(f->as<FilterOp>().predicate, *below);
      }
      PlanPtr rebuilt = prune(base, below);
      for (auto it = filters.rbegin(); it != filters.rend(); ++it) rebuilt = (*it)->with_children({rebuilt});
      return rebuilt;
    }

    std::optional<Columns> inner = required;
    if (inner) {
      for (const auto& f : filters) collect_columns(f->as<FilterOp>().predicate, *inner);
    }
    PlanPtr rebuilt = prune_base(base, inner);
    for (auto it = filters.rbegin(); it != filters.rend(); ++it) rebuilt = (*it)->with_children({rebuilt});
    if (!required) return rebuilt;
    Schema schema = output_schema(rebuilt, catalog_);
    std::vector<std::string> keep = kept_columns(schema, *required);
    if (keep.size() == schema.size()) return rebuilt;
    return make_project(keep, std::move(rebuilt));
  }

  PlanPtr prune_base(const PlanPtr& base, const std::optional<Columns>& required) {
    if (base->kind() == OpKind::Scan) return base;
    Schema left = output_schema(base->child(0), catalog_);
    Schema right = output_schema(base->child(1), catalog_);
    std::optional<Columns> need_left, need_right;
    if (required) {
      Columns all = *required;
      if (const auto* join = base->get_if<JoinOp>()) collect_columns(join->condition, all);
      need_left.emplace();
      need_right.emplace();
      for (const auto& c : all) {
        if (left.contains(c)) need_left->insert(c);
        if (right.contains(c)) need_right->insert(c);
      }
    }
    return base->with_children({prune(base->child(0), need_left), prune(base->child(1), need_right)});
  }

  const Catalog& catalog_;
};

}  // namespace

PlanPtr push_down_filters(const PlanPtr& root, const Catalog& catalog) { return place(root, {}, catalog); }

PlanPtr prune_columns(const PlanPtr& root, const Catalog& catalog) {
  return Pruner(catalog).prune(root, std::nullopt);
}

PlanPtr collapse_adjacent(const PlanPtr& root) {
  std::vector<PlanPtr> children;
  for (const auto& c : root->children()) children.push_back(collapse_adjacent(c));
  PlanPtr node = children.empty() ? root : root->with_children(std::move(children));

  if (node->kind() == OpKind::Project && node->child()->kind() == OpKind::Project) {
    const auto& outer = node->as<ProjectOp>().items;
    const auto& inner = node->child()->as<ProjectOp>().items;
    std::vector<ProjectItem> composed;
    for (const auto& o : outer) {
      auto it = std::find_if(inner.begin(), inner.end(), [&](const auto& i) { return i.output_name() == o.column; });
      std::string source = it->column;
      std::string name = o.output_name();
      composed.push_back({source, name == source ? "" : name});
    }
    return make_project(std::move(composed), node->child()->child());
  }
  if (node->kind() == OpKind::Filter && node->child()->kind() == OpKind::Filter) {
    ExprPtr merged = canonicalize(
        conjunction({node->as<FilterOp>().predicate, node->child()->as<FilterOp>().predicate}));
    return make_filter(std::move(merged), node->child()->child());
  }
  return node;
}

LogicalPlan optimize_single(const LogicalPlan& plan, const Catalog& catalog) {
  PlanPtr current = plan.root;
  // Each pass either changes nothing or strictly normalizes the plan; the
  // bound guards against oscillation bugs.
  size_t bound = 4 * node_count(current) + 8;
  for (size_t pass = 0; pass < bound; ++pass) {
    PlanPtr next = collapse_adjacent(prune_columns(push_down_filters(current, catalog), catalog));
    if (structurally_equal(next, current)) break;
    current = std::move(next);
  }
  return LogicalPlan{plan.query_id, current};
}

}  // namespace mqo::sql
