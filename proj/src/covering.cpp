#include "mqo/covering.hpp"

#include <algorithm>
#include <set>

#include "mqo/error.hpp"

namespace mqo {

std::string Derivation::source_of(const std::string& name) const {
  auto it = columns.find(name);
  return it == columns.end() ? name : it->second;
}

namespace {

ExprPtr both(const ExprPtr& a, const ExprPtr& b) {
  if (!a) return b;
  if (!b) return a;
  return canonicalize(conjunction({a, b}));
}

// Disjuncts of a canonical predicate, each as its set of conjuncts.
std::vector<std::set<std::string>> disjuncts(const ExprPtr& e) {
  std::vector<ExprPtr> terms;
  if (const auto* o = e->as<Or>()) {
    terms = o->children;
  } else {
    terms.push_back(e);
  }
  std::vector<std::set<std::string>> out;
  for (const auto& t : terms) {
    std::set<std::string> conj;
    for (const auto& c : split_conjuncts(t)) conj.insert(serialize(c));
    out.push_back(std::move(conj));
  }
  return out;
}

bool subset(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Syntactic implication: every disjunct of `target` contains all conjuncts of
// some disjunct of `cover`.
bool implies(const ExprPtr& target, const ExprPtr& cover) {
  auto cs = disjuncts(cover);
  for (const auto& t : disjuncts(target)) {
    if (std::none_of(cs.begin(), cs.end(), [&](const auto& c) { return subset(c, t); })) return false;
  }
  return true;
}

// Drops disjuncts implied by another disjunct (a OR (a AND b) == a).
ExprPtr absorb(const ExprPtr& e) {
  const auto* o = e->as<Or>();
  if (!o) return e;
  auto ds = disjuncts(e);
  std::vector<ExprPtr> kept;
  for (size_t i = 0; i < ds.size(); ++i) {
    bool redundant = false;
    for (size_t j = 0; j < ds.size() && !redundant; ++j) {
      redundant = j != i && subset(ds[j], ds[i]) && (ds[j].size() < ds[i].size() || j < i);
    }
    if (!redundant) kept.push_back(o->children[i]);
  }
  return canonicalize(disjunction(std::move(kept)));
}

std::optional<Derivation> derive_filter(const PlanNode& c, const PlanNode& t, Derivation s) {
  ExprPtr ft = canonicalize(rename_columns(t.as<FilterOp>().predicate, s.columns));
  ExprPtr fc = canonicalize(c.as<FilterOp>().predicate);
  if (serialize(ft) == serialize(fc)) return s;
  if (!implies(ft, fc)) return std::nullopt;
  s.predicate = both(s.predicate, ft);
  return s;
}

std::optional<Derivation> derive_project(const PlanNode& c, const PlanNode& t, const Derivation& s) {
  std::map<std::string, std::string> exposed;  // cover input column -> cover output name
  for (const auto& item : c.as<ProjectOp>().items) exposed.emplace(item.column, item.output_name());
  Derivation out;
  for (const auto& item : t.as<ProjectOp>().items) {
    auto it = exposed.find(s.source_of(item.column));
    if (it == exposed.end()) return std::nullopt;
    out.columns[item.output_name()] = it->second;
  }
  if (s.predicate) {
    for (const auto& name : referenced_columns(s.predicate)) {
      if (!exposed.count(name)) return std::nullopt;
    }
    out.predicate = canonicalize(rename_columns(s.predicate, exposed));
  }
  return out;
}

AggregateOp translate(const AggregateOp& op, const Derivation& s) {
  AggregateOp out = op;
  for (auto& g : out.group_by) g = s.source_of(g);
  for (auto& a : out.aggregates) {
    if (!a.column.empty()) a.column = s.source_of(a.column);
    if (a.condition) a.condition = canonicalize(rename_columns(a.condition, s.columns));
  }
  return out;
}

bool same_aggregate(const AggregateOp& a, const AggregateOp& b) {
  if (a.group_by != b.group_by || a.aggregates.size() != b.aggregates.size()) return false;
  for (size_t i = 0; i < a.aggregates.size(); ++i) {
    const auto& x = a.aggregates[i];
    const auto& y = b.aggregates[i];
    if (x.func != y.func || x.column != y.column || x.name != y.name) return false;
    if (bool(x.condition) != bool(y.condition)) return false;
    if (x.condition && !equivalent(x.condition, y.condition)) return false;
  }
  return true;
}

std::vector<SortKey> translate(const std::vector<SortKey>& keys, const Derivation& s) {
  std::vector<SortKey> out = keys;
  for (auto& k : out) k.column = s.source_of(k.column);
  return out;
}

Derivation merge(Derivation left, const Derivation& right) {
  for (const auto& [k, v] : right.columns) left.columns[k] = v;
  left.predicate = both(left.predicate, right.predicate);
  return left;
}

std::optional<Derivation> derive_rec(const PlanPtr& c, const PlanPtr& t) {
  if (c->kind() != t->kind()) return std::nullopt;
  switch (c->kind()) {
    case OpKind::Scan:
      if (c->as<ScanOp>().table != t->as<ScanOp>().table) return std::nullopt;
      return Derivation{};
    case OpKind::CacheRead:
      if (c->as<CacheReadOp>().cache_id != t->as<CacheReadOp>().cache_id) return std::nullopt;
      return Derivation{};
    case OpKind::Union:
    case OpKind::CacheWrite:
      if (!structurally_equal(c, t)) return std::nullopt;
      return Derivation{};
    case OpKind::Join:
    case OpKind::CartesianProduct: {
      for (size_t flip = 0; flip < 2; ++flip) {
        auto l = derive_rec(c->child(0), t->child(flip));
        if (!l) continue;
        auto r = derive_rec(c->child(1), t->child(1 - flip));
        if (!r) continue;
        Derivation m = merge(std::move(*l), *r);
        if (c->kind() == OpKind::Join) {
          ExprPtr cond = rename_columns(t->as<JoinOp>().condition, m.columns);
          if (!equivalent(cond, c->as<JoinOp>().condition)) continue;
        }
        return m;
      }
      return std::nullopt;
    }
    default:
      break;
  }

  auto s = derive_rec(c->child(), t->child());
  if (!s) return std::nullopt;
  switch (c->kind()) {
    case OpKind::Filter:
      return derive_filter(*c, *t, std::move(*s));
    case OpKind::Project:
      return derive_project(*c, *t, *s);
    case OpKind::Aggregate: {
      if (s->predicate) return std::nullopt;
      const auto& ct = c->as<AggregateOp>();
      const auto& tt = t->as<AggregateOp>();
      if (!same_aggregate(translate(tt, *s), ct)) return std::nullopt;
      Derivation out;
      for (const auto& g : tt.group_by) out.columns[g] = s->source_of(g);
      return out;
    }
    case OpKind::Sort:
      if (translate(t->as<SortOp>().keys, *s) != c->as<SortOp>().keys) return std::nullopt;
      return s;
    case OpKind::Limit:
      if (s->predicate || c->as<LimitOp>().count != t->as<LimitOp>().count) return std::nullopt;
      return s;
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Covering plan construction

class CoverBuilder {
 public:
  explicit CoverBuilder(const Catalog& catalog) : catalog_(catalog) {}

  PlanPtr build(const std::vector<PlanPtr>& members) {
    const PlanPtr& first = members.front();
    for (const auto& m : members) {
      if (m->kind() != first->kind()) {
        throw Error(ErrorCode::InternalShapeMismatch,
                    "members disagree: " + std::string(to_string(m->kind())) + " vs " +
                        std::string(to_string(first->kind())));
      }
    }
    switch (first->kind()) {
      case OpKind::Scan:
      case OpKind::CacheRead:
        for (const auto& m : members) {
          if (canonical_attrs(*m) != canonical_attrs(*first)) {
            throw Error(ErrorCode::InternalShapeMismatch, "leaf members differ");
          }
        }
        return first;
      case OpKind::Union:
      case OpKind::CacheWrite:
        for (const auto& m : members) {
          if (!structurally_equal(m, first)) {
            throw Error(ErrorCode::NotCoverable, std::string(to_string(first->kind())) + " inputs differ");
          }
        }
        return first;
      case OpKind::Join:
      case OpKind::CartesianProduct:
        return build_binary(members);
      default:
        return build_unary(members);
    }
  }

 private:
  std::vector<Derivation> derive_all(const PlanPtr& cover, const std::vector<PlanPtr>& members) {
    std::vector<Derivation> out;
    for (const auto& m : members) {
      auto d = derive_rec(cover, m);
      if (!d) throw Error(ErrorCode::NotCoverable, "member not derivable from " + plan_to_string(cover));
      out.push_back(std::move(*d));
    }
    return out;
  }

  PlanPtr build_binary(const std::vector<PlanPtr>& members) {
    std::vector<PlanPtr> lefts, rights;
    for (const auto& m : members) {
      Fingerprint a = fingerprint(m->child(0));
      Fingerprint b = fingerprint(m->child(1));
      bool swap = b < a;
      lefts.push_back(m->child(swap ? 1 : 0));
      rights.push_back(m->child(swap ? 0 : 1));
    }
    PlanPtr left = build(lefts);
    PlanPtr right = build(rights);
    if (members.front()->kind() == OpKind::CartesianProduct) return make_cartesian(left, right);
    auto l = derive_rec(left, lefts.front());
    auto r = derive_rec(right, rights.front());
    if (!l || !r) throw Error(ErrorCode::NotCoverable, "join input not derivable");
    Derivation m = merge(std::move(*l), *r);
    ExprPtr cond = canonicalize(rename_columns(members.front()->as<JoinOp>().condition, m.columns));
    return make_join(cond, left, right);
  }

  PlanPtr build_unary(const std::vector<PlanPtr>& members) {
    std::vector<PlanPtr> children;
    for (const auto& m : members) children.push_back(m->child());
    PlanPtr child = build(children);
    std::vector<Derivation> ds = derive_all(child, children);
    const PlanPtr& first = members.front();

    switch (first->kind()) {
      case OpKind::Filter: {
        std::vector<ExprPtr> preds;
        std::set<std::string> seen;
        for (size_t i = 0; i < members.size(); ++i) {
          ExprPtr p = canonicalize(rename_columns(members[i]->as<FilterOp>().predicate, ds[i].columns));
          if (seen.insert(serialize(p)).second) preds.push_back(p);
        }
        return make_filter(absorb(canonicalize(disjunction(std::move(preds)))), child);
      }
      case OpKind::Project: {
        std::set<std::string> needed;
        for (size_t i = 0; i < members.size(); ++i) {
          for (const auto& item : members[i]->as<ProjectOp>().items) needed.insert(ds[i].source_of(item.column));
          if (ds[i].predicate) collect_columns(ds[i].predicate, needed);
        }
        std::vector<std::string> kept;
        Schema schema = output_schema(child, catalog_);
        for (const auto& c : schema.columns()) {
          if (needed.count(c.name)) kept.push_back(c.name);
        }
        return make_project(kept, child);
      }
      case OpKind::Aggregate: {
        for (const auto& d : ds) {
          if (d.predicate) throw Error(ErrorCode::NotCoverable, "differing filters below an aggregate");
        }
        AggregateOp op = translate(first->as<AggregateOp>(), ds.front());
        return make_aggregate(op.group_by, op.aggregates, child);
      }
      case OpKind::Sort:
        return make_sort(translate(first->as<SortOp>().keys, ds.front()), child);
      case OpKind::Limit:
        for (const auto& d : ds) {
          if (d.predicate) throw Error(ErrorCode::NotCoverable, "differing filters below a limit");
        }
        return make_limit(first->as<LimitOp>().count, child);
      default:
        throw Error(ErrorCode::InternalShapeMismatch, "unexpected operator in covering plan");
    }
  }

  const Catalog& catalog_;
};

bool contains(const SubTreeRef& outer, const SubTreeRef& inner) {
  return outer.query_id == inner.query_id && outer.path.is_proper_prefix_of(inner.path);
}

bool overlaps(const SubTreeRef& a, const SubTreeRef& b) {
  return a.query_id == b.query_id && (a.path.is_prefix_of(b.path) || b.path.is_prefix_of(a.path));
}

}  // namespace

std::optional<Derivation> derive(const PlanPtr& cover, const PlanPtr& target) { return derive_rec(cover, target); }

PlanPtr extraction_plan(const Derivation& d, const std::string& cache_id, const Schema& target_schema) {
  PlanPtr plan = make_cache_read(cache_id);
  if (d.predicate) plan = make_filter(d.predicate, plan);
  std::vector<ProjectItem> items;
  for (const auto& c : target_schema.columns()) {
    std::string source = d.source_of(c.name);
    items.push_back({source, source == c.name ? "" : c.name});
  }
  return make_project(std::move(items), plan);
}

PlanPtr build_covering_plan(const SimilarSubexpr& se, const QueryBatch& batch, const Catalog& catalog) {
  std::vector<PlanPtr> members;
  for (const auto& m : se.members) members.push_back(subtree_at(batch.find(m.query_id).plan.root, m.path));
  PlanPtr cover = CoverBuilder(catalog).build(members);
  if (fingerprint(cover) != se.fingerprint) {
    throw Error(ErrorCode::NotCoverable, "covering plan changes strict attributes");
  }
  infer_schema(cover, catalog);
  for (const auto& m : members) {
    if (!derive_rec(cover, m)) throw Error(ErrorCode::NotCoverable, "member not derivable from covering plan");
  }
  return cover;
}

CoveringSet build_ces(const std::vector<SimilarSubexpr>& ses, const QueryBatch& batch, const Catalog& catalog) {
  CoveringSet out;
  for (const auto& se : ses) {
    try {
      CoveringExpr ce;
      ce.source = se;
      ce.plan = build_covering_plan(se, batch, catalog);
      out.ces.push_back(std::move(ce));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotCoverable) throw;
      out.skipped.push_back({se.fingerprint, e.what()});
    }
  }
  std::stable_sort(out.ces.begin(), out.ces.end(), [](const CoveringExpr& a, const CoveringExpr& b) {
    size_t na = node_count(a.plan), nb = node_count(b.plan);
    if (na != nb) return na > nb;
    if (a.source.m() != b.source.m()) return a.source.m() > b.source.m();
    return a.source.fingerprint < b.source.fingerprint;
  });
  for (size_t i = 0; i < out.ces.size(); ++i) out.ces[i].id = "ce" + std::to_string(i + 1);
  return out;
}

std::vector<size_t> find_descendants(size_t ce, const std::vector<CoveringExpr>& all) {
  std::vector<size_t> out;
  for (size_t j = 0; j < all.size(); ++j) {
    if (j == ce) continue;
    bool inside = false;
    for (const auto& outer : all[ce].source.members) {
      for (const auto& inner : all[j].source.members) {
        if (contains(outer, inner)) inside = true;
      }
    }
    if (inside) out.push_back(j);
  }
  return out;
}

bool disjoint(const CoveringExpr& a, const CoveringExpr& b) {
  for (const auto& x : a.source.members) {
    for (const auto& y : b.source.members) {
      if (overlaps(x, y)) return false;
    }
  }
  return true;
}

namespace {

constexpr size_t kEnumerationLimit = 1 << 16;

void expand(const std::vector<size_t>& pool, const std::vector<CoveringExpr>& ces, size_t start,
            std::vector<size_t>& current, std::vector<std::vector<size_t>>& out) {
  for (size_t i = start; i < pool.size() && out.size() < kEnumerationLimit; ++i) {
    bool ok = std::all_of(current.begin(), current.end(), [&](size_t c) { return disjoint(ces[c], ces[pool[i]]); });
    if (!ok) continue;
    current.push_back(pool[i]);
    if (current.size() >= 2) out.push_back(current);
    expand(pool, ces, i + 1, current, out);
    current.pop_back();
  }
}

KnapsackItem make_item(std::vector<size_t> members, const std::vector<CoveringExpr>& ces) {
  KnapsackItem item;
  for (size_t m : members) {
    item.value += ces[m].value;
    item.weight += ces[m].weight;
  }
  item.members = std::move(members);
  return item;
}

// Keeps item 0 (the group's head) unconditionally.
void thin(std::vector<KnapsackItem>& items, size_t max_items) {
  if (items.size() <= max_items) return;
  std::vector<bool> keep(items.size(), true);
  for (size_t i = 1; i < items.size(); ++i) {
    for (size_t j = 0; j < items.size() && keep[i]; ++j) {
      if (i == j || !keep[j]) continue;
      const auto& a = items[i];
      const auto& b = items[j];
      if (a.weight > b.weight && a.value <= b.value) keep[i] = false;
    }
  }
  std::vector<size_t> order;
  for (size_t i = 1; i < items.size(); ++i) {
    if (keep[i]) order.push_back(i);
  }
  if (order.size() + 1 > max_items) {
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return items[a].value / items[a].weight > items[b].value / items[b].weight;
    });
    order.resize(max_items - 1);
    std::sort(order.begin(), order.end());
  }
  std::vector<KnapsackItem> out{items.front()};
  for (size_t i : order) out.push_back(items[i]);
  items = std::move(out);
}

}  // namespace

std::vector<KnapsackGroup> generate_kp_items(const std::vector<CoveringExpr>& ces, size_t max_items) {
  std::vector<bool> remaining(ces.size(), true);
  std::vector<KnapsackGroup> groups;
  for (size_t i = 0; i < ces.size(); ++i) {
    if (!remaining[i]) continue;
    remaining[i] = false;
    std::vector<size_t> pool;
    for (size_t d : find_descendants(i, ces)) {
      if (remaining[d]) pool.push_back(d);
    }
    KnapsackGroup group;
    group.group_id = groups.size();
    group.items.push_back(make_item({i}, ces));
    for (size_t d : pool) group.items.push_back(make_item({d}, ces));
    std::vector<std::vector<size_t>> compounds;
    std::vector<size_t> current;
    expand(pool, ces, 0, current, compounds);
    std::stable_sort(compounds.begin(), compounds.end(),
                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
    for (auto& c : compounds) group.items.push_back(make_item(std::move(c), ces));
    thin(group.items, std::max<size_t>(max_items, 1));
    for (size_t d : pool) remaining[d] = false;
    groups.push_back(std::move(group));
  }
  return groups;
}

nlohmann::json candidates_to_json(const std::vector<CoveringExpr>& ces, const std::vector<KnapsackGroup>& groups) {
  using nlohmann::json;
  json jces = json::array();
  for (const auto& ce : ces) {
    json members = json::array();
    for (const auto& m : ce.source.members) members.push_back({{"query_id", m.query_id}, {"path", m.path.steps}});
    jces.push_back({{"id", ce.id},
                    {"fingerprint", ce.source.fingerprint.hex()},
                    {"m", ce.source.m()},
                    {"node_count", node_count(ce.plan)},
                    {"members", members},
                    {"plan", plan_to_json(ce.plan)},
                    {"value", ce.value},
                    {"weight", ce.weight},
                    {"se_cost", ce.cost.se_cost},
                    {"exec_cost", ce.cost.exec_cost},
                    {"write_cost", ce.cost.write_cost},
                    {"read_cost", ce.cost.read_cost},
                    {"ce_cost", ce.cost.ce_cost},
                    {"out_rows", ce.cost.out_rows},
                    {"out_row_size", ce.cost.out_row_size}});
  }
  json jgroups = json::array();
  for (const auto& g : groups) {
    json items = json::array();
    for (const auto& item : g.items) {
      json ids = json::array();
      for (size_t m : item.members) ids.push_back(ces[m].id);
      items.push_back({{"members", ids}, {"value", item.value}, {"weight", item.weight}});
    }
    jgroups.push_back({{"group_id", g.group_id}, {"items", items}});
  }
  return {{"ces", jces}, {"groups", jgroups}};
}

}  // namespace mqo
