#include "mqo/rewrite.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "mqo/error.hpp"

namespace mqo {

const CachePlan& OptimizedBatch::cache_plan(const std::string& cache_id) const {
  for (const auto& p : cache_plans) {
    if (p.cache_id == cache_id) return p;
  }
  throw Error(ErrorCode::MissingCacheEntry, "no cache plan for '" + cache_id + "'");
}

std::string cache_id_for(const CoveringExpr& ce) { return "cache_" + ce.id; }

std::vector<size_t> selected_ces(const Selection& selection, const std::vector<KnapsackGroup>& groups) {
  std::vector<size_t> out;
  for (size_t g = 0; g < selection.chosen.size() && g < groups.size(); ++g) {
    if (!selection.chosen[g]) continue;
    const auto& members = groups[g].items.at(*selection.chosen[g]).members;
    out.insert(out.end(), members.begin(), members.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> cache_reads(const PlanPtr& plan) {
  std::vector<std::string> out;
  std::function<void(const PlanPtr&)> walk = [&](const PlanPtr& n) {
    if (const auto* r = n->get_if<CacheReadOp>()) {
      if (std::find(out.begin(), out.end(), r->cache_id) == out.end()) out.push_back(r->cache_id);
    }
    for (const auto& c : n->children()) walk(c);
  };
  walk(plan);
  return out;
}

namespace {

// Replaces every outermost sub-tree of `plan` that `ce` can produce by an
// extraction over its cache.
PlanPtr substitute(const PlanPtr& plan, const CoveringExpr& ce, const Fingerprint& fp, const Catalog& catalog,
                   bool is_root) {
  if (!is_root && fingerprint(plan) == fp) {
    if (auto d = derive(ce.plan, plan)) return extraction_plan(*d, cache_id_for(ce), output_schema(plan, catalog));
  }
  if (plan->children().empty()) return plan;
  std::vector<PlanPtr> children;
  for (const auto& c : plan->children()) children.push_back(substitute(c, ce, fp, catalog, false));
  return plan->with_children(std::move(children));
}

}  // namespace

std::vector<CachePlan> build_cache_plans(const std::vector<size_t>& selected, const std::vector<CoveringExpr>& ces,
                                         const Catalog& catalog) {
  Catalog cat = catalog;
  for (size_t i : selected) cat.caches[cache_id_for(ces[i])] = output_schema(ces[i].plan, catalog);

  // Larger CEs first so that the outermost reusable cache wins.
  std::vector<size_t> by_size = selected;
  std::stable_sort(by_size.begin(), by_size.end(),
                   [&](size_t a, size_t b) { return node_count(ces[a].plan) > node_count(ces[b].plan); });

  std::vector<CachePlan> plans;
  for (size_t i : selected) {
    PlanPtr body = ces[i].plan;
    size_t size = node_count(body);
    for (size_t j : by_size) {
      if (j == i || node_count(ces[j].plan) >= size) continue;
      body = substitute(body, ces[j], ces[j].source.fingerprint, cat, false);
    }
    CachePlan p;
    p.cache_id = cache_id_for(ces[i]);
    p.ce_index = i;
    p.plan = make_cache_write(p.cache_id, body);
    p.estimated_bytes = ces[i].weight;
    p.depends_on = cache_reads(body);
    plans.push_back(std::move(p));
  }
  return plans;
}

OptimizedBatch rewrite_queries(const QueryBatch& batch, const std::vector<CoveringExpr>& ces,
                               const std::vector<size_t>& selected, const Catalog& catalog,
                               const RewriteOptions& options) {
  OptimizedBatch out;
  out.catalog = catalog;
  std::vector<CachePlan> plans = build_cache_plans(selected, ces, catalog);
  for (size_t i : selected) out.catalog.caches[cache_id_for(ces[i])] = output_schema(ces[i].plan, catalog);

  for (const auto& query : batch.queries()) {
    struct Target {
      NodePath path;
      size_t ce;
    };
    std::vector<Target> targets;
    for (size_t i : selected) {
      for (const auto& m : ces[i].source.members) {
        if (m.query_id == query.query_id) targets.push_back({m.path, i});
      }
    }
    std::stable_sort(targets.begin(), targets.end(),
                     [](const Target& a, const Target& b) { return a.path.steps.size() < b.path.steps.size(); });

    PlanPtr root = query.plan.root;
    std::vector<NodePath> replaced;
    for (const auto& t : targets) {
      bool inside = std::any_of(replaced.begin(), replaced.end(), [&](const NodePath& p) { return p.is_prefix_of(t.path); });
      if (inside) continue;
      PlanPtr member = subtree_at(query.plan.root, t.path);
      auto d = derive(ces[t.ce].plan, member);
      if (!d) throw Error(ErrorCode::SchemaMismatch, "member of " + ces[t.ce].id + " not derivable from its cache");
      Schema expected = output_schema(member, catalog);
      std::string cache_id = cache_id_for(ces[t.ce]);
      PlanPtr extraction = extraction_plan(*d, cache_id, expected);
      if (!(output_schema(extraction, out.catalog) == expected)) {
        throw Error(ErrorCode::SchemaMismatch, "extraction from " + cache_id + " yields " +
                                                   output_schema(extraction, out.catalog).to_string() +
                                                   ", expected " + expected.to_string());
      }
      if (options.corrupt_extraction) extraction = make_union(extraction, extraction);
      root = replace_at(root, t.path, extraction);
      replaced.push_back(t.path);
      out.consumers.push_back({query.query_id, t.path, cache_id, extraction});
    }
    out.queries.add(Query{query.query_id, query.sql, LogicalPlan{query.query_id, root}});
  }

  // Keep only caches reachable from some query, dependencies first.
  std::set<std::string> needed;
  std::function<void(const std::string&)> need = [&](const std::string& id) {
    if (!needed.insert(id).second) return;
    for (const auto& p : plans) {
      if (p.cache_id == id) {
        for (const auto& d : p.depends_on) need(d);
      }
    }
  };
  for (const auto& q : out.queries.queries()) {
    for (const auto& id : cache_reads(q.plan.root)) need(id);
  }
  std::set<std::string> emitted;
  std::function<void(const std::string&)> emit = [&](const std::string& id) {
    if (!emitted.insert(id).second) return;
    auto it = std::find_if(plans.begin(), plans.end(), [&](const CachePlan& p) { return p.cache_id == id; });
    for (const auto& d : it->depends_on) emit(d);
    out.cache_plans.push_back(*it);
  };
  for (const auto& p : plans) {
    if (needed.count(p.cache_id)) emit(p.cache_id);
  }
  for (auto it = out.catalog.caches.begin(); it != out.catalog.caches.end();) {
    it = needed.count(it->first) ? std::next(it) : out.catalog.caches.erase(it);
  }
  return out;
}

std::vector<ScheduleStep> schedule(const OptimizedBatch& optimized) {
  std::vector<ScheduleStep> steps;
  std::set<std::string> done;
  std::function<void(const std::string&)> run_cache = [&](const std::string& id) {
    if (done.count(id)) return;
    for (size_t i = 0; i < optimized.cache_plans.size(); ++i) {
      const auto& p = optimized.cache_plans[i];
      if (p.cache_id != id) continue;
      for (const auto& d : p.depends_on) run_cache(d);
      done.insert(id);
      steps.push_back({ScheduleStep::Kind::Cache, i});
      return;
    }
    throw Error(ErrorCode::MissingCacheEntry, "no cache plan for '" + id + "'");
  };
  for (size_t q = 0; q < optimized.queries.size(); ++q) {
    for (const auto& id : cache_reads(optimized.queries.at(q).plan.root)) run_cache(id);
    steps.push_back({ScheduleStep::Kind::Query, q});
  }
  return steps;
}

nlohmann::json optimized_to_json(const OptimizedBatch& optimized) {
  using nlohmann::json;
  json caches = json::array();
  for (const auto& p : optimized.cache_plans) {
    caches.push_back({{"cache_id", p.cache_id},
                      {"estimated_bytes", p.estimated_bytes},
                      {"depends_on", p.depends_on},
                      {"plan", plan_to_json(p.plan)}});
  }
  json queries = json::array();
  for (const auto& q : optimized.queries.queries()) queries.push_back(logical_plan_to_json(q.plan));
  json consumers = json::array();
  for (const auto& c : optimized.consumers) {
    consumers.push_back({{"query_id", c.query_id}, {"path", c.path.steps}, {"cache_id", c.cache_id}});
  }
  return {{"cache_plans", caches}, {"queries", queries}, {"consumers", consumers}};
}

}  // namespace mqo
