#include "mqo/engine/runner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mqo/error.hpp"

namespace mqo::engine {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Baseline: return "baseline";
    case Mode::FullCache: return "fc";
    case Mode::WorkSharing: return "ws";
  }
  return "?";
}

std::optional<Mode> mode_from_string(std::string_view text) {
  for (Mode m : {Mode::Baseline, Mode::FullCache, Mode::WorkSharing}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

const QueryRun& BatchRun::query(const std::string& query_id) const {
  for (const auto& q : queries) {
    if (q.query_id == query_id) return q;
  }
  throw Error(ErrorCode::InvalidArgument, "no run for query '" + query_id + "'");
}

namespace {

void finish(BatchRun& run, const CacheStore& cache) {
  for (const auto& q : run.queries) run.total += q.metrics;
  run.cache_bytes_used = cache.used_bytes();
  run.spills = cache.spill_warnings();
}

}  // namespace

BatchRun run_batch(const QueryBatch& batch, const Database& db, Mode mode, uint64_t budget) {
  if (mode == Mode::WorkSharing) throw Error(ErrorCode::InvalidArgument, "worksharing runs an optimized batch");
  BatchRun run;
  run.mode = mode;
  CacheStore cache(budget);
  ExecOptions options;
  options.cache_base_tables = mode == Mode::FullCache;
  for (const auto& q : batch.queries()) {
    auto before = cache.ids();
    auto r = execute(q.plan.root, db, cache, options);
    for (const auto& id : cache.ids()) {
      if (std::find(before.begin(), before.end(), id) == before.end()) run.cache_writes.push_back(id);
    }
    run.queries.push_back({q.query_id, std::move(r.relation), r.metrics});
  }
  finish(run, cache);
  return run;
}

BatchRun run_optimized(const OptimizedBatch& optimized, const Database& db, uint64_t budget) {
  BatchRun run;
  run.mode = Mode::WorkSharing;
  CacheStore cache(budget);
  ExecMetrics pending;
  for (const auto& step : schedule(optimized)) {
    if (step.kind == ScheduleStep::Kind::Cache) {
      const auto& plan = optimized.cache_plans[step.index];
      pending += execute(plan.plan, db, cache).metrics;
      run.cache_writes.push_back(plan.cache_id);
      continue;
    }
    const auto& q = optimized.queries.at(step.index);
    auto r = execute(q.plan.root, db, cache);
    r.metrics += pending;
    pending = {};
    run.queries.push_back({q.query_id, std::move(r.relation), r.metrics});
  }
  finish(run, cache);
  return run;
}

namespace {

constexpr double kFloatTolerance = 1e-9;

bool values_close(const Value& a, const Value& b) {
  if (a.index() == 1 || b.index() == 1) {
    if (a.index() == 2 || b.index() == 2) return false;
    double x = a.index() == 0 ? static_cast<double>(std::get<int64_t>(a)) : std::get<double>(a);
    double y = b.index() == 0 ? static_cast<double>(std::get<int64_t>(b)) : std::get<double>(b);
    return std::abs(x - y) <= kFloatTolerance * std::max({1.0, std::abs(x), std::abs(y)});
  }
  return a == b;
}

bool cols_close(const Relation& a, size_t i, const Relation& b, size_t j, const std::vector<size_t>& cols) {
  for (size_t c : cols) {
    if (!values_close(a.value(i, c), b.value(j, c))) return false;
  }
  return true;
}

// Rows [begin, end) of both relations hold the same multiset, floats
// compared with a relative tolerance.
bool same_rows(const Relation& a, const Relation& b, size_t begin, size_t end) {
  std::vector<size_t> all(a.column_count());
  std::iota(all.begin(), all.end(), 0);
  auto sorted = [&](const Relation& r) {
    std::vector<size_t> idx(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    std::stable_sort(idx.begin(), idx.end(), [&](size_t x, size_t y) {
      for (size_t c : all) {
        int cmp = compare_values(r.value(x, c), r.value(y, c));
        if (cmp != 0) return cmp < 0;
      }
      return false;
    });
    return idx;
  };
  auto ia = sorted(a);
  auto ib = sorted(b);
  for (size_t k = 0; k < ia.size(); ++k) {
    if (!cols_close(a, ia[k], b, ib[k], all)) return false;
  }
  return true;
}

}  // namespace

bool results_match(const PlanPtr& plan, const Relation& expected, const Relation& actual) {
  if (!(expected.schema() == actual.schema())) return false;
  if (expected.row_count() != actual.row_count()) return false;
  size_t n = expected.row_count();

  bool limited = plan->kind() == OpKind::Limit;
  PlanPtr ordered = limited ? plan->child() : plan;
  if (ordered->kind() != OpKind::Sort) return limited || same_rows(expected, actual, 0, n);

  std::vector<size_t> keys;
  for (const auto& k : ordered->as<SortOp>().keys) {
    auto idx = expected.schema().find(k.column);
    if (!idx) return limited || same_rows(expected, actual, 0, n);
    keys.push_back(*idx);
  }
  size_t start = 0;
  while (start < n) {
    size_t end = start;
    while (end < n && cols_close(expected, end, expected, start, keys)) {
      if (!cols_close(actual, end, expected, end, keys)) return false;
      ++end;
    }
    if ((end < n || !limited) && !same_rows(expected, actual, start, end)) return false;
    start = end;
  }
  return true;
}

nlohmann::json batch_run_to_json(const BatchRun& run, const CostConstants& constants) {
  nlohmann::json queries = nlohmann::json::array();
  for (const auto& q : run.queries) {
    nlohmann::json jq = metrics_to_json(q.metrics, constants);
    jq["query_id"] = q.query_id;
    jq["rows"] = q.result.row_count();
    queries.push_back(jq);
  }
  nlohmann::json spills = nlohmann::json::array();
  for (const auto& s : run.spills) {
    spills.push_back({{"cache_id", s.cache_id}, {"bytes", s.bytes}, {"used_after", s.used_after}, {"budget", s.budget}});
  }
  return {{"mode", to_string(run.mode)},
          {"queries", queries},
          {"total", metrics_to_json(run.total, constants)},
          {"cache_bytes_used", run.cache_bytes_used},
          {"cache_writes", run.cache_writes},
          {"spill_warnings", spills}};
}

}  // namespace mqo::engine
