#include "mqo/workbench.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "mqo/datasets.hpp"
#include "mqo/engine/data.hpp"
#include "mqo/error.hpp"
#include "mqo/random.hpp"
#include "mqo/sql/parser.hpp"

namespace mqo::workbench {

bool Comparison::all_equal() const {
  return std::all_of(queries.begin(), queries.end(), [](const QueryComparison& q) { return q.equal; });
}

double Comparison::aggregate_ratio(const CostConstants& c) const {
  double base = baseline_total.proxy_cost(c);
  return base > 0 ? worksharing_total.proxy_cost(c) / base : 1.0;
}

Comparison compare_modes(const QueryBatch& batch, const OptimizedBatch& optimized, const engine::Database& db,
                         uint64_t budget, const CostConstants& constants) {
  auto base = engine::run_batch(batch, db, engine::Mode::Baseline, budget);
  auto fc = engine::run_batch(batch, db, engine::Mode::FullCache, budget);
  auto ws = engine::run_optimized(optimized, db, budget);
  Comparison out;
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto& q = batch.at(i);
    QueryComparison qc;
    qc.query_id = q.query_id;
    qc.baseline = base.queries[i].metrics;
    qc.full_cache = fc.query(q.query_id).metrics;
    const auto& w = ws.query(q.query_id);
    qc.worksharing = w.metrics;
    double b = qc.baseline.proxy_cost(constants);
    qc.ratio = b > 0 ? qc.worksharing.proxy_cost(constants) / b : 1.0;
    qc.equal = engine::results_match(q.plan.root, base.queries[i].result, w.result);
    out.queries.push_back(std::move(qc));
  }
  out.baseline_total = base.total;
  out.full_cache_total = fc.total;
  out.worksharing_total = ws.total;
  out.fc_cache_bytes = fc.cache_bytes_used;
  out.ws_cache_bytes = ws.cache_bytes_used;
  out.fc_spills = fc.spills.size();
  out.ws_spills = ws.spills.size();
  return out;
}

namespace {

nlohmann::json counters(const engine::ExecMetrics& m, const CostConstants& c) {
  auto j = engine::metrics_to_json(m, c);
  j.erase("wall_ms");  // keeps reports reproducible
  return j;
}

}  // namespace

nlohmann::json comparison_to_json(const Comparison& c, const CostConstants& constants) {
  nlohmann::json queries = nlohmann::json::array();
  for (const auto& q : c.queries) {
    queries.push_back({{"query_id", q.query_id},
                       {"baseline", counters(q.baseline, constants)},
                       {"fc", counters(q.full_cache, constants)},
                       {"ws", counters(q.worksharing, constants)},
                       {"runtime_ratio", q.ratio},
                       {"result", q.equal ? "PASS" : "FAIL"}});
  }
  return {{"queries", queries},
          {"totals",
           {{"baseline", counters(c.baseline_total, constants)},
            {"fc", counters(c.full_cache_total, constants)},
            {"ws", counters(c.worksharing_total, constants)}}},
          {"aggregate_runtime_ratio", c.aggregate_ratio(constants)},
          {"runtime_ratio_measure", "proxy cost (weighted tuples and bytes), not wall time"},
          {"fc_cache_bytes", c.fc_cache_bytes},
          {"ws_cache_bytes", c.ws_cache_bytes},
          {"fc_spill_warnings", c.fc_spills},
          {"ws_spill_warnings", c.ws_spills},
          {"equivalence", c.all_equal() ? "PASS" : "FAIL"}};
}

std::string_view to_string(MicroKind kind) {
  switch (kind) {
    case MicroKind::Filter: return "filter";
    case MicroKind::Project: return "project";
    case MicroKind::Mixed: return "mixed";
  }
  return "?";
}

std::optional<MicroKind> micro_kind_from_string(std::string_view text) {
  for (auto k : {MicroKind::Filter, MicroKind::Project, MicroKind::Mixed}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

QueryBatch micro_batch(MicroKind kind) {
  std::vector<std::pair<std::string, std::string>> sql;
  switch (kind) {
    case MicroKind::Filter:
      sql = {{"q1", "SELECT * FROM synthetic WHERE n_1 <= 125"}, {"q2", "SELECT * FROM synthetic WHERE n_1 > 875"}};
      break;
    case MicroKind::Project:
      sql = {{"q1", "SELECT n_1, n_2, s_1 FROM synthetic"}, {"q2", "SELECT n_2, d_1, s_2 FROM synthetic"}};
      break;
    case MicroKind::Mixed:
      sql = {{"q1", "SELECT n_1, d_1, s_1 FROM synthetic WHERE n_1 <= 125"},
             {"q2", "SELECT n_1, n_3, s_2 FROM synthetic WHERE n_1 > 875"}};
      break;
  }
  Catalog catalog;
  catalog.tables.emplace(datasets::kSyntheticTable, datasets::synthetic_schema());
  return sql::build_batch(sql, catalog);
}

MicroReport run_micro(MicroKind kind, uint64_t rows, uint64_t seed, std::optional<uint64_t> budget,
                      const CostConstants& constants) {
  if (rows < 1000) throw Error(ErrorCode::InvalidArgument, "micro-benchmark needs at least 1000 rows");
  MicroReport report;
  report.kind = kind;
  report.rows = rows;
  report.constants = constants;
  engine::Database db;
  db.add(datasets::kSyntheticTable, engine::generate_synthetic(rows, seed));
  report.data_bytes = db.byte_size();
  report.budget = budget.value_or(report.data_bytes);

  StatsCatalog stats;
  for (const auto& [name, rel] : db.tables()) stats[name] = collect_stats(rel);
  QueryBatch batch = micro_batch(kind);
  PipelineConfig config;
  config.budget_bytes = report.budget;
  config.constants = constants;
  report.pipeline = optimize_batch(batch, db.catalog(), stats, config);
  report.comparison = compare_modes(batch, report.pipeline.optimized, db, report.budget, constants);
  return report;
}

nlohmann::json micro_to_json(const MicroReport& r) {
  nlohmann::json j = comparison_to_json(r.comparison, r.constants);
  j["kind"] = to_string(r.kind);
  j["rows"] = r.rows;
  j["data_bytes"] = r.data_bytes;
  j["budget_bytes"] = r.budget;
  j["se_count"] = r.pipeline.ses.size();
  j["ce_count"] = r.pipeline.covering.ces.size();
  nlohmann::json ces = nlohmann::json::array();
  for (size_t i : r.pipeline.selected) {
    const auto& ce = r.pipeline.covering.ces[i];
    ces.push_back({{"id", ce.id}, {"plan", plan_to_string(ce.plan)}, {"estimated_bytes", ce.weight}});
  }
  j["cached_ces"] = ces;
  return j;
}

QueryBatch load_pool(const std::string& dir) { return sql::load_sql_dir(dir, datasets::pool_catalog()); }

engine::Database pool_database(uint64_t rows, uint64_t seed) {
  engine::Database db = engine::generate_star(rows, seed);
  db.add(datasets::kSyntheticTable, engine::generate_synthetic(rows, seed + 1));
  return db;
}

Percentiles percentiles(std::vector<double> values) {
  Percentiles p;
  if (values.empty()) return p;
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    double h = q * static_cast<double>(values.size() - 1);
    auto lo = static_cast<size_t>(h);
    size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  p.p5 = at(0.05);
  p.p25 = at(0.25);
  p.p50 = at(0.50);
  p.p75 = at(0.75);
  p.p95 = at(0.95);
  p.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return p;
}

WindowReport run_window(const QueryBatch& pool, const engine::Database& db, const StatsCatalog& stats,
                        const WindowConfig& config) {
  WindowReport report;
  Catalog catalog = db.catalog();
  PipelineConfig pc = config.pipeline;
  pc.budget_bytes = static_cast<uint64_t>(config.budget_fraction * static_cast<double>(db.byte_size()));
  for (size_t w : config.windows) {
    if (w == 0 || w > pool.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "window " + std::to_string(w) + " outside [1, " + std::to_string(pool.size()) + "]");
    }
    std::vector<double> ratios;
    std::vector<double> se_counts;
    for (size_t t = 0; t < config.trials; ++t) {
      Rng rng(config.seed * 1'000'003 + w * 1'009 + t);
      std::vector<size_t> order(pool.size());
      std::iota(order.begin(), order.end(), 0);
      for (size_t i = 0; i < w; ++i) std::swap(order[i], order[i + rng.index(order.size() - i)]);
      order.resize(w);
      std::sort(order.begin(), order.end());

      QueryBatch sample;
      Trial trial;
      trial.trial = t;
      trial.window = w;
      for (size_t i : order) {
        sample.add(pool.at(i));
        trial.queries.push_back(pool.at(i).query_id);
      }
      auto result = optimize_batch(sample, catalog, stats, pc);
      auto base = engine::run_batch(sample, db, engine::Mode::Baseline, pc.budget_bytes);
      auto ws = engine::run_optimized(result.optimized, db, pc.budget_bytes);
      trial.se_count = result.ses.size();
      trial.ce_count = result.covering.ces.size();
      trial.baseline_cost = base.total.proxy_cost(pc.constants);
      trial.worksharing_cost = ws.total.proxy_cost(pc.constants);
      trial.ratio = trial.baseline_cost > 0 ? trial.worksharing_cost / trial.baseline_cost : 1.0;
      for (size_t i = 0; i < sample.size(); ++i) {
        const auto& q = sample.at(i);
        if (!engine::results_match(q.plan.root, base.queries[i].result, ws.query(q.query_id).result)) {
          trial.equal = false;
        }
      }
      ratios.push_back(trial.ratio);
      se_counts.push_back(static_cast<double>(trial.se_count));
      report.trials.push_back(std::move(trial));
    }
    report.summaries.push_back({w, percentiles(ratios), percentiles(se_counts)});
  }
  return report;
}

namespace {

nlohmann::json percentiles_to_json(const Percentiles& p) {
  return {{"p5", p.p5}, {"p25", p.p25}, {"p50", p.p50}, {"p75", p.p75}, {"p95", p.p95}, {"mean", p.mean}};
}

}  // namespace

nlohmann::json window_to_json(const WindowReport& report) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : report.trials) {
    trials.push_back({{"trial", t.trial},
                      {"window", t.window},
                      {"queries", t.queries},
                      {"se_count", t.se_count},
                      {"ce_count", t.ce_count},
                      {"baseline_proxy_cost", t.baseline_cost},
                      {"ws_proxy_cost", t.worksharing_cost},
                      {"runtime_ratio", t.ratio},
                      {"result", t.equal ? "PASS" : "FAIL"}});
  }
  nlohmann::json summaries = nlohmann::json::array();
  for (const auto& s : report.summaries) {
    summaries.push_back({{"window", s.window},
                         {"runtime_ratio", percentiles_to_json(s.ratio)},
                         {"se_count", percentiles_to_json(s.se_count)}});
  }
  return {{"runtime_ratio_measure", "proxy cost (weighted tuples and bytes), not wall time"},
          {"summaries", summaries},
          {"trials", trials}};
}

void write_window_csv(std::ostream& out, const WindowReport& report) {
  out << "trial,window,ratio,se_count\n";
  for (const auto& t : report.trials) out << t.trial << ',' << t.window << ',' << t.ratio << ',' << t.se_count << '\n';
}

}  // namespace mqo::workbench
