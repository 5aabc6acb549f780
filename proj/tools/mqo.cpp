// Command-line driver: data generation, statistics, optimization, execution
// and the experiment workbench.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "mqo/datasets.hpp"
#include "mqo/engine/data.hpp"
#include "mqo/engine/runner.hpp"
#include "mqo/error.hpp"
#include "mqo/pipeline.hpp"
#include "mqo/sql/parser.hpp"
#include "mqo/stats.hpp"
#include "mqo/workbench.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitInput = 2;
constexpr int kExitMissingStats = 3;
constexpr int kReportVersion = 1;

struct RunConfig {
  std::string sql_dir;
  std::string data_dir;
  std::optional<uint64_t> budget;
  size_t k = 2;
  size_t buckets = mqo::kDefaultBuckets;
  uint64_t units = mqo::kDefaultUnits;
  uint64_t seed = 1;
  mqo::CostConstants constants;
  double default_budget_fraction = 0.25;
};

// Values given on the command line; unset ones fall back to the config file.
struct Flags {
  std::string config;
  std::string sql_dir;
  std::string data_dir;
  uint64_t budget = 0;
  size_t k = 2;
  size_t buckets = mqo::kDefaultBuckets;
  uint64_t units = mqo::kDefaultUnits;
  uint64_t seed = 1;
  std::string report;
  bool dump_plans = false;
  bool dump_ses = false;
  bool dump_candidates = false;
  bool dump_rewritten = false;
};

struct Options {
  CLI::Option* sql = nullptr;
  CLI::Option* data = nullptr;
  CLI::Option* budget = nullptr;
  CLI::Option* k = nullptr;
  CLI::Option* buckets = nullptr;
  CLI::Option* units = nullptr;
  CLI::Option* seed = nullptr;
};

RunConfig resolve(const Flags& f, const Options& o) {
  RunConfig c;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw mqo::Error(mqo::ErrorCode::Io, "cannot open config " + f.config);
    json j;
    try {
      j = json::parse(in);
      c.sql_dir = j.value("sql_dir", c.sql_dir);
      c.data_dir = j.value("data_dir", c.data_dir);
      if (j.contains("budget_bytes")) c.budget = j.at("budget_bytes").get<uint64_t>();
      c.k = j.value("k", c.k);
      c.buckets = j.value("buckets", c.buckets);
      c.units = j.value("units", c.units);
      c.seed = j.value("seed", c.seed);
      if (j.contains("cost_constants")) c.constants = mqo::constants_from_json(j.at("cost_constants"));
    } catch (const json::exception& e) {
      throw mqo::Error(mqo::ErrorCode::ParseError, f.config + ": " + e.what());
    }
  }
  auto given = [](CLI::Option* opt) { return opt != nullptr && opt->count() > 0; };
  if (given(o.sql)) c.sql_dir = f.sql_dir;
  if (given(o.data)) c.data_dir = f.data_dir;
  if (given(o.budget)) c.budget = f.budget;
  if (given(o.k)) c.k = f.k;
  if (given(o.buckets)) c.buckets = f.buckets;
  if (given(o.units)) c.units = f.units;
  if (given(o.seed)) c.seed = f.seed;
  if (c.k < 2) throw mqo::Error(mqo::ErrorCode::InvalidArgument, "k must be at least 2");
  if (c.units < 1) throw mqo::Error(mqo::ErrorCode::InvalidArgument, "units must be at least 1");
  c.constants.validate();
  return c;
}

json config_to_json(const RunConfig& c, uint64_t budget) {
  return {{"sql_dir", c.sql_dir},
          {"data_dir", c.data_dir},
          {"budget_bytes", budget},
          {"k", c.k},
          {"buckets", c.buckets},
          {"units", c.units},
          {"seed", c.seed},
          {"cost_constants", mqo::constants_to_json(c.constants)}};
}

void emit_report(const json& report, const std::string& path) {
  if (path.empty()) {
    std::cout << report.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw mqo::Error(mqo::ErrorCode::Io, "cannot write report " + path);
  out << report.dump(2) << "\n";
}

json base_report(const std::string& command) { return {{"report_version", kReportVersion}, {"command", command}}; }

void require_dir(const std::string& dir, const std::string& what) {
  if (dir.empty()) throw mqo::Error(mqo::ErrorCode::InvalidArgument, "missing --" + what);
}

mqo::QueryBatch load_queries(const RunConfig& c, const mqo::Catalog& catalog) {
  require_dir(c.sql_dir, "sql");
  auto batch = mqo::sql::load_sql_dir(c.sql_dir, catalog);
  if (batch.empty()) throw mqo::Error(mqo::ErrorCode::InvalidArgument, "no queries in " + c.sql_dir);
  return batch;
}

uint64_t data_bytes(const mqo::StatsCatalog& stats) {
  double total = 0;
  for (const auto& [name, s] : stats) total += static_cast<double>(s.row_count) * s.avg_record_size;
  return static_cast<uint64_t>(total);
}

struct Optimized {
  mqo::Catalog catalog;
  mqo::QueryBatch batch;
  mqo::PipelineResult result;
  uint64_t budget = 0;
};

Optimized optimize(const RunConfig& c, bool corrupt) {
  require_dir(c.data_dir, "data");
  Optimized out;
  out.catalog = mqo::engine::load_catalog(c.data_dir);
  out.batch = load_queries(c, out.catalog);
  auto stats = mqo::load_stats(c.data_dir, out.catalog);
  out.budget = c.budget.value_or(static_cast<uint64_t>(c.default_budget_fraction * static_cast<double>(data_bytes(stats))));
  mqo::PipelineConfig pc;
  pc.budget_bytes = out.budget;
  pc.k = c.k;
  pc.units = c.units;
  pc.constants = c.constants;
  pc.rewrite.corrupt_extraction = corrupt;
  out.result = mqo::optimize_batch(out.batch, out.catalog, stats, pc);
  return out;
}

int cmd_gen_data(const std::string& dataset, uint64_t rows, uint64_t seed, const std::string& out) {
  require_dir(out, "out");
  mqo::engine::Database db;
  if (dataset == "synthetic") {
    db.add(mqo::datasets::kSyntheticTable, mqo::engine::generate_synthetic(rows, seed));
  } else if (dataset == "star") {
    db = mqo::engine::generate_star(rows, seed);
  } else if (dataset == "hr") {
    db = mqo::engine::generate_hr(rows, seed);
  } else if (dataset == "pool") {
    db = mqo::workbench::pool_database(rows, seed);
  } else {
    throw mqo::Error(mqo::ErrorCode::InvalidArgument, "unknown dataset '" + dataset + "'");
  }
  mqo::engine::save_database(out, db);
  std::cerr << "wrote " << db.tables().size() << " table(s) to " << out << "\n";
  return kExitOk;
}

int cmd_stats(const RunConfig& c) {
  require_dir(c.data_dir, "data");
  auto db = mqo::engine::load_database(c.data_dir);
  for (const auto& [name, rel] : db.tables()) {
    mqo::save_stats(c.data_dir, name, mqo::collect_stats(rel, c.buckets));
    std::cerr << name << ": " << rel.row_count() << " rows -> " << mqo::stats_path(c.data_dir, name).string() << "\n";
  }
  return kExitOk;
}

int cmd_optimize(const RunConfig& c, const Flags& f) {
  auto o = optimize(c, false);
  json report = base_report("optimize");
  report["config"] = config_to_json(c, o.budget);
  json ids = json::array();
  for (const auto& q : o.batch.queries()) ids.push_back(q.query_id);
  report["queries"] = ids;
  report.update(mqo::pipeline_to_json(o.result));
  if (f.dump_plans) {
    json plans = json::array();
    for (const auto& q : o.batch.queries()) plans.push_back(mqo::logical_plan_to_json(q.plan));
    report["plans"] = plans;
  }
  if (f.dump_ses) report["ses"] = mqo::ses_to_json(o.result.ses);
  if (!f.dump_candidates) report.erase("candidates");
  if (f.dump_rewritten) report["rewritten"] = mqo::optimized_to_json(o.result.optimized);
  emit_report(report, f.report);
  std::cerr << o.result.ses.size() << " SE(s), " << o.result.covering.ces.size() << " CE(s), "
            << o.result.selected.size() << " selected, estimated savings " << o.result.selection.total_value << "\n";
  return kExitOk;
}

int cmd_run(const RunConfig& c, const Flags& f, std::vector<std::string> modes, bool compare, bool corrupt) {
  auto o = optimize(c, corrupt);
  auto db = mqo::engine::load_database(c.data_dir);
  if (modes.empty()) modes = {"baseline", "fc", "ws"};
  std::vector<mqo::engine::Mode> parsed;
  for (const auto& m : modes) {
    auto mode = mqo::engine::mode_from_string(m);
    if (!mode) throw mqo::Error(mqo::ErrorCode::InvalidArgument, "unknown mode '" + m + "'");
    parsed.push_back(*mode);
  }
  auto has = [&](mqo::engine::Mode m) { return std::find(parsed.begin(), parsed.end(), m) != parsed.end(); };
  if (compare) {
    if (!has(mqo::engine::Mode::Baseline)) parsed.push_back(mqo::engine::Mode::Baseline);
    if (!has(mqo::engine::Mode::WorkSharing)) parsed.push_back(mqo::engine::Mode::WorkSharing);
  }

  json report = base_report("run");
  report["config"] = config_to_json(c, o.budget);
  report.update(mqo::pipeline_to_json(o.result));
  report.erase("candidates");
  if (f.dump_rewritten) report["rewritten"] = mqo::optimized_to_json(o.result.optimized);

  std::optional<mqo::engine::BatchRun> baseline;
  std::optional<mqo::engine::BatchRun> ws;
  json runs = json::object();
  for (auto mode : parsed) {
    mqo::engine::BatchRun run = mode == mqo::engine::Mode::WorkSharing
                                    ? mqo::engine::run_optimized(o.result.optimized, db, o.budget)
                                    : mqo::engine::run_batch(o.batch, db, mode, o.budget);
    runs[std::string(mqo::engine::to_string(mode))] = mqo::engine::batch_run_to_json(run, c.constants);
    if (mode == mqo::engine::Mode::Baseline) baseline = std::move(run);
    if (mode == mqo::engine::Mode::WorkSharing) ws = std::move(run);
  }
  report["runs"] = runs;

  int status = kExitOk;
  if (compare) {
    json checks = json::array();
    for (size_t i = 0; i < o.batch.size(); ++i) {
      const auto& q = o.batch.at(i);
      const auto& b = baseline->queries[i];
      const auto& w = ws->query(q.query_id);
      bool ok = mqo::engine::results_match(q.plan.root, b.result, w.result);
      double base_cost = b.metrics.proxy_cost(c.constants);
      double ratio = base_cost > 0 ? w.metrics.proxy_cost(c.constants) / base_cost : 1.0;
      checks.push_back({{"query_id", q.query_id}, {"result", ok ? "PASS" : "FAIL"}, {"runtime_ratio", ratio}});
      std::cerr << q.query_id << ": " << (ok ? "PASS" : "FAIL") << " ratio " << ratio << "\n";
      if (!ok) status = kExitMismatch;
    }
    report["comparison"] = checks;
    report["runtime_ratio_measure"] = "proxy cost (weighted tuples and bytes), not wall time";
    report["equivalence"] = status == kExitOk ? "PASS" : "FAIL";
    std::cerr << (status == kExitOk ? "PASS" : "FAIL") << "\n";
  }
  emit_report(report, f.report);
  return status;
}

int cmd_micro(const std::string& kind, uint64_t rows, const RunConfig& c, const Flags& f) {
  auto k = mqo::workbench::micro_kind_from_string(kind);
  if (!k) throw mqo::Error(mqo::ErrorCode::InvalidArgument, "unknown micro-benchmark kind '" + kind + "'");
  auto r = mqo::workbench::run_micro(*k, rows, c.seed, c.budget, c.constants);
  json report = base_report("micro");
  report.update(mqo::workbench::micro_to_json(r));
  emit_report(report, f.report);
  std::cerr << "equivalence " << (r.comparison.all_equal() ? "PASS" : "FAIL") << ", aggregate ratio "
            << r.comparison.aggregate_ratio(c.constants) << "\n";
  return r.comparison.all_equal() ? kExitOk : kExitMismatch;
}

int cmd_window(const RunConfig& c, const Flags& f, std::vector<size_t> windows, size_t trials, uint64_t rows,
               const std::string& csv) {
  std::string pool_dir = c.sql_dir.empty() ? std::string(MQO_DEFAULT_POOL) : c.sql_dir;
  auto pool = mqo::workbench::load_pool(pool_dir);
  auto db = c.data_dir.empty() ? mqo::workbench::pool_database(rows, c.seed) : mqo::engine::load_database(c.data_dir);
  mqo::StatsCatalog stats;
  for (const auto& [name, rel] : db.tables()) stats[name] = mqo::collect_stats(rel, c.buckets);

  mqo::workbench::WindowConfig wc;
  if (!windows.empty()) wc.windows = windows;
  wc.trials = trials;
  wc.seed = c.seed;
  if (c.budget) wc.budget_fraction = static_cast<double>(*c.budget) / static_cast<double>(db.byte_size());
  wc.pipeline.k = c.k;
  wc.pipeline.units = c.units;
  wc.pipeline.constants = c.constants;
  auto r = mqo::workbench::run_window(pool, db, stats, wc);

  json report = base_report("window");
  report["pool"] = pool_dir;
  report["pool_size"] = pool.size();
  report.update(mqo::workbench::window_to_json(r));
  emit_report(report, f.report);
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw mqo::Error(mqo::ErrorCode::Io, "cannot write " + csv);
    mqo::workbench::write_window_csv(out, r);
  }
  bool ok = std::all_of(r.trials.begin(), r.trials.end(), [](const auto& t) { return t.equal; });
  for (const auto& s : r.summaries) {
    std::cerr << "W=" << s.window << " mean SE count " << s.se_count.mean << ", median ratio " << s.ratio.p50 << "\n";
  }
  return ok ? kExitOk : kExitMismatch;
}

int exit_code(const mqo::Error& e) {
  return e.code() == mqo::ErrorCode::MissingStats ? kExitMissingStats : kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-query optimizer: shares common work across a batch of SQL queries"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* cmd, Options& o) {
    cmd->add_option("--config", f.config, "JSON config file (flags override it)");
    o.sql = cmd->add_option("--sql", f.sql_dir, "directory of .sql files");
    o.data = cmd->add_option("--data", f.data_dir, "data directory (schema.json, CSV, statistics)");
    o.budget = cmd->add_option("--budget", f.budget, "cache budget in bytes (default 25% of the data)");
    o.k = cmd->add_option("--k", f.k, "minimum SE size");
    o.units = cmd->add_option("--units", f.units, "knapsack capacity steps");
    o.seed = cmd->add_option("--seed", f.seed, "random seed");
    o.buckets = cmd->add_option("--buckets", f.buckets, "histogram buckets");
    cmd->add_option("--report", f.report, "write the JSON report here instead of stdout");
  };

  std::string dataset = "synthetic";
  uint64_t rows = 10000;
  std::string out_dir;
  auto* gen = app.add_subcommand("gen-data", "generate a dataset as CSV");
  Options gen_opts;
  gen->add_option("rows,--rows", rows, "rows (fact rows for star, employees for hr)");
  gen->add_option("--dataset", dataset, "synthetic | star | hr | pool");
  gen_opts.seed = gen->add_option("--seed", f.seed, "random seed");
  gen->add_option("--out", out_dir, "output directory")->required();

  auto* stats = app.add_subcommand("stats", "collect statistics sidecars for a data directory");
  Options stats_opts;
  add_common(stats, stats_opts);

  auto* opt = app.add_subcommand("optimize", "identify shared work and plan the caches");
  Options opt_opts;
  add_common(opt, opt_opts);
  opt->add_flag("--dump-plans", f.dump_plans, "include the locally optimized plans");
  opt->add_flag("--dump-ses", f.dump_ses, "include the similar subexpressions");
  opt->add_flag("--dump-candidates", f.dump_candidates, "include covering expressions and knapsack groups");
  opt->add_flag("--dump-rewritten", f.dump_rewritten, "include cache plans and rewritten queries");

  auto* run = app.add_subcommand("run", "execute the batch and compare strategies");
  Options run_opts;
  add_common(run, run_opts);
  std::vector<std::string> modes;
  bool compare = false;
  bool corrupt = false;
  run->add_option("--mode", modes, "baseline | fc | ws (repeatable; default all)");
  run->add_flag("--compare", compare, "check worksharing results against baseline");
  run->add_flag("--dump-rewritten", f.dump_rewritten, "include cache plans and rewritten queries");
  run->add_flag("--corrupt-extraction", corrupt, "test hook: break every extraction plan")->group("");

  auto* micro = app.add_subcommand("micro", "two-query micro-benchmark over synthetic data");
  Options micro_opts;
  add_common(micro, micro_opts);
  micro_opts.budget->description("cache budget in bytes (default the table size)");
  std::string kind = "filter";
  uint64_t micro_rows = 100000;
  micro->add_option("--kind", kind, "filter | project | mixed");
  micro->add_option("--rows", micro_rows, "rows of the synthetic table");

  auto* window = app.add_subcommand("window", "window-size study over the query pool");
  Options window_opts;
  add_common(window, window_opts);
  window_opts.budget->description("cache budget in bytes (default 25% of the data)");
  std::vector<size_t> windows;
  size_t trials = 20;
  uint64_t window_rows = 20000;
  std::string csv;
  window->add_option("--window", windows, "window sizes (repeatable; default 1 5 10 20)");
  window->add_option("--trials", trials, "samples per window size");
  window->add_option("--rows", window_rows, "rows per generated table when --data is not given");
  window->add_option("--csv", csv, "write trial,window,ratio,se_count rows here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*gen) return cmd_gen_data(dataset, rows, f.seed, out_dir);
    if (*stats) return cmd_stats(resolve(f, stats_opts));
    if (*opt) return cmd_optimize(resolve(f, opt_opts), f);
    if (*run) return cmd_run(resolve(f, run_opts), f, modes, compare, corrupt);
    if (*micro) return cmd_micro(kind, micro_rows, resolve(f, micro_opts), f);
    if (*window) return cmd_window(resolve(f, window_opts), f, windows, trials, window_rows, csv);
  } catch (const mqo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
