#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqo/engine/runner.hpp"
#include "mqo/pipeline.hpp"

namespace mqo::workbench {

/// Per-query outcome of running one batch in the three modes. The runtime
/// ratio is measured by proxy cost (cost-model weighted counters), not time.
struct QueryComparison {
  std::string query_id;
  engine::ExecMetrics baseline;
  engine::ExecMetrics full_cache;
  engine::ExecMetrics worksharing;
  double ratio = 1;  // worksharing / baseline proxy cost
  bool equal = true; // worksharing result matches baseline
};

struct Comparison {
  std::vector<QueryComparison> queries;
  engine::ExecMetrics baseline_total;
  engine::ExecMetrics full_cache_total;
  engine::ExecMetrics worksharing_total;
  uint64_t fc_cache_bytes = 0;
  uint64_t ws_cache_bytes = 0;
  size_t fc_spills = 0;
  size_t ws_spills = 0;

  bool all_equal() const;
  double aggregate_ratio(const CostConstants& c) const;
};

/// Runs baseline, full-cache and worksharing and compares results.
Comparison compare_modes(const QueryBatch& batch, const OptimizedBatch& optimized, const engine::Database& db,
                         uint64_t budget, const CostConstants& constants);

nlohmann::json comparison_to_json(const Comparison& c, const CostConstants& constants);

enum class MicroKind { Filter, Project, Mixed };
std::string_view to_string(MicroKind kind);
std::optional<MicroKind> micro_kind_from_string(std::string_view text);

/// The two-query micro-benchmark over the synthetic table.
QueryBatch micro_batch(MicroKind kind);

struct MicroReport {
  MicroKind kind = MicroKind::Filter;
  uint64_t rows = 0;
  uint64_t data_bytes = 0;
  uint64_t budget = 0;
  CostConstants constants;
  PipelineResult pipeline;
  Comparison comparison;
};

/// `budget` defaults to the size of the table.
MicroReport run_micro(MicroKind kind, uint64_t rows, uint64_t seed, std::optional<uint64_t> budget = std::nullopt,
                      const CostConstants& constants = {});

nlohmann::json micro_to_json(const MicroReport& report);

/// The bundled analytic pool over the star schema and the synthetic table.
QueryBatch load_pool(const std::string& dir);
/// Star schema with `rows` sales plus a synthetic table of `rows` rows.
engine::Database pool_database(uint64_t rows, uint64_t seed);

struct Trial {
  size_t trial = 0;
  size_t window = 0;
  std::vector<std::string> queries;
  size_t se_count = 0;
  size_t ce_count = 0;
  double baseline_cost = 0;
  double worksharing_cost = 0;
  double ratio = 1;
  bool equal = true;
};

struct Percentiles {
  double p5 = 0, p25 = 0, p50 = 0, p75 = 0, p95 = 0, mean = 0;
};

/// Linear interpolation between closest ranks.
Percentiles percentiles(std::vector<double> values);

struct WindowSummary {
  size_t window = 0;
  Percentiles ratio;
  Percentiles se_count;
};

struct WindowReport {
  std::vector<Trial> trials;
  std::vector<WindowSummary> summaries;
};

struct WindowConfig {
  std::vector<size_t> windows = {1, 5, 10, 20};
  size_t trials = 20;
  uint64_t seed = 1;
  /// Cache budget as a fraction of the data size.
  double budget_fraction = 0.25;
  PipelineConfig pipeline;
};

/// For every window size W, `trials` random W-query samples (without
/// replacement) of the pool are optimized and run in baseline and
/// worksharing mode. Throws InvalidArgument when W exceeds the pool.
WindowReport run_window(const QueryBatch& pool, const engine::Database& db, const StatsCatalog& stats,
                        const WindowConfig& config);

nlohmann::json window_to_json(const WindowReport& report);
/// trial,window,ratio,se_count
void write_window_csv(std::ostream& out, const WindowReport& report);

}  // namespace mqo::workbench
