#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqo/engine/relation.hpp"

namespace mqo {

struct Bucket {
  double low = 0;
  double high = 0;
  uint64_t count = 0;
};

struct ColumnStats {
  DataType type = DataType::Int64;
  std::optional<double> min;  // numeric columns only
  std::optional<double> max;
  uint64_t distinct = 0;
  std::vector<Bucket> histogram;  // numeric columns only
  double avg_len = 0;             // string columns only

  /// Estimated bytes per value.
  double width() const;
  /// Estimated fraction of rows with value < x, by interpolating inside the
  /// bucket holding x. Requires a histogram.
  double fraction_below(double x) const;
};

struct TableStats {
  uint64_t row_count = 0;
  double avg_record_size = 0;
  std::vector<std::string> column_order;
  std::map<std::string, ColumnStats> columns;

  const ColumnStats& column(const std::string& name) const;
};

using StatsCatalog = std::map<std::string, TableStats>;

inline constexpr size_t kDefaultBuckets = 32;

/// Exact row count, min/max and distinct counts; equi-width histograms of
/// `buckets` buckets over [min, max]. Throws EmptyRelation.
TableStats collect_stats(const engine::Relation& relation, size_t buckets = kDefaultBuckets);

nlohmann::json stats_to_json(const TableStats& stats);
TableStats stats_from_json(const nlohmann::json& j);

/// `<dir>/<table>.stats.json`.
std::filesystem::path stats_path(const std::filesystem::path& dir, const std::string& table);
void save_stats(const std::filesystem::path& dir, const std::string& table, const TableStats& stats);
/// Loads the sidecar of every catalog table; throws MissingStats naming the
/// first table without one.
StatsCatalog load_stats(const std::filesystem::path& dir, const Catalog& catalog);

}  // namespace mqo
