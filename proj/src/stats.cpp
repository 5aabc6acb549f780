#include "mqo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "mqo/error.hpp"

namespace mqo {

double ColumnStats::width() const {
  return type == DataType::Utf8 ? avg_len + kStringOverheadBytes : static_cast<double>(kFixedWidthBytes);
}

double ColumnStats::fraction_below(double x) const {
  uint64_t total = 0;
  for (const auto& b : histogram) total += b.count;
  if (total == 0 || !min || !max) return 0;
  if (x <= *min) return 0;
  if (x > *max) return 1;
  double below = 0;
  for (const auto& b : histogram) {
    if (x >= b.high && b.high > b.low) {
      below += b.count;
    } else if (x > b.low && b.high > b.low) {
      below += b.count * (x - b.low) / (b.high - b.low);
    } else if (b.high == b.low && x > b.low) {
      below += b.count;
    }
  }
  return std::clamp(below / total, 0.0, 1.0);
}

const ColumnStats& TableStats::column(const std::string& name) const {
  auto it = columns.find(name);
  if (it == columns.end()) throw Error(ErrorCode::MissingStats, "no statistics for column '" + name + "'");
  return it->second;
}

namespace {

template <typename T>
ColumnStats numeric_stats(const std::vector<T>& values, size_t buckets) {
  ColumnStats s;
  s.type = std::is_same_v<T, int64_t> ? DataType::Int64 : DataType::Float64;
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double mn = static_cast<double>(*lo);
  double mx = static_cast<double>(*hi);
  s.min = mn;
  s.max = mx;
  std::unordered_set<T> seen(values.begin(), values.end());
  s.distinct = seen.size();
  if (mn == mx || buckets <= 1) {
    s.histogram.push_back({mn, mx, values.size()});
    return s;
  }
  double width = (mx - mn) / static_cast<double>(buckets);
  s.histogram.resize(buckets);
  for (size_t i = 0; i < buckets; ++i) {
    s.histogram[i].low = mn + width * static_cast<double>(i);
    s.histogram[i].high = i + 1 == buckets ? mx : mn + width * static_cast<double>(i + 1);
  }
  for (T v : values) {
    auto idx = static_cast<size_t>((static_cast<double>(v) - mn) / width);
    s.histogram[std::min(idx, buckets - 1)].count++;
  }
  return s;
}

ColumnStats string_stats(const engine::StringColumn& col) {
  ColumnStats s;
  s.type = DataType::Utf8;
  std::unordered_set<std::string_view> seen;
  for (size_t i = 0; i < col.size(); ++i) seen.insert(col.at(i));
  s.distinct = seen.size();
  s.avg_len = static_cast<double>(col.char_bytes()) / static_cast<double>(col.size());
  return s;
}

}  // namespace

TableStats collect_stats(const engine::Relation& relation, size_t buckets) {
  if (relation.row_count() == 0) throw Error(ErrorCode::EmptyRelation, "cannot collect statistics of an empty relation");
  if (buckets == 0) throw Error(ErrorCode::InvalidArgument, "histogram needs at least one bucket");
  TableStats out;
  out.row_count = relation.row_count();
  out.avg_record_size = static_cast<double>(relation.byte_size()) / static_cast<double>(relation.row_count());
  for (size_t i = 0; i < relation.column_count(); ++i) {
    const auto& name = relation.schema()[i].name;
    out.column_order.push_back(name);
    const auto& col = relation.column(i);
    if (const auto* v = std::get_if<std::vector<int64_t>>(&col)) {
      out.columns[name] = numeric_stats(*v, buckets);
    } else if (const auto* d = std::get_if<std::vector<double>>(&col)) {
      out.columns[name] = numeric_stats(*d, buckets);
    } else {
      out.columns[name] = string_stats(std::get<engine::StringColumn>(col));
    }
  }
  return out;
}

nlohmann::json stats_to_json(const TableStats& stats) {
  using nlohmann::json;
  json cols = json::array();
  for (const auto& name : stats.column_order) {
    const auto& c = stats.columns.at(name);
    json jc = {{"name", name}, {"type", to_string(c.type)}, {"distinct", c.distinct}};
    if (c.type == DataType::Utf8) {
      jc["avg_len"] = c.avg_len;
    } else {
      jc["min"] = *c.min;
      jc["max"] = *c.max;
      json hist = json::array();
      for (const auto& b : c.histogram) hist.push_back({b.low, b.high, b.count});
      jc["histogram"] = hist;
    }
    cols.push_back(jc);
  }
  return {{"row_count", stats.row_count}, {"avg_record_size", stats.avg_record_size}, {"columns", cols}};
}

TableStats stats_from_json(const nlohmann::json& j) {
  TableStats s;
  s.row_count = j.at("row_count").get<uint64_t>();
  s.avg_record_size = j.at("avg_record_size").get<double>();
  for (const auto& jc : j.at("columns")) {
    ColumnStats c;
    auto type = data_type_from_string(jc.at("type").get<std::string>());
    if (!type) throw Error(ErrorCode::ParseError, "bad column type in statistics");
    c.type = *type;
    c.distinct = jc.at("distinct").get<uint64_t>();
    if (c.type == DataType::Utf8) {
      c.avg_len = jc.at("avg_len").get<double>();
    } else {
      c.min = jc.at("min").get<double>();
      c.max = jc.at("max").get<double>();
      for (const auto& b : jc.at("histogram")) {
        c.histogram.push_back({b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<uint64_t>()});
      }
    }
    std::string name = jc.at("name").get<std::string>();
    s.column_order.push_back(name);
    s.columns[name] = std::move(c);
  }
  return s;
}

std::filesystem::path stats_path(const std::filesystem::path& dir, const std::string& table) {
  return dir / (table + ".stats.json");
}

void save_stats(const std::filesystem::path& dir, const std::string& table, const TableStats& stats) {
  auto path = stats_path(dir, table);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << stats_to_json(stats).dump(2) << "\n";
}

StatsCatalog load_stats(const std::filesystem::path& dir, const Catalog& catalog) {
  StatsCatalog out;
  for (const auto& [table, schema] : catalog.tables) {
    auto path = stats_path(dir, table);
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingStats, "no statistics for table '" + table + "' (" + path.string() + ")");
    try {
      out[table] = stats_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mqo
