#include "mqo/engine/relation.hpp"

#include <algorithm>

#include "mqo/error.hpp"

namespace mqo::engine {

size_t column_size(const ColumnData& c) {
  return std::visit([](const auto& v) { return v.size(); }, c);
}

DataType column_type(const ColumnData& c) {
  switch (c.index()) {
    case 0: return DataType::Int64;
    case 1: return DataType::Float64;
    default: return DataType::Utf8;
  }
}

uint64_t column_bytes(const ColumnData& c) {
  if (const auto* s = std::get_if<StringColumn>(&c)) return s->char_bytes() + kStringOverheadBytes * s->size();
  return kFixedWidthBytes * column_size(c);
}

Value column_value(const ColumnData& c, size_t row) {
  switch (c.index()) {
    case 0: return std::get<0>(c)[row];
    case 1: return std::get<1>(c)[row];
    default: return std::string(std::get<2>(c).at(row));
  }
}

ColumnData empty_column(DataType type) {
  switch (type) {
    case DataType::Int64: return std::vector<int64_t>{};
    case DataType::Float64: return std::vector<double>{};
    case DataType::Utf8: return StringColumn{};
  }
  return StringColumn{};
}

void append_value(ColumnData& c, const Value& v) {
  switch (c.index()) {
    case 0:
      if (v.index() != 0) throw Error(ErrorCode::TypeMismatch, "expected Int64 value");
      std::get<0>(c).push_back(std::get<int64_t>(v));
      break;
    case 1:
      if (v.index() == 0) {
        std::get<1>(c).push_back(static_cast<double>(std::get<int64_t>(v)));
      } else if (v.index() == 1) {
        std::get<1>(c).push_back(std::get<double>(v));
      } else {
        throw Error(ErrorCode::TypeMismatch, "expected Float64 value");
      }
      break;
    default:
      if (v.index() != 2) throw Error(ErrorCode::TypeMismatch, "expected Utf8 value");
      std::get<2>(c).push_back(std::get<std::string>(v));
  }
}

ColumnData gather(const ColumnData& c, const std::vector<uint32_t>& rows) {
  return std::visit(
      [&](const auto& v) -> ColumnData {
        using V = std::decay_t<decltype(v)>;
        V out;
        if constexpr (std::is_same_v<V, StringColumn>) {
          size_t bytes = 0;
          for (uint32_t r : rows) bytes += v.at(r).size();
          out.reserve(rows.size(), bytes);
          for (uint32_t r : rows) out.push_back(v.at(r));
        } else {
          out.reserve(rows.size());
          for (uint32_t r : rows) out.push_back(v[r]);
        }
        return out;
      },
      c);
}

Relation::Relation(Schema schema, std::vector<ColumnPtr> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  if (columns_.size() != schema_.size()) {
    throw Error(ErrorCode::SchemaMismatch, "column count does not match schema " + schema_.to_string());
  }
  rows_ = columns_.empty() ? 0 : column_size(*columns_.front());
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (column_size(*columns_[i]) != rows_) throw Error(ErrorCode::SchemaMismatch, "ragged columns");
    if (column_type(*columns_[i]) != schema_[i].type) {
      throw Error(ErrorCode::SchemaMismatch, "column '" + schema_[i].name + "' has the wrong type");
    }
  }
}

uint64_t Relation::byte_size() const {
  uint64_t total = 0;
  for (const auto& c : columns_) total += column_bytes(*c);
  return total;
}

Relation Relation::from_rows(const Schema& schema, const std::vector<std::vector<Value>>& rows) {
  std::vector<ColumnData> cols;
  for (const auto& c : schema.columns()) cols.push_back(empty_column(c.type));
  for (const auto& row : rows) {
    if (row.size() != cols.size()) throw Error(ErrorCode::SchemaMismatch, "row width does not match schema");
    for (size_t i = 0; i < cols.size(); ++i) append_value(cols[i], row[i]);
  }
  std::vector<ColumnPtr> ptrs;
  for (auto& c : cols) ptrs.push_back(std::make_shared<const ColumnData>(std::move(c)));
  return Relation(schema, std::move(ptrs));
}

std::vector<std::vector<Value>> Relation::to_rows() const {
  std::vector<std::vector<Value>> out(rows_);
  for (size_t r = 0; r < rows_; ++r) {
    out[r].reserve(columns_.size());
    for (const auto& c : columns_) out[r].push_back(column_value(*c, r));
  }
  return out;
}

std::vector<std::string> canonical_rows(const Relation& r) {
  std::vector<std::string> out;
  out.reserve(r.row_count());
  for (const auto& row : r.to_rows()) {
    std::string line;
    for (const auto& v : row) line += render_tagged(v) + "\x1f";
    out.push_back(std::move(line));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool same_multiset(const Relation& a, const Relation& b) {
  return a.schema() == b.schema() && canonical_rows(a) == canonical_rows(b);
}

}  // namespace mqo::engine
