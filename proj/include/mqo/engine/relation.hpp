#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mqo/schema.hpp"
#include "mqo/types.hpp"

namespace mqo::engine {

/// Strings stored back to back; row i spans [offsets[i], offsets[i+1]).
class StringColumn {
 public:
  StringColumn() : offsets_{0} {}

  size_t size() const { return offsets_.size() - 1; }
  std::string_view at(size_t i) const {
    return std::string_view(chars_).substr(offsets_[i], offsets_[i + 1] - offsets_[i]);
  }
  void push_back(std::string_view s) {
    chars_.append(s);
    offsets_.push_back(chars_.size());
  }
  void reserve(size_t rows, size_t bytes) {
    offsets_.reserve(rows + 1);
    chars_.reserve(bytes);
  }
  size_t char_bytes() const { return chars_.size(); }

 private:
  std::string chars_;
  std::vector<uint64_t> offsets_;
};

using ColumnData = std::variant<std::vector<int64_t>, std::vector<double>, StringColumn>;
using ColumnPtr = std::shared_ptr<const ColumnData>;

size_t column_size(const ColumnData& c);
DataType column_type(const ColumnData& c);
/// 8 bytes per numeric value; string length plus 4 bytes per string.
uint64_t column_bytes(const ColumnData& c);
Value column_value(const ColumnData& c, size_t row);
ColumnData empty_column(DataType type);
void append_value(ColumnData& c, const Value& v);

/// Rows of `c` at `rows`, in that order.
ColumnData gather(const ColumnData& c, const std::vector<uint32_t>& rows);

/// Immutable columnar table. Columns are shared between relations, so
/// projections and renames never copy data.
class Relation {
 public:
  Relation() = default;
  Relation(Schema schema, std::vector<ColumnPtr> columns);

  const Schema& schema() const { return schema_; }
  size_t row_count() const { return rows_; }
  size_t column_count() const { return columns_.size(); }
  const ColumnData& column(size_t i) const { return *columns_[i]; }
  const ColumnData& column(const std::string& name) const { return *columns_[schema_.index_of(name)]; }
  const ColumnPtr& column_ptr(size_t i) const { return columns_[i]; }
  Value value(size_t row, size_t col) const { return column_value(*columns_[col], row); }

  uint64_t byte_size() const;

  static Relation from_rows(const Schema& schema, const std::vector<std::vector<Value>>& rows);
  std::vector<std::vector<Value>> to_rows() const;

 private:
  Schema schema_;
  std::vector<ColumnPtr> columns_;
  size_t rows_ = 0;
};

/// Rows rendered to text and sorted, for order-insensitive comparison.
std::vector<std::string> canonical_rows(const Relation& r);
bool same_multiset(const Relation& a, const Relation& b);

}  // namespace mqo::engine
