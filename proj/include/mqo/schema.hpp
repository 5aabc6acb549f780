#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mqo/types.hpp"

namespace mqo {

struct ColumnDef {
  std::string name;
  DataType type;

  bool operator==(const ColumnDef&) const = default;
};

/// Ordered, non-empty list of uniquely named columns.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<ColumnDef> columns);

  const std::vector<ColumnDef>& columns() const { return columns_; }
  size_t size() const { return columns_.size(); }
  bool empty() const { return columns_.empty(); }
  const ColumnDef& operator[](size_t i) const { return columns_[i]; }

  std::optional<size_t> find(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name).has_value(); }
  /// Throws UnknownColumn when absent.
  size_t index_of(const std::string& name) const;
  std::vector<std::string> names() const;

  std::string to_string() const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<ColumnDef> columns_;
};

/// Schema lookup used during inference. Cache schemas are registered by the
/// rewrite stage so plans containing CacheRead can be type-checked.
struct Catalog {
  std::map<std::string, Schema> tables;
  std::map<std::string, Schema> caches;

  const Schema& table(const std::string& name) const;
  const Schema& cache(const std::string& id) const;
};

}  // namespace mqo
