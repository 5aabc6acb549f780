#include "mqo/schema.hpp"

#include <set>

#include "mqo/error.hpp"

namespace mqo {

Schema::Schema(std::vector<ColumnDef> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw Error(ErrorCode::InvalidPlan, "schema must have at least one column");
  std::set<std::string> seen;
  for (const auto& c : columns_) {
    if (!seen.insert(c.name).second) {
      throw Error(ErrorCode::DuplicateColumn, "duplicate column '" + c.name + "'");
    }
  }
}

std::optional<size_t> Schema::find(const std::string& name) const {
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

size_t Schema::index_of(const std::string& name) const {
  auto idx = find(name);
  if (!idx) throw Error(ErrorCode::UnknownColumn, "unknown column '" + name + "' in " + to_string());
  return *idx;
}

std::vector<std::string> Schema::names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.name);
  return out;
}

std::string Schema::to_string() const {
  std::string out = "(";
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ", ";
    out += columns_[i].name;
    out += ':';
    out += mqo::to_string(columns_[i].type);
  }
  return out + ")";
}

const Schema& Catalog::table(const std::string& name) const {
  auto it = tables.find(name);
  if (it == tables.end()) throw Error(ErrorCode::UnknownTable, "unknown table '" + name + "'");
  return it->second;
}

const Schema& Catalog::cache(const std::string& id) const {
  auto it = caches.find(id);
  if (it == caches.end()) throw Error(ErrorCode::MissingCacheEntry, "no schema for cache '" + id + "'");
  return it->second;
}

}  // namespace mqo
