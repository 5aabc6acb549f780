#pragma once

#include <string>
#include <vector>

#include "mqo/plan.hpp"

namespace mqo {

struct Query {
  std::string query_id;
  std::string sql;
  LogicalPlan plan;
};

/// Ordered input set of locally optimized plans. Query ids are unique.
class QueryBatch {
 public:
  QueryBatch() = default;
  explicit QueryBatch(std::vector<Query> queries);

  const std::vector<Query>& queries() const { return queries_; }
  size_t size() const { return queries_.size(); }
  bool empty() const { return queries_.empty(); }

  void add(Query query);
  const Query& at(size_t i) const { return queries_.at(i); }
  /// Throws InvalidArgument for unknown ids.
  const Query& find(const std::string& query_id) const;
  size_t index_of(const std::string& query_id) const;

 private:
  std::vector<Query> queries_;
};

}  // namespace mqo
