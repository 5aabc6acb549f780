#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqo/batch.hpp"
#include "mqo/fingerprint.hpp"

namespace mqo {

struct SubTreeRef {
  std::string query_id;
  NodePath path;
  Fingerprint fingerprint;
  size_t node_count = 0;

  auto operator<=>(const SubTreeRef& other) const {
    if (auto c = query_id <=> other.query_id; c != 0) return c;
    return path <=> other.path;
  }
  bool operator==(const SubTreeRef& other) const { return query_id == other.query_id && path == other.path; }
};

/// Fingerprint-equal sub-trees; members ordered by (query id, path).
struct SimilarSubexpr {
  Fingerprint fingerprint;
  std::vector<SubTreeRef> members;

  size_t m() const { return members.size(); }
  size_t max_node_count() const;
};

/// Join, CartesianProduct and Union are unfriendly; everything else is friendly.
bool cache_friendly(const PlanNode& node);
/// True iff a proper descendant of `subtree` is cache-unfriendly.
bool contains_unfriendly(const PlanPtr& subtree);

/// Top-down traversal of every plan recording friendly-rooted sub-trees by
/// fingerprint; descent continues below a node only when it is unfriendly or
/// has unfriendly content. Buckets of size >= k are returned ordered by
/// descending max node count, then fingerprint hex.
std::vector<SimilarSubexpr> identify_ses(const QueryBatch& batch, size_t k = 2);

nlohmann::json ses_to_json(const std::vector<SimilarSubexpr>& ses);

}  // namespace mqo
