#include "mqo/sharing.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "mqo/error.hpp"

namespace mqo {

size_t SimilarSubexpr::max_node_count() const {
  size_t best = 0;
  for (const auto& m : members) best = std::max(best, m.node_count);
  return best;
}

bool cache_friendly(const PlanNode& node) {
  switch (node.kind()) {
    case OpKind::Join:
    case OpKind::CartesianProduct:
    case OpKind::Union:
      return false;
    default:
      return true;
  }
}

bool contains_unfriendly(const PlanPtr& subtree) {
  for (const auto& c : subtree->children()) {
    if (!cache_friendly(*c) || contains_unfriendly(c)) return true;
  }
  return false;
}

std::vector<SimilarSubexpr> identify_ses(const QueryBatch& batch, size_t k) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "threshold k must be at least 2");
  std::map<Fingerprint, std::vector<SubTreeRef>> table;
  for (const auto& query : batch.queries()) {
    FingerprintMap fps = fingerprint_all(query.plan.root);
    std::deque<std::pair<PlanPtr, NodePath>> worklist{{query.plan.root, NodePath{}}};
    while (!worklist.empty()) {
      auto [node, path] = std::move(worklist.front());
      worklist.pop_front();
      bool friendly = cache_friendly(*node);
      bool unfriendly_inside = contains_unfriendly(node);
      if (friendly) {
        const Fingerprint& fp = fps.at(node.get());
        table[fp].push_back(SubTreeRef{query.query_id, path, fp, node_count(node)});
      }
      if (!friendly || unfriendly_inside) {
        for (size_t i = 0; i < node->children().size(); ++i) worklist.emplace_back(node->child(i), path.child(i));
      }
    }
  }

  std::vector<SimilarSubexpr> out;
  for (auto& [fp, members] : table) {
    if (members.size() < k) continue;
    std::sort(members.begin(), members.end());
    out.push_back(SimilarSubexpr{fp, std::move(members)});
  }
  std::sort(out.begin(), out.end(), [](const SimilarSubexpr& a, const SimilarSubexpr& b) {
    if (a.max_node_count() != b.max_node_count()) return a.max_node_count() > b.max_node_count();
    return a.fingerprint < b.fingerprint;
  });
  return out;
}

nlohmann::json ses_to_json(const std::vector<SimilarSubexpr>& ses) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& se : ses) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : se.members) {
      members.push_back({{"query_id", m.query_id}, {"path", m.path.steps}, {"node_count", m.node_count}});
    }
    out.push_back({{"fingerprint", se.fingerprint.hex()}, {"members", members}, {"m", se.m()}});
  }
  return out;
}

}  // namespace mqo
