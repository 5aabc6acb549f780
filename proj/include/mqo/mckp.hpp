#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqo/covering.hpp"

namespace mqo {

struct McItem {
  double value = 0;
  uint64_t weight = 1;
};

struct KnapsackInstance {
  std::vector<std::vector<McItem>> groups;
  uint64_t capacity = 0;
};

/// chosen[g] is the item taken from group g, if any.
struct Selection {
  std::vector<std::optional<size_t>> chosen;
  double total_value = 0;
  uint64_t total_weight = 0;
};

inline constexpr uint64_t kDefaultUnits = 4096;
inline constexpr uint64_t kBruteForceLimit = 10'000'000;

/// Dynamic program over capacity discretized into `units` steps of
/// ceil(capacity / units) bytes; item weights round up, so the returned
/// selection always fits the true capacity. Items of non-positive value are
/// never taken. Among optimal selections the lighter one wins, then the
/// lexicographically smallest choice vector (taking nothing sorts first).
Selection solve(const KnapsackInstance& instance, uint64_t units = kDefaultUnits);

/// Exhaustive search with the same objective and tie-break. Throws TooLarge
/// when the product of (group size + 1) exceeds kBruteForceLimit.
Selection brute_force(const KnapsackInstance& instance);

/// Weights are rounded up to whole bytes.
KnapsackInstance to_instance(const std::vector<KnapsackGroup>& groups, uint64_t capacity);

nlohmann::json instance_to_json(const KnapsackInstance& instance);
nlohmann::json selection_to_json(const Selection& selection);

}  // namespace mqo
