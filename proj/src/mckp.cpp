#include "mqo/mckp.hpp"

#include <algorithm>
#include <cmath>

#include "mqo/error.hpp"

namespace mqo {

namespace {

// Objective: higher value, then lower weight.
struct Score {
  double value = 0;
  uint64_t weight = 0;

  bool better_than(const Score& o) const { return value > o.value || (value == o.value && weight < o.weight); }
  bool operator==(const Score&) const = default;
};

Selection finish(const KnapsackInstance& instance, std::vector<std::optional<size_t>> chosen) {
  Selection s;
  s.chosen = std::move(chosen);
  for (size_t g = 0; g < s.chosen.size(); ++g) {
    if (!s.chosen[g]) continue;
    const McItem& item = instance.groups[g][*s.chosen[g]];
    s.total_value += item.value;
    s.total_weight += item.weight;
  }
  return s;
}

}  // namespace

Selection solve(const KnapsackInstance& instance, uint64_t units) {
  if (units == 0) throw Error(ErrorCode::InvalidArgument, "units must be at least 1");
  const size_t g_count = instance.groups.size();
  std::vector<std::optional<size_t>> chosen(g_count);
  const uint64_t c = instance.capacity;
  if (c == 0 || g_count == 0) return finish(instance, std::move(chosen));

  const uint64_t unit = (c + units - 1) / units;
  const size_t cap = static_cast<size_t>(c / unit);
  auto rounded = [&](const McItem& item) { return static_cast<size_t>((item.weight + unit - 1) / unit); };

  // best[g][k]: optimum over groups g.. with k capacity units left.
  std::vector<std::vector<Score>> best(g_count + 1, std::vector<Score>(cap + 1));
  for (size_t g = g_count; g-- > 0;) {
    for (size_t k = 0; k <= cap; ++k) {
      Score top = best[g + 1][k];
      for (const McItem& item : instance.groups[g]) {
        size_t w = rounded(item);
        if (item.value <= 0 || w > k) continue;
        const Score& rest = best[g + 1][k - w];
        Score cand{item.value + rest.value, item.weight + rest.weight};
        if (cand.better_than(top)) top = cand;
      }
      best[g][k] = top;
    }
  }

  size_t k = cap;
  for (size_t g = 0; g < g_count; ++g) {
    const Score& target = best[g][k];
    if (best[g + 1][k] == target) continue;
    for (size_t i = 0; i < instance.groups[g].size(); ++i) {
      const McItem& item = instance.groups[g][i];
      size_t w = rounded(item);
      if (item.value <= 0 || w > k) continue;
      const Score& rest = best[g + 1][k - w];
      if (Score{item.value + rest.value, item.weight + rest.weight} == target) {
        chosen[g] = i;
        k -= w;
        break;
      }
    }
  }
  return finish(instance, std::move(chosen));
}

Selection brute_force(const KnapsackInstance& instance) {
  double combos = 1;
  for (const auto& g : instance.groups) combos *= static_cast<double>(g.size() + 1);
  if (combos > static_cast<double>(kBruteForceLimit)) {
    throw Error(ErrorCode::TooLarge, "brute force over " + std::to_string(combos) + " combinations");
  }
  const size_t g_count = instance.groups.size();
  // choice[g] == 0 means nothing; i + 1 means item i.
  std::vector<size_t> choice(g_count, 0);
  std::vector<size_t> best_choice = choice;
  Score best;
  while (true) {
    Score s;
    for (size_t g = 0; g < g_count; ++g) {
      if (choice[g] == 0) continue;
      const McItem& item = instance.groups[g][choice[g] - 1];
      s.value += item.value;
      s.weight += item.weight;
    }
    if (s.weight <= instance.capacity && s.better_than(best)) {
      best = s;
      best_choice = choice;
    }
    // Odometer over choice vectors in lexicographic order (last group fastest).
    bool done = true;
    for (size_t g = g_count; g-- > 0;) {
      if (++choice[g] <= instance.groups[g].size()) {
        done = false;
        break;
      }
      choice[g] = 0;
    }
    if (done) break;
  }
  std::vector<std::optional<size_t>> chosen(g_count);
  for (size_t g = 0; g < g_count; ++g) {
    if (best_choice[g] > 0) chosen[g] = best_choice[g] - 1;
  }
  return finish(instance, std::move(chosen));
}

KnapsackInstance to_instance(const std::vector<KnapsackGroup>& groups, uint64_t capacity) {
  KnapsackInstance out;
  out.capacity = capacity;
  for (const auto& g : groups) {
    std::vector<McItem> items;
    for (const auto& item : g.items) {
      items.push_back({item.value, static_cast<uint64_t>(std::max(1.0, std::ceil(item.weight)))});
    }
    out.groups.push_back(std::move(items));
  }
  return out;
}

nlohmann::json instance_to_json(const KnapsackInstance& instance) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : instance.groups) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& item : g) items.push_back({{"value", item.value}, {"weight", item.weight}});
    groups.push_back(items);
  }
  return {{"capacity", instance.capacity}, {"groups", groups}};
}

nlohmann::json selection_to_json(const Selection& selection) {
  nlohmann::json chosen = nlohmann::json::array();
  for (const auto& c : selection.chosen) chosen.push_back(c ? nlohmann::json(*c) : nlohmann::json(nullptr));
  return {{"chosen", chosen}, {"total_value", selection.total_value}, {"total_weight", selection.total_weight}};
}

}  // namespace mqo
