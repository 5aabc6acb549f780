#include <gtest/gtest.h>

#include <algorithm>

#include "generators.hpp"
#include "mqo/error.hpp"
#include "mqo/mckp.hpp"

namespace mqo {
namespace {

std::vector<std::optional<size_t>> picks(std::initializer_list<std::optional<size_t>> l) { return l; }

TEST(Solve, ZeroCapacity) {
  KnapsackInstance inst{{{{5, 3}}}, 0};
  auto s = solve(inst);
  EXPECT_EQ(s.chosen, picks({std::nullopt}));
  EXPECT_EQ(s.total_value, 0);
}

TEST(Solve, SingleGroup) {
  KnapsackInstance inst{{{{5, 3}, {9, 7}}}, 6};
  auto s = solve(inst, 6);
  EXPECT_EQ(s.chosen, picks({0}));
  EXPECT_EQ(s.total_value, 5);
  EXPECT_EQ(s.total_weight, 3u);
}

TEST(Solve, TwoGroupsFillCapacity) {
  KnapsackInstance inst{{{{4, 2}, {6, 5}}, {{3, 2}}}, 7};
  auto s = solve(inst, 7);
  EXPECT_EQ(s.chosen, picks({1, 0}));
  EXPECT_EQ(s.total_value, 9);
  EXPECT_EQ(s.total_weight, 7u);
  EXPECT_EQ(brute_force(inst).chosen, s.chosen);
}

TEST(Solve, NegativeValuesNeverTaken) {
  KnapsackInstance inst{{{{-1, 1}, {-5, 2}}, {{0, 1}}}, 100};
  auto s = solve(inst);
  EXPECT_EQ(s.chosen, picks({std::nullopt, std::nullopt}));
  EXPECT_EQ(s.total_weight, 0u);
}

TEST(Solve, EmptyInstanceAndBadUnits) {
  EXPECT_TRUE(solve(KnapsackInstance{{}, 50}).chosen.empty());
  EXPECT_THROW(solve(KnapsackInstance{{}, 50}, 0), Error);
}

TEST(Solve, TieBreakPrefersLighterThenEarlier) {
  KnapsackInstance lighter{{{{5, 4}, {5, 2}}}, 10};
  EXPECT_EQ(solve(lighter).chosen, picks({1}));
  KnapsackInstance earlier{{{{5, 2}, {5, 2}}}, 10};
  EXPECT_EQ(solve(earlier).chosen, picks({0}));
  // Equal value and weight either way: abstaining in the first group sorts first.
  KnapsackInstance across{{{{5, 2}}, {{5, 2}}}, 2};
  EXPECT_EQ(solve(across).chosen, picks({std::nullopt, 0}));
  EXPECT_EQ(brute_force(across).chosen, picks({std::nullopt, 0}));
}

TEST(BruteForce, TooLarge) {
  KnapsackInstance inst;
  inst.capacity = 10;
  for (int g = 0; g < 8; ++g) inst.groups.push_back(std::vector<McItem>(9, McItem{1, 1}));
  try {
    brute_force(inst);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}

TEST(ToInstance, WeightsRoundUpToWholeBytes) {
  std::vector<KnapsackGroup> groups(1);
  groups[0].items.push_back({});
  groups[0].items[0].value = 3;
  groups[0].items[0].weight = 0.2;
  groups[0].items.push_back({});
  groups[0].items[1].value = 4;
  groups[0].items[1].weight = 10.01;
  auto inst = to_instance(groups, 77);
  EXPECT_EQ(inst.capacity, 77u);
  EXPECT_EQ(inst.groups[0][0].weight, 1u);
  EXPECT_EQ(inst.groups[0][1].weight, 11u);
  auto j = instance_to_json(inst);
  EXPECT_EQ(j.at("groups")[0][1].at("weight"), 11);
  auto sj = selection_to_json(solve(inst));
  EXPECT_TRUE(sj.at("chosen")[0].is_number());
}

void check_selection(const KnapsackInstance& inst, const Selection& s) {
  ASSERT_EQ(s.chosen.size(), inst.groups.size());
  double value = 0;
  uint64_t weight = 0;
  for (size_t g = 0; g < s.chosen.size(); ++g) {
    if (!s.chosen[g]) continue;
    ASSERT_LT(*s.chosen[g], inst.groups[g].size());
    const auto& item = inst.groups[g][*s.chosen[g]];
    ASSERT_GT(item.value, 0);
    value += item.value;
    weight += item.weight;
  }
  ASSERT_EQ(value, s.total_value);
  ASSERT_EQ(weight, s.total_weight);
  ASSERT_LE(s.total_weight, inst.capacity);
}

TEST(SolveProperty, MatchesBruteForceAtByteUnits) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    auto inst = test::random_knapsack(rng);
    auto oracle = brute_force(inst);
    auto s = solve(inst, std::max<uint64_t>(inst.capacity, 1));
    check_selection(inst, s);
    ASSERT_EQ(s.total_value, oracle.total_value) << instance_to_json(inst).dump();
    ASSERT_EQ(s.total_weight, oracle.total_weight) << instance_to_json(inst).dump();
    ASSERT_EQ(s.chosen, oracle.chosen) << instance_to_json(inst).dump();
  }
}

TEST(SolveProperty, RoundingBoundAtCoarseUnits) {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    auto inst = test::random_knapsack(rng);
    // Scale up so one capacity unit spans many bytes.
    uint64_t scale = 1000 + rng.index(20'000);
    inst.capacity *= scale;
    for (auto& g : inst.groups) {
      for (auto& item : g) item.weight = item.weight * scale + rng.index(scale);
    }
    auto s = solve(inst, kDefaultUnits);
    check_selection(inst, s);
    uint64_t unit = (inst.capacity + kDefaultUnits - 1) / kDefaultUnits;
    uint64_t slack = inst.groups.size() * unit;
    KnapsackInstance shrunk = inst;
    shrunk.capacity = inst.capacity > slack ? inst.capacity - slack : 0;
    ASSERT_GE(s.total_value, brute_force(shrunk).total_value) << instance_to_json(inst).dump();
    ASSERT_LE(s.total_value, brute_force(inst).total_value);
  }
}

TEST(SolveProperty, MonotoneInCapacity) {
  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    auto inst = test::random_knapsack(rng);
    double previous = -1;
    for (uint64_t c = 0; c <= 1000; c += 50) {
      inst.capacity = c;
      auto s = solve(inst, std::max<uint64_t>(c, 1));
      ASSERT_GE(s.total_value, previous);
      previous = s.total_value;
    }
  }
}

}  // namespace
}  // namespace mqo
