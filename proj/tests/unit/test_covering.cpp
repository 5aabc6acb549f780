#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "generators.hpp"
#include "mqo/covering.hpp"
#include "mqo/datasets.hpp"
#include "mqo/engine/executor.hpp"
#include "mqo/sql/parser.hpp"

namespace mqo {
namespace {

ExprPtr eq(const std::string& c, int64_t v) { return compare(CompareOp::Eq, col(c), lit(v)); }

std::string ids_of(const KnapsackItem& item, const std::vector<CoveringExpr>& ces) {
  std::string out;
  for (size_t m : item.members) out += (out.empty() ? "" : "+") + ces[m].id;
  return out;
}

std::vector<std::vector<std::string>> group_ids(const std::vector<KnapsackGroup>& groups,
                                                const std::vector<CoveringExpr>& ces) {
  std::vector<std::vector<std::string>> out;
  for (const auto& g : groups) {
    out.emplace_back();
    for (const auto& item : g.items) out.back().push_back(ids_of(item, ces));
  }
  return out;
}

TEST(BuildCoveringPlan, RunningExampleEmployees) {
  auto batch = test::running_example_batch();
  auto catalog = datasets::hr_catalog();
  auto set = build_ces(identify_ses(batch), batch, catalog);
  ASSERT_EQ(set.ces.size(), 4u);
  EXPECT_TRUE(set.skipped.empty());
  const CoveringExpr* employees = nullptr;
  for (const auto& ce : set.ces) {
    if (ce.source.m() == 3) employees = &ce;
  }
  ASSERT_NE(employees, nullptr);
  // The union of member columns plus `gender`, needed to re-apply the filter.
  EXPECT_EQ(plan_to_string(employees->plan),
            "Project[id,name,dep,age,gender](Filter[or(= col:gender s:\"F\", > col:age i:30)](Scan[employees]))");
  EXPECT_EQ(fingerprint(employees->plan), employees->source.fingerprint);
}

TEST(BuildCoveringPlan, IdenticalMembersGiveIdenticalCover) {
  auto catalog = datasets::hr_catalog();
  const char* sql = "SELECT name, age FROM employees WHERE age > 40";
  auto batch = sql::build_batch({{"q1", sql}, {"q2", sql}}, catalog);
  auto ses = identify_ses(batch);
  ASSERT_EQ(ses.size(), 1u);
  auto plan = build_covering_plan(ses[0], batch, catalog);
  EXPECT_TRUE(structurally_equal(plan, batch.at(0).plan.root));
}

TEST(BuildCoveringPlan, OrOfFilters) {
  auto catalog = test::small_catalog();
  QueryBatch batch;
  batch.add({"q1", "", {"q1", make_filter(eq("a", 1), make_scan("r"))}});
  batch.add({"q2", "", {"q2", make_filter(eq("a", 2), make_scan("r"))}});
  auto ses = identify_ses(batch);
  ASSERT_EQ(ses.size(), 1u);
  EXPECT_EQ(plan_to_string(build_covering_plan(ses[0], batch, catalog)), "Filter[or(= col:a i:1, = col:a i:2)](Scan[r])");
}

TEST(BuildCoveringPlan, DifferentFiltersUnderAggregateAreNotCoverable) {
  auto catalog = test::small_catalog();
  auto agg = [](int64_t v) {
    return make_aggregate({"b"}, {{AggFunc::Count, "", nullptr, "n"}}, make_filter(eq("a", v), make_scan("r")));
  };
  QueryBatch batch;
  batch.add({"q1", "", {"q1", agg(1)}});
  batch.add({"q2", "", {"q2", agg(2)}});
  auto ses = identify_ses(batch);
  ASSERT_EQ(ses.size(), 1u);
  try {
    build_covering_plan(ses[0], batch, catalog);
    FAIL() << "expected NotCoverable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotCoverable);
  }
  auto set = build_ces(ses, batch, catalog);
  EXPECT_TRUE(set.ces.empty());
  ASSERT_EQ(set.skipped.size(), 1u);
}

TEST(Derive, RecipeForMember) {
  auto cover = make_project(std::vector<std::string>{"a", "b", "s"},
                            make_filter(disjunction({eq("a", 1), eq("b", 2)}), make_scan("r")));
  auto target = make_project(std::vector<ProjectItem>{{"s", "label"}}, make_filter(eq("a", 1), make_scan("r")));
  auto d = derive(cover, target);
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(serialize(d->predicate), "= col:a i:1");
  EXPECT_EQ(d->source_of("label"), "s");

  // Cover without the filter's column cannot serve the target.
  auto narrow = make_project(std::vector<std::string>{"s"}, make_filter(disjunction({eq("a", 1), eq("b", 2)}), make_scan("r")));
  EXPECT_FALSE(derive(narrow, target).has_value());
  // Cover admitting fewer rows cannot serve the target.
  auto strict = make_project(std::vector<std::string>{"a", "s"}, make_filter(conjunction({eq("a", 1), eq("b", 2)}), make_scan("r")));
  EXPECT_FALSE(derive(strict, target).has_value());
}

TEST(FindDescendants, RunningExample) {
  auto batch = test::running_example_batch();
  auto set = build_ces(identify_ses(batch), batch, datasets::hr_catalog());
  const auto& ces = set.ces;
  ASSERT_EQ(ces[0].id, "ce1");
  EXPECT_EQ(ces[0].source.m(), 2u);
  std::set<std::string> desc;
  for (size_t d : find_descendants(0, ces)) desc.insert(ces[d].id);
  EXPECT_EQ(desc, (std::set<std::string>{"ce2", "ce3"}));
  for (size_t i = 1; i < ces.size(); ++i) EXPECT_TRUE(find_descendants(i, ces).empty()) << ces[i].id;
  // Employees and salaries are disjoint, the join and employees are not.
  EXPECT_TRUE(disjoint(ces[1], ces[3]));
  EXPECT_FALSE(disjoint(ces[0], ces[1]));
}

TEST(GenerateKpItems, RunningExampleGroups) {
  auto batch = test::running_example_batch();
  auto set = build_ces(identify_ses(batch), batch, datasets::hr_catalog());
  auto groups = generate_kp_items(set.ces);
  EXPECT_EQ(group_ids(groups, set.ces),
            (std::vector<std::vector<std::string>>{{"ce1", "ce2", "ce3", "ce2+ce3"}, {"ce4"}}));
  EXPECT_EQ(set.ces[1].source.m(), 3u);  // ce2 is the employees SE
}

// Hand-built CEs: members given as (query, path) lists.
CoveringExpr fake_ce(const std::string& id, std::vector<std::pair<std::string, std::vector<size_t>>> members,
                     double value, double weight) {
  CoveringExpr ce;
  ce.id = id;
  for (auto& [q, p] : members) ce.source.members.push_back({q, NodePath{p}, {}, 1});
  ce.value = value;
  ce.weight = weight;
  return ce;
}

TEST(GenerateKpItems, NoContainmentGivesSingletons) {
  std::vector<CoveringExpr> ces = {fake_ce("a", {{"q1", {0}}, {"q2", {0}}}, 1, 1),
                                   fake_ce("b", {{"q1", {1}}, {"q2", {1}}}, 1, 1)};
  EXPECT_EQ(group_ids(generate_kp_items(ces), ces), (std::vector<std::vector<std::string>>{{"a"}, {"b"}}));
}

TEST(GenerateKpItems, ThreeDisjointDescendants) {
  std::vector<CoveringExpr> ces = {fake_ce("x", {{"q1", {}}, {"q2", {}}}, 10, 10),
                                   fake_ce("a", {{"q1", {0}}, {"q2", {0}}}, 1, 2),
                                   fake_ce("b", {{"q1", {1}}, {"q2", {1}}}, 2, 3),
                                   fake_ce("c", {{"q1", {2}}, {"q2", {2}}}, 4, 5)};
  auto groups = generate_kp_items(ces);
  ASSERT_EQ(groups.size(), 1u);
  std::set<std::string> items;
  for (const auto& item : groups[0].items) items.insert(ids_of(item, ces));
  // Oracle: every non-empty subset of {a, b, c} plus x itself.
  std::set<std::string> expected = {"x"};
  std::vector<std::string> names = {"a", "b", "c"};
  for (unsigned mask = 1; mask < 8; ++mask) {
    std::string s;
    for (unsigned i = 0; i < 3; ++i) {
      if (mask & (1u << i)) s += (s.empty() ? "" : "+") + names[i];
    }
    expected.insert(s);
  }
  EXPECT_EQ(items, expected);
  for (const auto& item : groups[0].items) {
    if (ids_of(item, ces) == "a+b+c") {
      EXPECT_DOUBLE_EQ(item.value, 7);
      EXPECT_DOUBLE_EQ(item.weight, 10);
    }
  }
}

TEST(GenerateKpItems, OverlappingDescendantsNeverCompound) {
  // b sits inside a; both sit inside x.
  std::vector<CoveringExpr> ces = {fake_ce("x", {{"q1", {}}, {"q2", {}}}, 10, 10),
                                   fake_ce("a", {{"q1", {0}}, {"q2", {0}}}, 1, 2),
                                   fake_ce("b", {{"q1", {0, 0}}, {"q2", {0, 0}}}, 2, 3)};
  EXPECT_EQ(group_ids(generate_kp_items(ces), ces), (std::vector<std::vector<std::string>>{{"x", "a", "b"}}));
}

TEST(GenerateKpItems, LargeGroupsAreThinned) {
  std::vector<CoveringExpr> ces = {fake_ce("x", {{"q1", {}}, {"q2", {}}}, 100, 100)};
  for (size_t i = 0; i < 8; ++i) {
    ces.push_back(fake_ce("d" + std::to_string(i), {{"q1", {i}}, {"q2", {i}}}, 1.0 + static_cast<double>(i), 2));
  }
  auto groups = generate_kp_items(ces, 64);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].items.size(), 64u);
  EXPECT_EQ(ids_of(groups[0].items[0], ces), "x");
  auto small = generate_kp_items(ces, 5);
  EXPECT_EQ(small[0].items.size(), 5u);
}

TEST(CandidatesJson, CarriesCostFields) {
  auto batch = test::running_example_batch();
  auto set = build_ces(identify_ses(batch), batch, datasets::hr_catalog());
  auto j = candidates_to_json(set.ces, generate_kp_items(set.ces));
  ASSERT_EQ(j.at("ces").size(), 4u);
  for (const char* key : {"id", "value", "weight", "se_cost", "exec_cost", "write_cost", "read_cost", "plan"}) {
    EXPECT_TRUE(j.at("ces")[0].contains(key)) << key;
  }
  EXPECT_EQ(j.at("groups").size(), 2u);
}

// Rows of `rel` restricted to `cols`, rendered for multiset comparison.
std::multiset<std::string> projected(const engine::Relation& rel, const std::vector<std::string>& cols) {
  std::multiset<std::string> out;
  for (size_t i = 0; i < rel.row_count(); ++i) {
    std::string row;
    for (const auto& c : cols) row += render_tagged(rel.value(i, rel.schema().index_of(c))) + "|";
    out.insert(row);
  }
  return out;
}

TEST(CoveringProperty, SupersetAndExtractionOnRandomWorkloads) {
  Rng rng(31);
  auto catalog = test::workload_catalog();
  size_t checked = 0;
  for (int w = 0; w < 60; ++w) {
    auto db = test::workload_database(300 + rng.index(700), rng.next());
    auto batch = sql::build_batch(test::random_workload(rng), catalog);
    auto set = build_ces(identify_ses(batch), batch, catalog);
    auto groups = generate_kp_items(set.ces);

    // Partition: every CE in exactly one group, as a singleton item.
    std::map<size_t, int> seen;
    for (const auto& g : groups) {
      for (const auto& item : g.items) {
        if (item.members.size() == 1) ++seen[item.members[0]];
        for (size_t a = 0; a < item.members.size(); ++a) {
          for (size_t b = a + 1; b < item.members.size(); ++b) {
            ASSERT_TRUE(disjoint(set.ces[item.members[a]], set.ces[item.members[b]]));
          }
        }
      }
    }
    ASSERT_EQ(seen.size(), set.ces.size());
    for (const auto& [ce, n] : seen) ASSERT_EQ(n, 1);

    engine::CacheStore cache;
    for (const auto& ce : set.ces) {
      auto cover = engine::execute(ce.plan, db, cache).relation;
      for (const auto& m : ce.source.members) {
        auto member = subtree_at(batch.find(m.query_id).plan.root, m.path);
        auto d = derive(ce.plan, member);
        ASSERT_TRUE(d.has_value()) << plan_to_string(member);
        auto target = engine::execute(member, db, cache).relation;
        std::vector<std::string> target_cols = target.schema().names();
        std::vector<std::string> cover_cols;
        for (const auto& c : target_cols) cover_cols.push_back(d->source_of(c));
        auto have = projected(cover, cover_cols);
        for (const auto& row : projected(target, target_cols)) {
          auto it = have.find(row);
          ASSERT_NE(it, have.end()) << plan_to_string(member) << " not covered by " << plan_to_string(ce.plan);
          have.erase(it);
        }
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 50u);
}

}  // namespace
}  // namespace mqo
