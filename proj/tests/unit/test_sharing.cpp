#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "generators.hpp"
#include "mqo/datasets.hpp"
#include "mqo/sharing.hpp"
#include "mqo/sql/parser.hpp"

namespace mqo {
namespace {

PlanPtr sample_filter() { return make_filter(compare(CompareOp::Gt, col("a"), lit(int64_t{1})), make_scan("r")); }

TEST(CacheFriendly, Operators) {
  EXPECT_TRUE(cache_friendly(*sample_filter()));
  EXPECT_FALSE(cache_friendly(*make_join(compare(CompareOp::Eq, col("a"), col("x")), make_scan("r"), make_scan("u"))));
  EXPECT_FALSE(cache_friendly(*make_cartesian(make_scan("r"), make_scan("u"))));
  EXPECT_FALSE(cache_friendly(*make_union(make_scan("r"), make_scan("r"))));
  EXPECT_TRUE(cache_friendly(*make_aggregate({"a"}, {}, make_scan("r"))));
}

TEST(ContainsUnfriendly, Cases) {
  EXPECT_FALSE(contains_unfriendly(make_project(std::vector<std::string>{"a"}, sample_filter())));
  auto join = make_join(compare(CompareOp::Eq, col("a"), col("x")), make_scan("r"), make_scan("u"));
  EXPECT_TRUE(contains_unfriendly(make_sort({{"a", false}}, make_project(std::vector<std::string>{"a"}, make_filter(
                                                                          compare(CompareOp::Gt, col("a"), lit(int64_t{1})), join)))));
  EXPECT_FALSE(contains_unfriendly(make_scan("r")));
  EXPECT_FALSE(contains_unfriendly(join));  // the root itself does not count
}

// SE holding exactly the members of the given (query, tree) pairs.
const SimilarSubexpr* find_se(const std::vector<SimilarSubexpr>& ses, const std::string& query, const std::string& tree,
                              const QueryBatch& batch) {
  for (const auto& se : ses) {
    for (const auto& m : se.members) {
      if (m.query_id == query && plan_to_string(subtree_at(batch.find(query).plan.root, m.path)) == tree) return &se;
    }
  }
  return nullptr;
}

TEST(IdentifySes, RunningExample) {
  auto batch = test::running_example_batch();
  auto ses = identify_ses(batch, 2);
  ASSERT_EQ(ses.size(), 4u);

  // The shared join of employees and departments, then the three filtered scans.
  const auto& join_se = ses[0];
  EXPECT_EQ(join_se.m(), 2u);
  EXPECT_EQ(subtree_at(batch.find("q1").plan.root, join_se.members[0].path)->child()->kind(), OpKind::Join);
  std::set<std::string> ids;
  for (const auto& m : join_se.members) ids.insert(m.query_id);
  EXPECT_EQ(ids, (std::set<std::string>{"q1", "q2"}));

  auto employees = find_se(ses, "q3", "Project[id,name](Filter[> col:age i:30](Scan[employees]))", batch);
  ASSERT_NE(employees, nullptr);
  EXPECT_EQ(employees->m(), 3u);
  auto departments = find_se(ses, "q2", "Project[dept_id,dept_name](Filter[= col:location s:\"us\"](Scan[departments]))", batch);
  ASSERT_NE(departments, nullptr);
  EXPECT_EQ(departments->m(), 2u);
  auto salaries = find_se(ses, "q3", "Project[emp_id,salary,from_date](Filter[> col:salary i:30000](Scan[salaries]))", batch);
  ASSERT_NE(salaries, nullptr);
  EXPECT_EQ(salaries->m(), 2u);

  std::multiset<size_t> counts;
  for (const auto& se : ses) counts.insert(se.m());
  EXPECT_EQ(counts, (std::multiset<size_t>{2, 3, 2, 2}));
}

TEST(IdentifySes, SingleQueryWithoutRepeats) {
  auto catalog = datasets::hr_catalog();
  auto batch = sql::build_batch({{"q1", "SELECT name FROM employees WHERE age > 3"}}, catalog);
  EXPECT_TRUE(identify_ses(batch, 2).empty());
}

TEST(IdentifySes, IdenticalQueriesShareOnlyTheWholeTree) {
  auto catalog = datasets::hr_catalog();
  const char* sql = "SELECT name FROM employees WHERE age > 3";
  auto batch = sql::build_batch({{"q1", sql}, {"q2", sql}}, catalog);
  auto ses = identify_ses(batch, 2);
  ASSERT_EQ(ses.size(), 1u);
  ASSERT_EQ(ses[0].m(), 2u);
  for (const auto& m : ses[0].members) EXPECT_TRUE(m.path.steps.empty());
}

TEST(IdentifySes, MembersFromTheSameQuery) {
  Catalog catalog = test::small_catalog();
  auto branch = [] {
    return make_project(std::vector<std::string>{"a"}, make_filter(compare(CompareOp::Gt, col("a"), lit(int64_t{2})),
                                                                  make_scan("r")));
  };
  QueryBatch batch;
  batch.add({"q1", "", {"q1", make_union(branch(), branch())}});
  auto ses = identify_ses(batch, 2);
  ASSERT_EQ(ses.size(), 1u);
  EXPECT_EQ(ses[0].members[0].query_id, "q1");
  EXPECT_EQ(ses[0].members[1].query_id, "q1");
}

TEST(IdentifySes, ThresholdK) {
  auto batch = test::running_example_batch();
  auto ses3 = identify_ses(batch, 3);
  ASSERT_EQ(ses3.size(), 1u);
  EXPECT_EQ(ses3[0].m(), 3u);
}

TEST(SesJson, Format) {
  auto batch = test::running_example_batch();
  auto j = ses_to_json(identify_ses(batch));
  ASSERT_EQ(j.size(), 4u);
  EXPECT_EQ(j[0].at("fingerprint").get<std::string>().size(), 32u);
  EXPECT_EQ(j[0].at("m"), 2);
  EXPECT_TRUE(j[0].at("members")[0].contains("query_id"));
  EXPECT_TRUE(j[0].at("members")[0].contains("path"));
}

using SeKey = std::set<std::pair<std::string, std::string>>;

std::map<std::string, SeKey> se_keys(const std::vector<SimilarSubexpr>& ses) {
  std::map<std::string, SeKey> out;
  for (const auto& se : ses) {
    for (const auto& m : se.members) out[se.fingerprint.hex()].insert({m.query_id, m.path.to_string()});
  }
  return out;
}

TEST(IdentifySesProperty, InvariantsOnRandomWorkloads) {
  Rng rng(99);
  auto catalog = test::workload_catalog();
  size_t nonempty = 0;
  for (int i = 0; i < 200; ++i) {
    auto batch = sql::build_batch(test::random_workload(rng), catalog);
    auto ses = identify_ses(batch, 2);
    nonempty += !ses.empty();
    std::set<Fingerprint> seen;
    for (size_t s = 0; s < ses.size(); ++s) {
      const auto& se = ses[s];
      ASSERT_GE(se.m(), 2u);
      ASSERT_TRUE(seen.insert(se.fingerprint).second) << "bucket split";
      ASSERT_TRUE(std::is_sorted(se.members.begin(), se.members.end()));
      if (s > 0) {
        ASSERT_GE(ses[s - 1].max_node_count(), se.max_node_count());
      }
      for (const auto& m : se.members) {
        auto node = subtree_at(batch.find(m.query_id).plan.root, m.path);
        ASSERT_EQ(fingerprint(node), se.fingerprint);
        ASSERT_EQ(m.node_count, node_count(node));
        ASSERT_TRUE(cache_friendly(*node));
        // Top-down pruning: nothing below a recorded sub-tree without
        // unfriendly content is recorded.
        if (contains_unfriendly(node)) continue;
        for (const auto& other : ses) {
          for (const auto& o : other.members) {
            ASSERT_FALSE(o.query_id == m.query_id && m.path.is_proper_prefix_of(o.path));
          }
        }
      }
    }
    // Permuting the batch leaves the output unchanged.
    std::vector<Query> qs = batch.queries();
    std::reverse(qs.begin(), qs.end());
    auto permuted = identify_ses(QueryBatch(qs), 2);
    ASSERT_EQ(se_keys(permuted), se_keys(ses));
    ASSERT_EQ(permuted.size(), ses.size());
    for (size_t s = 0; s < ses.size(); ++s) ASSERT_EQ(permuted[s].fingerprint, ses[s].fingerprint);
  }
  EXPECT_GT(nonempty, 100u);
}

}  // namespace
}  // namespace mqo
