#include <gtest/gtest.h>

#include <functional>

#include "generators.hpp"
#include "reference.hpp"
#include "mqo/error.hpp"
#include "mqo/plan.hpp"

namespace mqo {
namespace {

Catalog people_catalog() {
  Catalog c;
  c.tables.emplace("people", Schema({{"name", DataType::Utf8}, {"age", DataType::Int64}}));
  return c;
}

template <typename F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Io;
}

TEST(Schema, RejectsDuplicateNames) {
  EXPECT_EQ(error_of([] { Schema({{"a", DataType::Int64}, {"a", DataType::Utf8}}); }), ErrorCode::DuplicateColumn);
}

TEST(Schema, IndexOfUnknownColumn) {
  Schema s({{"a", DataType::Int64}});
  EXPECT_EQ(s.index_of("a"), 0u);
  EXPECT_EQ(error_of([&] { s.index_of("b"); }), ErrorCode::UnknownColumn);
}

TEST(InferSchema, ProjectKeepsListedColumnsInOrder) {
  auto plan = make_project(std::vector<std::string>{"name"}, make_scan("people"));
  EXPECT_EQ(output_schema(plan, people_catalog()), Schema({{"name", DataType::Utf8}}));
}

TEST(InferSchema, FilterPreservesInputSchema) {
  auto plan = make_filter(compare(CompareOp::Gt, col("age"), lit(int64_t{30})), make_scan("people"));
  EXPECT_EQ(output_schema(plan, people_catalog()), people_catalog().table("people"));
}

TEST(InferSchema, Errors) {
  auto catalog = people_catalog();
  EXPECT_EQ(error_of([&] { output_schema(make_project(std::vector<std::string>{"salary"}, make_scan("people")), catalog); }),
            ErrorCode::UnknownColumn);
  EXPECT_EQ(error_of([&] { output_schema(make_scan("nope"), catalog); }), ErrorCode::UnknownTable);
  auto bad_types = make_filter(compare(CompareOp::Eq, col("age"), lit(std::string("x"))), make_scan("people"));
  EXPECT_EQ(error_of([&] { output_schema(bad_types, catalog); }), ErrorCode::TypeMismatch);
  auto bad_union = make_union(make_scan("people"), make_project(std::vector<std::string>{"age"}, make_scan("people")));
  EXPECT_EQ(error_of([&] { output_schema(bad_union, catalog); }), ErrorCode::UnionSchemaMismatch);
}

TEST(InferSchema, AnnotatesEveryNode) {
  auto scan = make_scan("people");
  auto filter = make_filter(compare(CompareOp::Gt, col("age"), lit(int64_t{30})), scan);
  auto root = make_project(std::vector<std::string>{"age", "name"}, filter);
  auto ann = infer_schema(root, people_catalog());
  EXPECT_EQ(ann.size(), 3u);
  EXPECT_EQ(ann.at(root.get()).names(), (std::vector<std::string>{"age", "name"}));
  EXPECT_EQ(ann.at(scan.get()).size(), 2u);
}

TEST(Canonicalize, FlattensAndDeduplicates) {
  auto a1 = compare(CompareOp::Eq, col("a"), lit(int64_t{1}));
  auto b2 = compare(CompareOp::Eq, col("b"), lit(int64_t{2}));
  auto e = disjunction({a1, disjunction({b2, a1})});
  EXPECT_EQ(serialize(canonicalize(e)), "or(= col:a i:1, = col:b i:2)");
}

TEST(Canonicalize, SingleChildCollapses) {
  auto x = compare(CompareOp::Gt, col("x"), lit(int64_t{3}));
  EXPECT_EQ(serialize(canonicalize(conjunction({x}))), "> col:x i:3");
}

TEST(Canonicalize, OrderInsensitive) {
  auto a1 = compare(CompareOp::Eq, col("a"), lit(int64_t{1}));
  auto b2 = compare(CompareOp::Eq, col("b"), lit(int64_t{2}));
  EXPECT_TRUE(equivalent(disjunction({b2, a1}), disjunction({a1, b2})));
  EXPECT_EQ(serialize(canonicalize(disjunction({b2, a1}))), serialize(canonicalize(disjunction({a1, b2}))));
}

TEST(Canonicalize, FlipsLiteralOnLeftAndRemovesDoubleNegation) {
  auto e = negate(negate(compare(CompareOp::Lt, lit(int64_t{5}), col("a"))));
  EXPECT_EQ(serialize(canonicalize(e)), "> col:a i:5");
}

TEST(Canonicalize, TypeTaggedLiterals) {
  auto e = conjunction({compare(CompareOp::Eq, col("loc"), lit(std::string("us"))),
                        compare(CompareOp::Lt, col("d"), lit(0.5))});
  EXPECT_EQ(serialize(canonicalize(e)), "and(< col:d f:0.5, = col:loc s:\"us\")");
}

TEST(CanonicalizeProperty, IdempotentAndOrderInsensitiveOnRandomExpressions) {
  Rng rng(11);
  auto schema = test::small_catalog().table("r");
  for (int i = 0; i < 2000; ++i) {
    auto e = test::random_predicate(rng, schema, 3);
    auto c = canonicalize(e);
    ASSERT_EQ(serialize(canonicalize(c)), serialize(c)) << serialize(e);
    // Reversing the children of every And/Or must not change the canonical form.
    std::function<ExprPtr(const ExprPtr&)> reverse = [&](const ExprPtr& x) -> ExprPtr {
      if (const auto* a = x->as<And>()) {
        std::vector<ExprPtr> kids;
        for (auto it = a->children.rbegin(); it != a->children.rend(); ++it) kids.push_back(reverse(*it));
        return conjunction(kids);
      }
      if (const auto* o = x->as<Or>()) {
        std::vector<ExprPtr> kids;
        for (auto it = o->children.rbegin(); it != o->children.rend(); ++it) kids.push_back(reverse(*it));
        return disjunction(kids);
      }
      if (const auto* n = x->as<Not>()) return negate(reverse(n->child));
      return x;
    };
    ASSERT_EQ(serialize(canonicalize(reverse(e))), serialize(c)) << serialize(e);
  }
}

TEST(CanonicalizeProperty, PreservesTruthValue) {
  Rng rng(12);
  auto catalog = test::small_catalog();
  auto db = test::small_database(rng, 50);
  const auto& rel = db.table("r");
  auto rows = rel.to_rows();
  for (int i = 0; i < 300; ++i) {
    auto e = test::random_predicate(rng, rel.schema(), 3);
    auto c = canonicalize(e);
    for (const auto& row : rows) {
      ASSERT_EQ(test::reference_predicate(e, rel.schema(), row), test::reference_predicate(c, rel.schema(), row))
          << serialize(e);
    }
  }
}

TEST(SubtreeAt, Paths) {
  auto scan = make_scan("people");
  auto filter = make_filter(compare(CompareOp::Gt, col("age"), lit(int64_t{30})), scan);
  EXPECT_EQ(subtree_at(filter, NodePath{}), filter);
  EXPECT_EQ(subtree_at(filter, NodePath{{0}}), scan);
  EXPECT_EQ(error_of([&] { subtree_at(filter, NodePath{{0, 1}}); }), ErrorCode::InvalidPath);
  EXPECT_EQ(error_of([&] { subtree_at(filter, NodePath{{1}}); }), ErrorCode::InvalidPath);
}

TEST(ReplaceAt, SharesUntouchedSubtrees) {
  auto left = make_scan("a");
  auto right = make_filter(compare(CompareOp::Eq, col("x"), lit(int64_t{1})), make_scan("b"));
  auto root = make_cartesian(left, right);
  auto replaced = replace_at(root, NodePath{{1, 0}}, make_scan("c"));
  EXPECT_EQ(replaced->child(0), left);
  EXPECT_EQ(plan_to_string(replaced), "CartesianProduct(Scan[a], Filter[= col:x i:1](Scan[c]))");
  EXPECT_EQ(plan_to_string(root), "CartesianProduct(Scan[a], Filter[= col:x i:1](Scan[b]))");
}

TEST(NodePath, Prefixes) {
  NodePath a{{0}};
  NodePath b{{0, 1}};
  EXPECT_TRUE(a.is_proper_prefix_of(b));
  EXPECT_FALSE(b.is_prefix_of(a));
  EXPECT_TRUE(a.is_prefix_of(a));
  EXPECT_FALSE(a.is_proper_prefix_of(a));
}

TEST(PlanJson, Format) {
  auto plan = make_filter(compare(CompareOp::Gt, col("age"), lit(int64_t{30})), make_scan("people"));
  auto j = plan_to_json(plan);
  EXPECT_EQ(j.at("op"), "Filter");
  EXPECT_TRUE(j.contains("attrs"));
  ASSERT_EQ(j.at("children").size(), 1u);
  EXPECT_EQ(j.at("children")[0].at("op"), "Scan");
}

TEST(PlanJsonProperty, RoundTripOnRandomPlans) {
  Rng rng(5);
  auto catalog = test::small_catalog();
  for (int i = 0; i < 500; ++i) {
    auto plan = test::random_plan(rng, catalog, 1 + static_cast<int>(rng.index(4)));
    auto back = plan_from_json(plan_to_json(plan));
    ASSERT_TRUE(structurally_equal(plan, back)) << plan_to_string(plan);
    ASSERT_EQ(plan_to_json(back).dump(), plan_to_json(plan).dump());
    ASSERT_EQ(output_schema(back, catalog), output_schema(plan, catalog));
  }
  LogicalPlan lp{"q7", make_scan("r")};
  auto back = logical_plan_from_json(logical_plan_to_json(lp));
  EXPECT_EQ(back.query_id, "q7");
  EXPECT_TRUE(structurally_equal(back.root, lp.root));
}

TEST(ExprJson, RoundTripOnRandomExpressions) {
  Rng rng(6);
  auto schema = test::small_catalog().table("u");
  for (int i = 0; i < 500; ++i) {
    auto e = test::random_predicate(rng, schema, 3);
    ASSERT_TRUE(structurally_equal(expr_from_json(expr_to_json(e)), e)) << serialize(e);
  }
}

TEST(InferSchemaProperty, DeterministicOnRandomPlans) {
  Rng rng(8);
  auto catalog = test::small_catalog();
  for (int i = 0; i < 300; ++i) {
    auto plan = test::random_plan(rng, catalog, 3);
    auto a = infer_schema(plan, catalog);
    auto b = infer_schema(plan, catalog);
    ASSERT_EQ(a.size(), b.size());
    for (const auto& [node, schema] : a) ASSERT_EQ(schema, b.at(node));
  }
}

TEST(PlanIr, ArityMatchesVariant) {
  EXPECT_EQ(arity(OpKind::Scan), 0u);
  EXPECT_EQ(arity(OpKind::CacheRead), 0u);
  EXPECT_EQ(arity(OpKind::Limit), 1u);
  EXPECT_EQ(arity(OpKind::CacheWrite), 1u);
  EXPECT_EQ(arity(OpKind::Union), 2u);
  EXPECT_EQ(error_of([] { PlanNode(FilterOp{nullptr}, {}); }), ErrorCode::InvalidPlan);
}

}  // namespace
}  // namespace mqo
