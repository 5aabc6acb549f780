#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "generators.hpp"
#include "mqo/datasets.hpp"
#include "mqo/engine/runner.hpp"
#include "mqo/sql/optimizer.hpp"
#include "mqo/sql/parser.hpp"

namespace mqo {
namespace {

Catalog people_catalog() {
  Catalog c;
  c.tables.emplace("people", Schema({{"name", DataType::Utf8}, {"age", DataType::Int64}}));
  return c;
}

TEST(Parse, MinimalQuery) {
  auto plan = sql::parse("SELECT name FROM people", people_catalog());
  EXPECT_EQ(plan_to_string(plan.root), "Project[name](Scan[people])");
}

TEST(Parse, JoinConditionRecoveredFromWhere) {
  auto plan = sql::parse(
      "SELECT id, name, salary, from_date FROM employees, salaries "
      "WHERE id = emp_id AND age > 30 AND salary > 30000",
      datasets::hr_catalog(), "q3");
  EXPECT_EQ(plan.query_id, "q3");
  const auto& root = plan.root;
  ASSERT_EQ(root->kind(), OpKind::Project);
  ASSERT_EQ(root->child()->kind(), OpKind::Filter);
  const auto& join = root->child()->child();
  ASSERT_EQ(join->kind(), OpKind::Join);
  EXPECT_EQ(serialize(canonicalize(join->as<JoinOp>().condition)), "= col:emp_id col:id");
  EXPECT_EQ(plan_to_string(join->child(0)), "Scan[employees]");
  EXPECT_EQ(plan_to_string(join->child(1)), "Scan[salaries]");
  EXPECT_EQ(serialize(canonicalize(root->child()->as<FilterOp>().predicate)),
            "and(> col:age i:30, > col:salary i:30000)");
}

TEST(Parse, SyntaxErrorCarriesPosition) {
  try {
    sql::parse("SELEC x FROM t", people_catalog());
    FAIL() << "expected a syntax error";
  } catch (const sql::SyntaxError& e) {
    EXPECT_EQ(e.code(), ErrorCode::SyntaxError);
    EXPECT_EQ(e.position(), 0u);
  }
  try {
    sql::parse("SELECT name FROM people WHERE age >", people_catalog());
    FAIL() << "expected a syntax error";
  } catch (const sql::SyntaxError& e) {
    EXPECT_EQ(e.position(), 35u);
  }
}

TEST(Parse, UnknownNames) {
  try {
    sql::parse("SELECT name FROM nobody", people_catalog());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownTable);
  }
  try {
    sql::parse("SELECT salary FROM people", people_catalog());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownColumn);
  }
}

TEST(Parse, AggregatesOrderLimitAndCaseWhen) {
  auto catalog = datasets::star_catalog();
  auto plan = sql::parse(
      "SELECT s_store_name, SUM(CASE WHEN d_day_name = 'Sunday' THEN ss_sales_price ELSE NULL END) AS sun, "
      "COUNT(*) AS n FROM date_dim, store_sales, store WHERE d_date_sk = ss_sold_date_sk "
      "AND s_store_sk = ss_store_sk GROUP BY s_store_name ORDER BY s_store_name, sun DESC LIMIT 10",
      catalog);
  const auto& root = plan.root;
  ASSERT_EQ(root->kind(), OpKind::Limit);
  EXPECT_EQ(root->as<LimitOp>().count, 10u);
  ASSERT_EQ(root->child()->kind(), OpKind::Sort);
  EXPECT_EQ(root->child()->as<SortOp>().keys,
            (std::vector<SortKey>{{"s_store_name", false}, {"sun", true}}));
  auto schema = output_schema(root, catalog);
  EXPECT_EQ(schema.names(), (std::vector<std::string>{"s_store_name", "sun", "n"}));

  // Find the aggregate and check the lowered CASE.
  PlanPtr node = root;
  while (node->kind() != OpKind::Aggregate) node = node->child();
  const auto& agg = node->as<AggregateOp>();
  ASSERT_EQ(agg.aggregates.size(), 2u);
  EXPECT_EQ(agg.aggregates[0].func, AggFunc::Sum);
  EXPECT_EQ(agg.aggregates[0].column, "ss_sales_price");
  EXPECT_EQ(serialize(agg.aggregates[0].condition), "= col:d_day_name s:\"Sunday\"");
  EXPECT_EQ(agg.aggregates[1].func, AggFunc::Count);
}

TEST(Parse, CaseElseMustBeNeutral) {
  EXPECT_THROW(sql::parse("SELECT SUM(CASE WHEN age > 3 THEN age ELSE 5 END) AS x FROM people", people_catalog()),
               sql::SyntaxError);
}

TEST(Parse, BetweenInAndNot) {
  auto plan = sql::parse("SELECT name FROM people WHERE age BETWEEN 3 AND 5 OR NOT age IN (1, 2)", people_catalog());
  EXPECT_EQ(serialize(canonicalize(plan.root->child()->as<FilterOp>().predicate)),
            "or(and(<= col:age i:5, >= col:age i:3), not(or(= col:age i:1, = col:age i:2)))");
}

TEST(SplitStatements, IgnoresQuotedSemicolonsAndComments) {
  auto parts = sql::split_statements("SELECT 'a;b' FROM t; -- c;\n ; SELECT x FROM y;");
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_NE(parts[0].find("'a;b'"), std::string::npos);
  EXPECT_NE(parts[1].find("SELECT x FROM y"), std::string::npos);
}

TEST(LoadSqlDir, FileOrderAndMultiStatementIds) {
  auto dir = std::filesystem::temp_directory_path() / "mqo_sql_dir_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "b.sql") << "SELECT name FROM people;\nSELECT age FROM people WHERE age > 1;";
  std::ofstream(dir / "a.sql") << "SELECT age FROM people";
  std::ofstream(dir / "notes.txt") << "ignored";
  auto batch = sql::load_sql_dir(dir, people_catalog());
  ASSERT_EQ(batch.size(), 3u);
  EXPECT_EQ(batch.at(0).query_id, "a");
  EXPECT_EQ(batch.at(1).query_id, "b_1");
  EXPECT_EQ(batch.at(2).query_id, "b_2");
  std::filesystem::remove_all(dir);
}

TEST(OptimizeSingle, PushesConjunctsToTheirSides) {
  auto catalog = datasets::hr_catalog();
  auto pred = conjunction({compare(CompareOp::Eq, col("gender"), lit(std::string("F"))),
                           compare(CompareOp::Eq, col("location"), lit(std::string("us")))});
  auto join = make_join(compare(CompareOp::Eq, col("dep"), col("dept_id")), make_scan("employees"),
                        make_scan("departments"));
  auto plan = make_project(std::vector<std::string>{"name", "dept_name"}, make_filter(pred, join));
  auto opt = sql::optimize_single({"q", plan}, catalog);
  EXPECT_EQ(plan_to_string(opt.root),
            "Project[name,dept_name](Join[= col:dep col:dept_id]("
            "Project[name,dep](Filter[= col:gender s:\"F\"](Scan[employees])), "
            "Project[dept_id,dept_name](Filter[= col:location s:\"us\"](Scan[departments]))))");
}

TEST(OptimizeSingle, CollapsesAdjacentProjects) {
  Catalog c;
  c.tables.emplace("s", Schema({{"a", DataType::Int64}, {"b", DataType::Int64}}));
  auto plan = make_project(std::vector<std::string>{"a"}, make_project(std::vector<std::string>{"a", "b"}, make_scan("s")));
  EXPECT_EQ(plan_to_string(sql::collapse_adjacent(plan)), "Project[a](Scan[s])");
  EXPECT_EQ(plan_to_string(sql::optimize_single({"q", plan}, c).root), "Project[a](Scan[s])");
}

TEST(OptimizeSingle, FixpointUnchanged) {
  auto batch = test::running_example_batch();
  for (const auto& q : batch.queries()) {
    auto again = sql::optimize_single(q.plan, datasets::hr_catalog());
    EXPECT_TRUE(structurally_equal(again.root, q.plan.root)) << q.query_id;
  }
}

TEST(OptimizeSingle, RunningExampleShapes) {
  auto batch = test::running_example_batch();
  EXPECT_EQ(plan_to_string(batch.find("q3").plan.root),
            "Project[id,name,salary,from_date](Join[= col:emp_id col:id]("
            "Project[id,name](Filter[> col:age i:30](Scan[employees])), "
            "Project[emp_id,salary,from_date](Filter[> col:salary i:30000](Scan[salaries]))))");
}

// Chain of Filter/Project nodes directly above each scan.
void check_normal_form(const PlanPtr& node, int filters, int projects, const std::string& context) {
  if (node->kind() == OpKind::Scan) {
    EXPECT_LE(filters, 1) << context;
    EXPECT_LE(projects, 1) << context;
    return;
  }
  for (const auto& c : node->children()) {
    if (node->kind() == OpKind::Filter) {
      check_normal_form(c, filters + 1, projects, context);
    } else if (node->kind() == OpKind::Project) {
      check_normal_form(c, filters, projects + 1, context);
    } else {
      check_normal_form(c, 0, 0, context);
    }
  }
}

TEST(OptimizeSingleProperty, SemanticsIdempotenceAndNormalForm) {
  auto catalog = test::workload_catalog();
  auto db = test::workload_database(2000, 21);
  Rng rng(22);
  engine::CacheStore cache;
  for (int i = 0; i < 150; ++i) {
    std::string sql = test::random_query(rng);
    auto raw = sql::parse(sql, catalog);
    auto opt = sql::optimize_single(raw, catalog);
    auto twice = sql::optimize_single(opt, catalog);
    ASSERT_TRUE(structurally_equal(opt.root, twice.root)) << sql;
    check_normal_form(opt.root, 0, 0, sql);
    ASSERT_EQ(output_schema(opt.root, catalog), output_schema(raw.root, catalog)) << sql;
    auto expected = engine::execute(raw.root, db, cache).relation;
    auto actual = engine::execute(opt.root, db, cache).relation;
    ASSERT_TRUE(engine::results_match(raw.root, expected, actual)) << sql;
  }
}

TEST(QueryBatch, UniqueIds) {
  QueryBatch batch;
  batch.add({"q1", "", {"q1", make_scan("people")}});
  EXPECT_THROW(batch.add({"q1", "", {"q1", make_scan("people")}}), Error);
  EXPECT_EQ(batch.index_of("q1"), 0u);
  EXPECT_THROW(batch.find("q2"), Error);
}

}  // namespace
}  // namespace mqo
