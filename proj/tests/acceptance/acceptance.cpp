// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "generators.hpp"
#include "mqo/covering.hpp"
#include "mqo/datasets.hpp"
#include "mqo/engine/runner.hpp"
#include "mqo/mckp.hpp"
#include "mqo/sharing.hpp"
#include "mqo/workbench.hpp"
#include "reference.hpp"

namespace {

using namespace mqo;

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Stops at the first violated expectation and records it.
struct Check {
  Verdict v;
  bool operator()(bool ok, const std::string& what) {
    if (!ok && v.pass) {
      v.pass = false;
      v.detail = what;
    }
    return ok;
  }
};

Verdict running_example() {
  Check check;
  auto batch = test::running_example_batch();
  auto catalog = datasets::hr_catalog();
  auto ses = identify_ses(batch, 2);
  std::vector<size_t> counts;
  for (const auto& se : ses) counts.push_back(se.m());
  std::multiset<size_t> got(counts.begin(), counts.end());
  if (!check(ses.size() == 4, "SE count " + std::to_string(ses.size()))) return check.v;
  if (!check(got == std::multiset<size_t>{2, 3, 2, 2}, "member counts")) return check.v;

  auto ces = build_ces(ses, batch, catalog).ces;
  auto groups = generate_kp_items(ces);
  std::set<std::set<std::vector<size_t>>> actual;
  for (const auto& g : groups) {
    std::set<std::vector<size_t>> items;
    for (const auto& item : g.items) {
      auto members = item.members;
      std::sort(members.begin(), members.end());
      items.insert(members);
    }
    actual.insert(items);
  }
  // CE indices: 0 join, 1 employees, 2 departments, 3 salaries.
  std::set<std::set<std::vector<size_t>>> expected = {{{0}, {1}, {2}, {1, 2}}, {{3}}};
  check(actual == expected, "knapsack groups differ");
  check(plan_to_string(ces[0].plan).rfind("Project[", 0) == 0 && ces[0].plan->child()->kind() == OpKind::Join,
        "first CE is not the shared join");
  if (check.v.pass) check.v.detail = "4 SEs (2,3,2,2), groups [ce1 ce2 ce3 ce2+ce3] [ce4]";
  return check.v;
}

Verdict equivalence_suite(std::vector<test::WorkloadOutcome>& outcomes) {
  Check check;
  size_t nonempty = 0;
  for (uint64_t seed = 1; seed <= 200; ++seed) {
    auto out = test::run_random_workload(seed);
    outcomes.push_back(out);
    nonempty += out.selected > 0;
    if (!check(out.equal, "seed " + std::to_string(seed) + ": " + out.failure)) return check.v;
    check(out.queries >= 2 && out.queries <= 6, "workload size");
    check(out.rows >= 100 && out.rows <= 10'000, "table size");
  }
  check.v.detail = std::to_string(outcomes.size()) + " workloads, " + std::to_string(nonempty) + " with caches";
  check(nonempty >= 50, "too few workloads exercised caching");
  return check.v;
}

Verdict mckp_exactness() {
  Check check;
  Rng rng(20'240'601);
  for (int i = 0; i < 1000; ++i) {
    auto inst = test::random_knapsack(rng, 12);
    auto oracle = brute_force(inst);
    auto exact = solve(inst, std::max<uint64_t>(inst.capacity, 1));
    if (!check(exact.total_value == oracle.total_value, "byte units, instance " + std::to_string(i))) return check.v;

    uint64_t scale = 1000 + rng.index(20'000);
    inst.capacity *= scale;
    for (auto& g : inst.groups) {
      for (auto& item : g) item.weight = item.weight * scale + rng.index(scale);
    }
    auto coarse = solve(inst, kDefaultUnits);
    uint64_t slack = inst.groups.size() * ((inst.capacity + kDefaultUnits - 1) / kDefaultUnits);
    KnapsackInstance shrunk = inst;
    shrunk.capacity = inst.capacity > slack ? inst.capacity - slack : 0;
    if (!check(coarse.total_weight <= inst.capacity, "infeasible at 4096 units")) return check.v;
    if (!check(coarse.total_value >= brute_force(shrunk).total_value, "rounding bound, instance " + std::to_string(i)))
      return check.v;
  }
  check.v.detail = "1000 instances";
  return check.v;
}

Verdict budget_compliance(const std::vector<test::WorkloadOutcome>& outcomes) {
  Check check;
  size_t runs = 0;
  for (const auto& o : outcomes) {
    ++runs;
    if (!check(o.selected_weight <= o.capacity, "seed " + std::to_string(o.seed))) return check.v;
  }
  for (auto kind : {workbench::MicroKind::Filter, workbench::MicroKind::Project, workbench::MicroKind::Mixed}) {
    for (double fraction : {0.0, 0.1, 0.3, 1.0}) {
      auto r = workbench::run_micro(kind, 5000, 7, static_cast<uint64_t>(fraction * 5000 * 400));
      ++runs;
      if (!check(r.pipeline.selected_weight() <= r.budget, "micro " + std::string(workbench::to_string(kind))))
        return check.v;
      check(r.comparison.ws_spills == 0, "worksharing spilled within a compliant selection");
    }
  }
  check.v.detail = std::to_string(runs) + " optimizations, 0 violations";
  return check.v;
}

Verdict filter_micro() {
  Check check;
  const uint64_t n = 1'000'000;
  auto r = workbench::run_micro(workbench::MicroKind::Filter, n, 1);
  const auto& c = r.comparison;
  check(c.all_equal(), "results differ");
  check(c.baseline_total.base_tuples_scanned == 2 * n,
        "baseline scanned " + std::to_string(c.baseline_total.base_tuples_scanned));
  check(c.worksharing_total.base_tuples_scanned == n,
        "worksharing scanned " + std::to_string(c.worksharing_total.base_tuples_scanned));
  check(c.ws_cache_bytes < c.fc_cache_bytes, "worksharing cache not smaller");
  double share = static_cast<double>(c.ws_cache_bytes) / static_cast<double>(c.fc_cache_bytes);
  check(std::abs(share - 0.25) <= 0.05, "cache share " + std::to_string(share));
  if (check.v.pass) {
    std::ostringstream s;
    s << "scanned " << c.worksharing_total.base_tuples_scanned << " vs " << c.baseline_total.base_tuples_scanned
      << ", cache share " << share;
    check.v.detail = s.str();
  }
  return check.v;
}

Verdict window_study() {
  Check check;
  auto pool = workbench::load_pool(test::workload_dir("pool"));
  auto db = workbench::pool_database(20'000, 1);
  StatsCatalog stats;
  for (const auto& [name, rel] : db.tables()) stats[name] = collect_stats(rel);
  workbench::WindowConfig config;
  config.windows = {1, 5, 10, 20};
  config.trials = 20;
  auto report = workbench::run_window(pool, db, stats, config);
  std::ostringstream means;
  for (size_t i = 0; i < report.summaries.size(); ++i) {
    means << (i ? " " : "") << report.summaries[i].se_count.mean;
    if (i > 0) check(report.summaries[i].se_count.mean >= report.summaries[i - 1].se_count.mean, "SE mean decreases");
  }
  double base = 0, ws = 0;
  for (const auto& t : report.trials) {
    check(t.equal, "trial result differs");
    if (t.window != 20) continue;
    base += t.baseline_cost;
    ws += t.worksharing_cost;
  }
  double ratio = ws / base;
  check(ratio < 1, "W=20 ratio " + std::to_string(ratio));
  if (check.v.pass) check.v.detail = "mean SEs " + means.str() + "; W=20 ratio " + std::to_string(ratio);
  return check.v;
}

// True when the gtest binary runs at least one test under `filter` and all pass.
bool run_binary(const std::string& binary, const std::string& filter) {
  std::string cmd = binary + " --gtest_filter='" + filter + "' 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return false;
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
  return ok && out.find("[  PASSED  ] 0 tests") == std::string::npos && out.find("[  PASSED  ]") != std::string::npos;
}

Verdict property_suites() {
  Check check;
  check(run_binary(MQO_TEST_FINGERPRINT, "FingerprintProperty.*"), "fingerprint mutations");
  check(run_binary(MQO_TEST_COST,
                   "EstimateProperty.*:Estimate.EqualityWithinFactorTwoOnUniformData:EvaluateCes.ValueGrowsWithConsumers"),
        "cost-model properties");
  if (check.v.pass) check.v.detail = "fingerprint and cost-model suites";
  return check.v;
}

Verdict engine_differential() {
  Check check;
  Rng rng(31'337);
  auto catalog = test::small_catalog();
  const int plans = 250;
  for (int i = 0; i < plans; ++i) {
    auto db = test::small_database(rng, 100);
    auto plan = test::random_plan(rng, catalog, 1 + static_cast<int>(rng.index(4)));
    engine::CacheStore cache;
    auto actual = engine::execute(plan, db, cache).relation;
    auto expected = test::reference_execute(plan, db);
    if (!check(engine::same_multiset(actual, expected), plan_to_string(plan))) return check.v;
  }
  check.v.detail = std::to_string(plans) + " plans";
  return check.v;
}

}  // namespace

int main() {
  std::vector<test::WorkloadOutcome> outcomes;
  struct Criterion {
    int number;
    std::string name;
    double limit_s;
    std::function<Verdict()> run;
  };
  std::vector<Criterion> criteria = {
      {1, "running example golden", 1, running_example},
      {2, "semantic equivalence on random workloads", 120, [&] { return equivalence_suite(outcomes); }},
      {3, "knapsack exactness and rounding bound", 30, mckp_exactness},
      {4, "budget compliance", 60, [&] { return budget_compliance(outcomes); }},
      {5, "filter micro-benchmark at 10^6 rows", 60, filter_micro},
      {6, "window study on the query pool", 300, window_study},
      {7, "property suites", 120, property_suites},
      {8, "engine vs reference interpreter", 60, engine_differential},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (v.pass && secs > c.limit_s) v = {false, "over the " + std::to_string(static_cast<int>(c.limit_s)) + " s limit"};
    failed += !v.pass;
    std::printf("%s %d %s (%.2f s) %s\n", v.pass ? "PASS" : "FAIL", c.number, c.name.c_str(), secs, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
