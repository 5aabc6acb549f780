#pragma once

#include "mqo/plan.hpp"

namespace mqo::sql {

/// Single-query rewrites applied before multi-query optimization, in a fixed
/// order per pass until nothing changes:
///   1. split conjunctive filters and place each conjunct at the lowest node
///      whose schema provides its columns (through projections, joins, sorts);
///   2. prune columns: scans and joins (with any filters directly above them)
///      get a projection of exactly the columns needed upstream;
///   3. collapse adjacent projections (adjacent filters merge in step 1).
LogicalPlan optimize_single(const LogicalPlan& plan, const Catalog& catalog);

PlanPtr push_down_filters(const PlanPtr& root, const Catalog& catalog);
PlanPtr prune_columns(const PlanPtr& root, const Catalog& catalog);
PlanPtr collapse_adjacent(const PlanPtr& root);

}  // namespace mqo::sql
