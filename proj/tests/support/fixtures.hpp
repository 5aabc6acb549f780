#pragma once

#include <string>
#include <vector>

#include "mqo/batch.hpp"
#include "mqo/plan.hpp"

namespace mqo::test {

/// Directory holding the bundled workloads.
std::string workload_dir(const std::string& name);

/// The three employee/department/salary/title queries, parsed and optimized.
QueryBatch running_example_batch();
std::vector<std::pair<std::string, std::string>> running_example_sql();

}  // namespace mqo::test
