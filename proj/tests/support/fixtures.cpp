#include "fixtures.hpp"

#include <fstream>
#include <sstream>

#include "mqo/datasets.hpp"
#include "mqo/sql/parser.hpp"

namespace mqo::test {

std::string workload_dir(const std::string& name) { return std::string(MQO_SOURCE_DIR) + "/workloads/" + name; }

std::vector<std::pair<std::string, std::string>> running_example_sql() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const char* id : {"q1", "q2", "q3"}) {
    std::ifstream in(workload_dir("running_example") + "/" + id + ".sql");
    std::stringstream buf;
    buf << in.rdbuf();
    out.emplace_back(id, buf.str());
  }
  return out;
}

QueryBatch running_example_batch() { return sql::build_batch(running_example_sql(), datasets::hr_catalog()); }

}  // namespace mqo::test
