#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mqo/batch.hpp"
#include "mqo/error.hpp"
#include "mqo/plan.hpp"

namespace mqo::sql {

/// Syntax errors report the byte offset of the offending token.
class SyntaxError : public Error {
 public:
  SyntaxError(size_t position, const std::string& message)
      : Error(ErrorCode::SyntaxError, "at offset " + std::to_string(position) + ": " + message),
        position_(position) {}

  size_t position() const { return position_; }

 private:
  size_t position_;
};

/// Parses one SELECT statement of the supported subset into an unoptimized
/// plan. Equalities in WHERE that relate columns of different FROM tables
/// become join conditions; joins follow FROM order (left-deep).
LogicalPlan parse(std::string_view sql, const Catalog& catalog, std::string query_id = "q");

/// Splits `;`-separated text into statements, ignoring quoted semicolons,
/// `--` comments and blank statements.
std::vector<std::string> split_statements(std::string_view text);

/// Parses and locally optimizes every statement of every `.sql` file in a
/// directory. Files are visited in lexicographic order; a file with several
/// statements yields ids `<stem>_<n>`.
QueryBatch load_sql_dir(const std::filesystem::path& dir, const Catalog& catalog);

/// Parses and locally optimizes a list of (id, sql) pairs.
QueryBatch build_batch(const std::vector<std::pair<std::string, std::string>>& statements,
                       const Catalog& catalog);

}  // namespace mqo::sql
