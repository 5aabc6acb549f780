#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mqo {

enum class ErrorCode {
  UnknownTable,
  UnknownColumn,
  DuplicateColumn,
  TypeMismatch,
  UnionSchemaMismatch,
  InvalidPath,
  InvalidPlan,
  SyntaxError,
  InternalShapeMismatch,
  NotCoverable,
  MissingStats,
  EmptyRelation,
  SchemaMismatch,
  MissingCacheEntry,
  CacheRewrite,
  ParseError,
  TooLarge,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code so that
/// the CLI can map it to an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mqo
