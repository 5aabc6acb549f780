#include "mqo/types.hpp"

#include <cmath>
#include <cstdlib>
#include <cstdio>

#include "mqo/error.hpp"

namespace mqo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownTable: return "UnknownTable";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::DuplicateColumn: return "DuplicateColumn";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::UnionSchemaMismatch: return "UnionSchemaMismatch";
    case ErrorCode::InvalidPath: return "InvalidPath";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::InternalShapeMismatch: return "InternalShapeMismatch";
    case ErrorCode::NotCoverable: return "NotCoverable";
    case ErrorCode::MissingStats: return "MissingStats";
    case ErrorCode::EmptyRelation: return "EmptyRelation";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::MissingCacheEntry: return "MissingCacheEntry";
    case ErrorCode::CacheRewrite: return "CacheRewrite";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(DataType type) {
  switch (type) {
    case DataType::Int64: return "Int64";
    case DataType::Float64: return "Float64";
    case DataType::Utf8: return "Utf8";
  }
  return "?";
}

std::optional<DataType> data_type_from_string(std::string_view name) {
  if (name == "Int64") return DataType::Int64;
  if (name == "Float64") return DataType::Float64;
  if (name == "Utf8") return DataType::Utf8;
  return std::nullopt;
}

DataType type_of(const Value& value) {
  switch (value.index()) {
    case 0: return DataType::Int64;
    case 1: return DataType::Float64;
    default: return DataType::Utf8;
  }
}

int compare_values(const Value& lhs, const Value& rhs) {
  if (const auto* a = std::get_if<std::string>(&lhs)) {
    const auto* b = std::get_if<std::string>(&rhs);
    if (b == nullptr) throw Error(ErrorCode::TypeMismatch, "string compared with number");
    int c = a->compare(*b);
    return (c > 0) - (c < 0);
  }
  if (std::holds_alternative<std::string>(rhs)) {
    throw Error(ErrorCode::TypeMismatch, "number compared with string");
  }
  if (lhs.index() == 0 && rhs.index() == 0) {
    int64_t a = std::get<int64_t>(lhs);
    int64_t b = std::get<int64_t>(rhs);
    return (a > b) - (a < b);
  }
  double a = lhs.index() == 0 ? static_cast<double>(std::get<int64_t>(lhs)) : std::get<double>(lhs);
  double b = rhs.index() == 0 ? static_cast<double>(std::get<int64_t>(rhs)) : std::get<double>(rhs);
  return (a > b) - (a < b);
}

namespace {

std::string render_double(double v) {
  // Shortest representation that round-trips.
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  std::string out(buf);
  if (std::isfinite(v) && out.find_first_of(".eEn") == std::string::npos) out += ".0";
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string render_tagged(const Value& value) {
  switch (value.index()) {
    case 0: return "i:" + std::to_string(std::get<int64_t>(value));
    case 1: return "f:" + render_double(std::get<double>(value));
    default: return "s:" + quote(std::get<std::string>(value));
  }
}

std::string render_plain(const Value& value) {
  switch (value.index()) {
    case 0: return std::to_string(std::get<int64_t>(value));
    case 1: return render_double(std::get<double>(value));
    default: return std::get<std::string>(value);
  }
}

}  // namespace mqo
