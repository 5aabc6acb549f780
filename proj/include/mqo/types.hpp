#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mqo {

enum class DataType { Int64, Float64, Utf8 };

std::string_view to_string(DataType type);
std::optional<DataType> data_type_from_string(std::string_view name);

inline bool is_numeric(DataType type) { return type != DataType::Utf8; }

/// Types that may be compared with each other (numbers mix freely).
inline bool comparable(DataType a, DataType b) { return is_numeric(a) == is_numeric(b); }

using Value = std::variant<int64_t, double, std::string>;

DataType type_of(const Value& value);

/// Three-way comparison for comparable values; numeric values compare by magnitude.
int compare_values(const Value& lhs, const Value& rhs);

/// Type-tagged rendering used by canonical serialization: `i:30`, `f:0.5`, `s:"us"`.
std::string render_tagged(const Value& value);

/// Plain rendering for CSV and human-readable output.
std::string render_plain(const Value& value);

/// In-memory footprint charged for one value of a column. Strings pay four
/// bytes of length overhead on top of their payload.
inline constexpr uint64_t kFixedWidthBytes = 8;
inline constexpr uint64_t kStringOverheadBytes = 4;

}  // namespace mqo
