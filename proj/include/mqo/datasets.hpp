#pragma once

#include "mqo/schema.hpp"

namespace mqo::datasets {

/// Wide synthetic table: n_1..n_10 (Int64), d_1..d_10 (Float64), s_1..s_10 (Utf8).
inline constexpr const char* kSyntheticTable = "synthetic";
Schema synthetic_schema();

/// employees / departments / salaries / titles.
Catalog hr_catalog();

/// date_dim / item / store / store_sales, a small star schema.
Catalog star_catalog();

/// synthetic plus the star schema; the window-study query pool runs on it.
Catalog pool_catalog();

}  // namespace mqo::datasets
