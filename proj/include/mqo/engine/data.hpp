#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "mqo/engine/executor.hpp"
#include "mqo/engine/relation.hpp"

namespace mqo::engine {

/// n_1..n_10 Int64 uniform on [1, 10^(i+2)], d_1..d_10 Float64 uniform on
/// [0, 1), s_1..s_10 strings of 20 lowercase letters. Deterministic per seed.
Relation generate_synthetic(uint64_t rows, uint64_t seed);

/// Star-schema tables (date_dim, item, store, store_sales); `sales_rows` fact
/// rows, dimension sizes scale with it.
Database generate_star(uint64_t sales_rows, uint64_t seed);

/// employees / departments / salaries / titles with `employees` rows.
Database generate_hr(uint64_t employees, uint64_t seed);

/// Header row with the schema's names, then one record per row.
Relation read_csv(std::istream& in, const Schema& schema, const std::string& source = "<input>");
Relation load_csv(const std::filesystem::path& path, const Schema& schema);
void write_csv(std::ostream& out, const Relation& relation);
void save_csv(const std::filesystem::path& path, const Relation& relation);

/// `<dir>/schema.json` lists the tables; each is read from `<dir>/<table>.csv`.
void save_database(const std::filesystem::path& dir, const Database& db);
Database load_database(const std::filesystem::path& dir);
/// Table schemas from `<dir>/schema.json` without reading any data.
Catalog load_catalog(const std::filesystem::path& dir);

}  // namespace mqo::engine
