#include "mqo/engine/data.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mqo/datasets.hpp"
#include "mqo/error.hpp"
#include "mqo/random.hpp"

namespace mqo::engine {

namespace {

ColumnPtr ints(std::vector<int64_t> v) { return std::make_shared<ColumnData>(std::move(v)); }
ColumnPtr doubles(std::vector<double> v) { return std::make_shared<ColumnData>(std::move(v)); }
ColumnPtr strings(StringColumn v) { return std::make_shared<ColumnData>(std::move(v)); }

template <typename F>
std::vector<int64_t> int_column(uint64_t rows, F draw) {
  std::vector<int64_t> v(rows);
  for (auto& x : v) x = draw();
  return v;
}

StringColumn labels(uint64_t rows, const std::vector<std::string>& pool, Rng& rng) {
  StringColumn c;
  for (uint64_t i = 0; i < rows; ++i) c.push_back(pool[rng.range(0, static_cast<int64_t>(pool.size()) - 1)]);
  return c;
}

Relation make_relation(const Catalog& catalog, const std::string& table, std::vector<ColumnPtr> cols) {
  return Relation(catalog.table(table), std::move(cols));
}

}  // namespace

Relation generate_synthetic(uint64_t rows, uint64_t seed) {
  if (rows == 0) throw Error(ErrorCode::InvalidArgument, "synthetic table needs at least one row");
  Rng rng(seed);
  std::vector<ColumnPtr> cols;
  int64_t bound = 100;
  for (int i = 1; i <= 10; ++i) {
    bound *= 10;
    cols.push_back(ints(int_column(rows, [&] { return rng.range(1, bound); })));
  }
  for (int i = 1; i <= 10; ++i) {
    std::vector<double> v(rows);
    for (auto& x : v) x = rng.unit();
    cols.push_back(doubles(std::move(v)));
  }
  for (int i = 1; i <= 10; ++i) {
    StringColumn c;
    c.reserve(rows, rows * 20);
    std::array<char, 20> buf;
    for (uint64_t r = 0; r < rows; ++r) {
      rng.letters(buf.data(), buf.size());
      c.push_back(std::string_view(buf.data(), buf.size()));
    }
    cols.push_back(strings(std::move(c)));
  }
  return Relation(datasets::synthetic_schema(), std::move(cols));
}

Database generate_star(uint64_t sales_rows, uint64_t seed) {
  if (sales_rows == 0) throw Error(ErrorCode::InvalidArgument, "star schema needs at least one sales row");
  Rng rng(seed);
  Catalog cat = datasets::star_catalog();
  Database db;

  const int64_t days = 730;
  static const std::vector<std::string> day_names = {"Monday", "Tuesday",  "Wednesday", "Thursday",
                                                      "Friday", "Saturday", "Sunday"};
  {
    std::vector<int64_t> sk;
    std::vector<int64_t> year;
    std::vector<int64_t> moy;
    StringColumn name;
    for (int64_t d = 0; d < days; ++d) {
      sk.push_back(d + 1);
      year.push_back(2000 + d / 365);
      moy.push_back((d % 365) / 31 + 1 > 12 ? 12 : (d % 365) / 31 + 1);
      name.push_back(day_names[d % 7]);
    }
    db.add("date_dim", make_relation(cat, "date_dim", {ints(sk), ints(year), ints(moy), strings(std::move(name))}));
  }

  const auto items = static_cast<int64_t>(std::max<uint64_t>(20, sales_rows / 50));
  static const std::vector<std::string> categories = {"Books", "Children", "Electronics", "Home",  "Jewelry",
                                                       "Men",   "Music",    "Shoes",       "Sports", "Women"};
  {
    std::vector<int64_t> sk;
    std::vector<int64_t> brand_id;
    StringColumn brand;
    std::vector<int64_t> manufact;
    std::vector<int64_t> manager;
    for (int64_t i = 0; i < items; ++i) {
      sk.push_back(i + 1);
      int64_t b = rng.range(1, 50);
      brand_id.push_back(b);
      brand.push_back("brand#" + std::to_string(b));
      manufact.push_back(rng.range(1, 100));
      manager.push_back(rng.range(1, 100));
    }
    db.add("item", make_relation(cat, "item",
                                 {ints(sk), ints(brand_id), strings(std::move(brand)), ints(manufact), ints(manager),
                                  strings(labels(static_cast<uint64_t>(items), categories, rng))}));
  }

  const int64_t stores = 12;
  static const std::vector<std::string> states = {"CA", "GA", "IL", "NY", "TN", "TX"};
  {
    std::vector<int64_t> sk;
    StringColumn name;
    std::vector<double> offset;
    for (int64_t s = 0; s < stores; ++s) {
      sk.push_back(s + 1);
      name.push_back("store_" + std::to_string(s + 1));
      offset.push_back(-5.0 - static_cast<double>(rng.range(0, 3)));
    }
    db.add("store", make_relation(cat, "store", {ints(sk), strings(std::move(name)), doubles(offset),
                                                 strings(labels(stores, states, rng))}));
  }

  {
    std::vector<int64_t> date(sales_rows);
    std::vector<int64_t> item(sales_rows);
    std::vector<int64_t> store(sales_rows);
    std::vector<int64_t> qty(sales_rows);
    std::vector<double> price(sales_rows);
    std::vector<double> ext(sales_rows);
    for (uint64_t r = 0; r < sales_rows; ++r) {
      date[r] = rng.range(1, days);
      item[r] = rng.range(1, items);
      store[r] = rng.range(1, stores);
      qty[r] = rng.range(1, 100);
      price[r] = static_cast<double>(rng.range(100, 20000)) / 100.0;
      ext[r] = price[r] * static_cast<double>(qty[r]);
    }
    db.add("store_sales", make_relation(cat, "store_sales",
                                        {ints(date), ints(item), ints(store), ints(qty), doubles(price), doubles(ext)}));
  }
  return db;
}

Database generate_hr(uint64_t employees, uint64_t seed) {
  if (employees == 0) throw Error(ErrorCode::InvalidArgument, "hr dataset needs at least one employee");
  Rng rng(seed);
  Catalog cat = datasets::hr_catalog();
  Database db;
  const int64_t deps = 10;
  auto n = static_cast<int64_t>(employees);

  std::vector<int64_t> id;
  StringColumn name;
  std::vector<int64_t> dep;
  std::vector<int64_t> age;
  StringColumn gender;
  std::vector<int64_t> hire;
  for (int64_t i = 0; i < n; ++i) {
    id.push_back(i + 1);
    name.push_back("emp_" + std::to_string(i + 1));
    dep.push_back(rng.range(1, deps));
    age.push_back(rng.range(20, 65));
    gender.push_back(rng.range(0, 1) ? "F" : "M");
    hire.push_back(rng.range(1990, 2020));
  }
  db.add("employees", make_relation(cat, "employees", {ints(id), strings(std::move(name)), ints(dep), ints(age),
                                                        strings(std::move(gender)), ints(hire)}));

  static const std::vector<std::string> dept_names = {"Sales",   "Research", "Finance", "Legal", "Support",
                                                       "Product", "People",   "Ops",     "Design", "Security"};
  static const std::vector<std::string> cities = {"us", "fr", "uk", "de"};
  {
    std::vector<int64_t> did;
    StringColumn dname;
    for (int64_t d = 0; d < deps; ++d) {
      did.push_back(d + 1);
      dname.push_back(dept_names[d]);
    }
    db.add("departments", make_relation(cat, "departments",
                                        {ints(did), strings(std::move(dname)), strings(labels(deps, cities, rng))}));
  }
  {
    std::vector<int64_t> emp(id);
    std::vector<int64_t> salary;
    std::vector<int64_t> from;
    std::vector<int64_t> to;
    for (int64_t i = 0; i < n; ++i) {
      salary.push_back(rng.range(15000, 120000));
      int64_t f = rng.range(1990, 2020);
      from.push_back(f);
      to.push_back(f + rng.range(1, 10));
    }
    db.add("salaries", make_relation(cat, "salaries", {ints(emp), ints(salary), ints(from), ints(to)}));
  }
  {
    static const std::vector<std::string> titles = {"Engineer", "Manager", "Analyst", "Staff", "Director"};
    std::vector<int64_t> emp(id);
    std::vector<int64_t> from;
    std::vector<int64_t> to;
    for (int64_t i = 0; i < n; ++i) {
      int64_t f = rng.range(1990, 2020);
      from.push_back(f);
      to.push_back(f + rng.range(1, 10));
    }
    db.add("titles", make_relation(cat, "titles",
                                   {ints(emp), strings(labels(employees, titles, rng)), ints(from), ints(to)}));
  }
  return db;
}

namespace {

bool needs_quotes(std::string_view s) {
  return s.empty() || s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void write_field(std::ostream& out, std::string_view s) {
  if (!needs_quotes(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

// Splits one record; returns false at end of input. `line` tracks the
// physical line the record started on.
bool read_record(std::istream& in, std::vector<std::string>& fields, size_t& line, size_t& start_line,
                 const std::string& source) {
  fields.clear();
  int c = in.peek();
  if (c == EOF) return false;
  start_line = ++line;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  while (true) {
    c = in.get();
    if (quoted) {
      if (c == EOF) throw Error(ErrorCode::ParseError, source + ":" + std::to_string(start_line) + ": unterminated quote");
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(static_cast<char>(c));
      }
      continue;
    }
    if (c == EOF || c == '\n' || c == '\r') {
      if (c == '\r' && in.peek() == '\n') in.get();
      fields.push_back(std::move(field));
      return true;
    }
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else {
      field.push_back(static_cast<char>(c));
    }
  }
}

template <typename T>
T parse_number(const std::string& text, const std::string& where) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::ParseError, where + ": '" + text + "' is not a valid number");
  }
  return v;
}

}  // namespace

Relation read_csv(std::istream& in, const Schema& schema, const std::string& source) {
  std::vector<std::string> fields;
  size_t line = 0;
  size_t start = 0;
  if (!read_record(in, fields, line, start, source)) {
    throw Error(ErrorCode::ParseError, source + ":1: missing header row");
  }
  if (fields != schema.names()) {
    throw Error(ErrorCode::SchemaMismatch, source + ": header does not match " + schema.to_string());
  }
  std::vector<ColumnData> cols;
  for (const auto& c : schema.columns()) cols.push_back(empty_column(c.type));
  while (read_record(in, fields, line, start, source)) {
    std::string where = source + ":" + std::to_string(start);
    if (fields.size() != schema.size()) {
      throw Error(ErrorCode::ParseError, where + ": expected " + std::to_string(schema.size()) + " fields, got " +
                                             std::to_string(fields.size()));
    }
    for (size_t i = 0; i < fields.size(); ++i) {
      switch (schema[i].type) {
        case DataType::Int64: std::get<0>(cols[i]).push_back(parse_number<int64_t>(fields[i], where)); break;
        case DataType::Float64: std::get<1>(cols[i]).push_back(parse_number<double>(fields[i], where)); break;
        case DataType::Utf8: std::get<2>(cols[i]).push_back(fields[i]); break;
      }
    }
  }
  std::vector<ColumnPtr> ptrs;
  for (auto& c : cols) ptrs.push_back(std::make_shared<ColumnData>(std::move(c)));
  return Relation(schema, std::move(ptrs));
}

Relation load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_csv(in, schema, path.string());
}

void write_csv(std::ostream& out, const Relation& relation) {
  const auto& schema = relation.schema();
  for (size_t i = 0; i < schema.size(); ++i) {
    if (i) out << ',';
    write_field(out, schema[i].name);
  }
  out << '\n';
  char buf[64];
  for (size_t r = 0; r < relation.row_count(); ++r) {
    for (size_t c = 0; c < relation.column_count(); ++c) {
      if (c) out << ',';
      const ColumnData& col = relation.column(c);
      switch (col.index()) {
        case 0: {
          auto res = std::to_chars(buf, buf + sizeof buf, std::get<0>(col)[r]);
          out.write(buf, res.ptr - buf);
          break;
        }
        case 1: {
          auto res = std::to_chars(buf, buf + sizeof buf, std::get<1>(col)[r]);
          out.write(buf, res.ptr - buf);
          break;
        }
        default: write_field(out, std::get<2>(col).at(r));
      }
    }
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const Relation& relation) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_csv(out, relation);
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

void save_database(const std::filesystem::path& dir, const Database& db) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  nlohmann::json tables = nlohmann::json::object();
  for (const auto& [name, rel] : db.tables()) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : rel.schema().columns()) cols.push_back({{"name", c.name}, {"type", to_string(c.type)}});
    tables[name] = cols;
    save_csv(dir / (name + ".csv"), rel);
  }
  std::ofstream out(dir / "schema.json");
  if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / "schema.json").string());
  out << nlohmann::json{{"tables", tables}}.dump(2) << "\n";
}

Catalog load_catalog(const std::filesystem::path& dir) {
  auto path = dir / "schema.json";
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  Catalog catalog;
  try {
    auto j = nlohmann::json::parse(in);
    for (const auto& [name, cols] : j.at("tables").items()) {
      std::vector<ColumnDef> defs;
      for (const auto& c : cols) {
        auto type = data_type_from_string(c.at("type").get<std::string>());
        if (!type) throw Error(ErrorCode::ParseError, path.string() + ": bad type for table " + name);
        defs.push_back({c.at("name").get<std::string>(), *type});
      }
      catalog.tables.emplace(name, Schema(std::move(defs)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return catalog;
}

Database load_database(const std::filesystem::path& dir) {
  Database db;
  for (const auto& [name, schema] : load_catalog(dir).tables) db.add(name, load_csv(dir / (name + ".csv"), schema));
  return db;
}

}  // namespace mqo::engine
