#include "mqo/sql/parser.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mqo/sql/optimizer.hpp"

namespace mqo {

QueryBatch::QueryBatch(std::vector<Query> queries) {
  for (auto& q : queries) add(std::move(q));
}

void QueryBatch::add(Query query) {
  for (const auto& q : queries_) {
    if (q.query_id == query.query_id) {
      throw Error(ErrorCode::InvalidArgument, "duplicate query id '" + query.query_id + "'");
    }
  }
  queries_.push_back(std::move(query));
}

const Query& QueryBatch::find(const std::string& query_id) const { return queries_[index_of(query_id)]; }

size_t QueryBatch::index_of(const std::string& query_id) const {
  for (size_t i = 0; i < queries_.size(); ++i) {
    if (queries_[i].query_id == query_id) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown query id '" + query_id + "'");
}

}  // namespace mqo

namespace mqo::sql {

namespace {

enum class Tok { Word, Int, Float, String, Symbol, End };

struct Token {
  Tok kind;
  std::string text;  // words are kept verbatim; keyword checks are case-insensitive
  size_t pos;
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<Token> tokenize(std::string_view sql) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < sql.size()) {
    char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < sql.size() && sql[i + 1] == '-') {
      while (i < sql.size() && sql[i] != '\n') ++i;
      continue;
    }
    size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < sql.size() && (std::isalnum(static_cast<unsigned char>(sql[i])) || sql[i] == '_')) ++i;
      out.push_back({Tok::Word, std::string(sql.substr(start, i - start)), start});
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      bool is_float = false;
      while (i < sql.size() && (std::isdigit(static_cast<unsigned char>(sql[i])) || sql[i] == '.')) {
        if (sql[i] == '.') {
          if (is_float) throw SyntaxError(i, "malformed number");
          is_float = true;
        }
        ++i;
      }
      if (i < sql.size() && (sql[i] == 'e' || sql[i] == 'E')) {
        is_float = true;
        ++i;
        if (i < sql.size() && (sql[i] == '+' || sql[i] == '-')) ++i;
        while (i < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      }
      out.push_back({is_float ? Tok::Float : Tok::Int, std::string(sql.substr(start, i - start)), start});
    } else if (c == '\'') {
      std::string value;
      ++i;
      while (true) {
        if (i >= sql.size()) throw SyntaxError(start, "unterminated string literal");
        if (sql[i] == '\'') {
          if (i + 1 < sql.size() && sql[i + 1] == '\'') {
            value += '\'';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        value += sql[i++];
      }
      out.push_back({Tok::String, std::move(value), start});
    } else {
      static const char* two_char[] = {"<=", ">=", "!=", "<>"};
      bool matched = false;
      for (const char* op : two_char) {
        if (sql.substr(i, 2) == op) {
          out.push_back({Tok::Symbol, op, start});
          i += 2;
          matched = true;
          break;
        }
      }
      if (matched) continue;
      if (std::string_view("(),*=<>;.-").find(c) == std::string_view::npos) {
        throw SyntaxError(i, std::string("unexpected character '") + c + "'");
      }
      out.push_back({Tok::Symbol, std::string(1, c), start});
      ++i;
    }
  }
  out.push_back({Tok::End, "", sql.size()});
  return out;
}

const std::set<std::string>& reserved() {
  static const std::set<std::string> words = {
      "select", "from", "where", "group", "by",   "order", "limit", "and",     "or",  "not", "as",
      "asc",    "desc", "case",  "when",  "then", "else",  "end",   "between", "in",  "null"};
  return words;
}

struct SelectItem {
  bool is_aggregate = false;
  std::string column;  // resolved column name (empty for COUNT(*))
  AggFunc func = AggFunc::Count;
  ExprPtr condition;
  std::string alias;
  size_t pos = 0;
};

struct TableRef {
  std::string name;
  std::string alias;
};

class Parser {
 public:
  Parser(std::string_view sql, const Catalog& catalog) : tokens_(tokenize(sql)), catalog_(catalog) {}

  PlanPtr parse_select() {
    expect_keyword("select");
    std::vector<SelectItem> items;
    bool star = false;
    if (peek_symbol("*")) {
      advance();
      star = true;
    } else {
      // Items are resolved after FROM is known; record raw tokens first.
      select_start_ = index_;
      skip_select_list();
    }
    expect_keyword("from");
    parse_from();
    if (!star) {
      size_t resume = index_;
      index_ = select_start_;
      items = parse_select_list();
      index_ = resume;
    }

    ExprPtr where;
    if (accept_keyword("where")) where = parse_or();

    std::vector<std::string> group_by;
    if (accept_keyword("group")) {
      expect_keyword("by");
      do {
        group_by.push_back(parse_column_name());
      } while (accept_symbol(","));
    }

    std::vector<std::pair<std::string, bool>> order_by;
    std::vector<size_t> order_pos;
    if (accept_keyword("order")) {
      expect_keyword("by");
      do {
        order_pos.push_back(peek().pos);
        std::string name = parse_output_name();
        bool desc = false;
        if (accept_keyword("desc")) {
          desc = true;
        } else {
          accept_keyword("asc");
        }
        order_by.emplace_back(std::move(name), desc);
      } while (accept_symbol(","));
    }

    std::optional<uint64_t> limit;
    if (accept_keyword("limit")) {
      const Token& t = peek();
      if (t.kind != Tok::Int) throw SyntaxError(t.pos, "LIMIT expects an integer");
      limit = std::stoull(t.text);
      advance();
    }
    accept_symbol(";");
    if (peek().kind != Tok::End) throw SyntaxError(peek().pos, "unexpected '" + peek().text + "'");

    return build_plan(items, star, where, group_by, order_by, order_pos, limit);
  }

 private:
  // -- token helpers --------------------------------------------------------
  const Token& peek(size_t ahead = 0) const { return tokens_[std::min(index_ + ahead, tokens_.size() - 1)]; }
  void advance() {
    if (index_ < tokens_.size() - 1) ++index_;
  }
  bool is_keyword(const Token& t, std::string_view kw) const { return t.kind == Tok::Word && lower(t.text) == kw; }
  bool accept_keyword(std::string_view kw) {
    if (is_keyword(peek(), kw)) {
      advance();
      return true;
    }
    return false;
  }
  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) {
      throw SyntaxError(peek().pos, "expected " + lower(kw) + ", found '" + peek().text + "'");
    }
  }
  bool peek_symbol(std::string_view s, size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Symbol && peek(ahead).text == s;
  }
  bool accept_symbol(std::string_view s) {
    if (peek_symbol(s)) {
      advance();
      return true;
    }
    return false;
  }
  void expect_symbol(std::string_view s) {
    if (!accept_symbol(s)) throw SyntaxError(peek().pos, "expected '" + std::string(s) + "', found '" + peek().text + "'");
  }
  std::string expect_identifier(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Word || reserved().count(lower(t.text))) {
      throw SyntaxError(t.pos, std::string("expected ") + what + ", found '" + t.text + "'");
    }
    advance();
    return t.text;
  }

  // -- FROM -----------------------------------------------------------------
  void parse_from() {
    do {
      TableRef ref;
      size_t pos = peek().pos;
      ref.name = expect_identifier("table name");
      if (!catalog_.tables.count(ref.name)) throw Error(ErrorCode::UnknownTable, "unknown table '" + ref.name + "'");
      if (accept_keyword("as")) {
        ref.alias = expect_identifier("table alias");
      } else if (peek().kind == Tok::Word && !reserved().count(lower(peek().text))) {
        ref.alias = peek().text;
        advance();
      }
      for (const auto& t : tables_) {
        if (t.name == ref.name) throw SyntaxError(pos, "table '" + ref.name + "' listed twice");
      }
      tables_.push_back(std::move(ref));
    } while (accept_symbol(","));

    std::set<std::string> seen;
    for (const auto& t : tables_) {
      for (const auto& c : catalog_.table(t.name).columns()) {
        if (!seen.insert(c.name).second) {
          throw Error(ErrorCode::DuplicateColumn, "column '" + c.name + "' appears in several FROM tables");
        }
      }
    }
  }

  // -- columns --------------------------------------------------------------
  std::string resolve(const std::string& qualifier, const std::string& name, size_t pos) const {
    if (!qualifier.empty()) {
      for (const auto& t : tables_) {
        if (t.name == qualifier || t.alias == qualifier) {
          if (!catalog_.table(t.name).contains(name)) {
            throw Error(ErrorCode::UnknownColumn, "table '" + t.name + "' has no column '" + name + "'");
          }
          return name;
        }
      }
      throw SyntaxError(pos, "unknown table qualifier '" + qualifier + "'");
    }
    for (const auto& t : tables_) {
      if (catalog_.table(t.name).contains(name)) return name;
    }
    // Unquoted identifiers are case-insensitive when unambiguous.
    std::string match;
    for (const auto& t : tables_) {
      for (const auto& c : catalog_.table(t.name).columns()) {
        if (lower(c.name) == lower(name)) {
          if (!match.empty()) throw Error(ErrorCode::UnknownColumn, "ambiguous column '" + name + "'");
          match = c.name;
        }
      }
    }
    if (match.empty()) throw Error(ErrorCode::UnknownColumn, "unknown column '" + name + "'");
    return match;
  }

  // Column names in expressions may be words that are keywords elsewhere
  // (`from`, `to`): in operand position any word is a column.
  std::string parse_column_name(bool any_word = false) {
    const Token& t = peek();
    size_t pos = t.pos;
    if (t.kind != Tok::Word || (!any_word && reserved().count(lower(t.text)))) {
      throw SyntaxError(pos, "expected column name, found '" + t.text + "'");
    }
    std::string first = t.text;
    advance();
    if (peek_symbol(".") && peek(1).kind == Tok::Word) {
      advance();
      std::string name = peek().text;
      advance();
      return resolve(first, name, pos);
    }
    return resolve("", first, pos);
  }

  // ORDER BY refers to output names, which may be aliases.
  std::string parse_output_name() {
    const Token& t = peek();
    if (t.kind != Tok::Word) throw SyntaxError(t.pos, "expected column name in ORDER BY");
    std::string first = t.text;
    advance();
    if (peek_symbol(".") && peek(1).kind == Tok::Word) {
      advance();
      first = peek().text;
      advance();
    }
    return first;
  }

  // -- SELECT list ----------------------------------------------------------
  void skip_select_list() {
    int depth = 0;
    while (peek().kind != Tok::End) {
      if (depth == 0 && is_keyword(peek(), "from")) return;
      if (peek_symbol("(")) ++depth;
      if (peek_symbol(")")) --depth;
      advance();
    }
    throw SyntaxError(peek().pos, "expected from");
  }

  std::optional<AggFunc> aggregate_keyword() const {
    if (peek().kind != Tok::Word || !peek_symbol("(", 1)) return std::nullopt;
    std::string w = lower(peek().text);
    if (w == "sum") return AggFunc::Sum;
    if (w == "count") return AggFunc::Count;
    if (w == "min") return AggFunc::Min;
    if (w == "max") return AggFunc::Max;
    return std::nullopt;
  }

  std::vector<SelectItem> parse_select_list() {
    std::vector<SelectItem> items;
    do {
      SelectItem item;
      item.pos = peek().pos;
      if (auto func = aggregate_keyword()) {
        item.is_aggregate = true;
        item.func = *func;
        advance();
        expect_symbol("(");
        if (peek_symbol("*")) {
          if (*func != AggFunc::Count) throw SyntaxError(peek().pos, "only COUNT accepts *");
          advance();
        } else if (accept_keyword("case")) {
          expect_keyword("when");
          item.condition = parse_or();
          expect_keyword("then");
          item.column = parse_column_name(true);
          if (accept_keyword("else")) {
            const Token& t = peek();
            bool neutral = is_keyword(t, "null") || ((t.kind == Tok::Int || t.kind == Tok::Float) && std::stod(t.text) == 0.0);
            if (!neutral) throw SyntaxError(t.pos, "CASE ELSE branch must be NULL or 0");
            advance();
          }
          expect_keyword("end");
        } else {
          item.column = parse_column_name(true);
        }
        expect_symbol(")");
      } else {
        item.column = parse_column_name(true);
      }
      if (accept_keyword("as")) {
        item.alias = expect_identifier("alias");
      } else if (peek().kind == Tok::Word && !reserved().count(lower(peek().text))) {
        item.alias = peek().text;
        advance();
      }
      items.push_back(std::move(item));
    } while (accept_symbol(","));
    if (!is_keyword(peek(), "from")) throw SyntaxError(peek().pos, "expected from, found '" + peek().text + "'");
    return items;
  }

  // -- predicates -----------------------------------------------------------
  ExprPtr parse_or() {
    std::vector<ExprPtr> parts{parse_and()};
    while (accept_keyword("or")) parts.push_back(parse_and());
    return disjunction(std::move(parts));
  }

  ExprPtr parse_and() {
    std::vector<ExprPtr> parts{parse_not()};
    while (accept_keyword("and")) parts.push_back(parse_not());
    return conjunction(std::move(parts));
  }

  ExprPtr parse_not() {
    if (accept_keyword("not")) return negate(parse_not());
    if (accept_symbol("(")) {
      ExprPtr inner = parse_or();
      expect_symbol(")");
      return inner;
    }
    return parse_comparison();
  }

  ExprPtr parse_operand() {
    const Token& t = peek();
    bool negative = false;
    if (t.kind == Tok::Symbol && t.text == "-") {
      negative = true;
      advance();
    }
    const Token& v = peek();
    switch (v.kind) {
      case Tok::Int: {
        advance();
        int64_t x = std::stoll(v.text);
        return lit(negative ? -x : x);
      }
      case Tok::Float: {
        advance();
        double x = std::stod(v.text);
        return lit(negative ? -x : x);
      }
      case Tok::String:
        if (negative) throw SyntaxError(v.pos, "cannot negate a string");
        advance();
        return lit(v.text);
      case Tok::Word:
        if (negative) throw SyntaxError(v.pos, "cannot negate a column");
        if (is_keyword(v, "null")) throw SyntaxError(v.pos, "NULL is not supported in predicates");
        return col(parse_column_name(true));
      default:
        throw SyntaxError(v.pos, "expected column or literal, found '" + v.text + "'");
    }
  }

  ExprPtr parse_comparison() {
    ExprPtr lhs = parse_operand();
    bool negated = false;
    if (is_keyword(peek(), "not") && (is_keyword(peek(1), "in") || is_keyword(peek(1), "between"))) {
      advance();
      negated = true;
    }
    ExprPtr result;
    if (accept_keyword("between")) {
      ExprPtr lo = parse_operand();
      expect_keyword("and");
      ExprPtr hi = parse_operand();
      result = conjunction({compare(CompareOp::Ge, lhs, lo), compare(CompareOp::Le, lhs, hi)});
    } else if (accept_keyword("in")) {
      expect_symbol("(");
      std::vector<ExprPtr> options;
      do {
        options.push_back(compare(CompareOp::Eq, lhs, parse_operand()));
      } while (accept_symbol(","));
      expect_symbol(")");
      result = disjunction(std::move(options));
    } else {
      const Token& t = peek();
      if (t.kind != Tok::Symbol || std::string_view("= != <> < > <= >=").find(t.text) == std::string_view::npos ||
          t.text == "(" || t.text == ")") {
        throw SyntaxError(t.pos, "expected comparison operator, found '" + t.text + "'");
      }
      CompareOp op = compare_op_from_string(t.text);
      advance();
      result = compare(op, lhs, parse_operand());
    }
    return negated ? negate(result) : result;
  }

  // -- plan construction ----------------------------------------------------
  static std::string default_agg_name(const SelectItem& item) {
    std::string base(to_string(item.func));
    return base + "_" + (item.column.empty() ? "star" : item.column);
  }

  PlanPtr build_plan(std::vector<SelectItem>& items, bool star, const ExprPtr& where,
                     const std::vector<std::string>& group_by,
                     const std::vector<std::pair<std::string, bool>>& order_by,
                     const std::vector<size_t>& order_pos, std::optional<uint64_t> limit) {
    std::vector<ExprPtr> conjuncts;
    if (where) {
      if (const auto* conj = where->as<And>()) {
        conjuncts = conj->children;
      } else {
        conjuncts.push_back(where);
      }
    }

    PlanPtr plan = make_scan(tables_[0].name);
    std::set<std::string> left_cols;
    for (const auto& c : catalog_.table(tables_[0].name).columns()) left_cols.insert(c.name);
    for (size_t i = 1; i < tables_.size(); ++i) {
      const Schema& right = catalog_.table(tables_[i].name);
      std::vector<ExprPtr> keys;
      std::vector<ExprPtr> rest;
      for (auto& c : conjuncts) {
        const auto* cmp = c->as<Compare>();
        bool is_key = false;
        if (cmp && cmp->op == CompareOp::Eq && cmp->lhs->is<ColumnRef>() && cmp->rhs->is<ColumnRef>()) {
          const auto& a = cmp->lhs->as<ColumnRef>()->name;
          const auto& b = cmp->rhs->as<ColumnRef>()->name;
          is_key = (left_cols.count(a) && right.contains(b)) || (left_cols.count(b) && right.contains(a));
        }
        (is_key ? keys : rest).push_back(c);
      }
      conjuncts = std::move(rest);
      PlanPtr scan = make_scan(tables_[i].name);
      plan = keys.empty() ? make_cartesian(plan, scan) : make_join(conjunction(std::move(keys)), plan, scan);
      for (const auto& c : right.columns()) left_cols.insert(c.name);
    }
    if (!conjuncts.empty()) plan = make_filter(conjunction(std::move(conjuncts)), plan);

    bool aggregating = !group_by.empty() ||
                       std::any_of(items.begin(), items.end(), [](const auto& i) { return i.is_aggregate; });
    std::vector<ProjectItem> projection;
    if (aggregating) {
      if (star) throw SyntaxError(0, "SELECT * cannot be combined with aggregation");
      std::set<std::string> groups(group_by.begin(), group_by.end());
      std::set<std::string> names(group_by.begin(), group_by.end());
      std::vector<AggregateSpec> aggs;
      for (auto& item : items) {
        if (!item.is_aggregate) {
          if (!groups.count(item.column)) {
            throw SyntaxError(item.pos, "column '" + item.column + "' must appear in GROUP BY");
          }
          projection.push_back({item.column, item.alias == item.column ? "" : item.alias});
          continue;
        }
        std::string name = item.alias.empty() ? default_agg_name(item) : item.alias;
        if (!names.insert(name).second) {
          std::string base = name;
          for (int n = 2; !names.insert(name = base + "_" + std::to_string(n)).second; ++n) {
          }
        }
        aggs.push_back({item.func, item.column, item.condition, name});
        projection.push_back({name, ""});
      }
      plan = make_aggregate(group_by, std::move(aggs), plan);
    } else if (!star) {
      for (const auto& item : items) projection.push_back({item.column, item.alias == item.column ? "" : item.alias});
    }
    if (!projection.empty()) plan = make_project(std::move(projection), plan);

    if (!order_by.empty()) {
      Schema out = output_schema(plan, catalog_);
      std::vector<SortKey> keys;
      for (size_t i = 0; i < order_by.size(); ++i) {
        if (!out.contains(order_by[i].first)) {
          throw Error(ErrorCode::UnknownColumn, "ORDER BY column '" + order_by[i].first +
                                                    "' is not in the select list (offset " +
                                                    std::to_string(order_pos[i]) + ")");
        }
        keys.push_back({order_by[i].first, order_by[i].second});
      }
      plan = make_sort(std::move(keys), plan);
    }
    if (limit) plan = make_limit(*limit, plan);

    // Validates column references and types.
    infer_schema(plan, catalog_);
    return plan;
  }

  std::vector<Token> tokens_;
  size_t index_ = 0;
  size_t select_start_ = 0;
  const Catalog& catalog_;
  std::vector<TableRef> tables_;
};

}  // namespace

LogicalPlan parse(std::string_view sql, const Catalog& catalog, std::string query_id) {
  Parser parser(sql, catalog);
  return LogicalPlan{std::move(query_id), parser.parse_select()};
}

std::vector<std::string> split_statements(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  bool in_string = false;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (!in_string && c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') ++i;
      current += '\n';
      continue;
    }
    if (c == '\'') in_string = !in_string;
    if (c == ';' && !in_string) {
      out.push_back(current);
      current.clear();
      continue;
    }
    current += c;
  }
  out.push_back(current);
  std::vector<std::string> nonblank;
  for (auto& s : out) {
    if (s.find_first_not_of(" \t\r\n") != std::string::npos) nonblank.push_back(std::move(s));
  }
  return nonblank;
}

QueryBatch build_batch(const std::vector<std::pair<std::string, std::string>>& statements, const Catalog& catalog) {
  QueryBatch batch;
  for (const auto& [id, text] : statements) {
    LogicalPlan plan = optimize_single(parse(text, catalog, id), catalog);
    batch.add(Query{id, text, std::move(plan)});
  }
  return batch;
}

QueryBatch load_sql_dir(const std::filesystem::path& dir, const Catalog& catalog) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::Io, "not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".sql") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, std::string>> statements;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + f.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto parts = split_statements(buf.str());
    for (size_t i = 0; i < parts.size(); ++i) {
      std::string id = f.stem().string();
      if (parts.size() > 1) id += "_" + std::to_string(i + 1);
      statements.emplace_back(std::move(id), std::move(parts[i]));
    }
  }
  return build_batch(statements, catalog);
}

}  // namespace mqo::sql
