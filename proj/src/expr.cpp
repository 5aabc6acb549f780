#include "mqo/expr.hpp"

#include <algorithm>

#include "mqo/error.hpp"

namespace mqo {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Gt: return ">";
    case CompareOp::Le: return "<=";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

CompareOp compare_op_from_string(std::string_view text) {
  if (text == "=") return CompareOp::Eq;
  if (text == "!=" || text == "<>") return CompareOp::Ne;
  if (text == "<") return CompareOp::Lt;
  if (text == ">") return CompareOp::Gt;
  if (text == "<=") return CompareOp::Le;
  if (text == ">=") return CompareOp::Ge;
  throw Error(ErrorCode::ParseError, "unknown comparison operator '" + std::string(text) + "'");
}

CompareOp mirror(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return CompareOp::Gt;
    case CompareOp::Gt: return CompareOp::Lt;
    case CompareOp::Le: return CompareOp::Ge;
    case CompareOp::Ge: return CompareOp::Le;
    default: return op;
  }
}

bool apply_compare(CompareOp op, int c) {
  switch (op) {
    case CompareOp::Eq: return c == 0;
    case CompareOp::Ne: return c != 0;
    case CompareOp::Lt: return c < 0;
    case CompareOp::Gt: return c > 0;
    case CompareOp::Le: return c <= 0;
    case CompareOp::Ge: return c >= 0;
  }
  return false;
}

ExprPtr col(std::string name) { return std::make_shared<Expr>(ColumnRef{std::move(name)}); }
ExprPtr lit(Value value) { return std::make_shared<Expr>(Literal{std::move(value)}); }
ExprPtr compare(CompareOp op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<Expr>(Compare{op, std::move(lhs), std::move(rhs)});
}
ExprPtr conjunction(std::vector<ExprPtr> children) {
  if (children.size() == 1) return children.front();
  return std::make_shared<Expr>(And{std::move(children)});
}
ExprPtr disjunction(std::vector<ExprPtr> children) {
  if (children.size() == 1) return children.front();
  return std::make_shared<Expr>(Or{std::move(children)});
}
ExprPtr negate(ExprPtr child) { return std::make_shared<Expr>(Not{std::move(child)}); }

namespace {

std::string join_children(const char* name, const std::vector<ExprPtr>& children) {
  std::string out = name;
  out += '(';
  for (size_t i = 0; i < children.size(); ++i) {
    if (i) out += ", ";
    out += serialize(children[i]);
  }
  return out + ')';
}

template <typename Boolean>
ExprPtr canonical_nary(const std::vector<ExprPtr>& children) {
  std::vector<std::pair<std::string, ExprPtr>> flat;
  auto add = [&](const ExprPtr& c) { flat.emplace_back(serialize(c), c); };
  for (const auto& child : children) {
    ExprPtr c = canonicalize(child);
    if (const auto* same = c->as<Boolean>()) {
      for (const auto& grandchild : same->children) add(grandchild);
    } else {
      add(c);
    }
  }
  std::sort(flat.begin(), flat.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  flat.erase(std::unique(flat.begin(), flat.end(),
                         [](const auto& a, const auto& b) { return a.first == b.first; }),
             flat.end());
  if (flat.size() == 1) return flat.front().second;
  std::vector<ExprPtr> out;
  out.reserve(flat.size());
  for (auto& [_, e] : flat) out.push_back(std::move(e));
  return std::make_shared<Expr>(Boolean{std::move(out)});
}

}  // namespace

std::string serialize(const ExprPtr& expr) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ColumnRef>) {
          return "col:" + n.name;
        } else if constexpr (std::is_same_v<T, Literal>) {
          return render_tagged(n.value);
        } else if constexpr (std::is_same_v<T, Compare>) {
          return std::string(to_string(n.op)) + " " + serialize(n.lhs) + " " + serialize(n.rhs);
        } else if constexpr (std::is_same_v<T, And>) {
          return join_children("and", n.children);
        } else if constexpr (std::is_same_v<T, Or>) {
          return join_children("or", n.children);
        } else {
          return "not(" + serialize(n.child) + ")";
        }
      },
      expr->node());
}

ExprPtr canonicalize(const ExprPtr& expr) {
  return std::visit(
      [&](const auto& n) -> ExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ColumnRef> || std::is_same_v<T, Literal>) {
          return expr;
        } else if constexpr (std::is_same_v<T, Compare>) {
          ExprPtr lhs = canonicalize(n.lhs);
          ExprPtr rhs = canonicalize(n.rhs);
          CompareOp op = n.op;
          if (lhs->is<Literal>() && rhs->is<ColumnRef>()) {
            std::swap(lhs, rhs);
            op = mirror(op);
          } else if ((op == CompareOp::Eq || op == CompareOp::Ne) &&
                     lhs->node().index() == rhs->node().index() &&
                     serialize(rhs) < serialize(lhs)) {
            std::swap(lhs, rhs);
          }
          return compare(op, std::move(lhs), std::move(rhs));
        } else if constexpr (std::is_same_v<T, And>) {
          return canonical_nary<And>(n.children);
        } else if constexpr (std::is_same_v<T, Or>) {
          return canonical_nary<Or>(n.children);
        } else {
          ExprPtr child = canonicalize(n.child);
          if (const auto* inner = child->template as<Not>()) return inner->child;
          return negate(std::move(child));
        }
      },
      expr->node());
}

bool equivalent(const ExprPtr& a, const ExprPtr& b) {
  return serialize(canonicalize(a)) == serialize(canonicalize(b));
}

std::vector<ExprPtr> split_conjuncts(const ExprPtr& expr) {
  ExprPtr c = canonicalize(expr);
  if (const auto* conj = c->as<And>()) return conj->children;
  return {c};
}

void collect_columns(const ExprPtr& expr, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ColumnRef>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<T, Compare>) {
          collect_columns(n.lhs, out);
          collect_columns(n.rhs, out);
        } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
          for (const auto& c : n.children) collect_columns(c, out);
        } else if constexpr (std::is_same_v<T, Not>) {
          collect_columns(n.child, out);
        }
      },
      expr->node());
}

std::set<std::string> referenced_columns(const ExprPtr& expr) {
  std::set<std::string> out;
  collect_columns(expr, out);
  return out;
}

ExprPtr rename_columns(const ExprPtr& expr, const std::map<std::string, std::string>& renames) {
  return std::visit(
      [&](const auto& n) -> ExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ColumnRef>) {
          auto it = renames.find(n.name);
          return it == renames.end() ? expr : col(it->second);
        } else if constexpr (std::is_same_v<T, Literal>) {
          return expr;
        } else if constexpr (std::is_same_v<T, Compare>) {
          return compare(n.op, rename_columns(n.lhs, renames), rename_columns(n.rhs, renames));
        } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
          std::vector<ExprPtr> children;
          for (const auto& c : n.children) children.push_back(rename_columns(c, renames));
          return std::make_shared<Expr>(T{std::move(children)});
        } else {
          return negate(rename_columns(n.child, renames));
        }
      },
      expr->node());
}

namespace {

bool is_boolean(const ExprPtr& e) {
  return e->is<Compare>() || e->is<And>() || e->is<Or>() || e->is<Not>();
}

}  // namespace

DataType check_expr(const ExprPtr& expr, const Schema& input) {
  return std::visit(
      [&](const auto& n) -> DataType {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ColumnRef>) {
          return input[input.index_of(n.name)].type;
        } else if constexpr (std::is_same_v<T, Literal>) {
          return type_of(n.value);
        } else if constexpr (std::is_same_v<T, Compare>) {
          if (is_boolean(n.lhs) || is_boolean(n.rhs)) {
            throw Error(ErrorCode::TypeMismatch, "comparison operands must be scalar: " + serialize(expr));
          }
          DataType l = check_expr(n.lhs, input);
          DataType r = check_expr(n.rhs, input);
          if (!comparable(l, r)) {
            throw Error(ErrorCode::TypeMismatch,
                        "cannot compare " + std::string(to_string(l)) + " with " +
                            std::string(to_string(r)) + " in " + serialize(expr));
          }
          return DataType::Int64;
        } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
          if (n.children.empty()) throw Error(ErrorCode::InvalidPlan, "empty boolean connective");
          for (const auto& c : n.children) {
            if (!is_boolean(c)) throw Error(ErrorCode::TypeMismatch, "non-boolean operand in " + serialize(expr));
            check_expr(c, input);
          }
          return DataType::Int64;
        } else {
          if (!is_boolean(n.child)) throw Error(ErrorCode::TypeMismatch, "NOT over non-boolean operand");
          check_expr(n.child, input);
          return DataType::Int64;
        }
      },
      expr->node());
}

nlohmann::json expr_to_json(const ExprPtr& expr) {
  using nlohmann::json;
  return std::visit(
      [](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ColumnRef>) {
          return json{{"col", n.name}};
        } else if constexpr (std::is_same_v<T, Literal>) {
          json v;
          std::visit([&](const auto& x) { v = x; }, n.value);
          return json{{"lit", v}, {"type", std::string(to_string(type_of(n.value)))}};
        } else if constexpr (std::is_same_v<T, Compare>) {
          return json{{"cmp", std::string(to_string(n.op))},
                      {"lhs", expr_to_json(n.lhs)},
                      {"rhs", expr_to_json(n.rhs)}};
        } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
          json children = json::array();
          for (const auto& c : n.children) children.push_back(expr_to_json(c));
          return json{{std::is_same_v<T, And> ? "and" : "or", children}};
        } else {
          return json{{"not", expr_to_json(n.child)}};
        }
      },
      expr->node());
}

ExprPtr expr_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "expression must be a JSON object");
  if (j.contains("col")) return col(j.at("col").get<std::string>());
  if (j.contains("lit")) {
    auto type = data_type_from_string(j.at("type").get<std::string>());
    if (!type) throw Error(ErrorCode::ParseError, "bad literal type");
    switch (*type) {
      case DataType::Int64: return lit(j.at("lit").get<int64_t>());
      case DataType::Float64: return lit(j.at("lit").get<double>());
      case DataType::Utf8: return lit(j.at("lit").get<std::string>());
    }
  }
  if (j.contains("cmp")) {
    return compare(compare_op_from_string(j.at("cmp").get<std::string>()), expr_from_json(j.at("lhs")),
                   expr_from_json(j.at("rhs")));
  }
  auto nary = [&](const char* key) {
    std::vector<ExprPtr> children;
    for (const auto& c : j.at(key)) children.push_back(expr_from_json(c));
    return children;
  };
  if (j.contains("and")) return std::make_shared<Expr>(And{nary("and")});
  if (j.contains("or")) return std::make_shared<Expr>(Or{nary("or")});
  if (j.contains("not")) return negate(expr_from_json(j.at("not")));
  throw Error(ErrorCode::ParseError, "unrecognized expression: " + j.dump());
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return serialize(a) == serialize(b);
}

}  // namespace mqo
