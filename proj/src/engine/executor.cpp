#include "mqo/engine/executor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>
#include <unordered_map>

#include "mqo/error.hpp"

namespace mqo::engine {

void Database::add(const std::string& name, Relation relation) { tables_[name] = std::move(relation); }

const Relation& Database::table(const std::string& name) const {
  auto it = tables_.find(name);
  if (it == tables_.end()) throw Error(ErrorCode::UnknownTable, "table '" + name + "' is not loaded");
  return it->second;
}

Catalog Database::catalog() const {
  Catalog c;
  for (const auto& [name, rel] : tables_) c.tables[name] = rel.schema();
  return c;
}

uint64_t Database::byte_size() const {
  uint64_t total = 0;
  for (const auto& [name, rel] : tables_) total += rel.byte_size();
  return total;
}

void CacheStore::put(const std::string& cache_id, const Relation& relation) {
  if (entries_.count(cache_id)) throw Error(ErrorCode::CacheRewrite, "cache '" + cache_id + "' written twice");
  uint64_t bytes = relation.byte_size();
  used_ += bytes;
  entries_[cache_id] = {relation, bytes};
  if (used_ > budget_) spills_.push_back({cache_id, bytes, used_, budget_});
}

const Relation& CacheStore::get(const std::string& cache_id) const {
  auto it = entries_.find(cache_id);
  if (it == entries_.end()) throw Error(ErrorCode::MissingCacheEntry, "cache '" + cache_id + "' was never written");
  return it->second.relation;
}

uint64_t CacheStore::entry_bytes(const std::string& cache_id) const {
  auto it = entries_.find(cache_id);
  if (it == entries_.end()) throw Error(ErrorCode::MissingCacheEntry, "cache '" + cache_id + "' was never written");
  return it->second.bytes;
}

std::vector<std::string> CacheStore::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, e] : entries_) out.push_back(id);
  return out;
}

ExecMetrics& ExecMetrics::operator+=(const ExecMetrics& o) {
  base_tuples_scanned += o.base_tuples_scanned;
  base_bytes_scanned += o.base_bytes_scanned;
  tuples_processed += o.tuples_processed;
  join_input_bytes += o.join_input_bytes;
  cache_bytes_written += o.cache_bytes_written;
  cache_bytes_read += o.cache_bytes_read;
  spill_warnings += o.spill_warnings;
  wall_ms += o.wall_ms;
  return *this;
}

double ExecMetrics::proxy_cost(const CostConstants& c) const {
  return c.cpu_per_tuple * static_cast<double>(tuples_processed) +
         c.disk_read_per_byte * static_cast<double>(base_bytes_scanned) +
         c.net_per_byte * static_cast<double>(join_input_bytes) +
         c.cache_write_per_byte * static_cast<double>(cache_bytes_written) +
         c.cache_read_per_byte * static_cast<double>(cache_bytes_read);
}

nlohmann::json metrics_to_json(const ExecMetrics& m, const CostConstants& c) {
  return {{"base_tuples_scanned", m.base_tuples_scanned},
          {"base_bytes_scanned", m.base_bytes_scanned},
          {"tuples_processed", m.tuples_processed},
          {"join_input_bytes", m.join_input_bytes},
          {"cache_bytes_written", m.cache_bytes_written},
          {"cache_bytes_read", m.cache_bytes_read},
          {"spill_warnings", m.spill_warnings},
          {"wall_ms", m.wall_ms},
          {"proxy_cost", m.proxy_cost(c)}};
}

namespace {

// Typed operand accessors for vectorized comparisons.
struct IntCol {
  const std::vector<int64_t>* v;
  int64_t get(size_t i) const { return (*v)[i]; }
};
struct DoubleCol {
  const std::vector<double>* v;
  double get(size_t i) const { return (*v)[i]; }
};
struct StrCol {
  const StringColumn* v;
  std::string_view get(size_t i) const { return v->at(i); }
};
template <typename T>
struct Const {
  T v;
  T get(size_t) const { return v; }
};
using Operand = std::variant<IntCol, DoubleCol, StrCol, Const<int64_t>, Const<double>, Const<std::string_view>>;

template <typename A>
constexpr bool is_string_operand = std::is_same_v<A, StrCol> || std::is_same_v<A, Const<std::string_view>>;

Operand operand(const ExprPtr& e, const Relation& in) {
  if (const auto* c = e->as<ColumnRef>()) {
    const ColumnData& data = in.column(c->name);
    switch (data.index()) {
      case 0: return IntCol{&std::get<0>(data)};
      case 1: return DoubleCol{&std::get<1>(data)};
      default: return StrCol{&std::get<2>(data)};
    }
  }
  if (const auto* l = e->as<Literal>()) {
    switch (l->value.index()) {
      case 0: return Const<int64_t>{std::get<0>(l->value)};
      case 1: return Const<double>{std::get<1>(l->value)};
      default: return Const<std::string_view>{std::get<2>(l->value)};
    }
  }
  throw Error(ErrorCode::InvalidPlan, "comparison operand must be a column or literal: " + serialize(e));
}

template <typename A, typename B, typename Cmp>
void compare_loop(const A& a, const B& b, size_t n, uint8_t* out, Cmp cmp) {
  for (size_t i = 0; i < n; ++i) out[i] = cmp(a.get(i), b.get(i)) ? 1 : 0;
}

void eval_compare(const Compare& c, const Relation& in, uint8_t* out) {
  Operand lhs = operand(c.lhs, in);
  Operand rhs = operand(c.rhs, in);
  size_t n = in.row_count();
  std::visit(
      [&](const auto& a, const auto& b) {
        using A = std::decay_t<decltype(a)>;
        using B = std::decay_t<decltype(b)>;
        if constexpr (is_string_operand<A> != is_string_operand<B>) {
          throw Error(ErrorCode::TypeMismatch, "string compared with number");
        } else {
          switch (c.op) {
            case CompareOp::Eq: compare_loop(a, b, n, out, [](auto x, auto y) { return x == y; }); break;
            case CompareOp::Ne: compare_loop(a, b, n, out, [](auto x, auto y) { return x != y; }); break;
            case CompareOp::Lt: compare_loop(a, b, n, out, [](auto x, auto y) { return x < y; }); break;
            case CompareOp::Gt: compare_loop(a, b, n, out, [](auto x, auto y) { return x > y; }); break;
            case CompareOp::Le: compare_loop(a, b, n, out, [](auto x, auto y) { return x <= y; }); break;
            case CompareOp::Ge: compare_loop(a, b, n, out, [](auto x, auto y) { return x >= y; }); break;
          }
        }
      },
      lhs, rhs);
}

void eval_into(const ExprPtr& e, const Relation& in, uint8_t* out) {
  size_t n = in.row_count();
  if (const auto* c = e->as<Compare>()) {
    eval_compare(*c, in, out);
  } else if (const auto* a = e->as<And>()) {
    std::fill(out, out + n, 1);
    std::vector<uint8_t> tmp(n);
    for (const auto& child : a->children) {
      eval_into(child, in, tmp.data());
      for (size_t i = 0; i < n; ++i) out[i] &= tmp[i];
    }
  } else if (const auto* o = e->as<Or>()) {
    std::fill(out, out + n, 0);
    std::vector<uint8_t> tmp(n);
    for (const auto& child : o->children) {
      eval_into(child, in, tmp.data());
      for (size_t i = 0; i < n; ++i) out[i] |= tmp[i];
    }
  } else if (const auto* no = e->as<Not>()) {
    eval_into(no->child, in, out);
    for (size_t i = 0; i < n; ++i) out[i] ^= 1;
  } else {
    throw Error(ErrorCode::InvalidPlan, "not a predicate: " + serialize(e));
  }
}

std::vector<uint32_t> selected_rows(const std::vector<uint8_t>& mask) {
  std::vector<uint32_t> rows;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) rows.push_back(static_cast<uint32_t>(i));
  }
  return rows;
}

Relation take(const Relation& in, const std::vector<uint32_t>& rows) {
  std::vector<ColumnPtr> cols;
  for (size_t c = 0; c < in.column_count(); ++c) cols.push_back(std::make_shared<ColumnData>(gather(in.column(c), rows)));
  return Relation(in.schema(), std::move(cols));
}

// Appends the encoding of one value to a hash key. Numbers are encoded as
// doubles when `as_double`, so Int64 and Float64 keys can meet.
void encode_key(std::string& key, const ColumnData& c, size_t row, bool as_double) {
  switch (c.index()) {
    case 0: {
      if (as_double) {
        double d = static_cast<double>(std::get<0>(c)[row]);
        key.append(reinterpret_cast<const char*>(&d), sizeof d);
      } else {
        int64_t v = std::get<0>(c)[row];
        key.append(reinterpret_cast<const char*>(&v), sizeof v);
      }
      break;
    }
    case 1: {
      double d = std::get<1>(c)[row];
      if (d == 0) d = 0;  // -0.0 and 0.0 compare equal
      key.append(reinterpret_cast<const char*>(&d), sizeof d);
      break;
    }
    default: {
      auto s = std::get<2>(c).at(row);
      uint32_t len = static_cast<uint32_t>(s.size());
      key.append(reinterpret_cast<const char*>(&len), sizeof len);
      key.append(s);
    }
  }
}

class Executor {
 public:
  Executor(const Database& db, CacheStore& cache, const ExecOptions& options, ExecMetrics& m)
      : db_(db), cache_(cache), options_(options), m_(m) {}

  Relation run(const PlanPtr& node) {
    switch (node->kind()) {
      case OpKind::Scan: return scan(node->as<ScanOp>().table);
      case OpKind::Filter: {
        Relation in = run(node->child());
        m_.tuples_processed += in.row_count();
        return take(in, selected_rows(evaluate_predicate(node->as<FilterOp>().predicate, in)));
      }
      case OpKind::Project: return project(node->as<ProjectOp>(), run(node->child()));
      case OpKind::Join: return join(node->as<JoinOp>(), run(node->child(0)), run(node->child(1)));
      case OpKind::CartesianProduct: return cartesian(run(node->child(0)), run(node->child(1)));
      case OpKind::Union: return union_all(run(node->child(0)), run(node->child(1)));
      case OpKind::Aggregate: return aggregate(node->as<AggregateOp>(), run(node->child()));
      case OpKind::Sort: return sort(node->as<SortOp>(), run(node->child()));
      case OpKind::Limit: {
        Relation in = run(node->child());
        m_.tuples_processed += in.row_count();
        uint64_t n = std::min<uint64_t>(node->as<LimitOp>().count, in.row_count());
        std::vector<uint32_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        return take(in, rows);
      }
      case OpKind::CacheRead: {
        const Relation& r = cache_.get(node->as<CacheReadOp>().cache_id);
        m_.cache_bytes_read += r.byte_size();
        return r;
      }
      case OpKind::CacheWrite: {
        Relation in = run(node->child());
        write_cache(node->as<CacheWriteOp>().cache_id, in);
        return in;
      }
    }
    throw Error(ErrorCode::InvalidPlan, "unknown operator");
  }

 private:
  void write_cache(const std::string& id, const Relation& r) {
    size_t spills = cache_.spill_warnings().size();
    cache_.put(id, r);
    m_.cache_bytes_written += r.byte_size();
    m_.spill_warnings += cache_.spill_warnings().size() - spills;
  }

  Relation scan(const std::string& table) {
    if (options_.cache_base_tables) {
      std::string id = "fc:" + table;
      if (cache_.contains(id)) {
        const Relation& r = cache_.get(id);
        m_.cache_bytes_read += r.byte_size();
        return r;
      }
      const Relation& r = db_.table(table);
      m_.base_tuples_scanned += r.row_count();
      m_.base_bytes_scanned += r.byte_size();
      write_cache(id, r);
      return r;
    }
    const Relation& r = db_.table(table);
    m_.base_tuples_scanned += r.row_count();
    m_.base_bytes_scanned += r.byte_size();
    return r;
  }

  Relation project(const ProjectOp& op, const Relation& in) {
    m_.tuples_processed += in.row_count();
    std::vector<ColumnDef> defs;
    std::vector<ColumnPtr> cols;
    for (const auto& item : op.items) {
      size_t idx = in.schema().index_of(item.column);
      defs.push_back({item.output_name(), in.schema()[idx].type});
      cols.push_back(in.column_ptr(idx));
    }
    return Relation(Schema(std::move(defs)), std::move(cols));
  }

  static Schema concat(const Schema& a, const Schema& b) {
    std::vector<ColumnDef> defs = a.columns();
    defs.insert(defs.end(), b.columns().begin(), b.columns().end());
    return Schema(std::move(defs));
  }

  Relation combine(const Relation& l, const Relation& r, const std::vector<uint32_t>& li,
                   const std::vector<uint32_t>& ri) {
    std::vector<ColumnPtr> cols;
    for (size_t c = 0; c < l.column_count(); ++c) cols.push_back(std::make_shared<ColumnData>(gather(l.column(c), li)));
    for (size_t c = 0; c < r.column_count(); ++c) cols.push_back(std::make_shared<ColumnData>(gather(r.column(c), ri)));
    return Relation(concat(l.schema(), r.schema()), std::move(cols));
  }

  Relation join(const JoinOp& op, const Relation& l, const Relation& r) {
    m_.join_input_bytes += l.byte_size() + r.byte_size();
    std::vector<size_t> lk;
    std::vector<size_t> rk;
    std::vector<bool> as_double;
    for (const auto& conj : split_conjuncts(op.condition)) {
      const auto* c = conj->as<Compare>();
      const auto* a = c ? c->lhs->as<ColumnRef>() : nullptr;
      const auto* b = c ? c->rhs->as<ColumnRef>() : nullptr;
      if (!a || !b || c->op != CompareOp::Eq) {
        throw Error(ErrorCode::InvalidPlan, "join condition must be column equalities: " + serialize(op.condition));
      }
      std::string ln = a->name;
      std::string rn = b->name;
      if (!l.schema().contains(ln)) std::swap(ln, rn);
      size_t li = l.schema().index_of(ln);
      size_t ri = r.schema().index_of(rn);
      lk.push_back(li);
      rk.push_back(ri);
      as_double.push_back(l.schema()[li].type != r.schema()[ri].type);
    }
    auto key_of = [&](const Relation& rel, const std::vector<size_t>& idx, size_t row, std::string& key) {
      key.clear();
      for (size_t k = 0; k < idx.size(); ++k) encode_key(key, rel.column(idx[k]), row, as_double[k]);
    };
    std::unordered_map<std::string, std::vector<uint32_t>> table;
    table.reserve(r.row_count());
    std::string key;
    for (size_t i = 0; i < r.row_count(); ++i) {
      key_of(r, rk, i, key);
      table[key].push_back(static_cast<uint32_t>(i));
    }
    std::vector<uint32_t> li;
    std::vector<uint32_t> ri;
    for (size_t i = 0; i < l.row_count(); ++i) {
      key_of(l, lk, i, key);
      auto it = table.find(key);
      if (it == table.end()) continue;
      for (uint32_t j : it->second) {
        li.push_back(static_cast<uint32_t>(i));
        ri.push_back(j);
      }
    }
    m_.tuples_processed += l.row_count() + r.row_count() + li.size();
    return combine(l, r, li, ri);
  }

  Relation cartesian(const Relation& l, const Relation& r) {
    m_.join_input_bytes += l.byte_size() + r.byte_size();
    std::vector<uint32_t> li;
    std::vector<uint32_t> ri;
    li.reserve(l.row_count() * r.row_count());
    ri.reserve(l.row_count() * r.row_count());
    for (size_t i = 0; i < l.row_count(); ++i) {
      for (size_t j = 0; j < r.row_count(); ++j) {
        li.push_back(static_cast<uint32_t>(i));
        ri.push_back(static_cast<uint32_t>(j));
      }
    }
    m_.tuples_processed += l.row_count() + r.row_count() + li.size();
    return combine(l, r, li, ri);
  }

  Relation union_all(const Relation& l, const Relation& r) {
    m_.tuples_processed += l.row_count() + r.row_count();
    std::vector<ColumnPtr> cols;
    for (size_t c = 0; c < l.column_count(); ++c) {
      ColumnData out = l.column(c);
      const ColumnData& more = r.column(c);
      std::visit(
          [&](auto& dst) {
            using V = std::decay_t<decltype(dst)>;
            const auto& src = std::get<V>(more);
            if constexpr (std::is_same_v<V, StringColumn>) {
              for (size_t i = 0; i < src.size(); ++i) dst.push_back(src.at(i));
            } else {
              dst.insert(dst.end(), src.begin(), src.end());
            }
          },
          out);
      cols.push_back(std::make_shared<ColumnData>(std::move(out)));
    }
    return Relation(l.schema(), std::move(cols));
  }

  Relation aggregate(const AggregateOp& op, const Relation& in) {
    m_.tuples_processed += in.row_count();
    size_t n = in.row_count();
    std::vector<size_t> gk;
    for (const auto& g : op.group_by) gk.push_back(in.schema().index_of(g));

    // Group id per row, groups numbered by first appearance.
    std::vector<uint32_t> group(n);
    std::vector<uint32_t> first_row;
    if (gk.empty()) {
      first_row.push_back(0);
    } else {
      std::unordered_map<std::string, uint32_t> ids;
      std::string key;
      for (size_t i = 0; i < n; ++i) {
        key.clear();
        for (size_t k : gk) encode_key(key, in.column(k), i, false);
        auto [it, fresh] = ids.try_emplace(key, static_cast<uint32_t>(first_row.size()));
        if (fresh) first_row.push_back(static_cast<uint32_t>(i));
        group[i] = it->second;
      }
    }
    size_t groups = first_row.size();

    std::vector<ColumnDef> defs;
    std::vector<ColumnPtr> cols;
    for (size_t k : gk) {
      defs.push_back(in.schema()[k]);
      // Global aggregates keep no group columns, so first_row is never read there.
      cols.push_back(std::make_shared<ColumnData>(gather(in.column(k), first_row)));
    }
    for (const auto& spec : op.aggregates) {
      std::vector<uint8_t> mask(n, 1);
      if (spec.condition) mask = evaluate_predicate(spec.condition, in);
      if (spec.func == AggFunc::Count) {
        std::vector<int64_t> counts(groups, 0);
        for (size_t i = 0; i < n; ++i) counts[group[i]] += mask[i];
        defs.push_back({spec.name, DataType::Int64});
        cols.push_back(std::make_shared<ColumnData>(std::move(counts)));
        continue;
      }
      const ColumnData& src = in.column(spec.column);
      defs.push_back({spec.name, column_type(src)});
      cols.push_back(std::make_shared<ColumnData>(std::visit(
          [&](const auto& v) -> ColumnData {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, StringColumn>) {
              std::vector<std::string_view> best(groups);
              std::vector<uint8_t> seen(groups, 0);
              for (size_t i = 0; i < n; ++i) {
                if (!mask[i]) continue;
                auto g = group[i];
                auto s = v.at(i);
                bool better = spec.func == AggFunc::Min ? s < best[g] : s > best[g];
                if (!seen[g] || better) best[g] = s;
                seen[g] = 1;
              }
              StringColumn out;
              for (auto s : best) out.push_back(s);
              return out;
            } else {
              using T = typename V::value_type;
              std::vector<T> acc(groups, T{});
              std::vector<uint8_t> seen(groups, 0);
              for (size_t i = 0; i < n; ++i) {
                if (!mask[i]) continue;
                auto g = group[i];
                T x = v[i];
                if (spec.func == AggFunc::Sum) {
                  acc[g] += x;
                } else if (!seen[g] || (spec.func == AggFunc::Min ? x < acc[g] : x > acc[g])) {
                  acc[g] = x;
                }
                seen[g] = 1;
              }
              return acc;
            }
          },
          src)));
    }
    return Relation(Schema(std::move(defs)), std::move(cols));
  }

  Relation sort(const SortOp& op, const Relation& in) {
    size_t n = in.row_count();
    m_.tuples_processed += n;
    std::vector<std::pair<const ColumnData*, bool>> keys;
    for (const auto& k : op.keys) keys.emplace_back(&in.column(k.column), k.descending);
    std::vector<uint32_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    std::stable_sort(rows.begin(), rows.end(), [&](uint32_t a, uint32_t b) {
      for (const auto& [col, desc] : keys) {
        int c = std::visit(
            [&](const auto& v) {
              auto x = v.at(a);
              auto y = v.at(b);
              return (x > y) - (x < y);
            },
            *col);
        if (c != 0) return desc ? c > 0 : c < 0;
      }
      return false;
    });
    return take(in, rows);
  }

  const Database& db_;
  CacheStore& cache_;
  const ExecOptions& options_;
  ExecMetrics& m_;
};

}  // namespace

std::vector<uint8_t> evaluate_predicate(const ExprPtr& predicate, const Relation& input) {
  std::vector<uint8_t> mask(input.row_count());
  eval_into(predicate, input, mask.data());
  return mask;
}

ExecResult execute(const PlanPtr& plan, const Database& db, CacheStore& cache, const ExecOptions& options) {
  auto start = std::chrono::steady_clock::now();
  ExecResult out;
  out.relation = Executor(db, cache, options, out.metrics).run(plan);
  out.metrics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace mqo::engine
