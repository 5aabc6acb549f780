#include "mqo/cost.hpp"

#include <algorithm>
#include <cmath>

#include "mqo/error.hpp"

namespace mqo {

void CostConstants::validate(bool allow_slow_cache) const {
  for (double v : {cpu_per_tuple, disk_read_per_byte, net_per_byte, cache_write_per_byte, cache_read_per_byte}) {
    if (!(v > 0)) throw Error(ErrorCode::InvalidArgument, "cost constants must be positive");
  }
  if (!allow_slow_cache && !(cache_read_per_byte < disk_read_per_byte)) {
    throw Error(ErrorCode::InvalidArgument, "cache_read_per_byte must be below disk_read_per_byte");
  }
}

nlohmann::json constants_to_json(const CostConstants& c) {
  return {{"cpu_per_tuple", c.cpu_per_tuple},
          {"disk_read_per_byte", c.disk_read_per_byte},
          {"net_per_byte", c.net_per_byte},
          {"cache_write_per_byte", c.cache_write_per_byte},
          {"cache_read_per_byte", c.cache_read_per_byte}};
}

CostConstants constants_from_json(const nlohmann::json& j) {
  CostConstants c;
  c.cpu_per_tuple = j.value("cpu_per_tuple", c.cpu_per_tuple);
  c.disk_read_per_byte = j.value("disk_read_per_byte", c.disk_read_per_byte);
  c.net_per_byte = j.value("net_per_byte", c.net_per_byte);
  c.cache_write_per_byte = j.value("cache_write_per_byte", c.cache_write_per_byte);
  c.cache_read_per_byte = j.value("cache_read_per_byte", c.cache_read_per_byte);
  return c;
}

Estimator::Estimator(const StatsCatalog& stats, const Catalog& catalog, CostConstants constants)
    : stats_(stats), catalog_(catalog), constants_(constants) {}

CostEstimate Estimator::estimate(const PlanPtr& plan) const { return estimate_node(plan).cost; }

void Estimator::register_cache(const std::string& cache_id, const PlanPtr& producer) {
  caches_[cache_id] = estimate_node(producer);
}

namespace {

constexpr double kDefaultRangeSelectivity = 1.0 / 3.0;

double row_size(const NodeEstimate& n) {
  double total = 0;
  for (const auto& name : n.order) total += n.columns.at(name).width;
  return total;
}

std::optional<double> numeric_literal(const ExprPtr& e) {
  const auto* l = e->as<Literal>();
  if (!l) return std::nullopt;
  if (const auto* i = std::get_if<int64_t>(&l->value)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&l->value)) return *d;
  return std::nullopt;
}

// Fraction of rows with value < x (strict) or <= x.
double below(const ColumnEstimate& c, double x, bool inclusive) {
  const ColumnStats& s = *c.base;
  if (!inclusive) return s.fraction_below(x);
  if (c.type == DataType::Int64 && std::floor(x) == x) return s.fraction_below(x + 1);
  return s.fraction_below(std::nextafter(x, INFINITY));
}

void scale_distincts(NodeEstimate& n) {
  double cap = std::max(n.cost.out_rows, 1.0);
  for (auto& [name, c] : n.columns) c.distinct = std::min(c.distinct, cap);
}

}  // namespace

double Estimator::selectivity(const ExprPtr& predicate, const NodeEstimate& input) const {
  ExprPtr p = canonicalize(predicate);
  double s = std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, And>) {
          double out = 1;
          for (const auto& c : n.children) out *= selectivity(c, input);
          return out;
        } else if constexpr (std::is_same_v<T, Or>) {
          double out = 0;
          for (const auto& c : n.children) {
            double x = selectivity(c, input);
            out = out + x - out * x;
          }
          return out;
        } else if constexpr (std::is_same_v<T, Not>) {
          return 1 - selectivity(n.child, input);
        } else if constexpr (std::is_same_v<T, Compare>) {
          const auto* lc = n.lhs->template as<ColumnRef>();
          const auto* rc = n.rhs->template as<ColumnRef>();
          if (!lc && !rc) {
            const auto& a = n.lhs->template as<Literal>()->value;
            const auto& b = n.rhs->template as<Literal>()->value;
            return apply_compare(n.op, compare_values(a, b)) ? 1.0 : 0.0;
          }
          if (lc && rc) {
            double d = std::max({input.columns.at(lc->name).distinct, input.columns.at(rc->name).distinct, 1.0});
            if (n.op == CompareOp::Eq) return 1 / d;
            if (n.op == CompareOp::Ne) return 1 - 1 / d;
            return kDefaultRangeSelectivity;
          }
          const ColumnEstimate& c = input.columns.at(lc->name);
          auto x = numeric_literal(n.rhs);
          bool histogram = x && c.base && !c.base->histogram.empty();
          if (n.op == CompareOp::Eq || n.op == CompareOp::Ne) {
            double eq = 1 / std::max(c.distinct, 1.0);
            if (histogram && (*x < *c.base->min || *x > *c.base->max)) eq = 0;
            if (histogram && c.type == DataType::Int64 && std::floor(*x) != *x) eq = 0;
            return n.op == CompareOp::Eq ? eq : 1 - eq;
          }
          if (!histogram) return kDefaultRangeSelectivity;
          switch (n.op) {
            case CompareOp::Lt: return below(c, *x, false);
            case CompareOp::Le: return below(c, *x, true);
            case CompareOp::Gt: return 1 - below(c, *x, true);
            case CompareOp::Ge: return 1 - below(c, *x, false);
            default: return kDefaultRangeSelectivity;
          }
        } else {
          throw Error(ErrorCode::InvalidPlan, "non-boolean predicate " + serialize(p));
        }
      },
      p->node());
  return std::clamp(s, 0.0, 1.0);
}

NodeEstimate Estimator::estimate_node(const PlanPtr& node) const {
  const CostConstants& k = constants_;
  switch (node->kind()) {
    case OpKind::Scan: {
      const auto& table = node->as<ScanOp>().table;
      auto it = stats_.find(table);
      if (it == stats_.end()) throw Error(ErrorCode::MissingStats, "no statistics for table '" + table + "'");
      const TableStats& ts = it->second;
      NodeEstimate out;
      for (const auto& c : catalog_.table(table).columns()) {
        const ColumnStats& cs = ts.column(c.name);
        out.columns[c.name] = ColumnEstimate{&cs, c.type, std::max<double>(cs.distinct, 1), cs.width()};
        out.order.push_back(c.name);
      }
      out.cost.out_rows = static_cast<double>(ts.row_count);
      out.cost.out_row_size = ts.avg_record_size;
      out.cost.exec_cost = k.disk_read_per_byte * out.cost.out_rows * ts.avg_record_size;
      return out;
    }
    case OpKind::CacheRead: {
      const auto& id = node->as<CacheReadOp>().cache_id;
      auto it = caches_.find(id);
      if (it == caches_.end()) throw Error(ErrorCode::MissingStats, "no estimate for cache '" + id + "'");
      NodeEstimate out = it->second;
      out.cost.exec_cost = k.cache_read_per_byte * out.cost.out_bytes();
      return out;
    }
    case OpKind::Join:
    case OpKind::CartesianProduct: {
      NodeEstimate l = estimate_node(node->child(0));
      NodeEstimate r = estimate_node(node->child(1));
      double rows = l.cost.out_rows * r.cost.out_rows;
      if (const auto* join = node->get_if<JoinOp>()) {
        for (const auto& eq : split_conjuncts(join->condition)) {
          const auto* cmp = eq->as<Compare>();
          const auto& a = cmp->lhs->as<ColumnRef>()->name;
          const auto& b = cmp->rhs->as<ColumnRef>()->name;
          const auto& ca = l.columns.count(a) ? l.columns.at(a) : r.columns.at(a);
          const auto& cb = l.columns.count(b) ? l.columns.at(b) : r.columns.at(b);
          rows /= std::max({ca.distinct, cb.distinct, 1.0});
        }
      }
      NodeEstimate out;
      out.cost.exec_cost = l.cost.exec_cost + r.cost.exec_cost +
                           k.cpu_per_tuple * (l.cost.out_rows + r.cost.out_rows + rows) +
                           k.net_per_byte * (l.cost.out_bytes() + r.cost.out_bytes());
      out.cost.out_rows = rows;
      out.columns = std::move(l.columns);
      out.columns.insert(r.columns.begin(), r.columns.end());
      out.order = std::move(l.order);
      out.order.insert(out.order.end(), r.order.begin(), r.order.end());
      out.cost.out_row_size = row_size(out);
      scale_distincts(out);
      return out;
    }
    case OpKind::Union: {
      NodeEstimate l = estimate_node(node->child(0));
      NodeEstimate r = estimate_node(node->child(1));
      NodeEstimate out = l;
      out.cost.out_rows = l.cost.out_rows + r.cost.out_rows;
      out.cost.exec_cost = l.cost.exec_cost + r.cost.exec_cost;
      for (auto& [name, c] : out.columns) {
        size_t idx = std::find(l.order.begin(), l.order.end(), name) - l.order.begin();
        c.distinct += r.columns.at(r.order[idx]).distinct;
        c.base = nullptr;
      }
      return out;
    }
    default:
      break;
  }

  NodeEstimate in = estimate_node(node->child());
  double n = in.cost.out_rows;
  NodeEstimate out = in;
  switch (node->kind()) {
    case OpKind::Filter:
      out.cost.out_rows = n * selectivity(node->as<FilterOp>().predicate, in);
      out.cost.exec_cost += k.cpu_per_tuple * n;
      scale_distincts(out);
      break;
    case OpKind::Project: {
      out.columns.clear();
      out.order.clear();
      for (const auto& item : node->as<ProjectOp>().items) {
        out.columns[item.output_name()] = in.columns.at(item.column);
        out.order.push_back(item.output_name());
      }
      out.cost.out_row_size = row_size(out);
      out.cost.exec_cost += k.cpu_per_tuple * n;
      break;
    }
    case OpKind::Aggregate: {
      const auto& op = node->as<AggregateOp>();
      double groups = 1;
      for (const auto& g : op.group_by) groups *= in.columns.at(g).distinct;
      double rows = op.group_by.empty() ? 1 : std::min(n, groups);
      out.columns.clear();
      out.order.clear();
      for (const auto& g : op.group_by) {
        out.columns[g] = in.columns.at(g);
        out.order.push_back(g);
      }
      for (const auto& a : op.aggregates) {
        ColumnEstimate c;
        c.distinct = std::max(rows, 1.0);
        if (a.func == AggFunc::Count) {
          c.type = DataType::Int64;
        } else {
          c.type = in.columns.at(a.column).type;
          c.width = in.columns.at(a.column).width;
        }
        out.columns[a.name] = c;
        out.order.push_back(a.name);
      }
      out.cost.out_rows = rows;
      out.cost.out_row_size = row_size(out);
      out.cost.exec_cost += k.cpu_per_tuple * n;
      scale_distincts(out);
      break;
    }
    case OpKind::Sort:
      out.cost.exec_cost += k.cpu_per_tuple * n * std::log2(n + 1);
      break;
    case OpKind::Limit:
      out.cost.out_rows = std::min(n, static_cast<double>(node->as<LimitOp>().count));
      scale_distincts(out);
      break;
    case OpKind::CacheWrite:
      out.cost.exec_cost += k.cache_write_per_byte * in.cost.out_bytes();
      break;
    default:
      throw Error(ErrorCode::InvalidPlan, "cannot estimate operator");
  }
  return out;
}

double se_cost(const SimilarSubexpr& se, const QueryBatch& batch, const Estimator& est) {
  double total = 0;
  for (const auto& m : se.members) total += est.estimate(subtree_at(batch.find(m.query_id).plan.root, m.path)).exec_cost;
  return total;
}

double ce_cost(double exec_cost, double bytes, size_t m, const CostConstants& c) {
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "a covering expression needs at least one consumer");
  return exec_cost + c.cache_write_per_byte * bytes + static_cast<double>(m) * c.cache_read_per_byte * bytes;
}

void evaluate_ces(std::vector<CoveringExpr>& ces, const QueryBatch& batch, const Estimator& est) {
  const CostConstants& k = est.constants();
  for (auto& ce : ces) {
    CostEstimate e = est.estimate(ce.plan);
    double bytes = e.out_bytes();
    CostBreakdown& b = ce.cost;
    b.se_cost = se_cost(ce.source, batch, est);
    b.exec_cost = e.exec_cost;
    b.write_cost = k.cache_write_per_byte * bytes;
    b.read_cost = static_cast<double>(ce.source.m()) * k.cache_read_per_byte * bytes;
    b.ce_cost = ce_cost(e.exec_cost, bytes, ce.source.m(), k);
    b.out_rows = e.out_rows;
    b.out_row_size = e.out_row_size;
    ce.value = b.se_cost - b.ce_cost;
    ce.weight = std::max(1.0, std::ceil(bytes));
  }
}

}  // namespace mqo
