/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cyeq/ast.hpp"
#include "cyeq/graph.hpp"
#include "cyeq/semantics.hpp"
#include "cyeq/value.hpp"

namespace cyeq {

struct EvalUnsupported : std::runtime_error {
  explicit EvalUnsupported(const std::string& what) : std::runtime_error(what) {}
};

/// Query result under ordered bag semantics. When `ordered` is set the rows
/// are already sorted by the ORDER BY keys (ties broken canonically) and
/// truncated by SKIP/LIMIT.
struct ResultBag {
  size_t arity = 0;
  std::vector<std::vector<Value>> rows;
  bool ordered = false;
};

inline bool row_equal(const std::vector<Value>& a, const std::vector<Value>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!value_equal(a[i], b[i])) return false;
  }
  return true;
}

inline bool row_less(const std::vector<Value>& a, const std::vector<Value>& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    int c = value_compare(a[i], b[i]);
    if (c) return c < 0;
  }
  return a.size() < b.size();
}

/// Multiset comparison; sequences are compared only when both sides carry an
/// order.
inline bool bag_equal(const ResultBag& a, const ResultBag& b) {
  if (a.arity != b.arity) return false;
  if (a.rows.size() != b.rows.size()) return false;
  if (a.ordered && b.ordered) {
    for (size_t i = 0; i < a.rows.size(); ++i) {
      if (!row_equal(a.rows[i], b.rows[i])) return false;
    }
    return true;
  }
  auto sa = a.rows, sb = b.rows;
  std::sort(sa.begin(), sa.end(), row_less);
  std::sort(sb.begin(), sb.end(), row_less);
  for (size_t i = 0; i < sa.size(); ++i) {
    if (!row_equal(sa[i], sb[i])) return false;
  }
  return true;
}

namespace detail {

struct Table {
  std::vector<std::string> cols;
  std::vector<std::vector<Value>> rows;

  int col_index(const std::string& name) const {
    for (size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == name) return int(i);
    }
    return -1;
  }
};

class Evaluator {
 public:
  explicit Evaluator(const PropertyGraph& g) : g_(g) {}

  ResultBag run(const SingleQuery& q) {
    Table t;
    t.rows.push_back({});
    for (const auto& c : q.clauses) t = apply_clause(t, c);
    return finish_return(t, q.ret, q);
  }

 private:
  const PropertyGraph& g_;

  // -- expression evaluation -------------------------------------------------

  using Env = std::map<std::string, Value>;

  static Env env_of(const Table& t, const std::vector<Value>& row) {
    Env env;
    for (size_t i = 0; i < t.cols.size(); ++i) env[t.cols[i]] = row[i];
    return env;
  }

  static bool truthy(const Value& v) { return v.kind == Value::Kind::Bool && v.b; }

  Value literal_value(const Expr& e) const {
    switch (e.kind) {
      case Expr::Kind::IntLit: return Value::integer(e.intValue);
      case Expr::Kind::StringLit: return Value::str(e.strValue());
      case Expr::Kind::BoolLit: return Value::boolean(e.boolValue);
      default: throw EvalUnsupported("expected literal");
    }
  }

  std::optional<Value> entity_prop(const Value& v, const std::string& key) const {
    if (v.kind == Value::Kind::NodeRef) return g_.node_prop(int(v.i), key);
    if (v.kind == Value::Kind::RelRef) return g_.rel_prop(int(v.i), key);
    if (v.kind == Value::Kind::Map) {
      for (const auto& [k, mv] : v.map) {
        if (k == key) return mv;
      }
      return std::nullopt;
    }
    return std::nullopt;
  }

  Value eval_expr(const Expr& e, const Env& env) const {    switch (e.kind) {
      case Expr::Kind::IntLit:
      case Expr::Kind::StringLit:
      case Expr::Kind::BoolLit:
        return literal_value(e);
      case Expr::Kind::Var: {
        auto it = env.find(e.name);
        if (it == env.end()) throw EvalUnsupported("unbound variable " + e.name);
        return it->second;
      }
      case Expr::Kind::PropAccess: {
        auto it = env.find(e.name);
        if (it == env.end()) throw EvalUnsupported("unbound variable " + e.name);
        if (it->second.is_null()) return Value::null();
        auto v = entity_prop(it->second, e.key);
        return v ? *v : Value::null();
      }
      case Expr::Kind::Cmp: {
        Value l = eval_expr(*e.lhs, env), r = eval_expr(*e.rhs, env);
        return Value::boolean(compare_predicate(e.cmp, l, r));
      }
      case Expr::Kind::And:
        return Value::boolean(truthy(eval_expr(*e.lhs, env)) && truthy(eval_expr(*e.rhs, env)));
      case Expr::Kind::Or:
        return Value::boolean(truthy(eval_expr(*e.lhs, env)) || truthy(eval_expr(*e.rhs, env)));
      case Expr::Kind::Not:
        return Value::boolean(!truthy(eval_expr(*e.lhs, env)));
      case Expr::Kind::IsNull:
        return Value::boolean(eval_expr(*e.lhs, env).is_null());
      case Expr::Kind::FnCall: {
        std::vector<Value> args;
        for (const auto& a : e.args) args.push_back(eval_expr(*a, env));
        if (to_upper(e.name) == "ID" && args.size() == 1) {
          if (args[0].kind == Value::Kind::NodeRef || args[0].kind == Value::Kind::RelRef) {
            return Value::integer(args[0].i);
          }
          return Value::null();
        }
        // Uninterpreted function: a deterministic opaque value, null-strict.
        for (const auto& a : args) {
          if (a.is_null()) return Value::null();
        }
        std::string text = "<" + to_upper(e.name) + ":";
        for (size_t i = 0; i < args.size(); ++i) {
          if (i) text += ",";
          text += value_text(args[i]);
        }
        text += ">";
        return Value::str(text);
      }
      case Expr::Kind::AggCall:
        throw EvalUnsupported("aggregate outside projection");
      case Expr::Kind::ListLit: {
        std::vector<Value> vs;
        for (const auto& a : e.args) vs.push_back(eval_expr(*a, env));
        return Value::list_of(std::move(vs));
      }
      case Expr::Kind::MapLit: {
        std::vector<std::pair<std::string, Value>> entries;
        for (const auto& me : e.entries) entries.emplace_back(me.key, eval_expr(*me.value, env));
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        return Value::map_of(std::move(entries));
      }
      case Expr::Kind::Exists: {
        Table seed;
        for (const auto& [k, v] : env) {
          seed.cols.push_back(k);
        }
        std::vector<Value> row;
        for (const auto& c : seed.cols) row.push_back(env.at(c));
        seed.rows.push_back(std::move(row));
        Table t = seed;
        for (const auto& c : e.existsQuery->clauses) t = apply_clause(t, c);
        return Value::boolean(!t.rows.empty());
      }
    }
    throw EvalUnsupported("unhandled expression");
  }

  static bool compare_predicate(CmpOp op, const Value& l, const Value& r) {
    return predicate_compare(op, l, r);
  }

  // -- pattern matching -------------------------------------------------------

  struct MatchState {
    Env bindings;
    std::map<int, std::string> relOwner;  // relationship id -> claiming token
  };

  bool node_satisfies(int id, const NodePattern& n, const Env& env) const {
    (void)env;
    for (const auto& l : n.labels) {
      if (!g_.node_has_label(id, l)) return false;
    }
    for (const auto& p : n.props) {
      auto v = g_.node_prop(id, p.key);
      if (!v || !value_equal(*v, literal_value(*p.value))) return false;
    }
    return true;
  }

  bool rel_core_satisfies(int id, const RelPattern& r) const {
    const auto& rel = g_.rels[id];
    if (!r.labels.empty() &&
        std::find(r.labels.begin(), r.labels.end(), rel.label) == r.labels.end()) {
      return false;
    }
    for (const auto& p : r.props) {
      auto v = g_.rel_prop(id, p.key);
      if (!v || !value_equal(*v, literal_value(*p.value))) return false;
    }
    return true;
  }

  bool claim_rel(MatchState& st, int relId, const std::string& token) const {
    auto it = st.relOwner.find(relId);
    if (it != st.relOwner.end()) return it->second == token;
    st.relOwner.emplace(relId, token);
    return true;
  }

  template <typename Cont>
  void match_node_at(const NodePattern& n, int nodeId, MatchState st, Cont&& cont) const {
    if (!node_satisfies(nodeId, n, st.bindings)) return;
    if (n.var) {
      auto it = st.bindings.find(*n.var);
      if (it != st.bindings.end()) {
        if (!(it->second.kind == Value::Kind::NodeRef && it->second.i == nodeId)) return;
      } else {
        st.bindings[*n.var] = Value::node_ref(nodeId);
      }
    }
    cont(std::move(st));
  }

  template <typename Cont>
  void match_chain(const PatternPart& part, size_t relIdx, int curNode, const MatchState& st,
                   Cont&& cont) const {
    if (relIdx == part.rels.size()) {
      cont(st);
      return;
    }
    const RelPattern& r = part.rels[relIdx];
    std::string token = r.var ? *r.var : ("#anon" + std::to_string(relIdx) + "@" +
                                          std::to_string(reinterpret_cast<uintptr_t>(&part)));
    auto continue_with = [&](MatchState next, int endNode) {
      match_node_at(part.nodes[relIdx + 1], endNode, std::move(next), [&](MatchState st2) {
        match_chain(part, relIdx + 1, endNode, st2, cont);
      });
    };

    if (r.range) {
      match_varlength(r, token, curNode, st, continue_with);
      return;
    }

    auto bound = r.var ? st.bindings.find(*r.var) : st.bindings.end();
    if (r.var && bound != st.bindings.end()) {
      const Value& v = bound->second;
      if (v.kind != Value::Kind::RelRef) return;
      int id = int(v.i);
      if (!rel_core_satisfies(id, r)) return;
      for (int dir = 0; dir < 2; ++dir) {
        bool forward = dir == 0;
        if (r.dir == RelDir::Right && !forward) continue;
        if (r.dir == RelDir::Left && forward) continue;
        if (r.dir == RelDir::Undirected && g_.rels[id].src == g_.rels[id].dst && !forward) continue;
        int from = forward ? g_.rels[id].src : g_.rels[id].dst;
        int to = forward ? g_.rels[id].dst : g_.rels[id].src;
        if (from != curNode) continue;
        MatchState next = st;
        if (!claim_rel(next, id, token)) continue;
        continue_with(std::move(next), to);
      }
      return;
    }

    for (int id = 0; id < int(g_.rels.size()); ++id) {
      if (!rel_core_satisfies(id, r)) continue;
      for (int dir = 0; dir < 2; ++dir) {
        bool forward = dir == 0;
        if (r.dir == RelDir::Right && !forward) continue;
        if (r.dir == RelDir::Left && forward) continue;
        if (r.dir == RelDir::Undirected && g_.rels[id].src == g_.rels[id].dst && !forward) {
          continue;  // a self-loop matches an undirected step once
        }
        int from = forward ? g_.rels[id].src : g_.rels[id].dst;
        int to = forward ? g_.rels[id].dst : g_.rels[id].src;
        if (from != curNode) continue;
        MatchState next = st;
        if (!claim_rel(next, id, token)) continue;
        if (r.var) next.bindings[*r.var] = Value::rel_ref(id);
        continue_with(std::move(next), to);
      }
    }
  }

  /// Variable-length step: enumerates paths whose hop count lies in the range,
  /// with pairwise-distinct relationships along the path. Unbounded ranges cap
  /// at |R| hops.
  template <typename Cont>
  void match_varlength(const RelPattern& r, const std::string& token, int startNode,
                       const MatchState& st, Cont&& cont) const {
    int64_t maxHops = r.range->max ? *r.range->max : int64_t(g_.rels.size());
    maxHops = std::min<int64_t>(maxHops, int64_t(g_.rels.size()));
    if (r.var) {
      auto it = st.bindings.find(*r.var);
      if (it != st.bindings.end()) {
        replay_bound_path(r, token, startNode, st, it->second, cont);
        return;
      }
    }
    std::vector<int> path;
    std::set<int> used;
    walk_varlength(r, token, startNode, st, path, used, maxHops, cont);
  }

  template <typename Cont>
  void walk_varlength(const RelPattern& r, const std::string& token, int curNode,
                      const MatchState& st, std::vector<int>& path, std::set<int>& used,
                      int64_t maxHops, Cont&& cont) const {
    if (int64_t(path.size()) >= r.range->min) {
      MatchState out = st;
      bool ok = true;
      for (int id : path) {
        if (!claim_rel(out, id, token + "#" + std::to_string(id))) {
          // Each path relationship must be new to this MATCH; shared ids with
          // other variables are rejected below via distinct tokens.
          ok = false;
          break;
        }
      }
      if (ok) {
        if (r.var) {
          std::vector<Value> relRefs;
          for (int id : path) relRefs.push_back(Value::rel_ref(id));
          out.bindings[*r.var] = Value::list_of(std::move(relRefs));
        }
        cont(std::move(out), curNode);
      }
    }
    if (int64_t(path.size()) >= maxHops) return;
    for (int id = 0; id < int(g_.rels.size()); ++id) {
      if (used.count(id)) continue;
      if (!rel_core_satisfies(id, r)) continue;
      for (int dir = 0; dir < 2; ++dir) {
        bool forward = dir == 0;
        if (r.dir == RelDir::Right && !forward) continue;
        if (r.dir == RelDir::Left && forward) continue;
        if (r.dir == RelDir::Undirected && g_.rels[id].src == g_.rels[id].dst && !forward) continue;
        int from = forward ? g_.rels[id].src : g_.rels[id].dst;
        int to = forward ? g_.rels[id].dst : g_.rels[id].src;
        if (from != curNode) continue;
        path.push_back(id);
        used.insert(id);
        walk_varlength(r, token, to, st, path, used, maxHops, cont);
        used.erase(id);
        path.pop_back();
      }
    }
  }

  template <typename Cont>
  void replay_bound_path(const RelPattern& r, const std::string& token, int startNode,
                         const MatchState& st, const Value& bound, Cont&& cont) const {
    if (bound.kind != Value::Kind::List) return;
    if (int64_t(bound.list.size()) < r.range->min) return;
    if (r.range->max && int64_t(bound.list.size()) > *r.range->max) return;
    MatchState out = st;
    int cur = startNode;
    for (const auto& rv : bound.list) {
      if (rv.kind != Value::Kind::RelRef) return;
      int id = int(rv.i);
      if (!rel_core_satisfies(id, r)) return;
      int from, to;
      if (r.dir == RelDir::Left) {
        from = g_.rels[id].dst;
        to = g_.rels[id].src;
      } else {
        from = g_.rels[id].src;
        to = g_.rels[id].dst;
      }
      if (r.dir == RelDir::Undirected) {
        if (g_.rels[id].src == cur) { from = g_.rels[id].src; to = g_.rels[id].dst; }
        else if (g_.rels[id].dst == cur) { from = g_.rels[id].dst; to = g_.rels[id].src; }
        else return;
      }
      if (from != cur) return;
      if (!claim_rel(out, id, token + "#" + std::to_string(id))) return;
      cur = to;
    }
    cont(std::move(out), cur);
  }

  template <typename Cont>
  void match_part(const PatternPart& part, MatchState st, Cont&& cont) const {
    const NodePattern& first = part.nodes[0];
    auto go = [&](int nodeId) {
      match_node_at(first, nodeId, st, [&](MatchState st2) {
        match_chain(part, 0, nodeId, st2, cont);
      });
    };
    if (first.var) {
      auto it = st.bindings.find(*first.var);
      if (it != st.bindings.end()) {
        if (it->second.kind != Value::Kind::NodeRef) return;
        go(int(it->second.i));
        return;
      }
    }
    for (int id = 0; id < int(g_.nodes.size()); ++id) go(id);
  }

  std::vector<std::string> new_vars_of_match(const MatchClause& m, const Table& t) const {
    std::vector<std::string> vars;
    auto add = [&](const std::optional<std::string>& v) {
      if (!v) return;
      if (t.col_index(*v) >= 0) return;
      if (std::find(vars.begin(), vars.end(), *v) == vars.end()) vars.push_back(*v);
    };
    for (const auto& p : m.patterns) {
      for (size_t i = 0; i < p.nodes.size(); ++i) {
        add(p.nodes[i].var);
        if (i < p.rels.size()) add(p.rels[i].var);
      }
    }
    return vars;
  }

  Table apply_match(const Table& t, const MatchClause& m) const {
    Table out;
    out.cols = t.cols;
    std::vector<std::string> newVars = new_vars_of_match(m, t);
    for (const auto& v : newVars) out.cols.push_back(v);

    for (const auto& row : t.rows) {
      MatchState seed;
      seed.bindings = env_of(t, row);
      std::vector<Env> matches;

      // Conjunction over comma-separated parts, sharing bindings and the
      // per-MATCH relationship-injectivity claims.
      std::function<void(size_t, MatchState)> rec = [&](size_t idx, MatchState st) {
        if (idx == m.patterns.size()) {
          if (m.where && !truthy(eval_expr(*m.where, st.bindings))) return;
          matches.push_back(std::move(st.bindings));
          return;
        }
        match_part(m.patterns[idx], std::move(st),
                   [&](const MatchState& st2) { rec(idx + 1, st2); });
      };
      rec(0, seed);

      if (matches.empty() && m.optional) {
        std::vector<Value> nulled = row;
        for (size_t i = 0; i < newVars.size(); ++i) nulled.push_back(Value::null());
        out.rows.push_back(std::move(nulled));
        continue;
      }
      for (const auto& env : matches) {
        std::vector<Value> r = row;
        for (const auto& v : newVars) r.push_back(env.at(v));
        out.rows.push_back(std::move(r));
      }
    }
    return out;
  }

  // -- projection, aggregation, ordering --------------------------------------

  static bool contains_agg(const Expr& e) {
    if (e.kind == Expr::Kind::AggCall) return true;
    if (e.lhs && contains_agg(*e.lhs)) return true;
    if (e.rhs && contains_agg(*e.rhs)) return true;
    for (const auto& a : e.args) {
      if (contains_agg(*a)) return true;
    }
    for (const auto& me : e.entries) {
      if (contains_agg(*me.value)) return true;
    }
    return false;
  }

  struct Projected {
    Table table;
    std::vector<int> sourceRow;  // index into the input table, -1 if aggregated
  };

  Value compute_agg(const Expr& agg, const Table& t, const std::vector<size_t>& members) const {
    if (agg.lhs && contains_agg(*agg.lhs)) throw EvalUnsupported("nested aggregate");
    std::vector<Value> vals;
    if (agg.lhs) {
      for (size_t idx : members) {
        Value v = eval_expr(*agg.lhs, env_of(t, t.rows[idx]));
        if (!v.is_null()) vals.push_back(std::move(v));
      }
    }
    switch (agg.agg) {
      case AggFn::Count:
        return Value::integer(agg.lhs ? int64_t(vals.size()) : int64_t(members.size()));
      case AggFn::Sum: {
        int64_t num = 0, den = 1;
        for (const auto& v : vals) {
          if (!v.is_numeric()) throw EvalUnsupported("SUM over non-numeric value");
          num = num * v.den + v.i * den;
          den = den * v.den;
          int64_t g = std::gcd(num < 0 ? -num : num, den);
          if (g > 1) { num /= g; den /= g; }
        }
        return Value::ratio(num, den);
      }
      case AggFn::Min: {
        if (vals.empty()) return Value::null();
        const Value* best = &vals[0];
        for (const auto& v : vals) {
          if (value_compare(v, *best) < 0) best = &v;
        }
        return *best;
      }
      case AggFn::Max: {
        if (vals.empty()) return Value::null();
        const Value* best = &vals[0];
        for (const auto& v : vals) {
          if (value_compare(v, *best) > 0) best = &v;
        }
        return *best;
      }
      case AggFn::Avg: {
        if (vals.empty()) return Value::null();
        int64_t num = 0, den = 1;
        for (const auto& v : vals) {
          if (!v.is_numeric()) throw EvalUnsupported("AVG over non-numeric value");
          num = num * v.den + v.i * den;
          den = den * v.den;
        }
        return Value::ratio(num, den * int64_t(vals.size()));
      }
      case AggFn::Collect:
        return Value::list_of(std::move(vals));
    }
    throw EvalUnsupported("unhandled aggregate");
  }

  Projected project(const Table& t, const std::vector<ProjectionItem>& items) const {
    Projected out;
    for (size_t i = 0; i < items.size(); ++i) {
      std::string name;
      if (items[i].alias) name = *items[i].alias;
      else if (items[i].expr->kind == Expr::Kind::Var) name = items[i].expr->name;
      else name = "$col" + std::to_string(i);
      out.table.cols.push_back(name);
    }

    bool anyAgg = false;
    for (const auto& it : items) {
      if (contains_agg(*it.expr)) anyAgg = true;
    }
    if (!anyAgg) {
      for (size_t ri = 0; ri < t.rows.size(); ++ri) {
        Env env = env_of(t, t.rows[ri]);
        std::vector<Value> row;
        for (const auto& it : items) row.push_back(eval_expr(*it.expr, env));
        out.table.rows.push_back(std::move(row));
        out.sourceRow.push_back(int(ri));
      }
      return out;
    }

    // Cypher implicit grouping: non-aggregated items are the grouping keys.
    std::vector<size_t> keyIdx, aggIdx;
    for (size_t i = 0; i < items.size(); ++i) {
      if (contains_agg(*items[i].expr)) {
        if (items[i].expr->kind != Expr::Kind::AggCall) {
          throw EvalUnsupported("aggregate nested inside an expression");
        }
        aggIdx.push_back(i);
      } else {
        keyIdx.push_back(i);
      }
    }

    auto keyLess = [](const std::vector<Value>& a, const std::vector<Value>& b) {
      return row_less(a, b);
    };
    std::map<std::vector<Value>, std::vector<size_t>, decltype(keyLess)> groups(keyLess);
    for (size_t ri = 0; ri < t.rows.size(); ++ri) {
      Env env = env_of(t, t.rows[ri]);
      std::vector<Value> key;
      for (size_t i : keyIdx) key.push_back(eval_expr(*items[i].expr, env));
      groups[std::move(key)].push_back(ri);
    }
    if (groups.empty() && keyIdx.empty()) groups[{}] = {};

    for (const auto& [key, members] : groups) {
      std::vector<Value> row(items.size());
      for (size_t k = 0; k < keyIdx.size(); ++k) row[keyIdx[k]] = key[k];
      for (size_t i : aggIdx) row[i] = compute_agg(*items[i].expr, t, members);
      out.table.rows.push_back(std::move(row));
      out.sourceRow.push_back(-1);
    }
    return out;
  }

  void order_rows(Projected& p, const Table& input, const std::vector<OrderItem>& order) const {
    if (order.empty()) return;
    struct Keyed {
      std::vector<Value> keys;
      std::vector<Value> row;
      int source;
    };
    std::vector<Keyed> keyed;
    for (size_t ri = 0; ri < p.table.rows.size(); ++ri) {
      Env env;
      if (p.sourceRow[ri] >= 0) env = env_of(input, input.rows[p.sourceRow[ri]]);
      for (size_t c = 0; c < p.table.cols.size(); ++c) env[p.table.cols[c]] = p.table.rows[ri][c];
      Keyed k;
      for (const auto& oi : order) k.keys.push_back(eval_expr(*oi.expr, env));
      k.row = p.table.rows[ri];
      k.source = p.sourceRow[ri];
      keyed.push_back(std::move(k));
    }
    std::stable_sort(keyed.begin(), keyed.end(), [&](const Keyed& a, const Keyed& b) {
      for (size_t i = 0; i < order.size(); ++i) {
        int c = value_compare(a.keys[i], b.keys[i]);
        if (c) return order[i].ascending ? c < 0 : c > 0;
      }
      return row_less(a.row, b.row);  // canonical tie-break
    });
    p.table.rows.clear();
    p.sourceRow.clear();
    for (auto& k : keyed) {
      p.table.rows.push_back(std::move(k.row));
      p.sourceRow.push_back(k.source);
    }
  }

  static void dedup_rows(Projected& p) {
    std::vector<std::vector<Value>> seen;
    std::vector<std::vector<Value>> rows;
    std::vector<int> src;
    for (size_t i = 0; i < p.table.rows.size(); ++i) {
      bool dup = false;
      for (const auto& s : seen) {
        if (row_equal(s, p.table.rows[i])) { dup = true; break; }
      }
      if (dup) continue;
      seen.push_back(p.table.rows[i]);
      rows.push_back(p.table.rows[i]);
      src.push_back(p.sourceRow[i]);
    }
    p.table.rows = std::move(rows);
    p.sourceRow = std::move(src);
  }

  static void slice_rows(Projected& p, const std::optional<int64_t>& skip,
                         const std::optional<int64_t>& limit) {
    size_t from = skip ? size_t(std::min<int64_t>(*skip, int64_t(p.table.rows.size()))) : 0;
    size_t count = p.table.rows.size() - from;
    if (limit) count = std::min<size_t>(count, size_t(std::max<int64_t>(*limit, 0)));
    std::vector<std::vector<Value>> rows(p.table.rows.begin() + from,
                                         p.table.rows.begin() + from + count);
    std::vector<int> src(p.sourceRow.begin() + from, p.sourceRow.begin() + from + count);
    p.table.rows = std::move(rows);
    p.sourceRow = std::move(src);
  }

  Table apply_with(const Table& t, const WithClause& w) const {
    Projected p = project(t, w.items);
    if (w.distinct) dedup_rows(p);
    order_rows(p, t, w.orderBy);
    slice_rows(p, w.skip, w.limit);
    if (w.where) {
      Projected filtered;
      filtered.table.cols = p.table.cols;
      for (size_t i = 0; i < p.table.rows.size(); ++i) {
        Env env;
        if (p.sourceRow[i] >= 0) env = env_of(t, t.rows[p.sourceRow[i]]);
        for (size_t c = 0; c < p.table.cols.size(); ++c) env[p.table.cols[c]] = p.table.rows[i][c];
        if (truthy(eval_expr(*w.where, env))) {
          filtered.table.rows.push_back(p.table.rows[i]);
          filtered.sourceRow.push_back(p.sourceRow[i]);
        }
      }
      p = std::move(filtered);
    }
    return p.table;
  }

  Table apply_unwind(const Table& t, const UnwindClause& u) const {
    Table out;
    out.cols = t.cols;
    out.cols.push_back(u.alias);
    for (const auto& row : t.rows) {
      Env env = env_of(t, row);
      Value v = eval_expr(*u.list, env);
      if (v.is_null()) continue;
      if (v.kind == Value::Kind::List) {
        for (const auto& elem : v.list) {
          std::vector<Value> r = row;
          r.push_back(elem);
          out.rows.push_back(std::move(r));
        }
      } else {
        std::vector<Value> r = row;
        r.push_back(v);
        out.rows.push_back(std::move(r));
      }
    }
    return out;
  }

  Table apply_clause(const Table& t, const Clause& c) const {
    switch (c.kind) {
      case Clause::Kind::Match: return apply_match(t, c.match);
      case Clause::Kind::With: return apply_with(t, c.with);
      case Clause::Kind::Unwind: return apply_unwind(t, c.unwind);
    }
    throw EvalUnsupported("unhandled clause");
  }

  ResultBag finish_return(const Table& t, const ReturnClause& ret, const SingleQuery& q) const {
    std::vector<ProjectionItem> items = ret.items;
    if (ret.star) {
      Scope scope = scope_at_return(q);
      items.clear();
      for (const auto& [name, kind] : scope) {
        (void)kind;
        Expr e;
        e.kind = Expr::Kind::Var;
        e.name = name;
        ProjectionItem item;
        item.expr = make_expr(std::move(e));
        items.push_back(std::move(item));
      }
    }
    Projected p = project(t, items);
    if (ret.distinct) dedup_rows(p);
    order_rows(p, t, ret.orderBy);
    slice_rows(p, ret.skip, ret.limit);
    ResultBag bag;
    bag.arity = items.size();
    bag.rows = std::move(p.table.rows);
    bag.ordered = !ret.orderBy.empty();
    return bag;
  }
};

}  // namespace detail

/// Reference semantics: enumerate structure-preserving, label-respecting
/// mappings with relationship-injectivity per MATCH, then apply the clause
/// pipeline under bag semantics.
inline ResultBag evaluate(const QueryAst& ast, const PropertyGraph& graph) {
  ResultBag result;
  bool first = true;
  for (const auto& b : ast.branches) {
    detail::Evaluator ev(graph);
    ResultBag piece = ev.run(b.query);
    if (first) {
      result = std::move(piece);
      first = false;
      continue;
    }
    if (piece.arity != result.arity) throw EvalUnsupported("UNION branch arity mismatch");
    result.ordered = false;
    for (auto& r : piece.rows) result.rows.push_back(std::move(r));
    if (!b.unionAll) {
      // UNION deduplicates the combined bag.
      std::vector<std::vector<Value>> rows;
      for (auto& r : result.rows) {
        bool dup = false;
        for (const auto& s : rows) {
          if (row_equal(s, r)) { dup = true; break; }
        }
        if (!dup) rows.push_back(std::move(r));
      }
      result.rows = std::move(rows);
    }
  }
  return result;
}

}  // namespace cyeq
