/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cyeq/ast.hpp"
#include "cyeq/diagnostics.hpp"
#include "cyeq/gexpr.hpp"
#include "cyeq/normalize.hpp"
#include "cyeq/printer.hpp"

namespace cyeq {

struct CompiledQuery {
  GExprPtr g;
  size_t arity = 0;
};

namespace bdetail {

class Builder {
 public:
  explicit Builder(std::vector<int> colMap) : colMap_(std::move(colMap)) {}

  CompiledQuery run(const QueryAst& ast) {
    CompiledQuery out;
    GExprPtr acc;
    std::optional<size_t> arity;
    for (size_t i = 0; i < ast.branches.size(); ++i) {
      CompiledQuery piece = compile_single(ast.branches[i].query);
      if (arity && *arity != piece.arity) {
        throw UnsupportedFeature("UNION branch arity mismatch");
      }
      arity = piece.arity;
      if (!acc) {
        acc = piece.g;
      } else {
        acc = g_add({acc, piece.g});
        if (!ast.branches[i].unionAll) acc = g_squash(acc);
      }
    }
    out.g = acc;
    out.arity = *arity;
    return out;
  }

 private:
  std::vector<int> colMap_;
  int entityCounter_ = 0;
  int tempCounter_ = 0;
  std::set<std::string> queryRefs_;

  std::string fresh_entity() { return "e" + std::to_string(++entityCounter_); }
  std::string fresh_temp() { return "w" + std::to_string(++tempCounter_); }

  struct EnvEntry {
    GExprPtr term;  // scalar or entity term; null for map/list entries
    bool isEntity = false;
    bool isNull = false;
    bool isMap = false;
    bool isList = false;
    std::map<std::string, GExprPtr> mapEntries;
    std::vector<ExprPtr> listElems;
  };
  using Env = std::map<std::string, EnvEntry>;

  struct World {
    std::vector<std::string> binders;
    std::vector<GExprPtr> factors;
    Env env;
  };

  GExprPtr tuple_col_for(size_t item) const {
    int col = colMap_.empty() ? int(item) : colMap_.at(item);
    return g_tuple_col(col);
  }

  // -- terms and predicates --------------------------------------------------

  static GExprPtr literal_term(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit: return g_const(Value::integer(e.intValue));
      case Expr::Kind::StringLit: return g_const(Value::str(e.strValue()));
      case Expr::Kind::BoolLit: return g_const(Value::boolean(e.boolValue));
      default: throw UnsupportedFeature("expected literal");
    }
  }

  static bool is_null_const(const GExprPtr& t) {
    return t->kind == GExpr::Kind::Const && t->constant.is_null();
  }

  const EnvEntry& resolve(const std::string& name, const Env& env) const {
    auto it = env.find(name);
    if (it == env.end()) throw UnsupportedFeature("unbound variable " + name);
    return it->second;
  }

  GExprPtr term_of(const Expr& e, const Env& env) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
      case Expr::Kind::StringLit:
      case Expr::Kind::BoolLit:
        return literal_term(e);
      case Expr::Kind::Var: {
        const EnvEntry& entry = resolve(e.name, env);
        if (entry.isNull) return g_const(Value::null());
        if (entry.isMap || entry.isList) {
          throw UnsupportedFeature("list value in scalar position");
        }
        return entry.term;
      }
      case Expr::Kind::PropAccess: {
        const EnvEntry& entry = resolve(e.name, env);
        if (entry.isNull) return g_const(Value::null());
        if (entry.isMap) {
          auto it = entry.mapEntries.find(e.key);
          return it == entry.mapEntries.end() ? g_const(Value::null()) : it->second;
        }
        if (entry.isList) throw UnsupportedFeature("property access on a list");
        if (entry.isEntity || entry.term->kind == GExpr::Kind::TempCol) {
          return g_prop(entry.term, e.key);
        }
        throw UnsupportedFeature("property access on a scalar value");
      }
      case Expr::Kind::FnCall: {
        std::vector<GExprPtr> args;
        for (const auto& a : e.args) {
          GExprPtr t = term_of(*a, env);
          if (is_null_const(t)) return g_const(Value::null());
          args.push_back(std::move(t));
        }
        std::string fn = to_upper(e.name) == "ID" ? "id" : "fn_" + to_upper(e.name);
        return g_app(fn, std::move(args));
      }
      case Expr::Kind::Cmp:
      case Expr::Kind::And:
      case Expr::Kind::Or:
      case Expr::Kind::Not:
      case Expr::Kind::IsNull:
      case Expr::Kind::Exists:
        // Boolean expression in value position: a {0,1} term tagged so both
        // sides encode it identically.
        return g_app("bool", {predicate(e, env)});
      case Expr::Kind::AggCall:
        throw UnsupportedFeature("aggregate nested inside an expression");
      default:
        throw UnsupportedFeature("unsupported expression in value position");
    }
  }

  static std::optional<std::pair<int64_t, int64_t>> cmp_interval(CmpOp op, int64_t c) {
    const int64_t lo = INT64_MIN, hi = INT64_MAX;
    switch (op) {
      case CmpOp::Eq: return std::make_pair(c, c);
      case CmpOp::Lt: return c == lo ? std::make_pair(int64_t(1), int64_t(0))
                                     : std::make_pair(lo, c - 1);
      case CmpOp::Le: return std::make_pair(lo, c);
      case CmpOp::Gt: return c == hi ? std::make_pair(int64_t(1), int64_t(0))
                                     : std::make_pair(c + 1, hi);
      case CmpOp::Ge: return std::make_pair(c, hi);
      case CmpOp::Ne: return std::nullopt;
    }
    return std::nullopt;
  }

  /// OR of two comparisons over the same term with provably disjoint integer
  /// ranges stays a plain sum; anything else is squashed.
  static bool disjoint_or(const GExprPtr& a, const GExprPtr& b) {
    if (a->kind != GExpr::Kind::Bracket || b->kind != GExpr::Kind::Bracket) return false;
    if (a->mode != GExpr::BracketMode::Pred || b->mode != GExpr::BracketMode::Pred) return false;
    if (a->args.size() != 2 || b->args.size() != 2) return false;
    auto split = [](const GExprPtr& br) -> std::optional<std::pair<std::string, std::pair<CmpOp, int64_t>>> {
      const GExprPtr& l = br->args[0];
      const GExprPtr& r = br->args[1];
      if (r->kind == GExpr::Kind::Const && r->constant.kind == Value::Kind::Int) {
        return std::make_pair(to_text(l), std::make_pair(br->cmp, r->constant.i));
      }
      return std::nullopt;
    };
    auto sa = split(a), sb = split(b);
    if (!sa || !sb || sa->first != sb->first) return false;
    auto ia = cmp_interval(sa->second.first, sa->second.second);
    auto ib = cmp_interval(sb->second.first, sb->second.second);
    if (!ia || !ib) return false;
    return std::max(ia->first, ib->first) > std::min(ia->second, ib->second);
  }

  GExprPtr predicate(const Expr& e, const Env& env) {
    switch (e.kind) {
      case Expr::Kind::BoolLit:
        return e.boolValue ? g_one() : g_zero();
      case Expr::Kind::Cmp: {
        GExprPtr l = term_of(*e.lhs, env);
        GExprPtr r = term_of(*e.rhs, env);
        if (is_null_const(l) || is_null_const(r)) return g_zero();
        if (l->kind == GExpr::Kind::Const && r->kind == GExpr::Kind::Const) {
          return predicate_compare(e.cmp, l->constant, r->constant) ? g_one() : g_zero();
        }
        return g_bracket(GExpr::BracketMode::Pred, e.cmp, std::move(l), std::move(r));
      }
      case Expr::Kind::And:
        return g_mul({predicate(*e.lhs, env), predicate(*e.rhs, env)});
      case Expr::Kind::Or: {
        GExprPtr l = predicate(*e.lhs, env);
        GExprPtr r = predicate(*e.rhs, env);
        if (disjoint_or(l, r)) return g_add({std::move(l), std::move(r)});
        return g_squash(g_add({std::move(l), std::move(r)}));
      }
      case Expr::Kind::Not:
        return g_not(predicate(*e.lhs, env));
      case Expr::Kind::IsNull: {
        GExprPtr t = term_of(*e.lhs, env);
        if (is_null_const(t)) return g_one();
        if (t->kind == GExpr::Kind::EntityVar) return g_zero();
        if (t->kind == GExpr::Kind::Const) return g_zero();
        return g_isnull(std::move(t));
      }
      case Expr::Kind::Exists:
        return exists_predicate(*e.existsQuery, env);
      case Expr::Kind::Var:
      case Expr::Kind::PropAccess:
      case Expr::Kind::FnCall: {
        GExprPtr t = term_of(e, env);
        if (is_null_const(t)) return g_zero();
        return g_bracket(GExpr::BracketMode::Pred, CmpOp::Eq, std::move(t),
                         g_const(Value::boolean(true)));
      }
      case Expr::Kind::AggCall:
        throw UnsupportedFeature("aggregate in a predicate");
      default:
        throw UnsupportedFeature("unsupported predicate expression");
    }
  }

  GExprPtr exists_predicate(const SingleQuery& body, const Env& outer) {
    World w;
    w.env = outer;
    for (const auto& c : body.clauses) {
      if (c.kind != Clause::Kind::Match) throw UnsupportedFeature("EXISTS body clause");
      extend_with_match(w, c.match);
    }
    return g_squash(g_sum(w.binders, g_mul(w.factors)));
  }

  // -- pattern compilation -----------------------------------------------------

  /// Binds (or re-binds) a node pattern element; emits its constraints.
  GExprPtr node_term(const NodePattern& n, World& w) {
    GExprPtr term;
    if (n.var) {
      auto it = w.env.find(*n.var);
      if (it != w.env.end()) {
        if (it->second.isNull) {
          // Re-matching a null-filled variable can never succeed.
          w.factors.push_back(g_zero());
          return g_entity("e_dead");
        }
        term = it->second.term;
      } else {
        std::string name = fresh_entity();
        term = g_entity(name);
        w.binders.push_back(name);
        EnvEntry entry;
        entry.term = term;
        entry.isEntity = true;
        w.env.emplace(*n.var, std::move(entry));
      }
    } else {
      std::string name = fresh_entity();
      term = g_entity(name);
      w.binders.push_back(name);
    }
    w.factors.push_back(g_app("Node", {term}));
    for (const auto& l : n.labels) {
      w.factors.push_back(g_app("Lab", {term, g_const(Value::str(l))}));
    }
    for (const auto& p : n.props) {
      w.factors.push_back(g_bracket(GExpr::BracketMode::Pred, CmpOp::Eq, g_prop(term, p.key),
                                    literal_term(*p.value)));
    }
    return term;
  }

  GExprPtr rel_term(const RelPattern& r, World& w) {
    if (r.dir == RelDir::Undirected) {
      throw UnsupportedFeature("undirected relationship survived normalization");
    }
    if (r.range && r.range->max) {
      throw UnsupportedFeature("bounded variable-length path under a non-linear pipeline");
    }
    if (r.range && r.var && queryRefs_.count(*r.var)) {
      throw UnsupportedFeature("variable-length path variable is referenced");
    }
    GExprPtr term;
    if (r.var && !r.range) {
      auto it = w.env.find(*r.var);
      if (it != w.env.end()) {
        if (it->second.isNull) {
          w.factors.push_back(g_zero());
          return g_entity("e_dead");
        }
        term = it->second.term;
      } else {
        std::string name = fresh_entity();
        term = g_entity(name);
        w.binders.push_back(name);
        EnvEntry entry;
        entry.term = term;
        entry.isEntity = true;
        w.env.emplace(*r.var, std::move(entry));
      }
    } else {
      // Anonymous or variable-length: the variable (if any) is unreferenced.
      std::string name = fresh_entity();
      term = g_entity(name);
      w.binders.push_back(name);
    }
    w.factors.push_back(g_app("Rel", {term}));
    if (r.range) w.factors.push_back(g_app("UNBOUNDED", {term}));
    if (!r.labels.empty()) {
      std::vector<GExprPtr> labs;
      for (const auto& l : r.labels) {
        labs.push_back(g_app("Lab", {term, g_const(Value::str(l))}));
      }
      w.factors.push_back(g_add(std::move(labs)));  // one label per relationship
    }
    for (const auto& p : r.props) {
      w.factors.push_back(g_bracket(GExpr::BracketMode::Pred, CmpOp::Eq, g_prop(term, p.key),
                                    literal_term(*p.value)));
    }
    return term;
  }

  void extend_with_match(World& w, const MatchClause& m) {
    // Relationship entities of this MATCH, with the source variable identity
    // used to exempt same-variable reuse from injectivity.
    std::vector<std::pair<std::string, GExprPtr>> relEntities;
    for (const auto& part : m.patterns) {
      GExprPtr left = node_term(part.nodes[0], w);
      for (size_t i = 0; i < part.rels.size(); ++i) {
        const RelPattern& r = part.rels[i];
        GExprPtr rel = rel_term(r, w);
        GExprPtr right = node_term(part.nodes[i + 1], w);
        // (a)-[r]->(b): in(r) is the node the relationship leaves.
        GExprPtr head = r.dir == RelDir::Right ? left : right;
        GExprPtr tail = r.dir == RelDir::Right ? right : left;
        w.factors.push_back(
            g_bracket(GExpr::BracketMode::TupleEq, CmpOp::Eq, g_app("in", {rel}), head));
        w.factors.push_back(
            g_bracket(GExpr::BracketMode::TupleEq, CmpOp::Eq, g_app("out", {rel}), tail));
        std::string identity = r.var ? ("v:" + *r.var) : ("a:" + to_text(rel));
        relEntities.emplace_back(identity, rel);
        left = right;
      }
    }
    for (size_t i = 0; i < relEntities.size(); ++i) {
      for (size_t j = i + 1; j < relEntities.size(); ++j) {
        if (relEntities[i].first == relEntities[j].first) continue;
        w.factors.push_back(g_not(g_bracket(GExpr::BracketMode::Pred, CmpOp::Eq,
                                            relEntities[i].second, relEntities[j].second)));
      }
    }
    if (m.where) w.factors.push_back(predicate(*m.where, w.env));
  }

  void apply_optional_match(std::vector<World>& worlds, const MatchClause& m) {
    std::vector<World> out;
    for (const auto& w : worlds) {
      World matched = w;
      extend_with_match(matched, m);

      std::vector<std::string> newBinders;
      std::vector<GExprPtr> newFactors;
      for (size_t i = w.binders.size(); i < matched.binders.size(); ++i) {
        newBinders.push_back(matched.binders[i]);
      }
      for (size_t i = w.factors.size(); i < matched.factors.size(); ++i) {
        newFactors.push_back(matched.factors[i]);
      }

      World absent = w;
      GExprPtr patternSum = g_sum(newBinders, g_mul(newFactors));
      absent.factors.push_back(g_not(patternSum));
      absent.factors.push_back(g_app("isNULL", {g_squash(patternSum)}));
      for (const auto& [name, entry] : matched.env) {
        if (!absent.env.count(name)) {
          EnvEntry nulled;
          nulled.isNull = true;
          nulled.term = g_const(Value::null());
          absent.env.emplace(name, std::move(nulled));
        }
        (void)entry;
      }
      out.push_back(std::move(matched));
      out.push_back(std::move(absent));
    }
    worlds = std::move(out);
  }

  // -- projections -------------------------------------------------------------

  static bool has_agg(const ExprPtr& e) { return detail::expr_has_agg(e); }

  /// Aggregate argument compiled over a fresh copy of the worlds, pinned to
  /// the grouping columns.
  GExprPtr aggregate_term(const Expr& agg, const std::vector<World>& worlds,
                          const std::vector<size_t>& keyItems,
                          const std::vector<ProjectionItem>& items,
                          const std::function<GExprPtr(size_t)>& colTerm) {
    if (agg.lhs && has_agg(agg.lhs)) throw UnsupportedFeature("unsupported: nested aggregate");
    std::vector<GExprPtr> pieces;
    for (const auto& w : worlds) {
      std::map<std::string, std::string> ren;
      for (const auto& b : w.binders) {
        ren[b] = b[0] == 'w' ? fresh_temp() : fresh_entity();
      }
      std::vector<GExprPtr> factors;
      for (const auto& f : w.factors) factors.push_back(rename_vars(f, ren));
      Env envCopy;
      for (const auto& [name, entry] : w.env) {
        EnvEntry e2 = entry;
        if (e2.term) e2.term = rename_vars(e2.term, ren);
        for (auto& [k, v] : e2.mapEntries) v = rename_vars(v, ren);
        envCopy.emplace(name, std::move(e2));
      }
      for (size_t k : keyItems) {
        factors.push_back(g_bracket(GExpr::BracketMode::TupleEq, CmpOp::Eq,
                                    term_of(*items[k].expr, envCopy), colTerm(k)));
      }
      switch (agg.agg) {
        case AggFn::Count:
          if (agg.lhs) {
            GExprPtr v = term_of(*agg.lhs, envCopy);
            if (is_null_const(v)) {
              factors.push_back(g_zero());  // null rows never count
            } else if (v->kind != GExpr::Kind::EntityVar && v->kind != GExpr::Kind::Const) {
              factors.push_back(g_not(g_isnull(v)));
            }
          }
          break;
        case AggFn::Sum: {
          GExprPtr v = term_of(*agg.lhs, envCopy);
          if (is_null_const(v)) {
            factors.push_back(g_zero());
          } else {
            if (v->kind != GExpr::Kind::EntityVar && v->kind != GExpr::Kind::Const) {
              factors.push_back(g_not(g_isnull(v)));
            }
            factors.push_back(v);
          }
          break;
        }
        case AggFn::Min:
        case AggFn::Max:
        case AggFn::Avg:
        case AggFn::Collect: {
          GExprPtr v = term_of(*agg.lhs, envCopy);
          factors.push_back(
              g_bracket(GExpr::BracketMode::TupleEq, CmpOp::Eq, g_app("elem", {}), v));
          break;
        }
      }
      std::vector<std::string> binders;
      for (const auto& b : w.binders) binders.push_back(ren.at(b));
      pieces.push_back(g_sum(std::move(binders), g_mul(std::move(factors))));
    }
    GExprPtr collected = g_add(std::move(pieces));
    switch (agg.agg) {
      case AggFn::Count:
      case AggFn::Sum:
        return collected;
      case AggFn::Min: return g_app("agg_min", {collected});
      case AggFn::Max: return g_app("agg_max", {collected});
      case AggFn::Avg: return g_app("agg_avg", {collected});
      case AggFn::Collect: return g_app("agg_collect", {collected});
    }
    throw UnsupportedFeature("unhandled aggregate");
  }

  /// Shared by RETURN and intermediate-result projection: compiles worlds and
  /// projection items into a single term, the items pinned through colTerm.
  GExprPtr project(const std::vector<World>& worlds, const std::vector<ProjectionItem>& items,
                   bool distinct, const std::vector<OrderItem>& orderBy,
                   const std::function<GExprPtr(size_t)>& colTerm) {
    std::vector<size_t> keyItems, aggItems;
    for (size_t i = 0; i < items.size(); ++i) {
      if (has_agg(items[i].expr)) {
        if (items[i].expr->kind != Expr::Kind::AggCall) {
          throw UnsupportedFeature("aggregate nested inside an expression");
        }
        aggItems.push_back(i);
      } else {
        keyItems.push_back(i);
      }
    }

    // ORDER BY keys: a key matching a projected item reuses its column.
    auto order_tags = [&](const World& w) {
      std::vector<GExprPtr> tags;
      for (size_t k = 0; k < orderBy.size(); ++k) {
        GExprPtr key;
        for (size_t i = 0; i < items.size(); ++i) {
          if (print(*orderBy[k].expr) == print(*items[i].expr)) {
            key = colTerm(i);
            break;
          }
        }
        if (!key) key = term_of(*orderBy[k].expr, w.env);
        tags.push_back(g_bracket(GExpr::BracketMode::TupleEq, CmpOp::Eq,
                                 g_app(orderBy[k].ascending ? "asc" : "desc",
                                       {g_const(Value::integer(int64_t(k) + 1))}),
                                 key));
      }
      return tags;
    };

    if (aggItems.empty()) {
      std::vector<GExprPtr> pieces;
      for (const auto& w : worlds) {
        std::vector<GExprPtr> factors = w.factors;
        for (size_t i = 0; i < items.size(); ++i) {
          factors.push_back(g_bracket(GExpr::BracketMode::TupleEq, CmpOp::Eq, colTerm(i),
                                      term_of(*items[i].expr, w.env)));
        }
        for (auto& t : order_tags(w)) factors.push_back(std::move(t));
        pieces.push_back(g_sum(w.binders, g_mul(std::move(factors))));
      }
      GExprPtr g = g_add(std::move(pieces));
      if (distinct) g = g_squash(g);
      return g;
    }

    // Implicit grouping: one output row per grouping-key combination.
    std::vector<GExprPtr> result;
    if (!keyItems.empty()) {
      std::vector<GExprPtr> pieces;
      for (const auto& w : worlds) {
        std::vector<GExprPtr> factors = w.factors;
        for (size_t k : keyItems) {
          factors.push_back(g_bracket(GExpr::BracketMode::TupleEq, CmpOp::Eq, colTerm(k),
                                      term_of(*items[k].expr, w.env)));
        }
        pieces.push_back(g_sum(w.binders, g_mul(std::move(factors))));
      }
      result.push_back(g_squash(g_add(std::move(pieces))));
    }
    for (size_t j : aggItems) {
      result.push_back(g_bracket(GExpr::BracketMode::TupleEq, CmpOp::Eq, colTerm(j),
                                 aggregate_term(*items[j].expr, worlds, keyItems, items,
                                                colTerm)));
    }
    if (!orderBy.empty()) {
      // keys on aggregated output refer to projected columns only
      for (size_t k = 0; k < orderBy.size(); ++k) {
        GExprPtr key;
        for (size_t i = 0; i < items.size(); ++i) {
          if (print(*orderBy[k].expr) == print(*items[i].expr)) {
            key = colTerm(i);
            break;
          }
        }
        if (!key) throw UnsupportedFeature("ORDER BY key not among aggregated projections");
        result.push_back(g_bracket(GExpr::BracketMode::TupleEq, CmpOp::Eq,
                                   g_app(orderBy[k].ascending ? "asc" : "desc",
                                         {g_const(Value::integer(int64_t(k) + 1))}),
                                   key));
      }
    }
    return g_mul(std::move(result));
  }

  // -- clause pipeline -----------------------------------------------------------

  void apply_soft_with(std::vector<World>& worlds, const WithClause& w) {
    for (auto& world : worlds) {
      Env out;
      for (const auto& item : w.items) {
        std::string name = item.alias ? *item.alias : item.expr->name;
        if (item.expr->kind == Expr::Kind::Var) {
          out[name] = resolve(item.expr->name, world.env);
        } else if (item.expr->kind == Expr::Kind::ListLit) {
          EnvEntry entry;
          entry.isList = true;
          entry.listElems = item.expr->args;
          out[name] = std::move(entry);
        } else {
          EnvEntry entry;
          GExprPtr t = term_of(*item.expr, world.env);
          entry.isNull = is_null_const(t);
          entry.term = std::move(t);
          out[name] = std::move(entry);
        }
      }
      if (w.where) {
        Env merged = world.env;
        for (const auto& [k, v] : out) merged[k] = v;
        world.factors.push_back(predicate(*w.where, merged));
      }
      world.env = std::move(out);
    }
  }

  void apply_hard_with(std::vector<World>& worlds, const WithClause& w) {
    if (w.skip || w.limit) {
      throw UnsupportedFeature("intermediate LIMIT/SKIP requires query segmentation");
    }
    std::string tv = fresh_temp();
    auto colTerm = [&](size_t i) { return g_temp_col(tv, int(i)); };
    GExprPtr inner = project(worlds, w.items, w.distinct, {}, colTerm);

    World next;
    next.binders = {tv};
    next.factors = {inner};
    for (size_t i = 0; i < w.items.size(); ++i) {
      const auto& item = w.items[i];
      std::string name = item.alias ? *item.alias : item.expr->name;
      EnvEntry entry;
      entry.term = g_temp_col(tv, int(i));
      if (item.expr->kind == Expr::Kind::Var) {
        // Entity-ness flows through pass-through items.
        for (const auto& world : worlds) {
          auto it = world.env.find(item.expr->name);
          if (it != world.env.end() && it->second.isEntity) entry.isEntity = true;
        }
      }
      next.env.emplace(name, std::move(entry));
    }
    if (w.where) next.factors.push_back(predicate(*w.where, next.env));
    worlds = {std::move(next)};
  }

  void apply_unwind(std::vector<World>& worlds, const UnwindClause& u) {
    std::vector<World> out;
    for (const auto& w : worlds) {
      std::vector<ExprPtr> elems;
      if (u.list->kind == Expr::Kind::ListLit) {
        elems = u.list->args;
      } else if (u.list->kind == Expr::Kind::Var) {
        const EnvEntry& entry = resolve(u.list->name, w.env);
        if (!entry.isList) throw UnsupportedFeature("UNWIND over a non-literal list");
        elems = entry.listElems;
      } else {
        throw UnsupportedFeature("UNWIND over a non-literal list");
      }
      for (const auto& elem : elems) {
        World next = w;
        EnvEntry entry;
        if (elem->kind == Expr::Kind::MapLit) {
          entry.isMap = true;
          for (const auto& me : elem->entries) entry.mapEntries[me.key] = literal_term(*me.value);
        } else {
          entry.term = literal_term(*elem);
        }
        next.env[u.alias] = std::move(entry);
        out.push_back(std::move(next));
      }
    }
    worlds = std::move(out);
  }

  CompiledQuery compile_single(const SingleQuery& q) {
    if (q.ret.star) throw UnsupportedFeature("RETURN * must be normalized first");
    if (q.ret.items.empty()) throw UnsupportedFeature("query without RETURN");
    if (!colMap_.empty() && colMap_.size() != q.ret.items.size()) {
      throw UnsupportedFeature("column map arity mismatch");
    }
    queryRefs_ = detail::referenced_names(q);

    // UNWIND over COLLECT re-expands the collected rows: the pair cancels.
    std::vector<Clause> clauses = q.clauses;
    for (size_t i = 0; i + 1 < clauses.size(); ++i) {
      if (clauses[i].kind != Clause::Kind::With || clauses[i + 1].kind != Clause::Kind::Unwind) {
        continue;
      }
      const WithClause& wc = clauses[i].with;
      const UnwindClause& uc = clauses[i + 1].unwind;
      if (wc.items.size() != 1 || !wc.items[0].alias || wc.distinct || wc.where || wc.skip ||
          wc.limit) {
        continue;
      }
      const Expr& item = *wc.items[0].expr;
      if (item.kind != Expr::Kind::AggCall || item.agg != AggFn::Collect) continue;
      if (uc.list->kind != Expr::Kind::Var || uc.list->name != *wc.items[0].alias) continue;
      Clause softened;
      softened.kind = Clause::Kind::With;
      ProjectionItem replacement;
      replacement.expr = item.lhs;
      replacement.alias = uc.alias;
      softened.with.items = {replacement};
      clauses[i] = softened;
      clauses.erase(clauses.begin() + i + 1);
      break;
    }

    std::vector<World> worlds(1);
    for (const auto& c : clauses) {
      switch (c.kind) {
        case Clause::Kind::Match:
          if (c.match.optional) {
            apply_optional_match(worlds, c.match);
          } else {
            for (auto& w : worlds) extend_with_match(w, c.match);
          }
          break;
        case Clause::Kind::With: {
          bool hasAgg = false;
          for (const auto& it : c.with.items) hasAgg = hasAgg || has_agg(it.expr);
          if (c.with.distinct || hasAgg) {
            apply_hard_with(worlds, c.with);
          } else {
            if (c.with.skip || c.with.limit) {
              throw UnsupportedFeature("intermediate LIMIT/SKIP requires query segmentation");
            }
            apply_soft_with(worlds, c.with);
          }
          break;
        }
        case Clause::Kind::Unwind:
          apply_unwind(worlds, c.unwind);
          break;
      }
    }

    auto colTerm = [&](size_t i) { return tuple_col_for(i); };
    GExprPtr g = project(worlds, q.ret.items, q.ret.distinct, q.ret.orderBy, colTerm);
    if (q.ret.limit) {
      g = g_mul({g, g_bracket(GExpr::BracketMode::TupleEq, CmpOp::Eq, g_app("limit", {}),
                              g_const(Value::integer(*q.ret.limit)))});
    }
    if (q.ret.skip) {
      g = g_mul({g, g_bracket(GExpr::BracketMode::TupleEq, CmpOp::Eq, g_app("skip", {}),
                              g_const(Value::integer(*q.ret.skip)))});
    }
    return {g, q.ret.items.size()};
  }
};

}  // namespace bdetail

/// Compiles a normalized query into its multiplicity term over the result
/// tuple. colMap maps the query's column index to the shared tuple column
/// (identity when empty). Constructs outside the modeled set raise
/// UnsupportedFeature.
inline CompiledQuery build(const QueryAst& ast, const std::vector<int>& colMap = {}) {
  bdetail::Builder b(colMap);
  return b.run(ast);
}

inline CompiledQuery build(const NormalizedAst& ast, const std::vector<int>& colMap = {}) {
  return build(ast.ast, colMap);
}

}  // namespace cyeq
