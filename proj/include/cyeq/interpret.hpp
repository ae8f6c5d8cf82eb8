/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cyeq/gexpr.hpp"
#include "cyeq/graph.hpp"

namespace cyeq {

struct NotInterpretable : std::runtime_error {
  explicit NotInterpretable(const std::string& what) : std::runtime_error(what) {}
};

namespace idetail {

class Interpreter {
 public:
  Interpreter(const PropertyGraph& g, const std::vector<Value>& tuple) : g_(g), tuple_(tuple) {}

  int64_t eval(const GExprPtr& e) {
    switch (e->kind) {
      case GExpr::Kind::Zero: return 0;
      case GExpr::Kind::One: return 1;
      case GExpr::Kind::Add: {
        int64_t s = 0;
        for (const auto& a : e->args) s += eval(a);
        return s;
      }
      case GExpr::Kind::Mul: {
        int64_t p = 1;
        for (const auto& a : e->args) {
          p *= eval_factor(a);
          if (p == 0) return 0;
        }
        return p;
      }
      case GExpr::Kind::Squash: {
        int64_t v = eval(e->args[0]);
        return v > 0 ? 1 : 0;
      }
      case GExpr::Kind::Not: {
        int64_t v = eval(e->args[0]);
        return v > 0 ? 0 : 1;
      }
      case GExpr::Kind::Bracket: {
        if (e->mode == GExpr::BracketMode::IsNull) return term(e->args[0]).is_null() ? 1 : 0;
        Value l = term(e->args[0]);
        Value r = term(e->args[1]);
        if (e->mode == GExpr::BracketMode::TupleEq) return value_equal(l, r) ? 1 : 0;
        return predicate_compare(e->cmp, l, r) ? 1 : 0;
      }
      case GExpr::Kind::Sum: {
        for (const auto& b : e->bound) {
          if (!b.empty() && b[0] == 'w') {
            throw NotInterpretable("summation over an intermediate tuple");
          }
        }
        return sum_over(e->bound, 0, e->args[0]);
      }
      case GExpr::Kind::App:
        return app_factor(*e);
      default:
        return eval_factor(e);
    }
  }

 private:
  const PropertyGraph& g_;
  const std::vector<Value>& tuple_;
  std::map<std::string, int> env_;  // entity variable -> entity index

  int64_t sum_over(const std::vector<std::string>& bound, size_t i, const GExprPtr& body) {
    if (i == bound.size()) return eval(body);
    int64_t total = 0;
    const int universe = int(g_.entity_count());
    for (int ent = 0; ent < universe; ++ent) {
      env_[bound[i]] = ent;
      total += sum_over(bound, i + 1, body);
    }
    env_.erase(bound[i]);
    return total;
  }

  /// Numeric value of a product factor; value terms contribute their integer
  /// value (nulls contribute zero, other kinds are not interpretable).
  int64_t eval_factor(const GExprPtr& e) {
    switch (e->kind) {
      case GExpr::Kind::PropAccess:
      case GExpr::Kind::Const:
      case GExpr::Kind::TupleCol: {
        Value v = term(e);
        if (v.is_null()) return 0;
        if (v.kind == Value::Kind::Int) return v.i;
        throw NotInterpretable("non-integer value in numeric position");
      }
      case GExpr::Kind::EntityVar:
      case GExpr::Kind::TempCol:
      case GExpr::Kind::TempVar:
        throw NotInterpretable("tuple term in numeric position");
      default:
        return eval(e);
    }
  }

  int64_t app_factor(const GExpr& e) {
    const std::string& fn = e.name;
    if (fn == "Node") {
      Value v = term(e.args[0]);
      return v.kind == Value::Kind::NodeRef ? 1 : 0;
    }
    if (fn == "Rel") {
      Value v = term(e.args[0]);
      return v.kind == Value::Kind::RelRef ? 1 : 0;
    }
    if (fn == "Lab") {
      Value v = term(e.args[0]);
      const std::string& label = e.args[1]->constant.s;
      if (v.kind == Value::Kind::NodeRef) return g_.node_has_label(int(v.i), label) ? 1 : 0;
      if (v.kind == Value::Kind::RelRef) return g_.rels[v.i].label == label ? 1 : 0;
      return 0;
    }
    if (fn == "bool") return eval(e.args[0]);
    throw NotInterpretable("uninterpreted symbol " + fn);
  }

  Value term(const GExprPtr& e) {
    switch (e->kind) {
      case GExpr::Kind::EntityVar: {
        auto it = env_.find(e->name);
        if (it == env_.end()) throw NotInterpretable("free entity variable " + e->name);
        int ent = it->second;
        if (ent < int(g_.nodes.size())) return Value::node_ref(ent);
        return Value::rel_ref(ent - int(g_.nodes.size()));
      }
      case GExpr::Kind::Const:
        return e->constant;
      case GExpr::Kind::TupleCol:
        if (e->col >= int(tuple_.size())) throw NotInterpretable("tuple column out of range");
        return tuple_[e->col];
      case GExpr::Kind::PropAccess: {
        Value base = term(e->args[0]);
        if (base.kind == Value::Kind::NodeRef) {
          auto v = g_.node_prop(int(base.i), e->key);
          return v ? *v : Value::null();
        }
        if (base.kind == Value::Kind::RelRef) {
          auto v = g_.rel_prop(int(base.i), e->key);
          return v ? *v : Value::null();
        }
        return Value::null();
      }
      case GExpr::Kind::App: {
        if (e->name == "in" || e->name == "out") {
          Value v = term(e->args[0]);
          if (v.kind != Value::Kind::RelRef) return Value::null();
          const auto& rel = g_.rels[v.i];
          return Value::node_ref(e->name == "in" ? rel.src : rel.dst);
        }
        if (e->name == "id") {
          Value v = term(e->args[0]);
          if (v.kind == Value::Kind::NodeRef || v.kind == Value::Kind::RelRef) {
            return Value::integer(v.i);
          }
          return Value::null();
        }
        if (e->name == "bool") return Value::boolean(eval(e->args[0]) > 0);
        // Aggregate value sums (COUNT/SUM bodies) appear as terms.
        if (e->name.empty()) throw NotInterpretable("empty symbol");
        throw NotInterpretable("uninterpreted symbol " + e->name);
      }
      case GExpr::Kind::Sum:
      case GExpr::Kind::Add:
      case GExpr::Kind::Mul:
      case GExpr::Kind::Squash:
      case GExpr::Kind::Not:
      case GExpr::Kind::Bracket:
        return Value::integer(eval(e));
      case GExpr::Kind::TempCol:
      case GExpr::Kind::TempVar:
        throw NotInterpretable("intermediate tuple variable survives simplification");
      default:
        throw NotInterpretable("unexpected term");
    }
  }
};

}  // namespace idetail

namespace idetail {

inline void reject_uninterpretable(const GExprPtr& e) {
  if (e->kind == GExpr::Kind::App) {
    const std::string& fn = e->name;
    bool known = fn == "Node" || fn == "Rel" || fn == "Lab" || fn == "in" || fn == "out" ||
                 fn == "id" || fn == "bool";
    if (!known) throw NotInterpretable("uninterpreted symbol " + fn);
  }
  if (e->kind == GExpr::Kind::TempVar || e->kind == GExpr::Kind::TempCol) {
    throw NotInterpretable("intermediate tuple variable survives simplification");
  }
  if (e->kind == GExpr::Kind::Sum) {
    for (const auto& b : e->bound) {
      if (!b.empty() && b[0] == 'w') {
        throw NotInterpretable("summation over an intermediate tuple");
      }
    }
  }
  for (const auto& a : e->args) reject_uninterpretable(a);
}

}  // namespace idetail

/// Concrete interpretation over a finite graph: summations enumerate all
/// entities, squash clamps to {0,1}. Terms containing UNBOUNDED, order/limit
/// tags or uninterpreted symbols raise NotInterpretable (checked eagerly).
inline int64_t interpret(const GExprPtr& g, const PropertyGraph& graph,
                         const std::vector<Value>& tuple) {
  idetail::reject_uninterpretable(g);
  idetail::Interpreter in(graph, tuple);
  return in.eval(g);
}

}  // namespace cyeq
