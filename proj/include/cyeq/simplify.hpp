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

#include "cyeq/gexpr.hpp"

namespace cyeq {

namespace sdetail {

inline bool is_temp_binder(const std::string& name) { return !name.empty() && name[0] == 'w'; }

/// Integer feasibility of a conjunction of comparisons of one term against
/// int constants; empty range means the product is identically zero.
struct TermRange {
  int64_t lo = INT64_MIN;
  int64_t hi = INT64_MAX;
  std::set<int64_t> excluded;
  std::optional<std::string> eqString;
  bool contradiction = false;

  void add(CmpOp op, const Value& v) {
    if (v.kind == Value::Kind::Str) {
      if (op == CmpOp::Eq) {
        if (eqString && *eqString != v.s) contradiction = true;
        eqString = v.s;
      }
      return;
    }
    if (v.kind != Value::Kind::Int) return;
    int64_t c = v.i;
    switch (op) {
      case CmpOp::Eq: lo = std::max(lo, c); hi = std::min(hi, c); break;
      case CmpOp::Ne: excluded.insert(c); break;
      case CmpOp::Lt: hi = std::min(hi, c == INT64_MIN ? c : c - 1); break;
      case CmpOp::Le: hi = std::min(hi, c); break;
      case CmpOp::Gt: lo = std::max(lo, c == INT64_MAX ? c : c + 1); break;
      case CmpOp::Ge: lo = std::max(lo, c); break;
    }
    if (eqString && op == CmpOp::Eq) contradiction = true;  // string vs int pin
  }

  bool infeasible() const {
    if (contradiction) return true;
    if (lo > hi) return true;
    if (lo == hi && excluded.count(lo)) return true;
    return false;
  }
};

class Simplifier {
 public:
  GExprPtr run(GExprPtr g) {
    for (int pass = 0; pass < 16; ++pass) {
      changed_ = false;
      std::set<std::string> scope;
      g = rewrite(g, scope);
      if (!changed_) break;
    }
    return g;
  }

 private:
  bool changed_ = false;

  static std::string key_of(const GExprPtr& e) {
    static const std::map<std::string, std::string> kNoRenames;
    return canonical_text(e, kNoRenames);
  }

  GExprPtr rewrite(const GExprPtr& e, std::set<std::string>& scope) {
    switch (e->kind) {
      case GExpr::Kind::Add: {
        std::vector<GExprPtr> args;
        for (const auto& a : e->args) args.push_back(rewrite(a, scope));
        return g_add(std::move(args));
      }
      case GExpr::Kind::Mul:
        return rewrite_product(e, scope);
      case GExpr::Kind::Squash: {
        GExprPtr inner = rewrite(e->args[0], scope);
        if (is_boolean_factor(inner)) {
          changed_ = true;
          return inner;
        }
        if (inner != e->args[0]) changed_ = true;
        return g_squash(inner);
      }
      case GExpr::Kind::Not: {
        GExprPtr inner = rewrite(e->args[0], scope);
        if (inner != e->args[0]) changed_ = true;
        return g_not(inner);
      }
      case GExpr::Kind::Bracket:
        return rewrite_bracket(e);
      case GExpr::Kind::Sum:
        return rewrite_sum(e, scope);
      default:
        return e;
    }
  }

  GExprPtr rewrite_bracket(const GExprPtr& e) {
    if (e->mode == GExpr::BracketMode::IsNull) {
      const GExprPtr& arg = e->args[0];
      if (arg->kind == GExpr::Kind::Const) {
        changed_ = true;
        return arg->constant.is_null() ? g_one() : g_zero();
      }
      if (arg->kind == GExpr::Kind::EntityVar) {
        changed_ = true;
        return g_zero();
      }
      return e;
    }
    const GExprPtr& l = e->args[0];
    const GExprPtr& r = e->args[1];
    if (l->kind == GExpr::Kind::Const && r->kind == GExpr::Kind::Const) {
      changed_ = true;
      if (e->mode == GExpr::BracketMode::TupleEq) {
        return value_equal(l->constant, r->constant) ? g_one() : g_zero();
      }
      return predicate_compare(e->cmp, l->constant, r->constant) ? g_one() : g_zero();
    }
    // [x = x]: true for tuple pinning; true for predicates only when the term
    // cannot be null (entities and constants).
    if (key_of(l) == key_of(r)) {
      bool nullFree = l->kind == GExpr::Kind::EntityVar ||
                      (l->kind == GExpr::Kind::Const && !l->constant.is_null());
      if (e->mode == GExpr::BracketMode::TupleEq || nullFree) {
        if (e->mode == GExpr::BracketMode::TupleEq || e->cmp == CmpOp::Eq ||
            e->cmp == CmpOp::Le || e->cmp == CmpOp::Ge) {
          changed_ = true;
          return g_one();
        }
        if (e->cmp == CmpOp::Ne || e->cmp == CmpOp::Lt || e->cmp == CmpOp::Gt) {
          changed_ = true;
          return g_zero();
        }
      }
    }
    return e;
  }

  GExprPtr rewrite_product(const GExprPtr& e, std::set<std::string>& scope) {
    std::vector<GExprPtr> args;
    for (const auto& a : e->args) args.push_back(rewrite(a, scope));

    // Boolean-factor dedup: a {0,1} factor squares to itself.
    std::set<std::string> seenBoolean;
    std::vector<GExprPtr> dedup;
    for (auto& a : args) {
      if (is_boolean_factor(a) && a->kind != GExpr::Kind::Zero && a->kind != GExpr::Kind::One) {
        std::string k = key_of(a);
        if (!seenBoolean.insert(k).second) {
          changed_ = true;
          continue;
        }
      }
      dedup.push_back(std::move(a));
    }
    args = std::move(dedup);

    // Contradictory constant comparisons on one term annihilate the product.
    std::map<std::string, TermRange> ranges;
    for (const auto& a : args) {
      if (a->kind != GExpr::Kind::Bracket || a->mode == GExpr::BracketMode::IsNull) continue;
      if (a->args.size() != 2) continue;
      const GExprPtr& l = a->args[0];
      const GExprPtr& r = a->args[1];
      if (r->kind == GExpr::Kind::Const && l->kind != GExpr::Kind::Const) {
        ranges[key_of(l)].add(a->cmp, r->constant);
      } else if (l->kind == GExpr::Kind::Const && r->kind != GExpr::Kind::Const) {
        auto flip = [](CmpOp op) {
          switch (op) {
            case CmpOp::Lt: return CmpOp::Gt;
            case CmpOp::Le: return CmpOp::Ge;
            case CmpOp::Gt: return CmpOp::Lt;
            case CmpOp::Ge: return CmpOp::Le;
            default: return op;
          }
        };
        ranges[key_of(r)].add(flip(a->cmp), l->constant);
      }
    }
    for (const auto& [term, range] : ranges) {
      (void)term;
      if (range.infeasible()) {
        changed_ = true;
        return g_zero();
      }
    }

    // Predicate relocation: a factor whose variables are bound by a sibling
    // summation moves into that summation's body.
    for (size_t i = 0; i < args.size(); ++i) {
      if (args[i]->kind != GExpr::Kind::Bracket) continue;
      std::set<std::string> fv = free_vars(args[i]);
      std::vector<std::string> dangling;
      for (const auto& v : fv) {
        if (!scope.count(v)) dangling.push_back(v);
      }
      if (dangling.empty()) continue;
      for (size_t j = 0; j < args.size(); ++j) {
        if (i == j) continue;
        const GExprPtr* holder = &args[j];
        bool squashed = false, negated = false;
        if ((*holder)->kind == GExpr::Kind::Squash) {
          squashed = true;
          holder = &(*holder)->args[0];
        } else if ((*holder)->kind == GExpr::Kind::Not) {
          negated = true;
          holder = &(*holder)->args[0];
        }
        if ((*holder)->kind != GExpr::Kind::Sum) continue;
        const GExprPtr& sum = *holder;
        bool bindsAll = true;
        for (const auto& v : dangling) {
          if (std::find(sum->bound.begin(), sum->bound.end(), v) == sum->bound.end()) {
            bindsAll = false;
            break;
          }
        }
        if (!bindsAll) continue;
        GExprPtr newSum = g_sum(sum->bound, g_mul({sum->args[0], args[i]}));
        GExprPtr replacement = squashed ? g_squash(newSum) : negated ? g_not(newSum) : newSum;
        std::vector<GExprPtr> next;
        for (size_t k = 0; k < args.size(); ++k) {
          if (k == i) continue;
          next.push_back(k == j ? replacement : args[k]);
        }
        changed_ = true;
        return rewrite(g_mul(std::move(next)), scope);
      }
    }

    return g_mul(std::move(args));
  }

  GExprPtr rewrite_sum(const GExprPtr& e, std::set<std::string>& scope) {
    std::vector<std::string> added;
    for (const auto& b : e->bound) {
      if (scope.insert(b).second) added.push_back(b);
    }
    GExprPtr body = rewrite(e->args[0], scope);
    for (const auto& b : added) scope.erase(b);

    // Intermediate-tuple elimination: a temp binder whose used columns are all
    // pinned to temp-free terms is substituted away; the pins then fold to 1.
    std::vector<std::string> binders = e->bound;
    for (size_t bi = 0; bi < binders.size();) {
      const std::string tv = binders[bi];
      if (!is_temp_binder(tv)) {
        ++bi;
        continue;
      }
      std::set<int> usedCols;
      std::function<void(const GExprPtr&)> findCols = [&](const GExprPtr& x) {
        if (x->kind == GExpr::Kind::TempCol && x->name == tv) usedCols.insert(x->col);
        if (x->kind == GExpr::Kind::TempVar && x->name == tv) usedCols.insert(-1);
        for (const auto& a : x->args) findCols(a);
      };
      findCols(body);
      if (usedCols.empty()) {
        // An unused tuple binder cannot be interpreted or eliminated; leave it.
        ++bi;
        continue;
      }
      if (usedCols.count(-1)) {
        ++bi;
        continue;
      }
      std::map<int, GExprPtr> pins;
      std::vector<GExprPtr> factors =
          body->kind == GExpr::Kind::Mul ? body->args : std::vector<GExprPtr>{body};
      for (const auto& f : factors) {
        if (f->kind != GExpr::Kind::Bracket || f->mode != GExpr::BracketMode::TupleEq) continue;
        for (int side = 0; side < 2; ++side) {
          const GExprPtr& a = f->args[side];
          const GExprPtr& other = f->args[1 - side];
          if (a->kind == GExpr::Kind::TempCol && a->name == tv && !pins.count(a->col)) {
            std::set<std::string> fv = free_vars(other);
            if (!fv.count(tv)) pins.emplace(a->col, other);
          }
        }
      }
      bool allPinned = true;
      for (int c : usedCols) {
        if (!pins.count(c)) {
          allPinned = false;
          break;
        }
      }
      if (!allPinned) {
        ++bi;
        continue;
      }
      for (const auto& [col, term] : pins) body = substitute_temp_col(body, tv, col, term);
      binders.erase(binders.begin() + bi);
      changed_ = true;
      // Re-fold the now-trivial pins.
      std::set<std::string> inner = scope;
      for (const auto& b : binders) inner.insert(b);
      body = rewrite(body, inner);
    }

    if (body != e->args[0] || binders.size() != e->bound.size()) {
      return g_sum(std::move(binders), body);
    }
    return e;
  }
};

}  // namespace sdetail

/// Interpretation-preserving cleanup: intermediate-tuple elimination,
/// predicate relocation into the summation that binds its variables,
/// idempotent boolean-factor dedup, trivial and contradictory comparison
/// folding.
inline GExprPtr simplify(GExprPtr g) {
  sdetail::Simplifier s;
  return s.run(std::move(g));
}

}  // namespace cyeq
