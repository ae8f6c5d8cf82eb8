/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cyeq/ast.hpp"
#include "cyeq/value.hpp"

namespace cyeq {

/// Natural-number algebra term. A query compiles to a term over the result
/// tuple's columns whose value is the multiplicity of that tuple.
///
/// Debug text form (also the canonical form used for term identity):
///   0, 1            constants of the algebra
///   a+b, a*b        commutative sum / product
///   ||x||           squash: 0 -> 0, positive -> 1
///   !(x)            1 - ||x||
///   S[e1,e2](body)  summation over graph entities e1, e2
///   S[w1](body)     summation over an intermediate tuple variable
///   [a = b]         tuple pinning (null-safe equality)
///   [a == b] etc.   predicate atom (null-strict comparison)
///   [isnull a]      null test
///   Node(e1), Rel(e1), Lab(e1,'A'), in(e1), out(e1), UNBOUNDED(e1), ...
///   e1.key, t1, w1.2, 7, 'text', null, true
struct GExpr;
using GExprPtr = std::shared_ptr<const GExpr>;

struct GExpr {
  enum class Kind {
    Zero,
    One,
    Add,       // args
    Mul,       // args
    Squash,    // args[0]
    Not,       // args[0]
    Bracket,   // cmp over args[0], args[1]; or IsNull over args[0]
    Sum,       // bound, args[0]
    App,       // name(args)
    PropAccess,  // name.key
    TupleCol,    // t<col+1>
    TempCol,     // name.<col+1>
    Const,       // constant
    EntityVar,   // name
    TempVar,     // name (whole intermediate tuple)
  };
  enum class BracketMode { TupleEq, Pred, IsNull };

  Kind kind = Kind::Zero;
  BracketMode mode = BracketMode::Pred;
  CmpOp cmp = CmpOp::Eq;
  std::string name;
  std::string key;
  int col = 0;
  Value constant;
  std::vector<GExprPtr> args;
  std::vector<std::string> bound;  // Sum binders; temp binders start with 'w'
};

inline GExprPtr gptr(GExpr e) { return std::make_shared<const GExpr>(std::move(e)); }

inline GExprPtr g_zero() {
  static GExprPtr z = gptr(GExpr{});
  return z;
}
inline GExprPtr g_one() {
  GExpr e;
  e.kind = GExpr::Kind::One;
  static GExprPtr o = gptr(std::move(e));
  return o;
}

inline bool is_zero(const GExprPtr& e) { return e->kind == GExpr::Kind::Zero; }
inline bool is_one(const GExprPtr& e) { return e->kind == GExpr::Kind::One; }

/// n-ary sum; flattens and drops zeros.
inline GExprPtr g_add(std::vector<GExprPtr> args) {
  std::vector<GExprPtr> flat;
  for (auto& a : args) {
    if (is_zero(a)) continue;
    if (a->kind == GExpr::Kind::Add) {
      for (const auto& x : a->args) flat.push_back(x);
    } else {
      flat.push_back(a);
    }
  }
  if (flat.empty()) return g_zero();
  if (flat.size() == 1) return flat[0];
  GExpr e;
  e.kind = GExpr::Kind::Add;
  e.args = std::move(flat);
  return gptr(std::move(e));
}

/// n-ary product; flattens, drops ones, annihilates on zero.
inline GExprPtr g_mul(std::vector<GExprPtr> args) {
  std::vector<GExprPtr> flat;
  for (auto& a : args) {
    if (is_zero(a)) return g_zero();
    if (is_one(a)) continue;
    if (a->kind == GExpr::Kind::Mul) {
      for (const auto& x : a->args) flat.push_back(x);
    } else {
      flat.push_back(a);
    }
  }
  if (flat.empty()) return g_one();
  if (flat.size() == 1) return flat[0];
  GExpr e;
  e.kind = GExpr::Kind::Mul;
  e.args = std::move(flat);
  return gptr(std::move(e));
}

inline GExprPtr g_squash(GExprPtr x) {
  if (is_zero(x) || is_one(x)) return x;
  if (x->kind == GExpr::Kind::Squash || x->kind == GExpr::Kind::Not ||
      x->kind == GExpr::Kind::Bracket) {
    return x;  // already {0,1}-valued
  }
  GExpr e;
  e.kind = GExpr::Kind::Squash;
  e.args = {std::move(x)};
  return gptr(std::move(e));
}

inline GExprPtr g_not(GExprPtr x) {
  if (is_zero(x)) return g_one();
  if (is_one(x)) return g_zero();
  if (x->kind == GExpr::Kind::Not) return g_squash(x->args[0]);
  GExpr e;
  e.kind = GExpr::Kind::Not;
  e.args = {std::move(x)};
  return gptr(std::move(e));
}

inline GExprPtr g_sum(std::vector<std::string> bound, GExprPtr body) {
  if (bound.empty()) return body;
  if (is_zero(body)) return g_zero();
  if (body->kind == GExpr::Kind::Sum) {
    std::vector<std::string> merged = std::move(bound);
    for (const auto& b : body->bound) merged.push_back(b);
    GExpr e;
    e.kind = GExpr::Kind::Sum;
    e.bound = std::move(merged);
    e.args = {body->args[0]};
    return gptr(std::move(e));
  }
  GExpr e;
  e.kind = GExpr::Kind::Sum;
  e.bound = std::move(bound);
  e.args = {std::move(body)};
  return gptr(std::move(e));
}

inline GExprPtr g_bracket(GExpr::BracketMode mode, CmpOp cmp, GExprPtr l, GExprPtr r) {
  GExpr e;
  e.kind = GExpr::Kind::Bracket;
  e.mode = mode;
  e.cmp = cmp;
  e.args = {std::move(l), std::move(r)};
  return gptr(std::move(e));
}

inline GExprPtr g_isnull(GExprPtr x) {
  GExpr e;
  e.kind = GExpr::Kind::Bracket;
  e.mode = GExpr::BracketMode::IsNull;
  e.args = {std::move(x)};
  return gptr(std::move(e));
}

inline GExprPtr g_app(std::string fn, std::vector<GExprPtr> args) {
  GExpr e;
  e.kind = GExpr::Kind::App;
  e.name = std::move(fn);
  e.args = std::move(args);
  return gptr(std::move(e));
}

inline GExprPtr g_entity(std::string name) {
  GExpr e;
  e.kind = GExpr::Kind::EntityVar;
  e.name = std::move(name);
  return gptr(std::move(e));
}

inline GExprPtr g_tempvar(std::string name) {
  GExpr e;
  e.kind = GExpr::Kind::TempVar;
  e.name = std::move(name);
  return gptr(std::move(e));
}

inline GExprPtr g_prop(GExprPtr base, std::string key) {
  GExpr e;
  e.kind = GExpr::Kind::PropAccess;
  e.args = {std::move(base)};
  e.key = std::move(key);
  return gptr(std::move(e));
}

inline GExprPtr g_tuple_col(int col) {
  GExpr e;
  e.kind = GExpr::Kind::TupleCol;
  e.col = col;
  return gptr(std::move(e));
}

inline GExprPtr g_temp_col(std::string tempVar, int col) {
  GExpr e;
  e.kind = GExpr::Kind::TempCol;
  e.name = std::move(tempVar);
  e.col = col;
  return gptr(std::move(e));
}

inline GExprPtr g_const(Value v) {
  GExpr e;
  e.kind = GExpr::Kind::Const;
  e.constant = std::move(v);
  return gptr(std::move(e));
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace gdetail {

inline const char* pred_cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

inline std::string const_text(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Null: return "null";
    case Value::Kind::Bool: return v.b ? "true" : "false";
    case Value::Kind::Int: return std::to_string(v.i);
    case Value::Kind::Str: {
      std::string s = "'";
      for (char c : v.s) {
        if (c == '\'' || c == '\\') s.push_back('\\');
        s.push_back(c);
      }
      s.push_back('\'');
      return s;
    }
    default: return "<?>";
  }
}

// renames: bound-variable substitution applied to EntityVar/PropAccess/TempVar
// names; canonical=true sorts commutative argument lists.
inline std::string to_text(const GExpr& e, const std::map<std::string, std::string>* renames,
                           bool canonical) {
  auto sub = [&](const std::string& n) {
    if (renames) {
      auto it = renames->find(n);
      if (it != renames->end()) return it->second;
    }
    return n;
  };
  auto rec = [&](const GExprPtr& x) { return to_text(*x, renames, canonical); };
  switch (e.kind) {
    case GExpr::Kind::Zero: return "0";
    case GExpr::Kind::One: return "1";
    case GExpr::Kind::Add: {
      std::vector<std::string> parts;
      for (const auto& a : e.args) parts.push_back(rec(a));
      if (canonical) std::sort(parts.begin(), parts.end());
      std::string s = "(";
      for (size_t i = 0; i < parts.size(); ++i) {
        if (i) s += "+";
        s += parts[i];
      }
      return s + ")";
    }
    case GExpr::Kind::Mul: {
      std::vector<std::string> parts;
      for (const auto& a : e.args) parts.push_back(rec(a));
      if (canonical) std::sort(parts.begin(), parts.end());
      std::string s;
      for (size_t i = 0; i < parts.size(); ++i) {
        if (i) s += "*";
        s += parts[i];
      }
      return s;
    }
    case GExpr::Kind::Squash: return "||" + rec(e.args[0]) + "||";
    case GExpr::Kind::Not: return "!(" + rec(e.args[0]) + ")";
    case GExpr::Kind::Bracket:
      if (e.mode == GExpr::BracketMode::IsNull) return "[isnull " + rec(e.args[0]) + "]";
      if (e.mode == GExpr::BracketMode::TupleEq) {
        std::string l = rec(e.args[0]), r = rec(e.args[1]);
        if (canonical && r < l) std::swap(l, r);
        return "[" + l + " = " + r + "]";
      }
      {
        std::string l = rec(e.args[0]), r = rec(e.args[1]);
        CmpOp op = e.cmp;
        if (canonical) {
          // orient symmetric / flippable comparisons
          auto flip = [](CmpOp o) {
            switch (o) {
              case CmpOp::Lt: return CmpOp::Gt;
              case CmpOp::Le: return CmpOp::Ge;
              case CmpOp::Gt: return CmpOp::Lt;
              case CmpOp::Ge: return CmpOp::Le;
              default: return o;
            }
          };
          if ((op == CmpOp::Eq || op == CmpOp::Ne) && r < l) std::swap(l, r);
          if (op == CmpOp::Gt || op == CmpOp::Ge) {
            std::swap(l, r);
            op = flip(e.cmp);
          }
        }
        return "[" + l + " " + pred_cmp_text(op) + " " + r + "]";
      }
    case GExpr::Kind::Sum: {
      std::string s = "S[";
      for (size_t i = 0; i < e.bound.size(); ++i) {
        if (i) s += ",";
        s += sub(e.bound[i]);
      }
      return s + "](" + rec(e.args[0]) + ")";
    }
    case GExpr::Kind::App: {
      std::string s = e.name + "(";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ",";
        s += rec(e.args[i]);
      }
      return s + ")";
    }
    case GExpr::Kind::PropAccess: return rec(e.args[0]) + "." + e.key;
    case GExpr::Kind::TupleCol: return "t" + std::to_string(e.col + 1);
    case GExpr::Kind::TempCol: return sub(e.name) + "." + std::to_string(e.col + 1);
    case GExpr::Kind::Const: return const_text(e.constant);
    case GExpr::Kind::EntityVar: return sub(e.name);
    case GExpr::Kind::TempVar: return sub(e.name);
  }
  return "?";
}

}  // namespace gdetail

/// Stable debug form (argument order as built).
inline std::string to_text(const GExprPtr& e) { return gdetail::to_text(*e, nullptr, false); }

/// Canonical form under a bound-variable renaming: commutative arguments
/// sorted, comparisons oriented. Two terms with equal canonical text denote
/// the same function of the graph.
inline std::string canonical_text(const GExprPtr& e,
                                  const std::map<std::string, std::string>& renames) {
  return gdetail::to_text(*e, &renames, true);
}

// ---------------------------------------------------------------------------
// Structure helpers
// ---------------------------------------------------------------------------

inline void collect_free_vars(const GExprPtr& e, std::set<std::string>& bound,
                              std::set<std::string>& out) {
  switch (e->kind) {
    case GExpr::Kind::EntityVar:
    case GExpr::Kind::TempVar:
    case GExpr::Kind::TempCol:
      if (!bound.count(e->name)) out.insert(e->name);
      return;
    case GExpr::Kind::Sum: {
      std::vector<std::string> added;
      for (const auto& b : e->bound) {
        if (bound.insert(b).second) added.push_back(b);
      }
      collect_free_vars(e->args[0], bound, out);
      for (const auto& b : added) bound.erase(b);
      return;
    }
    default:
      for (const auto& a : e->args) collect_free_vars(a, bound, out);
  }
}

inline std::set<std::string> free_vars(const GExprPtr& e) {
  std::set<std::string> bound, out;
  collect_free_vars(e, bound, out);
  return out;
}

/// Substitutes variable names (entity or temp); used by summation
/// canonicalization and aggregate body cloning.
inline GExprPtr rename_vars(const GExprPtr& e, const std::map<std::string, std::string>& m) {
  if (m.empty()) return e;
  switch (e->kind) {
    case GExpr::Kind::EntityVar:
    case GExpr::Kind::TempVar: {
      auto it = m.find(e->name);
      if (it == m.end()) return e;
      GExpr out = *e;
      out.name = it->second;
      return gptr(std::move(out));
    }
    case GExpr::Kind::TempCol: {
      auto it = m.find(e->name);
      if (it == m.end()) return e;
      GExpr out = *e;
      out.name = it->second;
      return gptr(std::move(out));
    }
    case GExpr::Kind::Sum: {
      GExpr out = *e;
      for (auto& b : out.bound) {
        auto it = m.find(b);
        if (it != m.end()) b = it->second;
      }
      out.args = {rename_vars(e->args[0], m)};
      return gptr(std::move(out));
    }
    default: {
      if (e->args.empty()) return e;
      GExpr out = *e;
      for (auto& a : out.args) a = rename_vars(a, m);
      return gptr(std::move(out));
    }
  }
}

/// Substitutes a term for every occurrence of a temp-tuple column.
inline GExprPtr substitute_temp_col(const GExprPtr& e, const std::string& var, int col,
                                    const GExprPtr& replacement) {
  if (e->kind == GExpr::Kind::TempCol && e->name == var && e->col == col) return replacement;
  if (e->args.empty()) return e;
  GExpr out = *e;
  for (auto& a : out.args) a = substitute_temp_col(a, var, col, replacement);
  return gptr(std::move(out));
}

/// {0,1}-valued by construction.
inline bool is_boolean_factor(const GExprPtr& e) {
  switch (e->kind) {
    case GExpr::Kind::Zero:
    case GExpr::Kind::One:
    case GExpr::Kind::Bracket:
    case GExpr::Kind::Squash:
    case GExpr::Kind::Not:
      return true;
    case GExpr::Kind::App:
      return e->name == "Node" || e->name == "Rel" || e->name == "Lab" ||
             e->name == "UNBOUNDED" || e->name == "isNULL";
    case GExpr::Kind::Mul:
      for (const auto& a : e->args) {
        if (!is_boolean_factor(a)) return false;
      }
      return true;
    default:
      return false;
  }
}

}  // namespace cyeq
