/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cyeq/gexpr.hpp"

namespace cyeq {

struct StarEliminationIncomplete : std::runtime_error {
  explicit StarEliminationIncomplete(const std::string& what) : std::runtime_error(what) {}
};

/// Self-contained SMT-LIB 2 script over quantifier-free linear integer
/// arithmetic, ending in a single (check-sat).
struct SmtScript {
  std::string text;
  std::string logic = "QF_LIA";
  bool trivialUnsat = false;  // both sides encoded to the same term
};

namespace smtdetail {

// Value encoding on the integer sort: query integers appear verbatim;
// interned strings live at 10^9, the null constant and booleans just below.
constexpr int64_t kNullCode = 999999999;
constexpr int64_t kTrueCode = 999999997;
constexpr int64_t kFalseCode = 999999998;
constexpr int64_t kStringBase = 1000000000;

/// Distributes products over sums and merges nested unprotected summations
/// into their parent, yielding a sum of summation-products.
class Flattener {
 public:
  GExprPtr run(const GExprPtr& g) { return flatten(g); }

 private:
  int terms_ = 0;

  void budget() {
    if (++terms_ > 4096) throw StarEliminationIncomplete("expression too large to flatten");
  }

  GExprPtr flatten(const GExprPtr& e) {
    budget();
    switch (e->kind) {
      case GExpr::Kind::Add: {
        std::vector<GExprPtr> parts;
        for (const auto& a : e->args) parts.push_back(flatten(a));
        return g_add(std::move(parts));
      }
      case GExpr::Kind::Mul: {
        // distribute: product of sums-of-products
        std::vector<std::vector<GExprPtr>> expansion = {{}};
        for (const auto& raw : e->args) {
          GExprPtr f = flatten(raw);
          std::vector<GExprPtr> alternatives;
          if (f->kind == GExpr::Kind::Add) {
            alternatives = f->args;
          } else {
            alternatives = {f};
          }
          std::vector<std::vector<GExprPtr>> next;
          for (const auto& prefix : expansion) {
            for (const auto& alt : alternatives) {
              budget();
              auto copy = prefix;
              copy.push_back(alt);
              next.push_back(std::move(copy));
            }
          }
          expansion = std::move(next);
        }
        std::vector<GExprPtr> parts;
        for (auto& product : expansion) parts.push_back(merge_product(std::move(product)));
        return g_add(std::move(parts));
      }
      case GExpr::Kind::Sum: {
        GExprPtr body = flatten(e->args[0]);
        if (body->kind == GExpr::Kind::Add) {
          std::vector<GExprPtr> parts;
          for (const auto& a : body->args) parts.push_back(flatten(g_sum(e->bound, a)));
          return g_add(std::move(parts));
        }
        // hoist nested unprotected sums: S[x](A * S[y](B)) = S[x,y](A * B)
        if (body->kind == GExpr::Kind::Mul) {
          std::vector<std::string> bound = e->bound;
          std::vector<GExprPtr> factors;
          bool hoisted = false;
          for (const auto& f : body->args) {
            if (f->kind == GExpr::Kind::Sum) {
              hoisted = true;
              for (const auto& b : f->bound) bound.push_back(b);
              factors.push_back(f->args[0]);
            } else {
              factors.push_back(f);
            }
          }
          if (hoisted) return flatten(g_sum(std::move(bound), g_mul(std::move(factors))));
        } else if (body->kind == GExpr::Kind::Sum) {
          std::vector<std::string> bound = e->bound;
          for (const auto& b : body->bound) bound.push_back(b);
          return flatten(g_sum(std::move(bound), body->args[0]));
        }
        return g_sum(e->bound, body);
      }
      case GExpr::Kind::Squash: {
        GExprPtr inner = flatten(e->args[0]);
        return g_squash(inner);
      }
      case GExpr::Kind::Not: {
        GExprPtr inner = flatten(e->args[0]);
        return g_not(inner);
      }
      default:
        return e;
    }
  }

  GExprPtr merge_product(std::vector<GExprPtr> factors) {
    // S[x](A) * B * S[y](C) = S[x,y](A * B * C)
    std::vector<std::string> bound;
    std::vector<GExprPtr> flat;
    for (auto& f : factors) {
      if (f->kind == GExpr::Kind::Sum) {
        for (const auto& b : f->bound) bound.push_back(b);
        flat.push_back(f->args[0]);
      } else {
        flat.push_back(std::move(f));
      }
    }
    GExprPtr body = g_mul(std::move(flat));
    if (bound.empty()) return body;
    return flatten(g_sum(std::move(bound), body));
  }
};

/// Canonical key of a summation: bound entity variables renamed x1..xn via a
/// permutation search minimizing the rendered body; nested binders renamed in
/// encounter order. Equal keys denote equal values on every graph.
struct SumKey {
  std::string key;
  std::map<std::string, std::string> renames;
};

inline void assign_nested(const GExprPtr& e, std::map<std::string, std::string>& renames,
                          int& next) {
  if (e->kind == GExpr::Kind::Sum) {
    for (const auto& b : e->bound) {
      if (!renames.count(b)) renames[b] = "x" + std::to_string(++next);
    }
  }
  for (const auto& a : e->args) assign_nested(a, renames, next);
}

inline SumKey canonical_sum_key(const std::vector<std::string>& bound, const GExprPtr& body) {
  std::vector<size_t> order(bound.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  SumKey best;
  auto consider = [&](const std::vector<size_t>& perm) {
    std::map<std::string, std::string> renames;
    int next = 0;
    for (size_t i : perm) renames[bound[i]] = "x" + std::to_string(++next);
    assign_nested(body, renames, next);
    std::string text = "S" + std::to_string(bound.size()) + "(" + canonical_text(body, renames) +
                       ")";
    if (best.key.empty() || text < best.key) {
      best.key = std::move(text);
      best.renames = std::move(renames);
    }
  };

  if (bound.size() <= 6) {
    std::vector<size_t> perm = order;
    do {
      consider(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    consider(order);
  }
  return best;
}

struct Encoder {
  std::ostringstream decls;
  std::ostringstream defs;
  std::map<std::string, std::string> sumVars;      // canonical key -> variable
  std::map<std::string, std::string> aggSymbols;   // canonical text -> constant
  std::map<std::string, int64_t> internedStrings;
  std::set<int> tupleCols;
  int sumCount = 0;
  int aggCount = 0;

  std::string tuple_col(int col) {
    tupleCols.insert(col);
    return "t" + std::to_string(col + 1);
  }

  int64_t intern(const std::string& s) {
    auto it = internedStrings.find(s);
    if (it != internedStrings.end()) return it->second;
    int64_t code = kStringBase + int64_t(internedStrings.size());
    internedStrings.emplace(s, code);
    return code;
  }

  static std::string int_lit(int64_t v) {
    if (v < 0) return "(- " + std::to_string(-v) + ")";
    return std::to_string(v);
  }

  std::string const_term(const Value& v) {
    switch (v.kind) {
      case Value::Kind::Int: return int_lit(v.i);
      case Value::Kind::Str: return int_lit(intern(v.s));
      case Value::Kind::Null: return int_lit(kNullCode);
      case Value::Kind::Bool: return int_lit(v.b ? kTrueCode : kFalseCode);
      default:
        throw StarEliminationIncomplete("constant kind not encodable");
    }
  }

  /// Integer term for a value expression appearing outside all summations.
  std::string term(const GExprPtr& e) {
    switch (e->kind) {
      case GExpr::Kind::TupleCol:
        return tuple_col(e->col);
      case GExpr::Kind::Const:
        return const_term(e->constant);
      case GExpr::Kind::Sum:
      case GExpr::Kind::Add:
      case GExpr::Kind::Mul:
      case GExpr::Kind::Squash:
      case GExpr::Kind::Not:
      case GExpr::Kind::Bracket:
        return encode(e);
      case GExpr::Kind::App: {
        if (e->name == "limit" || e->name == "skip") return symbol(e->name, to_text(e));
        if (e->name == "asc" || e->name == "desc") return symbol(e->name, to_text(e));
        if (e->name.rfind("agg_", 0) == 0) return symbol(e->name, canonical_agg_text(e));
        throw StarEliminationIncomplete("free symbol " + e->name + " outside summation");
      }
      default:
        throw StarEliminationIncomplete("term outside summation cannot be encoded");
    }
  }

  /// Aggregate designators canonicalize their internal summation so renamed
  /// variants share one symbol.
  static std::string canonical_agg_text(const GExprPtr& e) {
    std::string out = e->name + "(";
    for (size_t i = 0; i < e->args.size(); ++i) {
      if (i) out += ",";
      const GExprPtr& a = e->args[i];
      if (a->kind == GExpr::Kind::Sum) {
        out += canonical_sum_key(a->bound, a->args[0]).key;
      } else if (a->kind == GExpr::Kind::Add) {
        std::vector<std::string> parts;
        for (const auto& p : a->args) {
          if (p->kind == GExpr::Kind::Sum) {
            parts.push_back(canonical_sum_key(p->bound, p->args[0]).key);
          } else {
            static const std::map<std::string, std::string> none;
            parts.push_back(canonical_text(p, none));
          }
        }
        std::sort(parts.begin(), parts.end());
        for (size_t k = 0; k < parts.size(); ++k) {
          if (k) out += "+";
          out += parts[k];
        }
      } else {
        static const std::map<std::string, std::string> none;
        out += canonical_text(a, none);
      }
    }
    return out + ")";
  }

  std::string symbol(const std::string& base, const std::string& canonicalText) {
    auto it = aggSymbols.find(canonicalText);
    if (it != aggSymbols.end()) return it->second;
    std::string name = "u" + std::to_string(++aggCount) + "_" + base;
    aggSymbols.emplace(canonicalText, name);
    decls << "(declare-const " << name << " Int)\n";
    return name;
  }

  std::string condition(const GExprPtr& e) {
    switch (e->kind) {
      case GExpr::Kind::Bracket: {
        if (e->mode == GExpr::BracketMode::IsNull) {
          return "(= " + term(e->args[0]) + " " + int_lit(kNullCode) + ")";
        }
        std::string l = term(e->args[0]);
        std::string r = term(e->args[1]);
        switch (e->cmp) {
          case CmpOp::Eq: return "(= " + l + " " + r + ")";
          case CmpOp::Ne: return "(not (= " + l + " " + r + "))";
          case CmpOp::Lt: return "(< " + l + " " + r + ")";
          case CmpOp::Le: return "(<= " + l + " " + r + ")";
          case CmpOp::Gt: return "(> " + l + " " + r + ")";
          case CmpOp::Ge: return "(>= " + l + " " + r + ")";
        }
        break;
      }
      case GExpr::Kind::Squash:
        return "(>= " + encode(e->args[0]) + " 1)";
      case GExpr::Kind::Not:
        return "(<= " + encode(e->args[0]) + " 0)";
      case GExpr::Kind::One:
        return "true";
      case GExpr::Kind::Zero:
        return "false";
      default:
        break;
    }
    throw StarEliminationIncomplete("factor is not a {0,1} condition");
  }

  std::string sum_var(const GExprPtr& sum) {
    SumKey key = canonical_sum_key(sum->bound, sum->args[0]);
    auto it = sumVars.find(key.key);
    if (it != sumVars.end()) return it->second;
    std::string name = "v" + std::to_string(++sumCount);
    sumVars.emplace(key.key, name);
    decls << "(declare-const " << name << " Int)\n";
    // Counting sums are nonnegative; weighted sums may not be (negative
    // property values).
    if (!has_weight(sum->args[0])) defs << "(assert (>= " << name << " 0))\n";
    return name;
  }

  static bool has_weight(const GExprPtr& body) {
    if (body->kind == GExpr::Kind::Mul) {
      for (const auto& f : body->args) {
        if (!is_boolean_factor(f) && f->kind != GExpr::Kind::Sum) return true;
      }
      return false;
    }
    return !is_boolean_factor(body);
  }

  /// Integer encoding of a flattened term.
  std::string encode(const GExprPtr& e) {
    switch (e->kind) {
      case GExpr::Kind::Zero: return "0";
      case GExpr::Kind::One: return "1";
      case GExpr::Kind::Add: {
        std::string s = "(+";
        for (const auto& a : e->args) s += " " + encode(a);
        return s + ")";
      }
      case GExpr::Kind::Mul: {
        std::vector<std::string> conds;
        std::string linear;
        int64_t coeff = 1;
        for (const auto& f : e->args) {
          if (f->kind == GExpr::Kind::Sum) {
            if (!linear.empty()) {
              throw StarEliminationIncomplete("product of two summations");
            }
            linear = sum_var(f);
          } else if (f->kind == GExpr::Kind::Const &&
                     f->constant.kind == Value::Kind::Int) {
            coeff *= f->constant.i;
          } else {
            conds.push_back(condition(f));
          }
        }
        std::string core = linear.empty() ? "1" : linear;
        if (coeff != 1) core = "(* " + int_lit(coeff) + " " + core + ")";
        if (conds.empty()) return core;
        std::string cond = conds.size() == 1 ? conds[0] : [&] {
          std::string s = "(and";
          for (const auto& c : conds) s += " " + c;
          return s + ")";
        }();
        return "(ite " + cond + " " + core + " 0)";
      }
      case GExpr::Kind::Sum:
        return sum_var(e);
      case GExpr::Kind::Squash:
        return "(ite (>= " + encode(e->args[0]) + " 1) 1 0)";
      case GExpr::Kind::Not:
        return "(ite (>= " + encode(e->args[0]) + " 1) 0 1)";
      case GExpr::Kind::Bracket:
        return "(ite " + condition(e) + " 1 0)";
      case GExpr::Kind::Const:
        if (e->constant.kind == Value::Kind::Int) return int_lit(e->constant.i);
        throw StarEliminationIncomplete("non-integer constant in numeric position");
      default:
        throw StarEliminationIncomplete("term cannot be encoded outside a summation");
    }
  }
};

}  // namespace smtdetail

/// Replaces unbounded summations with shared integer variables: canonically
/// equal summation bodies share one variable, {0,1}-factored bodies get a
/// nonnegativity bound, squash/not become if-then-else tests. The script
/// asserts that the two sides differ on the shared result tuple.
inline SmtScript eliminate_summations(const GExprPtr& g1, const GExprPtr& g2) {
  smtdetail::Flattener fl;
  GExprPtr f1 = fl.run(g1);
  GExprPtr f2 = fl.run(g2);

  smtdetail::Encoder enc;
  std::string e1 = enc.encode(f1);
  std::string e2 = enc.encode(f2);

  SmtScript script;
  script.trivialUnsat = e1 == e2;
  std::ostringstream os;
  os << "(set-logic QF_LIA)\n";
  for (int col : enc.tupleCols) os << "(declare-const t" << col + 1 << " Int)\n";
  os << enc.decls.str();
  os << enc.defs.str();
  os << "(assert (not (= " << e1 << " " << e2 << ")))\n";
  os << "(check-sat)\n";
  script.text = os.str();
  return script;
}

/// Non-emptiness obligation for one side: satisfiable iff some graph and tuple
/// give the query a row.
inline SmtScript nonempty_obligation(const GExprPtr& g) {
  smtdetail::Flattener fl;
  GExprPtr f = fl.run(g);
  smtdetail::Encoder enc;
  std::string e = enc.encode(f);
  SmtScript script;
  std::ostringstream os;
  os << "(set-logic QF_LIA)\n";
  for (int col : enc.tupleCols) os << "(declare-const t" << col + 1 << " Int)\n";
  os << enc.decls.str();
  os << enc.defs.str();
  os << "(assert (>= " << e << " 1))\n";
  os << "(check-sat)\n";
  script.text = os.str();
  return script;
}

}  // namespace cyeq
