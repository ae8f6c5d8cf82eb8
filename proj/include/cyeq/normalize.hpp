/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cyeq/ast.hpp"
#include "cyeq/printer.hpp"
#include "cyeq/semantics.hpp"

namespace cyeq {

enum class RuleId {
  R1_UndirectedElim,
  R2_VarLengthRewrite,
  R3_ReturnStar,
  R4_RedundantClauseElim,
  R5_VariableStandardize,
  R6_IdEquality,
};

inline const char* to_string(RuleId r) {
  switch (r) {
    case RuleId::R1_UndirectedElim: return "undirected-elim";
    case RuleId::R2_VarLengthRewrite: return "varlength-rewrite";
    case RuleId::R3_ReturnStar: return "return-star";
    case RuleId::R4_RedundantClauseElim: return "redundant-clause-elim";
    case RuleId::R5_VariableStandardize: return "variable-standardize";
    case RuleId::R6_IdEquality: return "id-equality";
  }
  return "?";
}

struct RuleApplication {
  int round = 0;
  RuleId rule;
  std::string site;
};

struct NormalizedAst {
  QueryAst ast;
  std::vector<RuleApplication> trace;
};

struct NormalizationBudgetExceeded : std::runtime_error {
  NormalizationBudgetExceeded() : std::runtime_error("normalization round budget exceeded") {}
};

namespace detail {

// -- expression rewriting helpers -------------------------------------------

inline ExprPtr rename_in_expr(const ExprPtr& e, const std::map<std::string, std::string>& names);

inline SingleQueryPtr rename_in_exists(const SingleQueryPtr& q,
                                       const std::map<std::string, std::string>& names) {
  auto out = std::make_shared<SingleQuery>(*q);
  for (auto& c : out->clauses) {
    if (c.kind == Clause::Kind::Match) {
      for (auto& p : c.match.patterns) {
        for (auto& n : p.nodes) {
          if (n.var && names.count(*n.var)) n.var = names.at(*n.var);
        }
        for (auto& r : p.rels) {
          if (r.var && names.count(*r.var)) r.var = names.at(*r.var);
        }
      }
      if (c.match.where) c.match.where = rename_in_expr(c.match.where, names);
    }
  }
  return out;
}

inline ExprPtr rename_in_expr(const ExprPtr& e, const std::map<std::string, std::string>& names) {
  if (!e) return e;
  Expr out = *e;
  switch (e->kind) {
    case Expr::Kind::Var:
    case Expr::Kind::PropAccess:
      if (names.count(e->name)) out.name = names.at(e->name);
      break;
    case Expr::Kind::Exists:
      out.existsQuery = rename_in_exists(e->existsQuery, names);
      break;
    default:
      break;
  }
  out.lhs = rename_in_expr(e->lhs, names);
  out.rhs = rename_in_expr(e->rhs, names);
  for (auto& a : out.args) a = rename_in_expr(a, names);
  for (auto& me : out.entries) me.value = rename_in_expr(me.value, names);
  return make_expr(std::move(out));
}

/// Substitutes alias names by expressions. Var(alias) becomes the expression;
/// PropAccess(alias, k) is rewritten only when the substitute is itself a
/// variable. Callers must pre-check that no unsupported site exists.
inline ExprPtr substitute_in_expr(const ExprPtr& e, const std::map<std::string, ExprPtr>& subst) {
  if (!e) return e;
  if (e->kind == Expr::Kind::Var && subst.count(e->name)) return subst.at(e->name);
  Expr out = *e;
  if (e->kind == Expr::Kind::PropAccess && subst.count(e->name)) {
    const ExprPtr& rep = subst.at(e->name);
    out.name = rep->name;  // rep is known to be a Var
  }
  if (e->kind == Expr::Kind::Exists) {
    auto q = std::make_shared<SingleQuery>(*e->existsQuery);
    for (auto& c : q->clauses) {
      if (c.kind == Clause::Kind::Match) {
        for (auto& p : c.match.patterns) {
          for (auto& n : p.nodes) {
            if (n.var && subst.count(*n.var)) n.var = subst.at(*n.var)->name;
          }
          for (auto& r : p.rels) {
            if (r.var && subst.count(*r.var)) r.var = subst.at(*r.var)->name;
          }
        }
        if (c.match.where) c.match.where = substitute_in_expr(c.match.where, subst);
      }
    }
    out.existsQuery = q;
  }
  out.lhs = substitute_in_expr(e->lhs, subst);
  out.rhs = substitute_in_expr(e->rhs, subst);
  for (auto& a : out.args) a = substitute_in_expr(a, subst);
  for (auto& me : out.entries) me.value = substitute_in_expr(me.value, subst);
  return make_expr(std::move(out));
}

inline void collect_expr_vars(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == Expr::Kind::Var || e->kind == Expr::Kind::PropAccess) out.insert(e->name);
  if (e->kind == Expr::Kind::Exists) {
    for (const auto& c : e->existsQuery->clauses) {
      if (c.kind == Clause::Kind::Match) {
        for (const auto& p : c.match.patterns) {
          for (const auto& n : p.nodes) {
            if (n.var) out.insert(*n.var);
          }
          for (const auto& r : p.rels) {
            if (r.var) out.insert(*r.var);
          }
        }
        collect_expr_vars(c.match.where, out);
      }
    }
  }
  collect_expr_vars(e->lhs, out);
  collect_expr_vars(e->rhs, out);
  for (const auto& a : e->args) collect_expr_vars(a, out);
  for (const auto& me : e->entries) collect_expr_vars(me.value, out);
}

inline std::set<std::string> referenced_names(const SingleQuery& q) {
  std::set<std::string> out;
  for (const auto& c : q.clauses) {
    switch (c.kind) {
      case Clause::Kind::Match:
        collect_expr_vars(c.match.where, out);
        break;
      case Clause::Kind::With:
        for (const auto& it : c.with.items) collect_expr_vars(it.expr, out);
        for (const auto& oi : c.with.orderBy) collect_expr_vars(oi.expr, out);
        collect_expr_vars(c.with.where, out);
        break;
      case Clause::Kind::Unwind:
        collect_expr_vars(c.unwind.list, out);
        break;
    }
  }
  for (const auto& it : q.ret.items) collect_expr_vars(it.expr, out);
  for (const auto& oi : q.ret.orderBy) collect_expr_vars(oi.expr, out);
  return out;
}

inline std::set<std::string> all_names(const SingleQuery& q) {
  std::set<std::string> out = referenced_names(q);
  for (const auto& c : q.clauses) {
    if (c.kind == Clause::Kind::Match) {
      for (const auto& p : c.match.patterns) {
        for (const auto& n : p.nodes) {
          if (n.var) out.insert(*n.var);
        }
        for (const auto& r : p.rels) {
          if (r.var) out.insert(*r.var);
        }
      }
    } else if (c.kind == Clause::Kind::With) {
      for (const auto& it : c.with.items) {
        if (it.alias) out.insert(*it.alias);
      }
    } else {
      out.insert(c.unwind.alias);
    }
  }
  return out;
}

inline bool expr_has_agg(const ExprPtr& e) {
  if (!e) return false;
  if (e->kind == Expr::Kind::AggCall) return true;
  if (expr_has_agg(e->lhs) || expr_has_agg(e->rhs)) return true;
  for (const auto& a : e->args) {
    if (expr_has_agg(a)) return true;
  }
  for (const auto& me : e->entries) {
    if (expr_has_agg(me.value)) return true;
  }
  return false;
}

/// True when every pipeline stage strictly after clause `idx` distributes over
/// bag union: no DISTINCT, aggregation, LIMIT or SKIP. A pattern rewrite that
/// expands into UNION ALL branches is exact only in that case.
inline bool downstream_bag_linear(const SingleQuery& q, size_t idx) {
  for (size_t i = idx + 1; i < q.clauses.size(); ++i) {
    const Clause& c = q.clauses[i];
    if (c.kind == Clause::Kind::With) {
      if (c.with.distinct || c.with.skip || c.with.limit) return false;
      for (const auto& it : c.with.items) {
        if (expr_has_agg(it.expr)) return false;
      }
    }
  }
  if (q.ret.distinct || q.ret.skip || q.ret.limit) return false;
  for (const auto& it : q.ret.items) {
    if (expr_has_agg(it.expr)) return false;
  }
  // RETURN * must be expanded first: pattern rewrites may introduce variables.
  return !q.ret.star;
}

inline std::string fresh_name(const std::set<std::string>& used, const std::string& base) {
  for (int i = 1;; ++i) {
    std::string cand = base + std::to_string(i);
    if (!used.count(cand)) return cand;
  }
}

// -- individual rules --------------------------------------------------------

struct Applied {
  QueryAst ast;
  std::string site;
};

/// Rule: eliminate an undirected relationship pattern by splitting into the
/// two orientations. The reversed branch excludes self-loops, which the
/// forward branch already covers once.
inline std::optional<Applied> rule_undirected(const QueryAst& ast) {
  for (size_t b = 0; b < ast.branches.size(); ++b) {
    const SingleQuery& q = ast.branches[b].query;
    for (size_t ci = 0; ci < q.clauses.size(); ++ci) {
      if (q.clauses[ci].kind != Clause::Kind::Match) continue;
      const MatchClause& m = q.clauses[ci].match;
      for (size_t pi = 0; pi < m.patterns.size(); ++pi) {
        for (size_t ri = 0; ri < m.patterns[pi].rels.size(); ++ri) {
          const RelPattern& rel = m.patterns[pi].rels[ri];
          if (rel.dir != RelDir::Undirected || rel.range) continue;
          if (!downstream_bag_linear(q, ci)) continue;

          SingleQuery named = q;
          std::set<std::string> used = all_names(q);
          auto ensure_var = [&](NodePattern& n) {
            if (!n.var) {
              n.var = fresh_name(used, "u");
              used.insert(*n.var);
            }
          };
          auto& part = named.clauses[ci].match.patterns[pi];
          ensure_var(part.nodes[ri]);
          ensure_var(part.nodes[ri + 1]);
          std::string u = *part.nodes[ri].var;
          std::string v = *part.nodes[ri + 1].var;

          SingleQuery right = named;
          right.clauses[ci].match.patterns[pi].rels[ri].dir = RelDir::Right;

          SingleQuery left = named;
          left.clauses[ci].match.patterns[pi].rels[ri].dir = RelDir::Left;
          {
            Expr ue, ve;
            ue.kind = Expr::Kind::Var;
            ue.name = u;
            ve.kind = Expr::Kind::Var;
            ve.name = v;
            Expr eq;
            eq.kind = Expr::Kind::Cmp;
            eq.cmp = CmpOp::Eq;
            eq.lhs = make_expr(std::move(ue));
            eq.rhs = make_expr(std::move(ve));
            Expr ne;
            ne.kind = Expr::Kind::Not;
            ne.lhs = make_expr(std::move(eq));
            ExprPtr guard = make_expr(std::move(ne));
            auto& where = left.clauses[ci].match.where;
            if (where) {
              Expr conj;
              conj.kind = Expr::Kind::And;
              conj.lhs = where;
              conj.rhs = guard;
              where = make_expr(std::move(conj));
            } else {
              where = guard;
            }
          }

          QueryAst out = ast;
          QueryAst::Branch b1{std::move(right), true};
          QueryAst::Branch b2{std::move(left), ast.branches[b].unionAll};
          // dedup (plain UNION) still happens once, after the last copy
          out.branches[b] = std::move(b1);
          out.branches.insert(out.branches.begin() + b + 1, std::move(b2));

          return Applied{std::move(out), "branch" + std::to_string(b) + ".clause" +
                                             std::to_string(ci) + ".pattern" + std::to_string(pi) +
                                             ".rel" + std::to_string(ri)};
        }
      }
    }
  }
  return std::nullopt;
}

/// Rule: expand a bounded variable-length relationship into explicit UNION ALL
/// branches, one per admissible length.
inline std::optional<Applied> rule_varlength(const QueryAst& ast) {
  for (size_t b = 0; b < ast.branches.size(); ++b) {
    const SingleQuery& q = ast.branches[b].query;
    std::set<std::string> refs = referenced_names(q);
    for (size_t ci = 0; ci < q.clauses.size(); ++ci) {
      if (q.clauses[ci].kind != Clause::Kind::Match) continue;
      const MatchClause& m = q.clauses[ci].match;
      for (size_t pi = 0; pi < m.patterns.size(); ++pi) {
        for (size_t ri = 0; ri < m.patterns[pi].rels.size(); ++ri) {
          const RelPattern& rel = m.patterns[pi].rels[ri];
          if (!rel.range || !rel.range->max) continue;  // unbounded stays
          if (rel.dir == RelDir::Undirected) continue;  // undirected first
          if (rel.var) {
            if (refs.count(*rel.var)) continue;
            size_t occurrences = 0;
            for (const auto& cl : q.clauses) {
              if (cl.kind != Clause::Kind::Match) continue;
              for (const auto& pp : cl.match.patterns) {
                for (const auto& rr : pp.rels) {
                  if (rr.var == rel.var) ++occurrences;
                }
              }
            }
            if (occurrences > 1) continue;
          }
          if (!downstream_bag_linear(q, ci)) continue;

          int64_t lo = rel.range->min, hi = *rel.range->max;
          auto expand = [&](int64_t k) {
            SingleQuery copy = q;
            auto& part = copy.clauses[ci].match.patterns[pi];
            RelPattern hop = part.rels[ri];
            hop.range.reset();
            hop.var.reset();
            std::vector<RelPattern> rels;
            std::vector<NodePattern> mids;
            for (int64_t i = 0; i < k; ++i) rels.push_back(hop);
            for (int64_t i = 0; i + 1 < k; ++i) mids.push_back(NodePattern{});
            part.rels.erase(part.rels.begin() + ri);
            part.rels.insert(part.rels.begin() + ri, rels.begin(), rels.end());
            part.nodes.insert(part.nodes.begin() + ri + 1, mids.begin(), mids.end());
            return copy;
          };

          QueryAst out = ast;
          std::vector<QueryAst::Branch> copies;
          for (int64_t k = lo; k <= hi; ++k) {
            QueryAst::Branch nb;
            nb.query = expand(k);
            nb.unionAll = true;
            copies.push_back(std::move(nb));
          }
          copies.back().unionAll = ast.branches[b].unionAll;
          if (copies.size() == 1) copies[0].unionAll = ast.branches[b].unionAll;
          out.branches.erase(out.branches.begin() + b);
          out.branches.insert(out.branches.begin() + b, copies.begin(), copies.end());

          return Applied{std::move(out), "branch" + std::to_string(b) + ".clause" +
                                             std::to_string(ci) + ".pattern" + std::to_string(pi) +
                                             ".rel" + std::to_string(ri)};
        }
      }
    }
  }
  return std::nullopt;
}

/// Rule: rewrite RETURN * into the explicit, lexicographically sorted list of
/// visible variables.
inline std::optional<Applied> rule_return_star(const QueryAst& ast) {
  for (size_t b = 0; b < ast.branches.size(); ++b) {
    const SingleQuery& q = ast.branches[b].query;
    if (!q.ret.star) continue;
    QueryAst out = ast;
    SingleQuery& nq = out.branches[b].query;
    nq.ret.star = false;
    Scope scope = scope_at_return(q);
    for (const auto& [name, kind] : scope) {
      (void)kind;
      Expr e;
      e.kind = Expr::Kind::Var;
      e.name = name;
      ProjectionItem item;
      item.expr = make_expr(std::move(e));
      nq.ret.items.push_back(std::move(item));
    }
    return Applied{std::move(out), "branch" + std::to_string(b) + ".return"};
  }
  return std::nullopt;
}

/// Rule: eliminate a pass-through / renaming WITH clause by substituting its
/// aliases downstream.
inline std::optional<Applied> rule_redundant_with(const QueryAst& ast) {
  for (size_t b = 0; b < ast.branches.size(); ++b) {
    const SingleQuery& q = ast.branches[b].query;
    for (size_t ci = 0; ci < q.clauses.size(); ++ci) {
      if (q.clauses[ci].kind != Clause::Kind::With) continue;
      const WithClause& w = q.clauses[ci].with;
      if (w.distinct || !w.orderBy.empty() || w.skip || w.limit || w.where) continue;

      bool simple = true;
      std::map<std::string, ExprPtr> subst;
      std::set<std::string> outNames;
      for (const auto& it : w.items) {
        bool isSimple = it.expr->kind == Expr::Kind::Var ||
                        it.expr->kind == Expr::Kind::PropAccess ||
                        it.expr->kind == Expr::Kind::IntLit ||
                        it.expr->kind == Expr::Kind::StringLit ||
                        it.expr->kind == Expr::Kind::BoolLit ||
                        it.expr->kind == Expr::Kind::ListLit;
        if (!isSimple) { simple = false; break; }
        std::string name = it.alias ? *it.alias
                                    : (it.expr->kind == Expr::Kind::Var ? it.expr->name : "");
        if (name.empty()) { simple = false; break; }
        if (outNames.count(name)) { simple = false; break; }
        outNames.insert(name);
        subst[name] = it.expr;
      }
      if (!simple) continue;

      // Identity pass-throughs need no substitution.
      for (auto it = subst.begin(); it != subst.end();) {
        if (it->second->kind == Expr::Kind::Var && it->second->name == it->first) {
          it = subst.erase(it);
        } else {
          ++it;
        }
      }

      // Names the WITH dropped must not be rebound downstream.
      Scope before;
      {
        SemanticChecker chk;
        Scope s;
        for (size_t i = 0; i < ci; ++i) chk.check_clause(q.clauses[i], s);
        before = s;
      }
      std::set<std::string> dropped;
      for (const auto& [name, kind] : before) {
        (void)kind;
        if (!outNames.count(name)) dropped.insert(name);
      }

      bool safe = true;
      auto check_downstream_exprs = [&](const ExprPtr& e) {
        if (!e || !safe) return;
        // PropAccess on an alias substituted by a non-variable is unsupported.
        std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& x) {
          if (!x || !safe) return;
          if (x->kind == Expr::Kind::PropAccess) {
            auto s = subst.find(x->name);
            if (s != subst.end() && s->second->kind != Expr::Kind::Var) safe = false;
          }
          walk(x->lhs);
          walk(x->rhs);
          for (const auto& a : x->args) walk(a);
          for (const auto& me : x->entries) walk(me.value);
          if (x->kind == Expr::Kind::Exists) {
            for (const auto& c : x->existsQuery->clauses) {
              if (c.kind == Clause::Kind::Match) walk(c.match.where);
            }
          }
        };
        walk(e);
      };
      for (size_t i = ci + 1; i < q.clauses.size() && safe; ++i) {
        const Clause& c = q.clauses[i];
        if (c.kind == Clause::Kind::Match) {
          for (const auto& p : c.match.patterns) {
            for (const auto& n : p.nodes) {
              if (!n.var) continue;
              if (dropped.count(*n.var)) safe = false;
              auto s = subst.find(*n.var);
              if (s != subst.end() && s->second->kind != Expr::Kind::Var) safe = false;
            }
            for (const auto& r : p.rels) {
              if (!r.var) continue;
              if (dropped.count(*r.var)) safe = false;
              auto s = subst.find(*r.var);
              if (s != subst.end() && s->second->kind != Expr::Kind::Var) safe = false;
            }
          }
          check_downstream_exprs(c.match.where);
        } else if (c.kind == Clause::Kind::With) {
          for (const auto& it : c.with.items) {
            if (it.alias && dropped.count(*it.alias)) safe = false;
            check_downstream_exprs(it.expr);
          }
          for (const auto& oi : c.with.orderBy) check_downstream_exprs(oi.expr);
          check_downstream_exprs(c.with.where);
        } else {
          if (dropped.count(c.unwind.alias)) safe = false;
          check_downstream_exprs(c.unwind.list);
        }
      }
      for (const auto& it : q.ret.items) check_downstream_exprs(it.expr);
      for (const auto& oi : q.ret.orderBy) check_downstream_exprs(oi.expr);
      if (!safe) continue;

      QueryAst out = ast;
      SingleQuery& nq = out.branches[b].query;
      nq.clauses.erase(nq.clauses.begin() + ci);
      for (size_t i = ci; i < nq.clauses.size(); ++i) {
        Clause& c = nq.clauses[i];
        if (c.kind == Clause::Kind::Match) {
          for (auto& p : c.match.patterns) {
            for (auto& n : p.nodes) {
              if (n.var && subst.count(*n.var)) n.var = subst.at(*n.var)->name;
            }
            for (auto& r : p.rels) {
              if (r.var && subst.count(*r.var)) r.var = subst.at(*r.var)->name;
            }
          }
          c.match.where = substitute_in_expr(c.match.where, subst);
        } else if (c.kind == Clause::Kind::With) {
          for (auto& it : c.with.items) it.expr = substitute_in_expr(it.expr, subst);
          for (auto& oi : c.with.orderBy) oi.expr = substitute_in_expr(oi.expr, subst);
          c.with.where = substitute_in_expr(c.with.where, subst);
        } else {
          c.unwind.list = substitute_in_expr(c.unwind.list, subst);
        }
      }
      for (auto& it : nq.ret.items) it.expr = substitute_in_expr(it.expr, subst);
      for (auto& oi : nq.ret.orderBy) oi.expr = substitute_in_expr(oi.expr, subst);

      return Applied{std::move(out),
                     "branch" + std::to_string(b) + ".clause" + std::to_string(ci)};
    }
  }
  return std::nullopt;
}

/// Rule: canonical variable naming. Nodes become n1..nk and relationships
/// r1..rk by first appearance; anonymous patterns of the clause chain receive
/// names in the same sweep; WITH/UNWIND aliases become c1..ck; RETURN aliases
/// are dropped (their ORDER BY references are substituted first). Named
/// variables inside EXISTS bodies join the same numbering, so alpha-equivalent
/// inputs normalize to identical trees.
inline std::optional<Applied> rule_standardize(const QueryAst& ast) {
  for (size_t b = 0; b < ast.branches.size(); ++b) {
    QueryAst out = ast;
    SingleQuery& nq = out.branches[b].query;

    // Drop RETURN aliases, substituting their ORDER BY uses.
    std::map<std::string, ExprPtr> aliasSubst;
    for (auto& it : nq.ret.items) {
      if (it.alias) {
        aliasSubst[*it.alias] = it.expr;
        it.alias.reset();
      }
    }
    if (!aliasSubst.empty()) {
      for (auto& oi : nq.ret.orderBy) oi.expr = substitute_in_expr(oi.expr, aliasSubst);
    }

    std::map<std::string, std::string> names;
    int nodeCount = 0, relCount = 0, aliasCount = 0;

    auto canonical_node = [&](std::optional<std::string>& var) {
      if (var) {
        auto it = names.find(*var);
        if (it != names.end()) {
          var = it->second;
          return;
        }
        std::string canonical = "n" + std::to_string(++nodeCount);
        names.emplace(*var, canonical);
        var = canonical;
      } else {
        var = "n" + std::to_string(++nodeCount);
      }
    };
    auto canonical_rel = [&](std::optional<std::string>& var) {
      if (var) {
        auto it = names.find(*var);
        if (it != names.end()) {
          var = it->second;
          return;
        }
        std::string canonical = "r" + std::to_string(++relCount);
        names.emplace(*var, canonical);
        var = canonical;
      } else {
        var = "r" + std::to_string(++relCount);
      }
    };

    // Pattern variables inside EXISTS bodies share the numbering; anonymous
    // body patterns stay anonymous (compilation names them itself).
    std::function<ExprPtr(const ExprPtr&)> rewrite_expr = [&](const ExprPtr& e) -> ExprPtr {
      if (!e) return e;
      Expr outE = *e;
      if (e->kind == Expr::Kind::Var || e->kind == Expr::Kind::PropAccess) {
        auto it = names.find(e->name);
        if (it != names.end()) outE.name = it->second;
      }
      if (e->kind == Expr::Kind::Exists) {
        auto body = std::make_shared<SingleQuery>(*e->existsQuery);
        for (auto& c : body->clauses) {
          if (c.kind != Clause::Kind::Match) continue;
          for (auto& p : c.match.patterns) {
            for (size_t i = 0; i < p.nodes.size(); ++i) {
              if (p.nodes[i].var) canonical_node(p.nodes[i].var);
              if (i < p.rels.size() && p.rels[i].var) canonical_rel(p.rels[i].var);
            }
          }
          c.match.where = rewrite_expr(c.match.where);
        }
        outE.existsQuery = body;
      }
      outE.lhs = rewrite_expr(e->lhs);
      outE.rhs = rewrite_expr(e->rhs);
      for (auto& a : outE.args) a = rewrite_expr(a);
      for (auto& me : outE.entries) me.value = rewrite_expr(me.value);
      return make_expr(std::move(outE));
    };

    for (auto& c : nq.clauses) {
      switch (c.kind) {
        case Clause::Kind::Match:
          for (auto& p : c.match.patterns) {
            for (size_t i = 0; i < p.nodes.size(); ++i) {
              canonical_node(p.nodes[i].var);
              if (i < p.rels.size()) canonical_rel(p.rels[i].var);
            }
          }
          c.match.where = rewrite_expr(c.match.where);
          break;
        case Clause::Kind::With:
          for (auto& it : c.with.items) {
            it.expr = rewrite_expr(it.expr);
            if (it.alias) {
              auto found = names.find(*it.alias);
              if (found == names.end()) {
                std::string canonical = "c" + std::to_string(++aliasCount);
                names.emplace(*it.alias, canonical);
                it.alias = canonical;
              } else {
                it.alias = found->second;
              }
            }
          }
          for (auto& oi : c.with.orderBy) oi.expr = rewrite_expr(oi.expr);
          c.with.where = rewrite_expr(c.with.where);
          break;
        case Clause::Kind::Unwind: {
          c.unwind.list = rewrite_expr(c.unwind.list);
          auto found = names.find(c.unwind.alias);
          if (found == names.end()) {
            std::string canonical = "c" + std::to_string(++aliasCount);
            names.emplace(c.unwind.alias, canonical);
            c.unwind.alias = canonical;
          } else {
            c.unwind.alias = found->second;
          }
          break;
        }
      }
    }
    for (auto& it : nq.ret.items) it.expr = rewrite_expr(it.expr);
    for (auto& oi : nq.ret.orderBy) oi.expr = rewrite_expr(oi.expr);

    if (!structurally_equal(out, ast)) {
      return Applied{std::move(out), "branch" + std::to_string(b)};
    }
  }
  return std::nullopt;
}

/// Rule: id(a) = id(b) between two node variables pins the variables to the
/// same node; the later variable is renamed to the earlier one and duplicate
/// standalone bare node patterns are removed.
inline std::optional<Applied> rule_id_equality(const QueryAst& ast) {
  for (size_t b = 0; b < ast.branches.size(); ++b) {
    const SingleQuery& q = ast.branches[b].query;
    bool singleScope = true;
    for (const auto& c : q.clauses) {
      if (c.kind != Clause::Kind::Match) singleScope = false;
    }
    if (!singleScope) continue;

    Scope scope = scope_at_return(q);
    std::vector<std::string> bindOrder;
    for (const auto& c : q.clauses) {
      for (const auto& p : c.match.patterns) {
        for (const auto& n : p.nodes) {
          if (n.var && std::find(bindOrder.begin(), bindOrder.end(), *n.var) == bindOrder.end()) {
            bindOrder.push_back(*n.var);
          }
        }
      }
    }

    for (size_t ci = 0; ci < q.clauses.size(); ++ci) {
      const auto& where = q.clauses[ci].match.where;
      if (!where) continue;
      // Top-level AND conjuncts.
      std::vector<ExprPtr> conjuncts;
      std::function<void(const ExprPtr&)> flatten = [&](const ExprPtr& e) {
        if (e->kind == Expr::Kind::And) {
          flatten(e->lhs);
          flatten(e->rhs);
        } else {
          conjuncts.push_back(e);
        }
      };
      flatten(where);

      for (size_t k = 0; k < conjuncts.size(); ++k) {
        const Expr& e = *conjuncts[k];
        if (e.kind != Expr::Kind::Cmp || e.cmp != CmpOp::Eq) continue;
        auto idArg = [](const Expr& f) -> std::optional<std::string> {
          if (f.kind == Expr::Kind::FnCall && to_upper(f.name) == "ID" && f.args.size() == 1 &&
              f.args[0]->kind == Expr::Kind::Var) {
            return f.args[0]->name;
          }
          return std::nullopt;
        };
        auto a = idArg(*e.lhs), c = idArg(*e.rhs);
        if (!a || !c || *a == *c) continue;
        if (!scope.count(*a) || !scope.count(*c)) continue;
        if (scope.at(*a) != VarKind::NodeVar || scope.at(*c) != VarKind::NodeVar) continue;

        std::string keep = *a, drop = *c;
        for (const auto& v : bindOrder) {
          if (v == *a) break;
          if (v == *c) {
            keep = *c;
            drop = *a;
            break;
          }
        }

        QueryAst out = ast;
        SingleQuery& nq = out.branches[b].query;
        // Rebuild this WHERE without the conjunct.
        ExprPtr rebuilt;
        for (size_t j = 0; j < conjuncts.size(); ++j) {
          if (j == k) continue;
          if (!rebuilt) {
            rebuilt = conjuncts[j];
          } else {
            Expr conj;
            conj.kind = Expr::Kind::And;
            conj.lhs = rebuilt;
            conj.rhs = conjuncts[j];
            rebuilt = make_expr(std::move(conj));
          }
        }
        nq.clauses[ci].match.where = rebuilt;

        std::map<std::string, std::string> ren{{drop, keep}};
        for (auto& cl : nq.clauses) {
          for (auto& p : cl.match.patterns) {
            for (auto& n : p.nodes) {
              if (n.var && *n.var == drop) n.var = keep;
            }
            for (auto& r : p.rels) {
              if (r.var && *r.var == drop) r.var = keep;
            }
          }
          cl.match.where = rename_in_expr(cl.match.where, ren);
        }
        for (auto& it : nq.ret.items) it.expr = rename_in_expr(it.expr, ren);
        for (auto& oi : nq.ret.orderBy) oi.expr = rename_in_expr(oi.expr, ren);

        // Remove duplicate standalone bare node patterns of the kept variable.
        for (auto& cl : nq.clauses) {
          auto& parts = cl.match.patterns;
          std::set<std::string> seenStandalone;
          std::vector<PatternPart> next;
          std::set<std::string> boundInChains;
          for (const auto& p : parts) {
            if (!p.rels.empty()) {
              for (const auto& n : p.nodes) {
                if (n.var) boundInChains.insert(*n.var);
              }
            }
          }
          for (const auto& p : parts) {
            bool bare = p.rels.empty() && p.nodes[0].var && p.nodes[0].labels.empty() &&
                        p.nodes[0].props.empty();
            if (bare) {
              const std::string& v = *p.nodes[0].var;
              if (seenStandalone.count(v) || boundInChains.count(v)) continue;
              seenStandalone.insert(v);
            }
            next.push_back(p);
          }
          if (!next.empty()) parts = std::move(next);
        }

        return Applied{std::move(out),
                       "branch" + std::to_string(b) + ".clause" + std::to_string(ci)};
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Applies one rule at its leftmost-outermost matching site.
inline std::optional<detail::Applied> apply_rule(RuleId rule, const QueryAst& ast) {
  switch (rule) {
    case RuleId::R1_UndirectedElim: return detail::rule_undirected(ast);
    case RuleId::R2_VarLengthRewrite: return detail::rule_varlength(ast);
    case RuleId::R3_ReturnStar: return detail::rule_return_star(ast);
    case RuleId::R4_RedundantClauseElim: return detail::rule_redundant_with(ast);
    case RuleId::R5_VariableStandardize: return detail::rule_standardize(ast);
    case RuleId::R6_IdEquality: return detail::rule_id_equality(ast);
  }
  return std::nullopt;
}

/// Round-by-round fixpoint: one rule application per round, rules tried in a
/// fixed order, so variable standardization runs only once expansion rules
/// have quiesced and id-equality only on standardized names.
inline NormalizedAst normalize(const QueryAst& ast, int maxRounds = 128) {
  static const RuleId kOrder[] = {
      RuleId::R1_UndirectedElim,  RuleId::R2_VarLengthRewrite, RuleId::R3_ReturnStar,
      RuleId::R4_RedundantClauseElim, RuleId::R5_VariableStandardize, RuleId::R6_IdEquality,
  };
  NormalizedAst out;
  out.ast = ast;
  for (int round = 1;; ++round) {
    if (round > maxRounds) throw NormalizationBudgetExceeded();
    bool applied = false;
    for (RuleId rule : kOrder) {
      auto result = apply_rule(rule, out.ast);
      if (result) {
        out.ast = std::move(result->ast);
        out.trace.push_back({round, rule, result->site});
        applied = true;
        break;
      }
    }
    if (!applied) break;
  }
  return out;
}

inline std::string trace_to_string(const std::vector<RuleApplication>& trace) {
  std::string s;
  for (const auto& t : trace) {
    s += "round=" + std::to_string(t.round) + " rule=" + to_string(t.rule) + " site=" + t.site +
         "\n";
  }
  return s;
}

}  // namespace cyeq
