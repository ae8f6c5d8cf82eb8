/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cyeq/ast.hpp"

namespace cyeq {

enum class VarKind { NodeVar, RelVar, PathVar, Value };

/// Variables visible at one point of a clause chain.
using Scope = std::map<std::string, VarKind>;

namespace detail {

struct SemanticChecker {
  std::optional<FrontendError> failure;

  // Sorted label list per relationship variable; one entry per occurrence
  // that declared at least the variable.
  std::map<std::string, std::vector<std::string>> relLabels;

  void error(ErrorKind kind, Span where, std::string msg) {
    if (!failure) failure = FrontendError{kind, where, std::move(msg)};
  }

  void bind(Scope& scope, const std::string& name, VarKind kind, Span span) {
    auto it = scope.find(name);
    if (it == scope.end()) {
      scope.emplace(name, kind);
      return;
    }
    if (it->second != kind) {
      error(ErrorKind::ConflictingRelationshipLabels, span,
            "variable '" + name + "' is bound with a conflicting kind");
    }
  }

  void check_rel_labels(const RelPattern& r) {
    if (!r.var) return;
    std::vector<std::string> labels = r.labels;
    std::sort(labels.begin(), labels.end());
    auto it = relLabels.find(*r.var);
    if (it == relLabels.end()) {
      relLabels.emplace(*r.var, std::move(labels));
    } else if (it->second != labels) {
      error(ErrorKind::ConflictingRelationshipLabels, r.span,
            "relationship variable '" + *r.var + "' is declared with conflicting labels");
    }
  }

  void check_pattern(const PatternPart& p, Scope& scope) {
    for (const auto& n : p.nodes) {
      if (n.var) bind(scope, *n.var, VarKind::NodeVar, n.span);
    }
    for (const auto& r : p.rels) {
      if (r.var) bind(scope, *r.var, r.range ? VarKind::PathVar : VarKind::RelVar, r.span);
      check_rel_labels(r);
    }
  }

  void check_expr(const Expr& e, const Scope& scope) {
    switch (e.kind) {
      case Expr::Kind::Var:
      case Expr::Kind::PropAccess:
        if (!scope.count(e.name)) {
          error(ErrorKind::UndefinedVariable, e.span, "undefined variable '" + e.name + "'");
        }
        break;
      case Expr::Kind::Cmp:
        check_expr(*e.lhs, scope);
        check_expr(*e.rhs, scope);
        break;
      case Expr::Kind::And:
      case Expr::Kind::Or:
        check_expr(*e.lhs, scope);
        check_expr(*e.rhs, scope);
        break;
      case Expr::Kind::Not:
      case Expr::Kind::IsNull:
        check_expr(*e.lhs, scope);
        break;
      case Expr::Kind::FnCall:
        for (const auto& a : e.args) check_expr(*a, scope);
        break;
      case Expr::Kind::AggCall:
        if (e.lhs) check_expr(*e.lhs, scope);
        break;
      case Expr::Kind::ListLit:
        for (const auto& a : e.args) check_expr(*a, scope);
        break;
      case Expr::Kind::MapLit:
        for (const auto& me : e.entries) check_expr(*me.value, scope);
        break;
      case Expr::Kind::Exists: {
        Scope inner = scope;
        for (const auto& c : e.existsQuery->clauses) check_clause(c, inner);
        break;
      }
      default:
        break;
    }
  }

  static VarKind item_kind(const ProjectionItem& item, const Scope& scope) {
    if (item.expr->kind == Expr::Kind::Var) {
      auto it = scope.find(item.expr->name);
      if (it != scope.end()) return it->second;
    }
    return VarKind::Value;
  }

  void check_clause(const Clause& c, Scope& scope) {
    switch (c.kind) {
      case Clause::Kind::Match:
        for (const auto& p : c.match.patterns) check_pattern(p, scope);
        if (c.match.where) check_expr(*c.match.where, scope);
        break;
      case Clause::Kind::With: {
        Scope outgoing;
        for (const auto& item : c.with.items) {
          check_expr(*item.expr, scope);
          std::string name;
          if (item.alias) {
            name = *item.alias;
          } else if (item.expr->kind == Expr::Kind::Var) {
            name = item.expr->name;
          } else {
            error(ErrorKind::Syntax, item.expr->span, "WITH item requires an alias");
            continue;
          }
          outgoing[name] = item_kind(item, scope);
        }
        Scope both = scope;
        for (const auto& [k, v] : outgoing) both[k] = v;
        for (const auto& oi : c.with.orderBy) check_expr(*oi.expr, both);
        if (c.with.where) check_expr(*c.with.where, both);
        scope = std::move(outgoing);
        break;
      }
      case Clause::Kind::Unwind:
        check_expr(*c.unwind.list, scope);
        bind(scope, c.unwind.alias, VarKind::Value, c.unwind.span);
        break;
    }
  }

  void check_single(const SingleQuery& q) {
    Scope scope;
    for (const auto& c : q.clauses) check_clause(c, scope);
    Scope withAliases = scope;
    for (const auto& item : q.ret.items) {
      check_expr(*item.expr, scope);
      if (item.alias) withAliases[*item.alias] = item_kind(item, scope);
    }
    for (const auto& oi : q.ret.orderBy) check_expr(*oi.expr, withAliases);
  }
};

}  // namespace detail

/// Side-effect-free validation: every variable reference resolves, and no
/// relationship variable carries conflicting label lists.
inline std::optional<FrontendError> semantic_check(const QueryAst& ast) {
  for (const auto& b : ast.branches) {
    detail::SemanticChecker checker;
    checker.check_single(b.query);
    if (checker.failure) return checker.failure;
  }
  // Branch arity must agree when it is statically known (no RETURN *).
  std::optional<size_t> arity;
  for (const auto& b : ast.branches) {
    if (b.query.ret.star) continue;
    size_t n = b.query.ret.items.size();
    if (!arity) arity = n;
    else if (*arity != n) {
      return FrontendError{ErrorKind::Syntax, {},
                           "UNION branches return different numbers of columns"};
    }
  }
  return std::nullopt;
}

/// Scope visible at the RETURN clause of a single query.
inline Scope scope_at_return(const SingleQuery& q) {
  detail::SemanticChecker checker;
  Scope scope;
  for (const auto& c : q.clauses) checker.check_clause(c, scope);
  return scope;
}

}  // namespace cyeq
