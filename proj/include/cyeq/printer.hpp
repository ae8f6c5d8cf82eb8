/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <sstream>
#include <string>

#include "cyeq/ast.hpp"

namespace cyeq {

namespace detail {

inline void print_expr(std::ostream& os, const Expr& e, int parentPrec);
inline void print_single_query(std::ostream& os, const SingleQuery& q);

inline std::string quote_string(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\\' || c == '\'') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

inline void print_property_map(std::ostream& os, const std::vector<MapEntry>& props) {
  os << "{";
  for (size_t i = 0; i < props.size(); ++i) {
    if (i) os << ", ";
    os << props[i].key << ": ";
    print_expr(os, *props[i].value, 0);
  }
  os << "}";
}

inline const char* cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "<>";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

// Precedence: OR 1, AND 2, NOT 3, comparisons 4, atoms 5.
inline int expr_prec(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Or: return 1;
    case Expr::Kind::And: return 2;
    case Expr::Kind::Not: return 3;
    case Expr::Kind::Cmp:
    case Expr::Kind::IsNull: return 4;
    default: return 5;
  }
}

inline void print_expr(std::ostream& os, const Expr& e, int parentPrec) {
  const int prec = expr_prec(e);
  const bool wrap = prec < parentPrec;
  if (wrap) os << "(";
  switch (e.kind) {
    case Expr::Kind::IntLit: os << e.intValue; break;
    case Expr::Kind::StringLit: os << quote_string(e.strValue()); break;
    case Expr::Kind::BoolLit: os << (e.boolValue ? "TRUE" : "FALSE"); break;
    case Expr::Kind::Var: os << e.name; break;
    case Expr::Kind::PropAccess: os << e.name << "." << e.key; break;
    case Expr::Kind::Cmp:
      print_expr(os, *e.lhs, 5);
      os << " " << cmp_text(e.cmp) << " ";
      print_expr(os, *e.rhs, 5);
      break;
    case Expr::Kind::And:
      print_expr(os, *e.lhs, 2);
      os << " AND ";
      print_expr(os, *e.rhs, 3);
      break;
    case Expr::Kind::Or:
      print_expr(os, *e.lhs, 1);
      os << " OR ";
      print_expr(os, *e.rhs, 2);
      break;
    case Expr::Kind::Not:
      os << "NOT ";
      print_expr(os, *e.lhs, 3);
      break;
    case Expr::Kind::IsNull:
      print_expr(os, *e.lhs, 5);
      os << " IS NULL";
      break;
    case Expr::Kind::FnCall:
      os << e.name << "(";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, *e.args[i], 0);
      }
      os << ")";
      break;
    case Expr::Kind::AggCall:
      os << to_string(e.agg) << "(";
      if (e.lhs) print_expr(os, *e.lhs, 0);
      else os << "*";
      os << ")";
      break;
    case Expr::Kind::ListLit:
      os << "[";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, *e.args[i], 0);
      }
      os << "]";
      break;
    case Expr::Kind::MapLit:
      print_property_map(os, e.entries);
      break;
    case Expr::Kind::Exists:
      os << "EXISTS { ";
      print_single_query(os, *e.existsQuery);
      os << " }";
      break;
  }
  if (wrap) os << ")";
}

inline void print_node(std::ostream& os, const NodePattern& n) {
  os << "(";
  if (n.var) os << *n.var;
  for (const auto& l : n.labels) os << ":" << l;
  if (!n.props.empty()) {
    os << " ";
    print_property_map(os, n.props);
  }
  os << ")";
}

inline void print_rel(std::ostream& os, const RelPattern& r) {
  os << (r.dir == RelDir::Left ? "<-[" : "-[");
  if (r.var) os << *r.var;
  for (size_t i = 0; i < r.labels.size(); ++i) os << (i ? "|" : ":") << r.labels[i];
  if (r.range) {
    os << "*";
    const auto& rg = *r.range;
    if (rg.max && *rg.max == rg.min) {
      os << rg.min;
    } else if (rg.max) {
      os << rg.min << ".." << *rg.max;
    } else if (rg.min != 1) {
      os << rg.min << "..";
    }
  }
  if (!r.props.empty()) {
    os << " ";
    print_property_map(os, r.props);
  }
  os << (r.dir == RelDir::Right ? "]->" : "]-");
}

inline void print_pattern_part(std::ostream& os, const PatternPart& p) {
  print_node(os, p.nodes[0]);
  for (size_t i = 0; i < p.rels.size(); ++i) {
    print_rel(os, p.rels[i]);
    print_node(os, p.nodes[i + 1]);
  }
}

inline void print_projection(std::ostream& os, const std::vector<ProjectionItem>& items) {
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) os << ", ";
    print_expr(os, *items[i].expr, 0);
    if (items[i].alias) os << " AS " << *items[i].alias;
  }
}

inline void print_order_skip_limit(std::ostream& os, const std::vector<OrderItem>& order,
                                   const std::optional<int64_t>& skip,
                                   const std::optional<int64_t>& limit) {
  if (!order.empty()) {
    os << " ORDER BY ";
    for (size_t i = 0; i < order.size(); ++i) {
      if (i) os << ", ";
      print_expr(os, *order[i].expr, 0);
      if (!order[i].ascending) os << " DESC";
    }
  }
  if (skip) os << " SKIP " << *skip;
  if (limit) os << " LIMIT " << *limit;
}

inline void print_single_query(std::ostream& os, const SingleQuery& q) {
  bool first = true;
  auto sep = [&] {
    if (!first) os << " ";
    first = false;
  };
  for (const auto& c : q.clauses) {
    sep();
    switch (c.kind) {
      case Clause::Kind::Match:
        if (c.match.optional) os << "OPTIONAL ";
        os << "MATCH ";
        for (size_t i = 0; i < c.match.patterns.size(); ++i) {
          if (i) os << ", ";
          print_pattern_part(os, c.match.patterns[i]);
        }
        if (c.match.where) {
          os << " WHERE ";
          print_expr(os, *c.match.where, 0);
        }
        break;
      case Clause::Kind::With:
        os << "WITH ";
        if (c.with.distinct) os << "DISTINCT ";
        print_projection(os, c.with.items);
        print_order_skip_limit(os, c.with.orderBy, c.with.skip, c.with.limit);
        if (c.with.where) {
          os << " WHERE ";
          print_expr(os, *c.with.where, 0);
        }
        break;
      case Clause::Kind::Unwind:
        os << "UNWIND ";
        print_expr(os, *c.unwind.list, 0);
        os << " AS " << c.unwind.alias;
        break;
    }
  }
  if (q.ret.items.empty() && !q.ret.star) return;  // EXISTS body has no RETURN
  sep();
  os << "RETURN ";
  if (q.ret.distinct) os << "DISTINCT ";
  if (q.ret.star) os << "*";
  else print_projection(os, q.ret.items);
  print_order_skip_limit(os, q.ret.orderBy, q.ret.skip, q.ret.limit);
}

}  // namespace detail

/// Emits canonical query text. parse(print(ast)) reproduces the AST.
inline std::string print(const QueryAst& ast) {
  std::ostringstream os;
  for (size_t i = 0; i < ast.branches.size(); ++i) {
    if (i) os << (ast.branches[i].unionAll ? " UNION ALL " : " UNION ");
    detail::print_single_query(os, ast.branches[i].query);
  }
  std::string s = os.str();
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

inline std::string print(const SingleQuery& q) {
  std::ostringstream os;
  detail::print_single_query(os, q);
  std::string s = os.str();
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

inline std::string print(const Expr& e) {
  std::ostringstream os;
  detail::print_expr(os, e, 0);
  return os.str();
}

/// Structural equality via the canonical form.
inline bool structurally_equal(const QueryAst& a, const QueryAst& b) {
  return print(a) == print(b);
}

}  // namespace cyeq
