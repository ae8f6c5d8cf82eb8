/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_set>
#include <vector>

#include "cyeq/ast.hpp"
#include "cyeq/lexer.hpp"

namespace cyeq {

inline bool is_reserved_word(const std::string& ident) {
  static const std::unordered_set<std::string> kReserved = {
      "MATCH", "OPTIONAL", "WHERE", "WITH", "RETURN", "UNION", "ALL",
      "UNWIND", "AS", "DISTINCT", "ORDER", "BY", "LIMIT", "SKIP",
      "ASC", "DESC", "AND", "OR", "NOT", "IS", "NULL", "TRUE", "FALSE",
      "EXISTS",
  };
  return kReserved.count(to_upper(ident)) > 0;
}

namespace detail {

struct ParseError {
  FrontendError err;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  QueryAst parse_query() {
    QueryAst ast;
    QueryAst::Branch first;
    first.query = parse_single_query();
    ast.branches.push_back(std::move(first));
    while (at_kw("UNION")) {
      next();
      QueryAst::Branch b;
      b.unionAll = false;
      if (at_kw("ALL")) {
        next();
        b.unionAll = true;
      }
      b.query = parse_single_query();
      ast.branches.push_back(std::move(b));
    }
    expect(Tok::End, "end of query");
    return ast;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;

  const Token& peek(size_t k = 0) const {
    size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_kw(const char* kw) const {
    return peek().kind == Tok::Ident && to_upper(peek().text) == kw;
  }
  void expect_kw(const char* kw) {
    if (!at_kw(kw)) fail(std::string("expected ") + kw);
    next();
  }
  const Token& expect(Tok k, const char* what) {
    if (!at(k)) fail(std::string("expected ") + what);
    return next();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError{FrontendError{ErrorKind::Syntax, peek().span, msg}};
  }

  std::string expect_name(const char* what) {
    if (!at(Tok::Ident)) fail(std::string("expected ") + what);
    if (is_reserved_word(peek().text)) fail("reserved word used as " + std::string(what));
    return next().text;
  }

  static std::optional<AggFn> agg_from_name(const std::string& name) {
    const std::string u = to_upper(name);
    if (u == "COLLECT") return AggFn::Collect;
    if (u == "COUNT") return AggFn::Count;
    if (u == "SUM") return AggFn::Sum;
    if (u == "MAX") return AggFn::Max;
    if (u == "MIN") return AggFn::Min;
    if (u == "AVG") return AggFn::Avg;
    return std::nullopt;
  }

  // -- clauses --------------------------------------------------------------

  SingleQuery parse_single_query() {
    SingleQuery q;
    bool sawClause = false;
    for (;;) {
      if (at_kw("MATCH") || at_kw("OPTIONAL")) {
        q.clauses.push_back(parse_match());
        sawClause = true;
      } else if (at_kw("WITH")) {
        q.clauses.push_back(parse_with());
        sawClause = true;
      } else if (at_kw("UNWIND")) {
        q.clauses.push_back(parse_unwind());
        sawClause = true;
      } else {
        break;
      }
    }
    if (!sawClause) fail("expected MATCH, OPTIONAL MATCH, WITH or UNWIND");
    if (!at_kw("RETURN")) fail("expected RETURN");
    q.ret = parse_return();
    return q;
  }

  Clause parse_match() {
    Clause c;
    c.kind = Clause::Kind::Match;
    if (at_kw("OPTIONAL")) {
      next();
      c.match.optional = true;
    }
    expect_kw("MATCH");
    c.match.patterns.push_back(parse_pattern_part());
    while (at(Tok::Comma)) {
      next();
      c.match.patterns.push_back(parse_pattern_part());
    }
    if (at_kw("WHERE")) {
      next();
      c.match.where = parse_expr();
    }
    return c;
  }

  Clause parse_with() {
    Clause c;
    c.kind = Clause::Kind::With;
    expect_kw("WITH");
    if (at_kw("DISTINCT")) {
      next();
      c.with.distinct = true;
    }
    c.with.items.push_back(parse_projection_item());
    while (at(Tok::Comma)) {
      next();
      c.with.items.push_back(parse_projection_item());
    }
    parse_order_skip_limit(c.with.orderBy, c.with.skip, c.with.limit);
    if (at_kw("WHERE")) {
      next();
      c.with.where = parse_expr();
    }
    return c;
  }

  Clause parse_unwind() {
    Clause c;
    c.kind = Clause::Kind::Unwind;
    Span lo = peek().span;
    expect_kw("UNWIND");
    c.unwind.list = parse_expr();
    expect_kw("AS");
    c.unwind.alias = expect_name("alias");
    c.unwind.span = {lo.lo, peek().span.lo};
    return c;
  }

  ReturnClause parse_return() {
    ReturnClause r;
    expect_kw("RETURN");
    if (at_kw("DISTINCT")) {
      next();
      r.distinct = true;
    }
    if (at(Tok::Star)) {
      next();
      r.star = true;
    } else {
      r.items.push_back(parse_projection_item());
      while (at(Tok::Comma)) {
        next();
        r.items.push_back(parse_projection_item());
      }
    }
    parse_order_skip_limit(r.orderBy, r.skip, r.limit);
    return r;
  }

  ProjectionItem parse_projection_item() {
    ProjectionItem item;
    item.expr = parse_expr();
    if (at_kw("AS")) {
      next();
      item.alias = expect_name("alias");
    }
    return item;
  }

  void parse_order_skip_limit(std::vector<OrderItem>& order,
                              std::optional<int64_t>& skip,
                              std::optional<int64_t>& limit) {
    if (at_kw("ORDER")) {
      next();
      expect_kw("BY");
      for (;;) {
        OrderItem oi;
        oi.expr = parse_expr();
        if (at_kw("ASC")) { next(); }
        else if (at_kw("DESC")) { next(); oi.ascending = false; }
        order.push_back(std::move(oi));
        if (!at(Tok::Comma)) break;
        next();
      }
    }
    if (at_kw("SKIP")) {
      next();
      skip = expect(Tok::Int, "integer SKIP count").intValue;
    }
    if (at_kw("LIMIT")) {
      next();
      limit = expect(Tok::Int, "integer LIMIT count").intValue;
    }
  }

  // -- patterns -------------------------------------------------------------

  PatternPart parse_pattern_part() {
    PatternPart part;
    part.nodes.push_back(parse_node_pattern());
    for (;;) {
      if (at(Tok::Minus) || at(Tok::Lt)) {
        part.rels.push_back(parse_rel_pattern());
        part.nodes.push_back(parse_node_pattern());
      } else {
        break;
      }
    }
    return part;
  }

  NodePattern parse_node_pattern() {
    NodePattern n;
    Span lo = peek().span;
    expect(Tok::LParen, "'('");
    if (at(Tok::Ident)) {
      if (is_reserved_word(peek().text)) fail("reserved word used as variable");
      n.var = next().text;
    }
    while (at(Tok::Colon)) {
      next();
      if (!at(Tok::Ident)) fail("expected label name");
      n.labels.push_back(next().text);
    }
    if (at(Tok::LBrace)) n.props = parse_property_map();
    expect(Tok::RParen, "')'");
    n.span = {lo.lo, peek().span.lo};
    return n;
  }

  RelPattern parse_rel_pattern() {
    RelPattern r;
    Span lo = peek().span;
    bool leftArrow = false;
    if (at(Tok::Lt)) {
      next();
      leftArrow = true;
    }
    expect(Tok::Minus, "'-'");
    if (at(Tok::LBracket)) {
      next();
      if (at(Tok::Ident) && !at_kw("NULL")) {
        if (is_reserved_word(peek().text)) fail("reserved word used as variable");
        r.var = next().text;
      }
      if (at(Tok::Colon)) {
        next();
        if (!at(Tok::Ident)) fail("expected relationship label");
        r.labels.push_back(next().text);
        while (at(Tok::Pipe)) {
          next();
          if (at(Tok::Colon)) next();
          if (!at(Tok::Ident)) fail("expected relationship label");
          r.labels.push_back(next().text);
        }
      }
      if (at(Tok::Star)) {
        next();
        LengthRange range;
        bool haveMin = false;
        if (at(Tok::Int)) {
          range.min = next().intValue;
          haveMin = true;
        }
        if (at(Tok::DotDot)) {
          next();
          if (at(Tok::Int)) range.max = next().intValue;
        } else if (haveMin) {
          range.max = range.min;  // fixed length *k
        }
        if (range.min < 1) fail("variable-length minimum must be at least 1");
        if (range.max && *range.max < range.min) fail("variable-length range is empty");
        r.range = range;
      }
      if (at(Tok::LBrace)) r.props = parse_property_map();
      expect(Tok::RBracket, "']'");
    }
    expect(Tok::Minus, "'-'");
    if (leftArrow) {
      r.dir = RelDir::Left;
    } else if (at(Tok::Gt)) {
      next();
      r.dir = RelDir::Right;
    } else {
      r.dir = RelDir::Undirected;
    }
    r.span = {lo.lo, peek().span.lo};
    return r;
  }

  std::vector<MapEntry> parse_property_map() {
    std::vector<MapEntry> entries;
    expect(Tok::LBrace, "'{'");
    if (!at(Tok::RBrace)) {
      for (;;) {
        MapEntry e;
        if (!at(Tok::Ident)) fail("expected property key");
        e.key = next().text;
        expect(Tok::Colon, "':'");
        e.value = parse_literal();
        entries.push_back(std::move(e));
        if (!at(Tok::Comma)) break;
        next();
      }
    }
    expect(Tok::RBrace, "'}'");
    return entries;
  }

  ExprPtr parse_literal() {
    Expr e;
    e.span = peek().span;
    if (at(Tok::Int)) {
      e.kind = Expr::Kind::IntLit;
      e.intValue = next().intValue;
    } else if (at(Tok::Minus)) {
      next();
      e.kind = Expr::Kind::IntLit;
      e.intValue = -expect(Tok::Int, "integer literal").intValue;
    } else if (at(Tok::String)) {
      e.kind = Expr::Kind::StringLit;
      e.name = next().text;
    } else if (at_kw("TRUE") || at_kw("FALSE")) {
      e.kind = Expr::Kind::BoolLit;
      e.boolValue = at_kw("TRUE");
      next();
    } else {
      fail("expected literal value");
    }
    return make_expr(std::move(e));
  }

  // -- expressions ----------------------------------------------------------

  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (at_kw("OR")) {
      next();
      Expr e;
      e.kind = Expr::Kind::Or;
      e.span = lhs->span;
      e.lhs = lhs;
      e.rhs = parse_and();
      lhs = make_expr(std::move(e));
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_not();
    while (at_kw("AND")) {
      next();
      Expr e;
      e.kind = Expr::Kind::And;
      e.span = lhs->span;
      e.lhs = lhs;
      e.rhs = parse_not();
      lhs = make_expr(std::move(e));
    }
    return lhs;
  }

  ExprPtr parse_not() {
    if (at_kw("NOT")) {
      Span sp = peek().span;
      next();
      Expr e;
      e.kind = Expr::Kind::Not;
      e.span = sp;
      e.lhs = parse_not();
      return make_expr(std::move(e));
    }
    return parse_comparison();
  }

  ExprPtr parse_comparison() {
    ExprPtr lhs = parse_atom();
    if (at_kw("IS")) {
      next();
      bool negated = false;
      if (at_kw("NOT")) {
        next();
        negated = true;
      }
      expect_kw("NULL");
      Expr isn;
      isn.kind = Expr::Kind::IsNull;
      isn.span = lhs->span;
      isn.lhs = lhs;
      ExprPtr res = make_expr(std::move(isn));
      if (negated) {
        Expr n;
        n.kind = Expr::Kind::Not;
        n.span = res->span;
        n.lhs = res;
        res = make_expr(std::move(n));
      }
      return res;
    }
    CmpOp op;
    if (at(Tok::Eq)) op = CmpOp::Eq;
    else if (at(Tok::Neq)) op = CmpOp::Ne;
    else if (at(Tok::Lt)) op = CmpOp::Lt;
    else if (at(Tok::Le)) op = CmpOp::Le;
    else if (at(Tok::Gt)) op = CmpOp::Gt;
    else if (at(Tok::Ge)) op = CmpOp::Ge;
    else return lhs;
    next();
    Expr e;
    e.kind = Expr::Kind::Cmp;
    e.cmp = op;
    e.span = lhs->span;
    e.lhs = lhs;
    e.rhs = parse_atom();
    return make_expr(std::move(e));
  }

  ExprPtr parse_atom() {
    Expr e;
    e.span = peek().span;
    if (at(Tok::Int) || at(Tok::String) || at(Tok::Minus)) return parse_literal();
    if (at(Tok::Plus)) {
      next();
      return parse_literal();
    }
    if (at(Tok::LParen)) {
      next();
      ExprPtr inner = parse_expr();
      expect(Tok::RParen, "')'");
      return inner;
    }
    if (at(Tok::LBracket)) {
      next();
      e.kind = Expr::Kind::ListLit;
      if (!at(Tok::RBracket)) {
        for (;;) {
          e.args.push_back(parse_list_element());
          if (!at(Tok::Comma)) break;
          next();
        }
      }
      expect(Tok::RBracket, "']'");
      return make_expr(std::move(e));
    }
    if (at(Tok::LBrace)) {
      e.kind = Expr::Kind::MapLit;
      e.entries = parse_property_map();
      return make_expr(std::move(e));
    }
    if (at_kw("TRUE") || at_kw("FALSE")) return parse_literal();
    if (at_kw("EXISTS")) {
      next();
      expect(Tok::LBrace, "'{'");
      e.kind = Expr::Kind::Exists;
      e.existsQuery = parse_exists_body();
      expect(Tok::RBrace, "'}'");
      return make_expr(std::move(e));
    }
    if (at(Tok::Ident)) {
      if (is_reserved_word(peek().text)) fail("unexpected keyword in expression");
      std::string name = next().text;
      if (at(Tok::LParen)) {
        next();
        if (auto agg = agg_from_name(name)) {
          e.kind = Expr::Kind::AggCall;
          e.agg = *agg;
          if (at(Tok::Star)) {
            if (*agg != AggFn::Count) fail("'*' argument is only valid in COUNT");
            next();
          } else {
            e.lhs = parse_expr();
          }
          expect(Tok::RParen, "')'");
          return make_expr(std::move(e));
        }
        e.kind = Expr::Kind::FnCall;
        e.name = name;
        if (!at(Tok::RParen)) {
          for (;;) {
            e.args.push_back(parse_expr());
            if (!at(Tok::Comma)) break;
            next();
          }
        }
        expect(Tok::RParen, "')'");
        return make_expr(std::move(e));
      }
      if (at(Tok::Dot)) {
        next();
        e.kind = Expr::Kind::PropAccess;
        e.name = name;
        if (!at(Tok::Ident)) fail("expected property key");
        e.key = next().text;
        return make_expr(std::move(e));
      }
      e.kind = Expr::Kind::Var;
      e.name = name;
      return make_expr(std::move(e));
    }
    fail("expected expression");
  }

  ExprPtr parse_list_element() {
    if (at(Tok::LBrace)) {
      Expr e;
      e.span = peek().span;
      e.kind = Expr::Kind::MapLit;
      e.entries = parse_property_map();
      return make_expr(std::move(e));
    }
    return parse_literal();
  }

  SingleQueryPtr parse_exists_body() {
    auto q = std::make_shared<SingleQuery>();
    if (!(at_kw("MATCH") || at_kw("OPTIONAL"))) fail("expected MATCH inside EXISTS");
    while (at_kw("MATCH") || at_kw("OPTIONAL")) {
      q->clauses.push_back(parse_match());
    }
    return q;
  }
};

}  // namespace detail

/// Parses a query of the supported fragment. Constructs outside the fragment
/// are rejected with a Syntax error carrying the offending byte span.
inline Result<QueryAst> parse(const std::string& text) {
  auto toks = lex(text);
  if (!toks.ok()) return toks.error();
  detail::Parser p(std::move(toks.value()));
  try {
    return p.parse_query();
  } catch (const detail::ParseError& pe) {
    return pe.err;
  }
}

}  // namespace cyeq
