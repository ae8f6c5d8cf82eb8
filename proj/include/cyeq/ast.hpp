/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cyeq/diagnostics.hpp"

namespace cyeq {

inline std::string to_upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

enum class AggFn { Collect, Count, Sum, Max, Min, Avg };

inline const char* to_string(AggFn f) {
  switch (f) {
    case AggFn::Collect: return "COLLECT";
    case AggFn::Count: return "COUNT";
    case AggFn::Sum: return "SUM";
    case AggFn::Max: return "MAX";
    case AggFn::Min: return "MIN";
    case AggFn::Avg: return "AVG";
  }
  return "?";
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct SingleQuery;
using SingleQueryPtr = std::shared_ptr<const SingleQuery>;

/// One `key: literal` entry of a map literal / pattern property map.
struct MapEntry {
  std::string key;
  ExprPtr value;
};

struct Expr {
  enum class Kind {
    IntLit,      // intValue
    StringLit,   // strValue
    BoolLit,     // boolValue
    Var,         // name
    PropAccess,  // name.key
    Cmp,         // lhs op rhs
    And,         // lhs, rhs
    Or,          // lhs, rhs
    Not,         // lhs
    IsNull,      // lhs
    FnCall,      // name(args) -- uninterpreted, also id()
    AggCall,     // agg(lhs) or COUNT(*) when lhs is null
    ListLit,     // args
    MapLit,      // entries
    Exists,      // existsQuery
  };

  Kind kind;
  Span span;

  int64_t intValue = 0;
  bool boolValue = false;
  std::string name;  // variable, property key, function name
  std::string key;
  CmpOp cmp = CmpOp::Eq;
  AggFn agg = AggFn::Count;
  ExprPtr lhs, rhs;
  std::vector<ExprPtr> args;
  std::vector<MapEntry> entries;
  SingleQueryPtr existsQuery;  // EXISTS { MATCH ... [WHERE ...] }

  const std::string& strValue() const { return name; }
};

inline ExprPtr make_expr(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

// ---------------------------------------------------------------------------
// Patterns
// ---------------------------------------------------------------------------

enum class RelDir { Right, Left, Undirected };

/// Length range of a variable-length relationship. max absent means unbounded.
struct LengthRange {
  int64_t min = 1;
  std::optional<int64_t> max;
};

struct NodePattern {
  std::optional<std::string> var;
  std::vector<std::string> labels;
  std::vector<MapEntry> props;
  Span span;
};

struct RelPattern {
  std::optional<std::string> var;
  std::vector<std::string> labels;  // OR-combined alternatives
  std::vector<MapEntry> props;
  RelDir dir = RelDir::Right;
  std::optional<LengthRange> range;
  Span span;
};

/// Alternating node/relationship chain: nodes.size() == rels.size() + 1.
struct PatternPart {
  std::vector<NodePattern> nodes;
  std::vector<RelPattern> rels;
};

// ---------------------------------------------------------------------------
// Clauses
// ---------------------------------------------------------------------------

struct ProjectionItem {
  ExprPtr expr;
  std::optional<std::string> alias;
};

struct OrderItem {
  ExprPtr expr;
  bool ascending = true;
};

struct MatchClause {
  bool optional = false;
  std::vector<PatternPart> patterns;
  ExprPtr where;  // may be null
};

struct WithClause {
  bool distinct = false;
  std::vector<ProjectionItem> items;
  std::vector<OrderItem> orderBy;
  std::optional<int64_t> skip;
  std::optional<int64_t> limit;
  ExprPtr where;  // may be null
};

struct UnwindClause {
  ExprPtr list;
  std::string alias;
  Span span;
};

struct Clause {
  enum class Kind { Match, With, Unwind };
  Kind kind;
  MatchClause match;
  WithClause with;
  UnwindClause unwind;
};

struct ReturnClause {
  bool distinct = false;
  bool star = false;
  std::vector<ProjectionItem> items;  // empty when star
  std::vector<OrderItem> orderBy;
  std::optional<int64_t> skip;
  std::optional<int64_t> limit;
};

struct SingleQuery {
  std::vector<Clause> clauses;
  ReturnClause ret;
};

/// Top-level query: UNION [ALL] chain over single queries, kept left-to-right.
struct QueryAst {
  struct Branch {
    SingleQuery query;
    bool unionAll = true;  // how this branch combines with the previous one
  };
  std::vector<Branch> branches;  // branches[0].unionAll is ignored

  const SingleQuery& only() const { return branches.front().query; }
};

}  // namespace cyeq
