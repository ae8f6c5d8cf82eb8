/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <chrono>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cyeq/build.hpp"
#include "cyeq/enumerate.hpp"
#include "cyeq/eval.hpp"
#include "cyeq/normalize.hpp"
#include "cyeq/parser.hpp"
#include "cyeq/simplify.hpp"
#include "cyeq/smt.hpp"
#include "cyeq/solver.hpp"

namespace cyeq {

struct DecideConfig {
  std::string solverCommand;  // empty: CYEQ_SOLVER env, then "z3 -in"
  int timeoutMs = 10000;
  int oracleMaxNodes = 2;
  int oracleMaxRels = 2;
  int oracleMaxProps = 2;
  std::string dumpSmtDir;
  std::string dumpTag;
  bool verboseNormalize = false;
  std::ostream* diagnostics = nullptr;
};

struct Verdict {
  enum class Outcome { Equivalent, NotEquivalent, Unknown };
  Outcome outcome = Outcome::Unknown;
  std::optional<PropertyGraph> witness;
  std::string reason;
  int64_t latencyMs = 0;
};

inline const char* to_string(Verdict::Outcome o) {
  switch (o) {
    case Verdict::Outcome::Equivalent: return "Equivalent";
    case Verdict::Outcome::NotEquivalent: return "NotEquivalent";
    case Verdict::Outcome::Unknown: return "Unknown";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Column mapping
// ---------------------------------------------------------------------------

struct ColumnMapping {
  bool emptyObligation = false;
  bool relaxed = false;
  // candidate[j] = side-1 column paired with side-2 item j
  std::vector<std::vector<int>> candidates;
};

namespace ddetail {

struct ColDesc {
  std::string typed;
  std::string relaxedClass;
};

inline std::vector<ColDesc> column_descriptors(const SingleQuery& q) {
  Scope scope = scope_at_return(q);
  std::vector<ColDesc> out;
  for (const auto& item : q.ret.items) {
    const Expr& e = *item.expr;
    ColDesc d;
    auto kind_text = [&](const std::string& var) -> std::string {
      auto it = scope.find(var);
      if (it == scope.end()) return "value";
      switch (it->second) {
        case VarKind::NodeVar: return "node";
        case VarKind::RelVar: return "rel";
        case VarKind::PathVar: return "path";
        case VarKind::Value: return "value";
      }
      return "value";
    };
    switch (e.kind) {
      case Expr::Kind::Var: {
        std::string k = kind_text(e.name);
        d.typed = "var:" + k;
        d.relaxedClass = (k == "node" || k == "rel") ? k : "value";
        break;
      }
      case Expr::Kind::PropAccess:
        d.typed = "prop:" + kind_text(e.name) + ":" + e.key;
        d.relaxedClass = "value";
        break;
      case Expr::Kind::AggCall:
        d.typed = "agg:" + std::string(to_string(e.agg)) + ":" +
                  (e.lhs ? print(*e.lhs) : std::string("*"));
        d.relaxedClass = "value";
        break;
      default:
        d.typed = "expr:" + print(e);
        d.relaxedClass = "value";
        break;
    }
    out.push_back(std::move(d));
  }
  return out;
}

inline void enumerate_bijections(const std::vector<std::string>& side1,
                                 const std::vector<std::string>& side2,
                                 std::vector<std::vector<int>>& out, size_t cap) {
  size_t n = side2.size();
  std::vector<int> current(n, -1);
  std::vector<bool> used(n, false);
  std::function<void(size_t)> rec = [&](size_t j) {
    if (out.size() >= cap) return;
    if (j == n) {
      out.push_back(current);
      return;
    }
    for (size_t i = 0; i < n; ++i) {
      if (used[i] || side2[j] != side1[i]) continue;
      used[i] = true;
      current[j] = int(i);
      rec(j + 1);
      used[i] = false;
    }
  };
  rec(0);
}

}  // namespace ddetail

/// Pairs the returned columns of the two (normalized) queries by type; when
/// the typed pairing fails the same-name/same-shape conditions are dropped.
/// No pairings at all means the queries can only be equivalent if both are
/// always empty.
inline ColumnMapping map_columns(const SingleQuery& q1, const SingleQuery& q2) {
  ColumnMapping m;
  auto d1 = ddetail::column_descriptors(q1);
  auto d2 = ddetail::column_descriptors(q2);
  if (d1.size() != d2.size()) {
    m.emptyObligation = true;
    return m;
  }
  const size_t cap = 24;
  std::vector<std::string> t1, t2;
  for (const auto& d : d1) t1.push_back(d.typed);
  for (const auto& d : d2) t2.push_back(d.typed);
  ddetail::enumerate_bijections(t1, t2, m.candidates, cap);
  if (!m.candidates.empty()) return m;

  std::vector<std::string> r1, r2;
  for (const auto& d : d1) r1.push_back(d.relaxedClass);
  for (const auto& d : d2) r2.push_back(d.relaxedClass);
  ddetail::enumerate_bijections(r1, r2, m.candidates, cap);
  m.relaxed = true;
  if (m.candidates.empty()) m.emptyObligation = true;
  return m;
}

// ---------------------------------------------------------------------------
// Divide-and-conquer segmentation
// ---------------------------------------------------------------------------

struct Segments {
  std::vector<QueryAst> segments;
  std::string blocked;  // non-empty when segmentation is not possible
};

/// Splits a normalized query at each intermediate ORDER BY...LIMIT/SKIP
/// fragment; an intermediate ORDER BY without truncation is dropped.
inline Segments split_segments(const QueryAst& ast) {
  Segments out;
  bool hasInnerTruncation = false;
  for (const auto& b : ast.branches) {
    for (const auto& c : b.query.clauses) {
      if (c.kind == Clause::Kind::With && (c.with.limit || c.with.skip)) {
        hasInnerTruncation = true;
      }
    }
  }
  if (!hasInnerTruncation) {
    QueryAst cleaned = ast;
    for (auto& b : cleaned.branches) {
      for (auto& c : b.query.clauses) {
        if (c.kind == Clause::Kind::With && !c.with.limit && !c.with.skip) {
          c.with.orderBy.clear();  // order without truncation has no effect
        }
      }
    }
    out.segments.push_back(std::move(cleaned));
    return out;
  }
  if (ast.branches.size() > 1) {
    out.blocked = "ORDER BY/LIMIT segmentation inside UNION is unsupported";
    return out;
  }

  const SingleQuery& q = ast.only();
  std::vector<Clause> prefix;
  std::vector<Clause> pending = q.clauses;
  Scope scope;
  detail::SemanticChecker checker;

  for (size_t i = 0; i < pending.size(); ++i) {
    Clause c = pending[i];
    if (c.kind == Clause::Kind::With && !c.with.limit && !c.with.skip) {
      c.with.orderBy.clear();
    }
    if (c.kind == Clause::Kind::With && (c.with.limit || c.with.skip)) {
      // segment boundary: the truncated intermediate result
      std::vector<std::string> piped;
      for (const auto& item : c.with.items) {
        if (item.expr->kind != Expr::Kind::Var) {
          out.blocked = "segment boundary projects an expression";
          return out;
        }
        auto it = scope.find(item.expr->name);
        if (it == scope.end() || it->second != VarKind::NodeVar) {
          out.blocked = "segment boundary pipes a non-node variable";
          return out;
        }
        piped.push_back(item.alias ? *item.alias : item.expr->name);
      }
      SingleQuery seg;
      seg.clauses = prefix;
      seg.ret.distinct = c.with.distinct;
      for (const auto& item : c.with.items) {
        ProjectionItem copy;
        copy.expr = item.expr;
        seg.ret.items.push_back(std::move(copy));
      }
      seg.ret.orderBy = c.with.orderBy;
      seg.ret.skip = c.with.skip;
      seg.ret.limit = c.with.limit;
      QueryAst segAst;
      segAst.branches.push_back({std::move(seg), true});
      out.segments.push_back(std::move(segAst));

      // remainder re-binds the piped variables as fresh node scans
      prefix.clear();
      scope.clear();
      checker = detail::SemanticChecker{};
      for (size_t p = 0; p < piped.size(); ++p) {
        Clause rebind;
        rebind.kind = Clause::Kind::Match;
        PatternPart part;
        NodePattern node;
        node.var = piped[p];
        part.nodes.push_back(std::move(node));
        rebind.match.patterns.push_back(std::move(part));
        if (p + 1 == piped.size() && c.with.where) rebind.match.where = c.with.where;
        checker.check_clause(rebind, scope);
        prefix.push_back(std::move(rebind));
      }
      continue;
    }
    checker.check_clause(c, scope);
    prefix.push_back(std::move(c));
  }

  SingleQuery last;
  last.clauses = std::move(prefix);
  last.ret = q.ret;
  QueryAst lastAst;
  lastAst.branches.push_back({std::move(last), true});
  out.segments.push_back(std::move(lastAst));
  return out;
}

// ---------------------------------------------------------------------------
// decide
// ---------------------------------------------------------------------------

namespace ddetail {

struct SegmentOutcome {
  enum class Kind { Proven, Satisfiable, Inconclusive };
  Kind kind = Kind::Inconclusive;
  std::string reason;
};

struct SolveContext {
  std::string solverCommand;
  int timeoutMs;
  std::string dumpDir;
  std::string dumpTag;
  int dumpCounter = 0;

  SolverResult::Kind check(const SmtScript& script) {
    if (!dumpDir.empty()) {
      std::ofstream f(dumpDir + "/" + dumpTag + "_" + std::to_string(dumpCounter++) + ".smt2");
      f << script.text;
    }
    if (script.trivialUnsat) return SolverResult::Kind::Unsat;
    SolverResult r = run_solver(solverCommand, script.text, timeoutMs);
    return r.kind;
  }
};

inline SegmentOutcome decide_segment(const QueryAst& s1, const QueryAst& s2, SolveContext& ctx) {
  SegmentOutcome out;
  ColumnMapping mapping = map_columns(s1.only(), s2.only());

  if (mapping.emptyObligation) {
    // Provable only when both sides return empty results on every graph.
    CompiledQuery g1 = build(s1);
    CompiledQuery g2 = build(s2);
    SolverResult::Kind k1 = ctx.check(nonempty_obligation(simplify(g1.g)));
    SolverResult::Kind k2 = ctx.check(nonempty_obligation(simplify(g2.g)));
    if (k1 == SolverResult::Kind::Unsat && k2 == SolverResult::Kind::Unsat) {
      out.kind = SegmentOutcome::Kind::Proven;
    } else if (k1 == SolverResult::Kind::Unknown || k2 == SolverResult::Kind::Unknown) {
      out.kind = SegmentOutcome::Kind::Inconclusive;
      out.reason = "solver returned unknown on the empty-result obligation";
    } else {
      out.kind = SegmentOutcome::Kind::Satisfiable;
      out.reason = "returned columns cannot be paired";
    }
    return out;
  }

  GExprPtr g1 = simplify(build(s1).g);
  bool sawSat = false, sawUnknown = false;
  for (const auto& candidate : mapping.candidates) {
    GExprPtr g2 = simplify(build(s2, candidate).g);
    SmtScript script = eliminate_summations(g1, g2);
    switch (ctx.check(script)) {
      case SolverResult::Kind::Unsat:
        out.kind = SegmentOutcome::Kind::Proven;
        return out;
      case SolverResult::Kind::Sat:
        sawSat = true;
        break;
      case SolverResult::Kind::Unknown:
        sawUnknown = true;
        break;
    }
  }
  if (sawSat) {
    out.kind = SegmentOutcome::Kind::Satisfiable;
    out.reason = "negated equivalence obligation is satisfiable";
  } else {
    out.kind = SegmentOutcome::Kind::Inconclusive;
    out.reason = sawUnknown ? "solver returned unknown" : "no column pairing";
  }
  return out;
}

}  // namespace ddetail

/// Full pipeline: frontend, normalization, segmentation, compilation,
/// summation elimination, solving, and the oracle confirmation gate for
/// satisfiable obligations.
inline Verdict decide(const std::string& q1, const std::string& q2, const DecideConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  Verdict verdict;
  auto finish = [&](Verdict v) {
    v.latencyMs = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    return v;
  };
  auto unknown = [&](const std::string& reason) {
    Verdict v;
    v.outcome = Verdict::Outcome::Unknown;
    v.reason = reason;
    return finish(v);
  };

  auto p1 = parse(q1);
  if (!p1.ok()) return unknown("frontend: " + p1.error().message);
  auto p2 = parse(q2);
  if (!p2.ok()) return unknown("frontend: " + p2.error().message);
  if (auto err = semantic_check(p1.value())) return unknown("frontend: " + err->message);
  if (auto err = semantic_check(p2.value())) return unknown("frontend: " + err->message);

  NormalizedAst n1, n2;
  try {
    n1 = normalize(p1.value());
    n2 = normalize(p2.value());
  } catch (const NormalizationBudgetExceeded& e) {
    return unknown(e.what());
  }
  if (cfg.verboseNormalize && cfg.diagnostics) {
    *cfg.diagnostics << trace_to_string(n1.trace) << trace_to_string(n2.trace);
  }

  Segments s1 = split_segments(n1.ast);
  Segments s2 = split_segments(n2.ast);
  if (!s1.blocked.empty()) return unknown(s1.blocked);
  if (!s2.blocked.empty()) return unknown(s2.blocked);
  if (s1.segments.size() != s2.segments.size()) return unknown("segment count mismatch");

  ddetail::SolveContext ctx{default_solver_command(cfg.solverCommand), cfg.timeoutMs,
                            cfg.dumpSmtDir, cfg.dumpTag.empty() ? "pair" : cfg.dumpTag};

  bool anySat = false;
  std::string inconclusive;
  try {
    for (size_t i = 0; i < s1.segments.size(); ++i) {
      ddetail::SegmentOutcome seg = ddetail::decide_segment(s1.segments[i], s2.segments[i], ctx);
      switch (seg.kind) {
        case ddetail::SegmentOutcome::Kind::Proven:
          break;
        case ddetail::SegmentOutcome::Kind::Satisfiable:
          anySat = true;
          break;
        case ddetail::SegmentOutcome::Kind::Inconclusive:
          if (inconclusive.empty()) inconclusive = seg.reason;
          break;
      }
      if (anySat || !inconclusive.empty()) break;
    }
  } catch (const UnsupportedFeature& e) {
    return unknown(std::string("unsupported: ") + e.what());
  } catch (const StarEliminationIncomplete& e) {
    return unknown(std::string("star elimination incomplete: ") + e.what());
  }

  if (!inconclusive.empty()) return unknown(inconclusive);

  if (!anySat) {
    verdict.outcome = Verdict::Outcome::Equivalent;
    return finish(verdict);
  }

  // Solver found a model: inconclusive on its own (uninterpreted symbols admit
  // spurious models), so ask the oracle for a concrete witness.
  EnumBounds bounds = derive_bounds(p1.value(), p2.value(), cfg.oracleMaxNodes,
                                    cfg.oracleMaxRels, cfg.oracleMaxProps);
  DiffOutcome diff = differential_check(p1.value(), p2.value(), bounds);
  if (diff.kind == DiffOutcome::Kind::Counterexample) {
    try {
      // never-wrong-negative: re-run both queries on the witness
      ResultBag b1 = evaluate(p1.value(), diff.witness);
      ResultBag b2 = evaluate(p2.value(), diff.witness);
      if (bag_equal(b1, b2)) return unknown("internal: witness failed re-verification");
    } catch (const EvalUnsupported& e) {
      return unknown(std::string("oracle: ") + e.what());
    }
    verdict.outcome = Verdict::Outcome::NotEquivalent;
    verdict.witness = diff.witness;
    verdict.reason = "oracle counterexample on " + std::to_string(diff.graphsChecked) +
                     " enumerated graphs";
    return finish(verdict);
  }
  if (diff.kind == DiffOutcome::Kind::Unsupported) {
    return unknown("satisfiable, oracle unsupported: " + diff.reason);
  }
  return unknown("satisfiable, but no counterexample within the oracle bound");
}

}  // namespace cyeq
