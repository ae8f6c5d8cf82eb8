/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cyeq/ast.hpp"
#include "cyeq/eval.hpp"
#include "cyeq/graph.hpp"

namespace cyeq {

/// Universe of the bounded graph enumeration. Relationships always carry
/// exactly one label, so relLabels must be non-empty for any relationship to
/// exist. maxTotalProps < 0 lifts the property budget (full coverage).
struct EnumBounds {
  int maxNodes = 2;
  int maxRels = 2;
  std::vector<std::string> nodeLabels;
  std::vector<std::string> relLabels;
  std::vector<std::string> keys;
  std::vector<Value> values;
  int maxTotalProps = -1;
};

namespace detail {

inline std::string rel_sort_key(const PropertyGraph::Rel& r) {
  std::string k = std::to_string(r.src) + "," + std::to_string(r.dst) + "," + r.label + ",";
  k += props_text(r.props);
  return k;
}

inline void sort_rels(PropertyGraph& g) {
  std::sort(g.rels.begin(), g.rels.end(), [](const auto& a, const auto& b) {
    return rel_sort_key(a) < rel_sort_key(b);
  });
}

/// True when the graph is its own minimum over node-id permutations (with
/// relationships re-sorted after each permutation). The enumeration emits only
/// such representatives, which makes the stream duplicate-free up to renaming.
inline bool is_canonical_representative(const PropertyGraph& g) {
  PropertyGraph sorted = g;
  sort_rels(sorted);
  std::string self = serialize_graph(sorted);
  if (self != serialize_graph(g)) return false;

  std::vector<int> perm(g.nodes.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = int(i);
  while (std::next_permutation(perm.begin(), perm.end())) {
    PropertyGraph h;
    h.nodes.resize(g.nodes.size());
    for (size_t i = 0; i < g.nodes.size(); ++i) h.nodes[perm[i]] = g.nodes[i];
    h.rels = g.rels;
    for (auto& r : h.rels) {
      r.src = perm[r.src];
      r.dst = perm[r.dst];
    }
    sort_rels(h);
    if (serialize_graph(h) < self) return false;
  }
  return true;
}

class GraphEnumerator {
 public:
  GraphEnumerator(const EnumBounds& b, const std::function<bool(const PropertyGraph&)>& fn)
      : b_(b), fn_(fn) {}

  bool run() {
    for (int n = 0; n <= b_.maxNodes; ++n) {
      if (!nodes_loop(n)) return false;
    }
    return true;
  }

 private:
  const EnumBounds& b_;
  const std::function<bool(const PropertyGraph&)>& fn_;

  bool nodes_loop(int n) {
    int maskCount = 1 << b_.nodeLabels.size();
    std::vector<int> masks(n, 0);
    return label_odometer(masks, 0, maskCount, n);
  }

  bool label_odometer(std::vector<int>& masks, size_t i, int maskCount, int n) {
    if (i == masks.size()) return rels_loop(masks, n);
    for (int m = 0; m < maskCount; ++m) {
      masks[i] = m;
      if (!label_odometer(masks, i + 1, maskCount, n)) return false;
    }
    return true;
  }

  bool rels_loop(const std::vector<int>& masks, int n) {
    int descCount = n * n * int(b_.relLabels.size());
    for (int m = 0; m <= b_.maxRels; ++m) {
      if (m > 0 && descCount == 0) break;
      std::vector<int> descs(m, 0);
      if (!desc_odometer(masks, descs, 0, 0, descCount, n)) return false;
    }
    return true;
  }

  // Non-decreasing descriptor sequences: relationships are emitted sorted, so
  // relationship-id renamings never produce duplicates.
  bool desc_odometer(const std::vector<int>& masks, std::vector<int>& descs, size_t i, int lo,
                     int descCount, int n) {
    if (i == descs.size()) return props_loop(masks, descs, n);
    for (int d = lo; d < descCount; ++d) {
      descs[i] = d;
      if (!desc_odometer(masks, descs, i + 1, d, descCount, n)) return false;
    }
    return true;
  }

  bool props_loop(const std::vector<int>& masks, const std::vector<int>& descs, int n) {
    PropertyGraph g;
    g.nodes.resize(n);
    for (int i = 0; i < n; ++i) {
      for (size_t l = 0; l < b_.nodeLabels.size(); ++l) {
        if (masks[i] & (1 << l)) g.nodes[i].labels.push_back(b_.nodeLabels[l]);
      }
    }
    int rl = int(b_.relLabels.size());
    for (int d : descs) {
      PropertyGraph::Rel r;
      r.src = d / (n * rl);
      r.dst = (d / rl) % n;
      r.label = b_.relLabels[d % rl];
      g.rels.push_back(std::move(r));
    }
    int slots = int((g.nodes.size() + g.rels.size()) * b_.keys.size());
    int budget = b_.maxTotalProps < 0 ? slots : std::min(slots, b_.maxTotalProps);
    return prop_odometer(g, 0, slots, budget);
  }

  bool prop_odometer(PropertyGraph& g, int slot, int slots, int budget) {
    if (slot == slots) {
      if (!is_canonical_representative(g)) return true;
      return fn_(g);
    }
    size_t entity = size_t(slot) / b_.keys.size();
    const std::string& key = b_.keys[size_t(slot) % b_.keys.size()];
    auto& props = entity < g.nodes.size() ? g.nodes[entity].props
                                          : g.rels[entity - g.nodes.size()].props;
    if (!prop_odometer(g, slot + 1, slots, budget)) return false;  // key absent
    if (budget > 0) {
      for (const auto& v : b_.values) {
        props.emplace_back(key, v);
        bool cont = prop_odometer(g, slot + 1, slots, budget - 1);
        props.pop_back();
        if (!cont) return false;
      }
    }
    return true;
  }
};

}  // namespace detail

/// Deterministic, duplicate-free (up to id renaming) stream of all graphs
/// within the bounds. The callback returns false to stop; the function returns
/// false if stopped early.
inline bool for_each_graph(const EnumBounds& bounds,
                           const std::function<bool(const PropertyGraph&)>& fn) {
  detail::GraphEnumerator e(bounds, fn);
  return e.run();
}

/// Upper bound on raw configurations (before canonical dedup); cheap guide for
/// choosing suite bounds.
inline double estimate_graph_count(const EnumBounds& b) {
  double total = 0;
  for (int n = 0; n <= b.maxNodes; ++n) {
    double nodeCfg = 1;
    for (int i = 0; i < n; ++i) nodeCfg *= double(1 << b.nodeLabels.size());
    int descCount = n * n * int(b.relLabels.size());
    for (int m = 0; m <= b.maxRels; ++m) {
      if (m > 0 && descCount == 0) break;
      double relCfg = 1;
      for (int i = 0; i < m; ++i) relCfg = relCfg * (descCount + i) / (i + 1);
      int slots = (n + m) * int(b.keys.size());
      int budget = b.maxTotalProps < 0 ? slots : std::min(slots, b.maxTotalProps);
      double propCfg = 0, binom = 1;
      for (int p = 0; p <= budget; ++p) {
        double term = binom;
        for (int q = 0; q < p; ++q) term *= double(b.values.size());
        propCfg += term;
        binom = binom * (slots - p) / (p + 1);
      }
      total += nodeCfg * relCfg * (propCfg > 0 ? propCfg : 1);
    }
  }
  return total;
}

/// Seeded sampler for bounds too large to exhaust.
inline PropertyGraph sample_graph(const EnumBounds& b, std::mt19937_64& rng) {
  PropertyGraph g;
  std::uniform_int_distribution<int> nDist(0, b.maxNodes);
  int n = nDist(rng);
  g.nodes.resize(n);
  for (auto& node : g.nodes) {
    for (const auto& l : b.nodeLabels) {
      if (rng() % 2) node.labels.push_back(l);
    }
  }
  if (n > 0 && !b.relLabels.empty()) {
    std::uniform_int_distribution<int> mDist(0, b.maxRels);
    int m = mDist(rng);
    for (int i = 0; i < m; ++i) {
      PropertyGraph::Rel r;
      r.src = int(rng() % n);
      r.dst = int(rng() % n);
      r.label = b.relLabels[rng() % b.relLabels.size()];
      g.rels.push_back(std::move(r));
    }
  }
  int budget = b.maxTotalProps < 0 ? 1 << 30 : b.maxTotalProps;
  if (!b.keys.empty() && !b.values.empty()) {
    for (size_t e = 0; e < g.entity_count() && budget > 0; ++e) {
      for (const auto& k : b.keys) {
        if (budget > 0 && rng() % 3 == 0) {
          auto& props = e < g.nodes.size() ? g.nodes[e].props : g.rels[e - g.nodes.size()].props;
          props.emplace_back(k, b.values[rng() % b.values.size()]);
          --budget;
        }
      }
    }
  }
  g.normalize();
  detail::sort_rels(g);
  return g;
}

// ---------------------------------------------------------------------------
// Query-derived alphabets
// ---------------------------------------------------------------------------

namespace detail {

struct AlphabetCollector {
  std::set<std::string> nodeLabels, relLabels, keys, strings;
  std::set<int64_t> ints;
  bool hasOrderCmp = false;

  void expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit: ints.insert(e.intValue); break;
      case Expr::Kind::StringLit: strings.insert(e.strValue()); break;
      case Expr::Kind::PropAccess: keys.insert(e.key); break;
      case Expr::Kind::Cmp:
        if (e.cmp != CmpOp::Eq && e.cmp != CmpOp::Ne) hasOrderCmp = true;
        break;
      default: break;
    }
    if (e.lhs) expr(*e.lhs);
    if (e.rhs) expr(*e.rhs);
    for (const auto& a : e.args) expr(*a);
    for (const auto& me : e.entries) {
      keys.insert(me.key);
      expr(*me.value);
    }
    if (e.existsQuery) {
      for (const auto& c : e.existsQuery->clauses) clause(c);
    }
  }

  void pattern(const PatternPart& p) {
    for (const auto& nd : p.nodes) {
      for (const auto& l : nd.labels) nodeLabels.insert(l);
      for (const auto& me : nd.props) {
        keys.insert(me.key);
        expr(*me.value);
      }
    }
    for (const auto& r : p.rels) {
      for (const auto& l : r.labels) relLabels.insert(l);
      for (const auto& me : r.props) {
        keys.insert(me.key);
        expr(*me.value);
      }
    }
  }

  void clause(const Clause& c) {
    switch (c.kind) {
      case Clause::Kind::Match:
        for (const auto& p : c.match.patterns) pattern(p);
        if (c.match.where) expr(*c.match.where);
        break;
      case Clause::Kind::With:
        for (const auto& it : c.with.items) expr(*it.expr);
        for (const auto& oi : c.with.orderBy) expr(*oi.expr);
        if (c.with.where) expr(*c.with.where);
        break;
      case Clause::Kind::Unwind:
        expr(*c.unwind.list);
        break;
    }
  }

  void query(const QueryAst& q) {
    for (const auto& b : q.branches) {
      for (const auto& c : b.query.clauses) clause(c);
      for (const auto& it : b.query.ret.items) expr(*it.expr);
      for (const auto& oi : b.query.ret.orderBy) expr(*oi.expr);
    }
  }
};

}  // namespace detail

/// Alphabets derived from the pair under test: mentioned labels/keys/constants
/// plus fresh elements, so counterexamples that hinge on "something else" stay
/// reachable within the bound.
inline EnumBounds derive_bounds(const QueryAst& q1, const QueryAst& q2, int maxNodes = 2,
                                int maxRels = 2, int maxTotalProps = 2) {
  detail::AlphabetCollector col;
  col.query(q1);
  col.query(q2);

  EnumBounds b;
  b.maxNodes = maxNodes;
  b.maxRels = maxRels;
  b.maxTotalProps = maxTotalProps;

  for (const auto& l : col.nodeLabels) {
    if (b.nodeLabels.size() < 3) b.nodeLabels.push_back(l);
  }
  for (const auto& l : col.relLabels) {
    if (b.relLabels.size() < 2) b.relLabels.push_back(l);
  }
  if (b.relLabels.size() < 2) b.relLabels.push_back("zz");

  for (const auto& k : col.keys) {
    if (b.keys.size() < 2) b.keys.push_back(k);
  }

  std::vector<int64_t> ints(col.ints.begin(), col.ints.end());
  if (ints.size() > 3) ints.resize(3);
  if (col.hasOrderCmp && !ints.empty()) {
    ints.push_back(ints.front() - 1);
    ints.push_back(ints.back() + 1);
    std::sort(ints.begin(), ints.end());
    ints.erase(std::unique(ints.begin(), ints.end()), ints.end());
    if (ints.size() > 4) ints.resize(4);
  }
  for (int64_t v : ints) b.values.push_back(Value::integer(v));
  size_t strBudget = col.ints.empty() ? 2 : 1;
  for (const auto& s : col.strings) {
    if (strBudget == 0) break;
    b.values.push_back(Value::str(s));
    --strBudget;
  }
  if (!col.strings.empty()) b.values.push_back(Value::str("zz"));
  if (b.values.empty()) {
    b.values.push_back(Value::integer(0));
    b.values.push_back(Value::integer(1));
  } else if (b.values.size() == 1) {
    b.values.push_back(Value::integer(col.ints.empty() ? 0 : *col.ints.rbegin() + 1));
  }
  return b;
}

// ---------------------------------------------------------------------------
// Differential check
// ---------------------------------------------------------------------------

struct DiffOutcome {
  enum class Kind { Agrees, Counterexample, Unsupported };
  Kind kind = Kind::Agrees;
  PropertyGraph witness;
  std::string reason;
  size_t graphsChecked = 0;
};

/// Evaluates both queries on every enumerated graph; returns the first graph
/// whose ordered bags differ, else AgreesUpToBound.
inline DiffOutcome differential_check(const QueryAst& q1, const QueryAst& q2,
                                      const EnumBounds& bounds) {
  DiffOutcome out;
  try {
    for_each_graph(bounds, [&](const PropertyGraph& g) {
      ++out.graphsChecked;
      ResultBag b1 = evaluate(q1, g);
      ResultBag b2 = evaluate(q2, g);
      if (!bag_equal(b1, b2)) {
        out.kind = DiffOutcome::Kind::Counterexample;
        out.witness = g;
        return false;
      }
      return true;
    });
  } catch (const EvalUnsupported& e) {
    out.kind = DiffOutcome::Kind::Unsupported;
    out.reason = e.what();
  }
  return out;
}

}  // namespace cyeq
