/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace cyeq {

/// Runtime value of the reference evaluator. Entity references carry the id
/// of a node or relationship of the graph under evaluation.
///
/// Comparison rules (used consistently by the evaluator and the prover):
///  - predicates: any operand Null => false; kind mismatch => false except
///    numeric Int/Ratio mixes;
///  - tuple identity (grouping, DISTINCT, bag comparison): structural, and
///    Null equals Null.
class Value {
 public:
  enum class Kind : uint8_t { Bool, Int, Ratio, Str, NodeRef, RelRef, List, Map, Null };

  Kind kind = Kind::Null;
  bool b = false;
  int64_t i = 0;    // Int value, Ratio numerator, entity id
  int64_t den = 1;  // Ratio denominator, always > 0
  std::string s;
  std::vector<Value> list;
  std::vector<std::pair<std::string, Value>> map;

  static Value null() { return Value{}; }
  static Value boolean(bool v) {
    Value x;
    x.kind = Kind::Bool;
    x.b = v;
    return x;
  }
  static Value integer(int64_t v) {
    Value x;
    x.kind = Kind::Int;
    x.i = v;
    return x;
  }
  static Value ratio(int64_t num, int64_t d) {
    if (d < 0) { num = -num; d = -d; }
    int64_t g = std::gcd(num < 0 ? -num : num, d);
    if (g > 1) { num /= g; d /= g; }
    if (d == 1) return integer(num);
    Value x;
    x.kind = Kind::Ratio;
    x.i = num;
    x.den = d;
    return x;
  }
  static Value str(std::string v) {
    Value x;
    x.kind = Kind::Str;
    x.s = std::move(v);
    return x;
  }
  static Value node_ref(int64_t id) {
    Value x;
    x.kind = Kind::NodeRef;
    x.i = id;
    return x;
  }
  static Value rel_ref(int64_t id) {
    Value x;
    x.kind = Kind::RelRef;
    x.i = id;
    return x;
  }
  static Value list_of(std::vector<Value> vs) {
    Value x;
    x.kind = Kind::List;
    x.list = std::move(vs);
    return x;
  }
  static Value map_of(std::vector<std::pair<std::string, Value>> entries) {
    Value x;
    x.kind = Kind::Map;
    x.map = std::move(entries);
    return x;
  }

  bool is_null() const { return kind == Kind::Null; }
  bool is_numeric() const { return kind == Kind::Int || kind == Kind::Ratio; }
};

/// Total order over values; Null sorts last. Used for canonical row sorting
/// and ORDER BY (ascending).
inline int value_compare(const Value& a, const Value& b) {
  auto rank = [](Value::Kind k) -> int {
    switch (k) {
      case Value::Kind::Bool: return 0;
      case Value::Kind::Int:
      case Value::Kind::Ratio: return 1;
      case Value::Kind::Str: return 2;
      case Value::Kind::NodeRef: return 3;
      case Value::Kind::RelRef: return 4;
      case Value::Kind::List: return 5;
      case Value::Kind::Map: return 6;
      case Value::Kind::Null: return 7;
    }
    return 8;
  };
  int ra = rank(a.kind), rb = rank(b.kind);
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (a.kind) {
    case Value::Kind::Null: return 0;
    case Value::Kind::Bool: return int(a.b) - int(b.b);
    case Value::Kind::Int:
    case Value::Kind::Ratio: {
      // a.i/a.den vs b.i/b.den with small denominators; cross-multiply in
      // __int128 to avoid overflow.
      __int128 lhs = static_cast<__int128>(a.i) * b.den;
      __int128 rhs = static_cast<__int128>(b.i) * a.den;
      if (lhs < rhs) return -1;
      if (lhs > rhs) return 1;
      return 0;
    }
    case Value::Kind::Str: return a.s.compare(b.s) < 0 ? -1 : (a.s == b.s ? 0 : 1);
    case Value::Kind::NodeRef:
    case Value::Kind::RelRef:
      return a.i < b.i ? -1 : (a.i == b.i ? 0 : 1);
    case Value::Kind::List: {
      size_t n = std::min(a.list.size(), b.list.size());
      for (size_t k = 0; k < n; ++k) {
        int c = value_compare(a.list[k], b.list[k]);
        if (c) return c;
      }
      if (a.list.size() != b.list.size()) return a.list.size() < b.list.size() ? -1 : 1;
      return 0;
    }
    case Value::Kind::Map: {
      size_t n = std::min(a.map.size(), b.map.size());
      for (size_t k = 0; k < n; ++k) {
        if (a.map[k].first != b.map[k].first) return a.map[k].first < b.map[k].first ? -1 : 1;
        int c = value_compare(a.map[k].second, b.map[k].second);
        if (c) return c;
      }
      if (a.map.size() != b.map.size()) return a.map.size() < b.map.size() ? -1 : 1;
      return 0;
    }
  }
  return 0;
}

/// Structural identity, Null == Null. Tuple/grouping semantics.
inline bool value_equal(const Value& a, const Value& b) { return value_compare(a, b) == 0; }

/// Deterministic canonical rendering (tests, uninterpreted-function results).
inline std::string value_text(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Null: return "null";
    case Value::Kind::Bool: return v.b ? "true" : "false";
    case Value::Kind::Int: return std::to_string(v.i);
    case Value::Kind::Ratio: return std::to_string(v.i) + "/" + std::to_string(v.den);
    case Value::Kind::Str: return "'" + v.s + "'";
    case Value::Kind::NodeRef: return "n" + std::to_string(v.i);
    case Value::Kind::RelRef: return "r" + std::to_string(v.i);
    case Value::Kind::List: {
      std::string s = "[";
      for (size_t i = 0; i < v.list.size(); ++i) {
        if (i) s += ",";
        s += value_text(v.list[i]);
      }
      return s + "]";
    }
    case Value::Kind::Map: {
      std::string s = "{";
      for (size_t i = 0; i < v.map.size(); ++i) {
        if (i) s += ",";
        s += v.map[i].first + ":" + value_text(v.map[i].second);
      }
      return s + "}";
    }
  }
  return "?";
}

/// Null-strict predicate comparison shared by the evaluator and the
/// interpreter: any null operand makes the predicate false; ordering applies
/// to numeric, string and boolean pairs only.
template <typename CmpOpT>
inline bool predicate_compare(CmpOpT op, const Value& l, const Value& r) {
  if (l.is_null() || r.is_null()) return false;
  bool comparableOrder =
      (l.is_numeric() && r.is_numeric()) ||
      (l.kind == r.kind && (l.kind == Value::Kind::Str || l.kind == Value::Kind::Bool));
  switch (op) {
    case CmpOpT::Eq: return value_equal(l, r);
    case CmpOpT::Ne: return !value_equal(l, r);
    case CmpOpT::Lt: return comparableOrder && value_compare(l, r) < 0;
    case CmpOpT::Le: return comparableOrder && value_compare(l, r) <= 0;
    case CmpOpT::Gt: return comparableOrder && value_compare(l, r) > 0;
    case CmpOpT::Ge: return comparableOrder && value_compare(l, r) >= 0;
  }
  return false;
}

}  // namespace cyeq
