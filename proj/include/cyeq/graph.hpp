/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cyeq/value.hpp"

namespace cyeq {

/// Finite property graph: directed relationships, label sets on nodes, exactly
/// one label per relationship, partial (entity, key) -> constant property map.
/// Property values are integers or strings.
struct PropertyGraph {
  struct Node {
    std::vector<std::string> labels;                      // sorted
    std::vector<std::pair<std::string, Value>> props;     // sorted by key
  };
  struct Rel {
    int src = 0;  // node the relationship leaves
    int dst = 0;  // node the relationship enters
    std::string label;
    std::vector<std::pair<std::string, Value>> props;     // sorted by key
  };

  std::vector<Node> nodes;  // node id = index
  std::vector<Rel> rels;    // relationship id = index

  size_t entity_count() const { return nodes.size() + rels.size(); }

  bool node_has_label(int id, const std::string& label) const {
    const auto& ls = nodes[id].labels;
    return std::find(ls.begin(), ls.end(), label) != ls.end();
  }

  static std::optional<Value> lookup(const std::vector<std::pair<std::string, Value>>& props,
                                     const std::string& key) {
    for (const auto& [k, v] : props) {
      if (k == key) return v;
    }
    return std::nullopt;
  }

  std::optional<Value> node_prop(int id, const std::string& key) const {
    return lookup(nodes[id].props, key);
  }
  std::optional<Value> rel_prop(int id, const std::string& key) const {
    return lookup(rels[id].props, key);
  }

  void normalize() {
    for (auto& n : nodes) {
      std::sort(n.labels.begin(), n.labels.end());
      std::sort(n.props.begin(), n.props.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    for (auto& r : rels) {
      std::sort(r.props.begin(), r.props.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
    }
  }
};

namespace detail {

inline std::string graph_value_text(const Value& v) {
  if (v.kind == Value::Kind::Int) return std::to_string(v.i);
  if (v.kind == Value::Kind::Str) {
    std::string out = "'";
    for (char c : v.s) {
      if (c == '\\' || c == '\'') out.push_back('\\');
      out.push_back(c);
    }
    out.push_back('\'');
    return out;
  }
  throw std::runtime_error("graph properties hold integers or strings only");
}

inline std::string props_text(const std::vector<std::pair<std::string, Value>>& props) {
  std::string out;
  for (size_t i = 0; i < props.size(); ++i) {
    if (i) out.push_back(',');
    out += props[i].first;
    out.push_back('=');
    out += graph_value_text(props[i].second);
  }
  return out;
}

}  // namespace detail

/// Line-oriented serialization used for counterexample reporting and fixtures:
///   node <id> labels=<a,b> props=<k=v,...>
///   rel <id> <src> <dst> label=<a> props=<...>
/// Round-trips bit-exactly for normalized graphs.
inline std::string serialize_graph(const PropertyGraph& g) {
  std::ostringstream os;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    std::string labels;
    for (size_t j = 0; j < g.nodes[i].labels.size(); ++j) {
      if (j) labels.push_back(',');
      labels += g.nodes[i].labels[j];
    }
    os << "node " << i << " labels=" << labels << " props=" << detail::props_text(g.nodes[i].props)
       << "\n";
  }
  for (size_t i = 0; i < g.rels.size(); ++i) {
    const auto& r = g.rels[i];
    os << "rel " << i << " " << r.src << " " << r.dst << " label=" << r.label
       << " props=" << detail::props_text(r.props) << "\n";
  }
  return os.str();
}

namespace detail {

inline std::vector<std::pair<std::string, Value>> parse_props_text(const std::string& text) {
  std::vector<std::pair<std::string, Value>> props;
  size_t i = 0;
  while (i < text.size()) {
    size_t eq = text.find('=', i);
    if (eq == std::string::npos) throw std::runtime_error("malformed props: " + text);
    std::string key = text.substr(i, eq - i);
    i = eq + 1;
    if (i < text.size() && text[i] == '\'') {
      std::string val;
      ++i;
      while (i < text.size() && text[i] != '\'') {
        if (text[i] == '\\' && i + 1 < text.size()) ++i;
        val.push_back(text[i]);
        ++i;
      }
      if (i >= text.size()) throw std::runtime_error("unterminated string in props");
      ++i;  // closing quote
      props.emplace_back(key, Value::str(val));
    } else {
      size_t j = i;
      while (j < text.size() && text[j] != ',') ++j;
      props.emplace_back(key, Value::integer(std::stoll(text.substr(i, j - i))));
      i = j;
    }
    if (i < text.size() && text[i] == ',') ++i;
  }
  return props;
}

}  // namespace detail

inline PropertyGraph parse_graph(const std::string& text) {
  PropertyGraph g;
  std::istringstream is(text);
  std::string line;
  auto field_after = [](const std::string& s, const std::string& tag) {
    size_t pos = s.find(tag);
    if (pos == std::string::npos) throw std::runtime_error("missing field " + tag);
    pos += tag.size();
    size_t end = pos;
    bool inStr = false;
    while (end < s.size()) {
      char c = s[end];
      if (c == '\'' ) inStr = !inStr;
      if (c == '\\' && inStr) { end += 2; continue; }
      if (c == ' ' && !inStr) break;
      ++end;
    }
    return s.substr(pos, end - pos);
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "node") {
      int id;
      ls >> id;
      PropertyGraph::Node n;
      std::string labels = field_after(line, "labels=");
      if (!labels.empty()) {
        std::istringstream lab(labels);
        std::string one;
        while (std::getline(lab, one, ',')) n.labels.push_back(one);
      }
      n.props = detail::parse_props_text(field_after(line, "props="));
      if (int(g.nodes.size()) != id) throw std::runtime_error("node ids must be dense");
      g.nodes.push_back(std::move(n));
    } else if (kind == "rel") {
      int id, src, dst;
      ls >> id >> src >> dst;
      PropertyGraph::Rel r;
      r.src = src;
      r.dst = dst;
      r.label = field_after(line, "label=");
      r.props = detail::parse_props_text(field_after(line, "props="));
      if (int(g.rels.size()) != id) throw std::runtime_error("rel ids must be dense");
      g.rels.push_back(std::move(r));
    } else {
      throw std::runtime_error("unknown graph line: " + line);
    }
  }
  g.normalize();
  return g;
}

}  // namespace cyeq
