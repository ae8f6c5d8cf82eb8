/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "cyeq/enumerate.hpp"
#include "cyeq/eval.hpp"
#include "cyeq/parser.hpp"

using namespace cyeq;

namespace {

QueryAst q(const std::string& text) {
  auto r = parse(text);
  INFO(text);
  if (!r.ok()) INFO(r.error().message);
  REQUIRE(r.ok());
  return r.value();
}

PropertyGraph book_graph() {
  // Person(Alice) -READ-> Book(HP) <-WRITE- Person(J. K. Rowling)
  PropertyGraph g;
  g.nodes.resize(3);
  g.nodes[0].labels = {"Person"};
  g.nodes[0].props = {{"name", Value::str("Alice")}};
  g.nodes[1].labels = {"Book"};
  g.nodes[2].labels = {"Person"};
  g.nodes[2].props = {{"name", Value::str("J. K. Rowling")}};
  g.rels.push_back({0, 1, "READ", {}});
  g.rels.push_back({2, 1, "WRITE", {}});
  return g;
}

PropertyGraph self_loop() {
  PropertyGraph g;
  g.nodes.resize(1);
  g.rels.push_back({0, 0, "T", {}});
  return g;
}

}  // namespace

TEST_CASE("book-author query returns the writer's name") {
  auto bag = evaluate(q("MATCH (reader:Person)-[:READ]->(book:Book)<-[:WRITE]-(writer) "
                        "WHERE reader.name = 'Alice' RETURN writer.name"),
                      book_graph());
  REQUIRE(bag.rows.size() == 1);
  REQUIRE(bag.arity == 1);
  CHECK(value_equal(bag.rows[0][0], Value::str("J. K. Rowling")));
}

TEST_CASE("any query on the empty graph yields the empty bag") {
  PropertyGraph empty;
  CHECK(evaluate(q("MATCH (n) RETURN n"), empty).rows.empty());
  CHECK(evaluate(q("MATCH (a)-[*]->(b) RETURN a"), empty).rows.empty());
}

TEST_CASE("relationship injectivity within one MATCH") {
  auto g = self_loop();
  CHECK(evaluate(q("MATCH ()-[r1]->()-[r2]->() RETURN 1"), g).rows.empty());
  // Split across MATCH clauses the same relationship may repeat.
  auto bag = evaluate(q("MATCH ()-[r1]->() MATCH ()-[r2]->() RETURN 1"), g);
  CHECK(bag.rows.size() == 1);
}

TEST_CASE("same variable reuse is not an injectivity violation") {
  auto g = self_loop();
  auto bag = evaluate(q("MATCH (a)-[r]->(b), (a)-[r]->(b) RETURN a"), g);
  CHECK(bag.rows.size() == 1);
}

TEST_CASE("label respect") {
  PropertyGraph g;
  g.nodes.resize(2);
  g.nodes[1].labels = {"Person"};
  auto bag = evaluate(q("MATCH (n:Person) RETURN n"), g);
  REQUIRE(bag.rows.size() == 1);
  CHECK(bag.rows[0][0].i == 1);
  CHECK(evaluate(q("MATCH (n) RETURN n"), g).rows.size() == 2);
}

TEST_CASE("multiplicities are preserved under bag semantics") {
  PropertyGraph g;
  g.nodes.resize(3);
  g.rels.push_back({0, 1, "T", {}});
  g.rels.push_back({0, 2, "T", {}});
  auto bag = evaluate(q("MATCH (n)-[]->() RETURN n"), g);
  REQUIRE(bag.rows.size() == 2);
  CHECK(value_equal(bag.rows[0][0], bag.rows[1][0]));
}

TEST_CASE("undirected pattern matches both orientations, self-loop once") {
  PropertyGraph g;
  g.nodes.resize(2);
  g.rels.push_back({0, 1, "T", {}});
  CHECK(evaluate(q("MATCH (a)-[]-(b) RETURN a"), g).rows.size() == 2);
  CHECK(evaluate(q("MATCH (a)-[]-(b) RETURN a"), self_loop()).rows.size() == 1);
}

TEST_CASE("optional match fills unmatched variables with null") {
  PropertyGraph g;
  g.nodes.resize(2);
  g.nodes[0].labels = {"A"};
  g.rels.push_back({0, 1, "T", {}});
  auto bag = evaluate(q("MATCH (n) OPTIONAL MATCH (n)-[:MISSING]->(m) RETURN n, m"), g);
  REQUIRE(bag.rows.size() == 2);
  CHECK(bag.rows[0][1].is_null());
  CHECK(bag.rows[1][1].is_null());

  auto bag2 = evaluate(q("MATCH (n:A) OPTIONAL MATCH (n)-[:T]->(m) RETURN n, m"), g);
  REQUIRE(bag2.rows.size() == 1);
  CHECK(bag2.rows[0][1].kind == Value::Kind::NodeRef);
}

TEST_CASE("where is null-strict") {
  PropertyGraph g;
  g.nodes.resize(2);
  g.nodes[0].props = {{"age", Value::integer(7)}};
  CHECK(evaluate(q("MATCH (n) WHERE n.age = 7 RETURN n"), g).rows.size() == 1);
  CHECK(evaluate(q("MATCH (n) WHERE n.age <> 7 RETURN n"), g).rows.empty());
  CHECK(evaluate(q("MATCH (n) WHERE n.age = n.age RETURN n"), g).rows.size() == 1);
  CHECK(evaluate(q("MATCH (n) WHERE n.age IS NULL RETURN n"), g).rows.size() == 1);
}

TEST_CASE("aggregates with implicit grouping") {
  PropertyGraph g;
  g.nodes.resize(3);
  g.nodes[0].props = {{"dept", Value::str("a")}, {"age", Value::integer(1)}};
  g.nodes[1].props = {{"dept", Value::str("a")}, {"age", Value::integer(2)}};
  g.nodes[2].props = {{"dept", Value::str("b")}, {"age", Value::integer(5)}};

  auto grouped = evaluate(q("MATCH (n) RETURN n.dept, SUM(n.age)"), g);
  REQUIRE(grouped.rows.size() == 2);

  auto total = evaluate(q("MATCH (n) RETURN SUM(n.age)"), g);
  REQUIRE(total.rows.size() == 1);
  CHECK(value_equal(total.rows[0][0], Value::integer(8)));

  auto counts = evaluate(q("MATCH (n) RETURN COUNT(*)"), g);
  CHECK(value_equal(counts.rows[0][0], Value::integer(3)));

  // Aggregates over the empty input: one row without keys, none with keys.
  PropertyGraph empty;
  auto emptySum = evaluate(q("MATCH (n) RETURN SUM(n.age)"), empty);
  REQUIRE(emptySum.rows.size() == 1);
  CHECK(value_equal(emptySum.rows[0][0], Value::integer(0)));
  auto emptyMin = evaluate(q("MATCH (n) RETURN MIN(n.age)"), empty);
  CHECK(emptyMin.rows[0][0].is_null());
  CHECK(evaluate(q("MATCH (n) RETURN n.dept, SUM(n.age)"), empty).rows.empty());

  auto avg = evaluate(q("MATCH (n) RETURN AVG(n.age)"), g);
  CHECK(value_equal(avg.rows[0][0], Value::ratio(8, 3)));
}

TEST_CASE("order by, skip, limit") {
  PropertyGraph g;
  g.nodes.resize(3);
  g.nodes[0].props = {{"p", Value::integer(2)}};
  g.nodes[1].props = {{"p", Value::integer(1)}};
  g.nodes[2].props = {{"p", Value::integer(3)}};
  auto bag = evaluate(q("MATCH (n) RETURN n.p ORDER BY n.p DESC"), g);
  REQUIRE(bag.ordered);
  REQUIRE(bag.rows.size() == 3);
  CHECK(bag.rows[0][0].i == 3);
  CHECK(bag.rows[2][0].i == 1);

  auto sliced = evaluate(q("MATCH (n) RETURN n.p ORDER BY n.p SKIP 1 LIMIT 1"), g);
  REQUIRE(sliced.rows.size() == 1);
  CHECK(sliced.rows[0][0].i == 2);

  // null sorts last under ASC
  PropertyGraph g2;
  g2.nodes.resize(2);
  g2.nodes[0].props = {{"p", Value::integer(1)}};
  auto withNull = evaluate(q("MATCH (n) RETURN n.p ORDER BY n.p"), g2);
  CHECK(withNull.rows[1][0].is_null());
}

TEST_CASE("with pipeline: distinct, order, limit, where") {
  PropertyGraph g;
  g.nodes.resize(3);
  g.nodes[0].props = {{"p1", Value::integer(3)}};
  g.nodes[1].props = {{"p1", Value::integer(1)}};
  g.nodes[2].props = {{"p1", Value::integer(2)}};
  g.rels.push_back({1, 2, "T", {}});

  auto bag = evaluate(q("MATCH (n1) WITH n1 ORDER BY n1.p1 LIMIT 1 "
                        "MATCH (n1)-[]->(n2) RETURN n2"),
                      g);
  REQUIRE(bag.rows.size() == 1);
  CHECK(bag.rows[0][0].i == 2);

  auto dedup = evaluate(q("MATCH (n)-[]->() WITH DISTINCT n.p1 AS v RETURN v"), g);
  CHECK(dedup.rows.size() == 1);

  auto filtered = evaluate(q("MATCH (n) WITH n.p1 AS v WHERE v > 1 RETURN v"), g);
  CHECK(filtered.rows.size() == 2);
}

TEST_CASE("unwind over literal lists and maps") {
  PropertyGraph g;
  g.nodes.resize(1);
  auto bag = evaluate(q("MATCH (n) UNWIND [1, 2, 1] AS x RETURN x"), g);
  CHECK(bag.rows.size() == 3);

  auto maps = evaluate(q("WITH [{c1: 0, c2: 1}, {c1: 2, c2: 3}] AS tmp "
                         "UNWIND tmp AS row RETURN row.c1, row.c2"),
                       g);
  REQUIRE(maps.rows.size() == 2);
  CHECK(maps.rows[0][0].i == 0);
  CHECK(maps.rows[1][1].i == 3);
}

TEST_CASE("exists subquery") {
  PropertyGraph g;
  g.nodes.resize(2);
  g.rels.push_back({0, 1, "T", {}});
  auto bag = evaluate(q("MATCH (n) WHERE EXISTS { MATCH (n)-[]->() } RETURN n"), g);
  REQUIRE(bag.rows.size() == 1);
  CHECK(bag.rows[0][0].i == 0);
}

TEST_CASE("union deduplicates, union all concatenates") {
  PropertyGraph g;
  g.nodes.resize(2);
  auto all = evaluate(q("MATCH (n) RETURN 1 UNION ALL MATCH (n) RETURN 1"), g);
  CHECK(all.rows.size() == 4);
  auto dedup = evaluate(q("MATCH (n) RETURN 1 UNION MATCH (n) RETURN 1"), g);
  CHECK(dedup.rows.size() == 1);
}

TEST_CASE("union equals dedup of union all on enumerated graphs") {
  auto q1 = q("MATCH (n)-[]->(m) RETURN n.p UNION MATCH (n) RETURN n.p");
  auto q2 = q("MATCH (n)-[]->(m) RETURN n.p UNION ALL MATCH (n) RETURN n.p");
  EnumBounds b = derive_bounds(q1, q2, 2, 2, 2);
  size_t count = 0;
  for_each_graph(b, [&](const PropertyGraph& g) {
    ++count;
    ResultBag u = evaluate(q1, g);
    ResultBag ua = evaluate(q2, g);
    std::vector<std::vector<Value>> dedup;
    for (const auto& r : ua.rows) {
      bool dup = false;
      for (const auto& s : dedup) {
        if (row_equal(s, r)) { dup = true; break; }
      }
      if (!dup) dedup.push_back(r);
    }
    ResultBag expected{u.arity, dedup, false};
    REQUIRE(bag_equal(u, expected));
    return true;
  });
  CHECK(count > 100);
}

TEST_CASE("bounded variable-length equals its expansion on enumerated graphs") {
  auto vl = q("MATCH (a)-[*1..2]->(b) RETURN a, b");
  auto expanded = q("MATCH (a)-[]->(b) RETURN a, b "
                    "UNION ALL MATCH (a)-[]->()-[]->(b) RETURN a, b");
  EnumBounds b = derive_bounds(vl, expanded, 3, 2, 0);
  for_each_graph(b, [&](const PropertyGraph& g) {
    REQUIRE(bag_equal(evaluate(vl, g), evaluate(expanded, g)));
    return true;
  });
}

TEST_CASE("variable-length paths do not repeat relationships") {
  PropertyGraph g = self_loop();
  auto bag = evaluate(q("MATCH (a)-[*1..3]->(b) RETURN a"), g);
  CHECK(bag.rows.size() == 1);  // only the single 1-hop path
}

TEST_CASE("enumerator: zero bounds give exactly the empty graph") {
  EnumBounds b;
  b.maxNodes = 0;
  b.maxRels = 0;
  size_t count = 0;
  for_each_graph(b, [&](const PropertyGraph& g) {
    CHECK(g.nodes.empty());
    CHECK(g.rels.empty());
    ++count;
    return true;
  });
  CHECK(count == 1);
}

TEST_CASE("enumerator: single self-loop graph is reachable") {
  EnumBounds b;
  b.maxNodes = 1;
  b.maxRels = 1;
  b.relLabels = {"A"};
  bool sawLoop = false;
  size_t count = 0;
  for_each_graph(b, [&](const PropertyGraph& g) {
    ++count;
    if (g.nodes.size() == 1 && g.rels.size() == 1) {
      CHECK(g.rels[0].src == 0);
      CHECK(g.rels[0].dst == 0);
      sawLoop = true;
    }
    return true;
  });
  CHECK(sawLoop);
  CHECK(count == 3);  // empty, one node, one node with self-loop
}

TEST_CASE("enumerator count matches an independent brute-force count") {
  // Independent route: enumerate every raw labeled graph with <=2 nodes and
  // <=1 relationship over labels {A,B}, then count canonical-form classes.
  std::set<std::string> classes;
  std::vector<std::vector<std::string>> masks = {{}, {"A"}, {"B"}, {"A", "B"}};
  for (int n = 0; n <= 2; ++n) {
    std::vector<int> lab(n, 0);
    std::function<void(int)> nodesRec = [&](int i) {
      if (i == n) {
        for (int m = 0; m <= 1; ++m) {
          if (m == 1 && n == 0) continue;
          auto emit = [&](const PropertyGraph& g) {
            // canonical form: minimum serialization over node permutations
            std::vector<int> perm(n);
            for (int k = 0; k < n; ++k) perm[k] = k;
            std::string best;
            do {
              PropertyGraph h;
              h.nodes.resize(n);
              for (int k = 0; k < n; ++k) h.nodes[perm[k]] = g.nodes[k];
              h.rels = g.rels;
              for (auto& r : h.rels) {
                r.src = perm[r.src];
                r.dst = perm[r.dst];
              }
              std::string s = serialize_graph(h);
              if (best.empty() || s < best) best = s;
            } while (std::next_permutation(perm.begin(), perm.end()));
            classes.insert(best);
          };
          PropertyGraph g;
          g.nodes.resize(n);
          for (int k = 0; k < n; ++k) g.nodes[k].labels = masks[lab[k]];
          if (m == 0) {
            emit(g);
          } else {
            for (int s = 0; s < n; ++s) {
              for (int d = 0; d < n; ++d) {
                for (const char* rl : {"A", "B"}) {
                  PropertyGraph h = g;
                  h.rels.push_back({s, d, rl, {}});
                  emit(h);
                }
              }
            }
          }
        }
        return;
      }
      for (int v = 0; v < 4; ++v) {
        lab[i] = v;
        nodesRec(i + 1);
      }
    };
    nodesRec(0);
  }

  EnumBounds b;
  b.maxNodes = 2;
  b.maxRels = 1;
  b.nodeLabels = {"A", "B"};
  b.relLabels = {"A", "B"};
  size_t streamed = 0;
  std::set<std::string> seen;
  for_each_graph(b, [&](const PropertyGraph& g) {
    ++streamed;
    CHECK(seen.insert(serialize_graph(g)).second);  // duplicate-free
    return true;
  });
  CHECK(streamed == classes.size());
}

TEST_CASE("graph serialization round-trips bit-exactly") {
  PropertyGraph g;
  g.nodes.resize(2);
  g.nodes[0].labels = {"A", "B"};
  g.nodes[0].props = {{"k", Value::integer(-3)}, {"name", Value::str("it's ok")}};
  g.rels.push_back({0, 1, "T", {{"w", Value::integer(7)}}});
  g.normalize();
  std::string text = serialize_graph(g);
  PropertyGraph back = parse_graph(text);
  CHECK(serialize_graph(back) == text);
}

TEST_CASE("differential check finds the unlabeled-node counterexample") {
  auto q1 = q("MATCH (n) RETURN n");
  auto q2 = q("MATCH (n:Person) RETURN n");
  auto out = differential_check(q1, q2, derive_bounds(q1, q2, 2, 1, 1));
  REQUIRE(out.kind == DiffOutcome::Kind::Counterexample);
  CHECK(out.witness.nodes.size() == 1);
  CHECK(out.witness.nodes[0].labels.empty());
}

TEST_CASE("differential check agrees on a reversed pattern") {
  auto q1 = q("MATCH (n)-[]->(m) RETURN n");
  auto q2 = q("MATCH (m)<-[]-(n) RETURN n");
  auto out = differential_check(q1, q2, derive_bounds(q1, q2, 2, 2, 1));
  CHECK(out.kind == DiffOutcome::Kind::Agrees);
  CHECK(out.graphsChecked > 10);
}

TEST_CASE("differential check: reflexivity") {
  auto q1 = q("MATCH (n)-[r:T]->(m) WHERE n.age > 1 RETURN n.age ORDER BY n.age LIMIT 2");
  auto out = differential_check(q1, q1, derive_bounds(q1, q1, 2, 2, 2));
  CHECK(out.kind == DiffOutcome::Kind::Agrees);
}
