/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#include <catch2/catch_amalgamated.hpp>

#include "cyeq/enumerate.hpp"
#include "cyeq/normalize.hpp"
#include "cyeq/parser.hpp"
#include "cyeq/printer.hpp"

using namespace cyeq;

namespace {

QueryAst q(const std::string& text) {
  auto r = parse(text);
  INFO(text);
  if (!r.ok()) INFO(r.error().message);
  REQUIRE(r.ok());
  return r.value();
}

std::string norm(const std::string& text) { return print(normalize(q(text)).ast); }

void check_preserved(const std::string& text, int maxNodes = 2, int maxRels = 2) {
  QueryAst before = q(text);
  QueryAst after = normalize(before).ast;
  INFO("before: " << text);
  INFO("after:  " << print(after));
  auto out = differential_check(before, after, derive_bounds(before, after, maxNodes, maxRels, 2));
  if (out.kind == DiffOutcome::Kind::Counterexample) INFO(serialize_graph(out.witness));
  REQUIRE(out.kind == DiffOutcome::Kind::Agrees);
}

}  // namespace

TEST_CASE("undirected relationships split into both orientations") {
  std::string n = norm("MATCH (n1)-[]-(n2) RETURN n1.name");
  CHECK(n ==
        "MATCH (n1)-[r1]->(n2) RETURN n1.name "
        "UNION ALL MATCH (n1)<-[r1]-(n2) WHERE NOT n1 = n2 RETURN n1.name");
  check_preserved("MATCH (n1)-[]-(n2) RETURN n1.name");
}

TEST_CASE("bounded variable-length paths expand per length") {
  std::string n = norm("MATCH (n1)-[*1..2]->(n2) RETURN n1");
  CHECK(n ==
        "MATCH (n1)-[r1]->(n2) RETURN n1 "
        "UNION ALL MATCH (n1)-[r1]->(n2)-[r2]->(n3) RETURN n1");
  check_preserved("MATCH (n1)-[*1..2]->(n2) RETURN n1");

  // exactly (max - min + 1) branches
  auto three = normalize(q("MATCH (a)-[*2..4]->(b) RETURN a"));
  CHECK(three.ast.branches.size() == 3);
}

TEST_CASE("normalized variable-length output keeps labels and properties per hop") {
  std::string n = norm("MATCH (a)-[:T*2 {w: 1}]->(b) RETURN a");
  CHECK(n == "MATCH (n1)-[r1:T {w: 1}]->(n2)-[r2:T {w: 1}]->(n3) RETURN n1");
}

TEST_CASE("RETURN * expands to the sorted visible variables") {
  CHECK(norm("MATCH (x)-[z]->()-[y]->() RETURN *") ==
        "MATCH (n1)-[r1]->(n2)-[r2]->(n3) RETURN n1, r2, r1");
  // x, y, z sorted lexicographically before standardization renames them
  check_preserved("MATCH (x)-[z]->()-[y]->() RETURN *");
}

TEST_CASE("redundant WITH clauses are eliminated") {
  CHECK(norm("MATCH (x) WITH x.name AS name RETURN name") == "MATCH (n1) RETURN n1.name");
  CHECK(norm("MATCH (n1) WITH n1 MATCH (n1)-[]->(n2) RETURN n2") ==
        "MATCH (n1) MATCH (n1)-[r1]->(n2) RETURN n2");
  check_preserved("MATCH (x) WITH x.name AS name RETURN name");
  check_preserved("MATCH (n1) WITH n1 MATCH (n1)-[]->(n2) RETURN n2");
}

TEST_CASE("WITH DISTINCT survives normalization") {
  std::string n = norm("MATCH (x) WITH DISTINCT x.name AS name RETURN name");
  CHECK(n == "MATCH (n1) WITH DISTINCT n1.name AS c1 RETURN c1");
}

TEST_CASE("variables standardize by first appearance") {
  CHECK(norm("MATCH (person)-[]->(book) RETURN person") == "MATCH (n1)-[r1]->(n2) RETURN n1");
  // alpha-equivalent inputs normalize identically
  CHECK(norm("MATCH (aa)-[e]->(bb) WHERE aa.age = 1 RETURN bb") ==
        norm("MATCH (x)-[w]->(y) WHERE x.age = 1 RETURN y"));
}

TEST_CASE("id equality merges node variables") {
  CHECK(norm("MATCH (n1), (n2) WHERE id(n1) = id(n2) RETURN n2") == "MATCH (n1) RETURN n1");
  check_preserved("MATCH (n1), (n2) WHERE id(n1) = id(n2) RETURN n2");
  CHECK(norm("MATCH (a), (b) WHERE id(a) = id(b) AND a.age = 1 RETURN b") ==
        "MATCH (n1) WHERE n1.age = 1 RETURN n1");
}

TEST_CASE("already-normal query stays unchanged with an empty trace") {
  auto n = normalize(q("MATCH (n1)-[r1]->(n2) RETURN n1"));
  CHECK(n.trace.empty());
  CHECK(print(n.ast) == "MATCH (n1)-[r1]->(n2) RETURN n1");
}

TEST_CASE("normalization is idempotent") {
  const char* queries[] = {
      "MATCH (a)-[]-(b) RETURN a.name",
      "MATCH (a)-[*1..3]->(b) RETURN a",
      "MATCH (x)-[z]->()-[y]->() RETURN *",
      "MATCH (x) WITH x.name AS name RETURN name",
      "MATCH (p), (qq) WHERE id(p) = id(qq) RETURN qq",
      "MATCH (a) RETURN a UNION MATCH (b) RETURN b",
      "MATCH (a) WITH DISTINCT a.x AS v RETURN v ORDER BY v LIMIT 2",
  };
  for (const char* text : queries) {
    INFO(text);
    auto once = normalize(q(text));
    auto twice = normalize(once.ast);
    CHECK(twice.trace.empty());
    CHECK(structurally_equal(once.ast, twice.ast));
  }
}

TEST_CASE("rules do not fire without a matching site") {
  CHECK(!apply_rule(RuleId::R1_UndirectedElim, q("MATCH (a)-[]->(b) RETURN a")));
  CHECK(!apply_rule(RuleId::R2_VarLengthRewrite, q("MATCH (a)-[]->(b) RETURN a")));
  CHECK(!apply_rule(RuleId::R6_IdEquality, q("MATCH (a) WHERE id(a) = 3 RETURN a")));
}

TEST_CASE("expansion refuses non-linear downstream pipelines") {
  // DISTINCT downstream: splitting would change multiplicities.
  auto ast = q("MATCH (a)-[]-(b) RETURN DISTINCT a");
  CHECK(!apply_rule(RuleId::R1_UndirectedElim, ast));
  auto agg = q("MATCH (a)-[*1..2]->(b) RETURN COUNT(a)");
  CHECK(!apply_rule(RuleId::R2_VarLengthRewrite, agg));
  auto lim = q("MATCH (a)-[]-(b) RETURN a LIMIT 1");
  CHECK(!apply_rule(RuleId::R1_UndirectedElim, lim));
  // plain ORDER BY downstream keeps the multiset: allowed
  auto ord = q("MATCH (a)-[]-(b) RETURN a ORDER BY a.p");
  CHECK(apply_rule(RuleId::R1_UndirectedElim, ord).has_value());
}

TEST_CASE("trace reports round, rule and site") {
  auto n = normalize(q("MATCH (person)-[]-(book) RETURN person"));
  REQUIRE(n.trace.size() >= 2);
  CHECK(n.trace[0].rule == RuleId::R1_UndirectedElim);
  std::string dump = trace_to_string(n.trace);
  CHECK(dump.find("round=1 rule=undirected-elim site=branch0.clause0.pattern0.rel0") !=
        std::string::npos);
}

TEST_CASE("normalization preserves semantics on assorted queries") {
  check_preserved("MATCH (a)-[]-(b)-[]->(c) RETURN a, c");
  check_preserved("MATCH (a)-[:T]-(b) WHERE a.p = 1 RETURN a.p ORDER BY a.p");
  check_preserved("MATCH (a)-[*1..2]->(a) RETURN a");
  check_preserved("MATCH (x) WITH x AS y MATCH (y)-[]->(z) RETURN z");
  check_preserved("MATCH (s), (t) WHERE id(s) = id(t) AND s.age > 0 RETURN t.age");
  check_preserved("MATCH (a)-[]-(b) RETURN a UNION MATCH (a)-[]->(b) RETURN b");
}
