/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#include <catch2/catch_amalgamated.hpp>

#include "cyeq/parser.hpp"
#include "cyeq/printer.hpp"
#include "cyeq/semantics.hpp"

using namespace cyeq;

static QueryAst parsed(const std::string& text) {
  auto r = parse(text);
  INFO(text);
  if (!r.ok()) INFO(r.error().message);
  REQUIRE(r.ok());
  return r.value();
}

TEST_CASE("parses the book-author query") {
  auto ast = parsed(
      "MATCH (reader:Person)-[:READ]->(book:Book)<-[:WRITE]-(writer) "
      "WHERE reader.name = 'Alice' RETURN writer.name");
  REQUIRE(ast.branches.size() == 1);
  const auto& q = ast.only();
  REQUIRE(q.clauses.size() == 1);
  const auto& m = q.clauses[0].match;
  REQUIRE(m.patterns.size() == 1);
  CHECK(m.patterns[0].nodes.size() == 3);
  CHECK(m.patterns[0].rels.size() == 2);
  CHECK(m.patterns[0].rels[0].dir == RelDir::Right);
  CHECK(m.patterns[0].rels[1].dir == RelDir::Left);
  REQUIRE(m.where);
  REQUIRE(q.ret.items.size() == 1);
  CHECK(q.ret.items[0].expr->kind == Expr::Kind::PropAccess);
}

TEST_CASE("parses the minimal query") {
  auto ast = parsed("MATCH (n) RETURN n");
  const auto& q = ast.only();
  REQUIRE(q.clauses[0].match.patterns[0].nodes.size() == 1);
  CHECK(q.clauses[0].match.patterns[0].nodes[0].labels.empty());
  CHECK(print(ast) == "MATCH (n) RETURN n");
}

TEST_CASE("parses a bounded variable-length relationship") {
  auto ast = parsed("MATCH (n)-[*1..2]->(m) RETURN n");
  const auto& rel = ast.only().clauses[0].match.patterns[0].rels[0];
  REQUIRE(rel.range);
  CHECK(rel.range->min == 1);
  REQUIRE(rel.range->max);
  CHECK(*rel.range->max == 2);
}

TEST_CASE("range forms") {
  CHECK(parsed("MATCH (a)-[*]->(b) RETURN a")
            .only().clauses[0].match.patterns[0].rels[0].range->max == std::nullopt);
  auto fixed = parsed("MATCH (a)-[*2]->(b) RETURN a");
  const auto& r = fixed.only().clauses[0].match.patterns[0].rels[0];
  CHECK(r.range->min == 2);
  CHECK(*r.range->max == 2);
  CHECK(!parse("MATCH (a)-[*0..2]->(b) RETURN a").ok());
  CHECK(!parse("MATCH (a)-[*3..2]->(b) RETURN a").ok());
}

TEST_CASE("rejects constructs outside the fragment") {
  CHECK(!parse("CREATE (n) RETURN n").ok());
  CHECK(!parse("MATCH (n) RETURN n.age + 1").ok());
  CHECK(!parse("MATCH (n) WHERE n.age = 1.5 RETURN n").ok());
  CHECK(!parse("MATCH (n) WHERE n.age = $age RETURN n").ok());
  CHECK(!parse("MATCH (n) RETURN n LIMIT n.age").ok());
  CHECK(!parse("").ok());
  auto err = parse("MATCH (n) RETURN n.age + 1");
  REQUIRE(!err.ok());
  CHECK(err.error().kind == ErrorKind::Syntax);
  CHECK(err.error().where.lo > 0);
}

TEST_CASE("print/parse round trip on assorted queries") {
  const char* queries[] = {
      "MATCH (n) RETURN n",
      "MATCH (a)-[]-(b) RETURN a",
      "MATCH (a)-[r:A|B*1..3 {w: 2}]->(b) WHERE a.x = 'it\\'s' OR NOT b.y < 3 RETURN a, r AS rr",
      "MATCH (a), (b) WHERE id(a) = id(b) RETURN a",
      "OPTIONAL MATCH (a)-[:T]->(b) RETURN b",
      "MATCH (n) WITH DISTINCT n.name AS name ORDER BY name DESC SKIP 1 LIMIT 3 RETURN name",
      "MATCH (n) WHERE EXISTS { MATCH (n)-[]->(m) WHERE m.age > 1 } RETURN n",
      "UNWIND [{c1: 0, c2: 1}, {c1: 2, c2: 3}] AS row RETURN row.c1",
      "MATCH (n) RETURN n UNION ALL MATCH (n) RETURN n UNION MATCH (m) RETURN m",
      "MATCH (n:A:B {p: 1, q: 'x'}) RETURN DISTINCT n ORDER BY n.p SKIP 2 LIMIT 4",
      "MATCH (n) RETURN COUNT(*), SUM(n.age), COLLECT(n.name)",
      "MATCH (n) WHERE n.age >= 2 AND (n.age <= 5 OR n.name = 'a') AND n.age <> 3 RETURN n",
      "MATCH (n) WHERE n.p IS NULL RETURN n",
      "MATCH (n) WHERE NOT n.p IS NULL RETURN n",
      "MATCH (n) WHERE n.p = TRUE RETURN toLower(n.name)",
      "MATCH (x)-[z]->()-[y]->() RETURN *",
  };
  for (const char* text : queries) {
    auto a = parsed(text);
    std::string once = print(a);
    auto b = parsed(once);
    INFO(text);
    CHECK(structurally_equal(a, b));
    CHECK(print(b) == once);
  }
}

TEST_CASE("undirected dash form survives printing") {
  auto ast = parsed("MATCH (a)-[]-(b) RETURN a");
  CHECK(print(ast) == "MATCH (a)-[]-(b) RETURN a");
}

TEST_CASE("semantic check: undefined variable") {
  auto ast = parsed("MATCH (n) WHERE m.age = 1 RETURN n");
  auto err = semantic_check(ast);
  REQUIRE(err);
  CHECK(err->kind == ErrorKind::UndefinedVariable);
  CHECK(err->message.find("'m'") != std::string::npos);
}

TEST_CASE("semantic check: conflicting relationship labels") {
  auto ast = parsed("MATCH ()-[r:A]->()-[r:B]->() RETURN 1");
  auto err = semantic_check(ast);
  REQUIRE(err);
  CHECK(err->kind == ErrorKind::ConflictingRelationshipLabels);
}

TEST_CASE("semantic check: agreeing relationship labels pass") {
  auto ast = parsed("MATCH ()-[r:A]->() MATCH ()-[r:A]->() RETURN 1");
  CHECK(!semantic_check(ast));
}

TEST_CASE("semantic check: ok on minimal query") {
  CHECK(!semantic_check(parsed("MATCH (n) RETURN n")));
}

TEST_CASE("semantic check: scope ends at WITH") {
  auto ast = parsed("MATCH (n) WITH n.age AS a RETURN n");
  auto err = semantic_check(ast);
  REQUIRE(err);
  CHECK(err->kind == ErrorKind::UndefinedVariable);
}

TEST_CASE("semantic check: UNWIND alias is in scope") {
  CHECK(!semantic_check(parsed("MATCH (n) UNWIND [1, 2] AS x RETURN x")));
}

TEST_CASE("semantic check: kind conflict") {
  auto ast = parsed("MATCH (x)-[x]->() RETURN 1");
  auto err = semantic_check(ast);
  REQUIRE(err);
  CHECK(err->kind == ErrorKind::ConflictingRelationshipLabels);
}

TEST_CASE("semantic check: union arity mismatch") {
  auto ast = parsed("MATCH (n) RETURN n, n UNION ALL MATCH (m) RETURN m");
  auto err = semantic_check(ast);
  REQUIRE(err);
  CHECK(err->kind == ErrorKind::Syntax);
}
