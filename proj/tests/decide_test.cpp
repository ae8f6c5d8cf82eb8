/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "cyeq/decide.hpp"

using namespace cyeq;

namespace {

QueryAst q(const std::string& text) {
  auto r = parse(text);
  INFO(text);
  if (!r.ok()) INFO(r.error().message);
  REQUIRE(r.ok());
  return r.value();
}

DecideConfig test_config() {
  DecideConfig cfg;
  cfg.timeoutMs = 20000;
  return cfg;
}

bool solver_available() {
  const char* env = std::getenv("CYEQ_SOLVER");
  return env && *env;
}

Verdict check(const std::string& a, const std::string& b) {
  Verdict v = decide(a, b, test_config());
  INFO(a << "  <~>  " << b << "  => " << to_string(v.outcome) << " (" << v.reason << ")");
  return v;
}

}  // namespace

TEST_CASE("column mapping pairs by kind") {
  auto a1 = normalize(q("MATCH (n1)-[r]->(n2) RETURN n1, n2")).ast;
  auto a2 = normalize(q("MATCH (n1)<-[r]-(n2) RETURN n1, n2")).ast;
  ColumnMapping m = map_columns(a1.only(), a2.only());
  REQUIRE(m.candidates.size() == 2);  // two node variables on each side
  CHECK(m.candidates[0] == std::vector<int>{0, 1});
  CHECK(m.candidates[1] == std::vector<int>{1, 0});

  auto id1 = normalize(q("MATCH (n)-[r]->(m) RETURN n, r")).ast;
  ColumnMapping mid = map_columns(id1.only(), id1.only());
  REQUIRE(mid.candidates.size() == 1);  // node vs rel cannot swap
  CHECK(mid.candidates[0] == std::vector<int>{0, 1});
}

TEST_CASE("arity mismatch becomes the empty-result obligation") {
  auto a1 = normalize(q("MATCH (n) RETURN n, n")).ast;
  auto a2 = normalize(q("MATCH (n) RETURN n")).ast;
  ColumnMapping m = map_columns(a1.only(), a2.only());
  CHECK(m.emptyObligation);
}

TEST_CASE("segment splitting follows intermediate truncation") {
  auto ast = normalize(q("MATCH (n1) WITH n1 ORDER BY n1.p1 LIMIT 1 "
                         "MATCH (n1)-[]->(n2) RETURN n2")).ast;
  Segments s = split_segments(ast);
  REQUIRE(s.blocked.empty());
  REQUIRE(s.segments.size() == 2);
  CHECK(print(s.segments[0]) == "MATCH (n1) RETURN n1 ORDER BY n1.p1 LIMIT 1");
  CHECK(print(s.segments[1]) == "MATCH (n1) MATCH (n1)-[r1]->(n2) RETURN n2");

  auto plain = split_segments(normalize(q("MATCH (n) RETURN n")).ast);
  CHECK(plain.segments.size() == 1);
}

TEST_CASE("intermediate ORDER BY without truncation is dropped") {
  auto ast = normalize(q("MATCH (n1) WITH n1 ORDER BY n1.p1 MATCH (n1)-[]->(n2) RETURN n2")).ast;
  Segments s = split_segments(ast);
  REQUIRE(s.segments.size() == 1);
  CHECK(print(s.segments[0]).find("ORDER BY") == std::string::npos);
}

TEST_CASE("trivially equal encodings avoid the solver") {
  GExprPtr g = simplify(build(normalize(q("MATCH (n) RETURN n"))).g);
  SmtScript s = eliminate_summations(g, g);
  CHECK(s.trivialUnsat);
  CHECK(s.text.find("(check-sat)") != std::string::npos);
}

TEST_CASE("predicate-split regression builds an unsatisfiable script") {
  // split OR-range compared against the two-branch union
  auto q1 = normalize(q("MATCH (n) WHERE n.age < 10 OR n.age > 20 RETURN n.name")).ast;
  auto q2 = normalize(q("MATCH (n) WHERE n.age < 10 RETURN n.name "
                        "UNION ALL MATCH (n) WHERE n.age > 20 RETURN n.name")).ast;
  GExprPtr g1 = simplify(build(q1).g);
  GExprPtr g2 = simplify(build(q2).g);
  SmtScript script = eliminate_summations(g1, g2);
  INFO(script.text);
  // the two disjoint branches share their summation variables
  CHECK(script.text.find("v1") != std::string::npos);
  CHECK(script.trivialUnsat);  // identical sums after flattening

  if (solver_available()) {
    SolverResult r = run_solver(default_solver_command(""), script.text, 20000);
    CHECK(r.kind == SolverResult::Kind::Unsat);
  }
}

TEST_CASE("decide: alpha-renamed pair is equivalent") {
  if (!solver_available()) return;
  Verdict v = check("MATCH (reader:Person)-[:READ]->(book:Book)<-[:WRITE]-(writer) "
                    "WHERE reader.name = 'Alice' RETURN writer.name",
                    "MATCH (a:Person)-[:READ]->(b:Book)<-[:WRITE]-(c) "
                    "WHERE a.name = 'Alice' RETURN c.name");
  CHECK(v.outcome == Verdict::Outcome::Equivalent);
}

TEST_CASE("decide: reversed direction is equivalent") {
  if (!solver_available()) return;
  Verdict v = check("MATCH (n)-[]->(m) RETURN n", "MATCH (m)<-[]-(n) RETURN n");
  CHECK(v.outcome == Verdict::Outcome::Equivalent);
}

TEST_CASE("decide: union all versus union is refuted with a witness") {
  if (!solver_available()) return;
  Verdict v = check("MATCH (n) RETURN n.p UNION ALL MATCH (n) RETURN n.p",
                    "MATCH (n) RETURN n.p UNION MATCH (n) RETURN n.p");
  REQUIRE(v.outcome == Verdict::Outcome::NotEquivalent);
  REQUIRE(v.witness);
  ResultBag b1 = evaluate(q("MATCH (n) RETURN n.p UNION ALL MATCH (n) RETURN n.p"), *v.witness);
  ResultBag b2 = evaluate(q("MATCH (n) RETURN n.p UNION MATCH (n) RETURN n.p"), *v.witness);
  CHECK(!bag_equal(b1, b2));
}

TEST_CASE("decide: nested aggregate reports unknown") {
  if (!solver_available()) return;
  Verdict v = check("MATCH (n) RETURN COUNT(SUM(n.age))", "MATCH (n) RETURN COUNT(SUM(n.age))");
  CHECK(v.outcome == Verdict::Outcome::Unknown);
  CHECK(v.reason.find("nested aggregate") != std::string::npos);
}

TEST_CASE("decide: segment count mismatch reports unknown") {
  if (!solver_available()) return;
  Verdict v = check("MATCH (n1) WITH n1 ORDER BY n1.p LIMIT 1 MATCH (n1)-[]->(n2) RETURN n2",
                    "MATCH (n1)-[]->(n2) RETURN n2");
  CHECK(v.outcome == Verdict::Outcome::Unknown);
  CHECK(v.reason == "segment count mismatch");
}

TEST_CASE("decide: divide-and-conquer proves the truncated pipeline pair") {
  if (!solver_available()) return;
  Verdict v = check("MATCH (n1) WITH n1 ORDER BY n1.p1 LIMIT 1 MATCH (n1)-[]->(n2) RETURN n2",
                    "MATCH (n1) WITH n1 ORDER BY n1.p1 LIMIT 1 MATCH (n2)<-[]-(n1) RETURN n2");
  CHECK(v.outcome == Verdict::Outcome::Equivalent);
}

TEST_CASE("decide: empty-result obligation discharges arity mismatches") {
  if (!solver_available()) return;
  Verdict v = check("MATCH (n) WHERE n.age = 1 AND n.age = 2 RETURN n, n",
                    "MATCH (m) WHERE FALSE RETURN m");
  CHECK(v.outcome == Verdict::Outcome::Equivalent);
}

TEST_CASE("decide: distinct equals union of a query with itself") {
  if (!solver_available()) return;
  Verdict v = check("MATCH (n) RETURN DISTINCT n.p",
                    "MATCH (n) RETURN n.p UNION MATCH (n) RETURN n.p");
  CHECK(v.outcome == Verdict::Outcome::Equivalent);
}

TEST_CASE("decide: property value mutation is refuted") {
  if (!solver_available()) return;
  Verdict v = check("MATCH (n) WHERE n.age = 1 RETURN n", "MATCH (n) WHERE n.age = 2 RETURN n");
  REQUIRE(v.outcome == Verdict::Outcome::NotEquivalent);
  REQUIRE(v.witness);
}

TEST_CASE("decide is symmetric and deterministic") {
  if (!solver_available()) return;
  const char* a = "MATCH (x)-[r:T]->(y) WHERE x.p > 0 RETURN x, y";
  const char* b = "MATCH (y)<-[s:T]-(x) WHERE x.p > 0 RETURN y, x";
  Verdict v1 = check(a, b);
  Verdict v2 = check(b, a);
  CHECK(v1.outcome == v2.outcome);
  Verdict v3 = check(a, b);
  CHECK(v1.outcome == v3.outcome);
  CHECK(v1.outcome == Verdict::Outcome::Equivalent);
}
