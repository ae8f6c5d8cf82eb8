/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#include <catch2/catch_amalgamated.hpp>

#include "cyeq/build.hpp"
#include "cyeq/enumerate.hpp"
#include "cyeq/eval.hpp"
#include "cyeq/interpret.hpp"
#include "cyeq/normalize.hpp"
#include "cyeq/parser.hpp"
#include "cyeq/simplify.hpp"

using namespace cyeq;

namespace {

QueryAst q(const std::string& text) {
  auto r = parse(text);
  INFO(text);
  if (!r.ok()) INFO(r.error().message);
  REQUIRE(r.ok());
  return r.value();
}

GExprPtr compiled(const std::string& text) { return build(normalize(q(text))).g; }

std::string canon(const GExprPtr& g) {
  static const std::map<std::string, std::string> none;
  return canonical_text(g, none);
}

}  // namespace

TEST_CASE("basic pattern compiles to a summation over pattern entities") {
  GExprPtr g = compiled("MATCH (n1)-[r]->(n2) WHERE n1.age = 59 RETURN n1");
  CHECK(to_text(g) ==
        "S[e1,e2,e3](Node(e1)*Rel(e2)*Node(e3)*[in(e2) = e1]*[out(e2) = e3]"
        "*[e1.age == 59]*[t1 = e1])");
}

TEST_CASE("node pattern with labels and properties") {
  GExprPtr g = compiled("MATCH (n:l1:l2 {p1: 7}) RETURN n");
  CHECK(to_text(g) ==
        "S[e1](Node(e1)*Lab(e1,'l1')*Lab(e1,'l2')*[e1.p1 == 7]*[t1 = e1])");
}

TEST_CASE("relationship labels combine with + and properties with *") {
  GExprPtr g = compiled("MATCH (n1)-[r:l1|l2 {p1: 1}]->(n2) RETURN r");
  CHECK(to_text(g) ==
        "S[e1,e2,e3](Node(e1)*Rel(e2)*(Lab(e2,'l1')+Lab(e2,'l2'))*[e2.p1 == 1]*Node(e3)"
        "*[in(e2) = e1]*[out(e2) = e3]*[t1 = e2])");
}

TEST_CASE("relationship injectivity adds pairwise disequalities within a MATCH") {
  GExprPtr g = compiled("MATCH ()-[r1]->()-[r2]->() RETURN 1");
  CHECK(to_text(g).find("!([e2 == e4])") != std::string::npos);
  // across MATCH clauses there is no constraint
  GExprPtr h = compiled("MATCH ()-[r1]->() MATCH ()-[r2]->() RETURN 1");
  CHECK(to_text(h).find("!(") == std::string::npos);
}

TEST_CASE("unbounded paths become UNBOUNDED pseudo-relationships") {
  GExprPtr g = compiled("MATCH (a)-[*]->(b) RETURN a");
  std::string s = to_text(g);
  CHECK(s.find("Rel(e2)*UNBOUNDED(e2)") != std::string::npos);
  GExprPtr labeled = compiled("MATCH (a)-[:KNOWS*]->(b) RETURN a");
  CHECK(to_text(labeled).find("UNBOUNDED(e2)*Lab(e2,'KNOWS')") != std::string::npos);
}

TEST_CASE("union all adds, union squashes") {
  GExprPtr g = compiled("MATCH (a) RETURN a UNION ALL MATCH (b) RETURN b");
  CHECK(to_text(g) == "(S[e1](Node(e1)*[t1 = e1])+S[e2](Node(e2)*[t1 = e2]))");
  GExprPtr u = compiled("MATCH (a) RETURN a UNION MATCH (b) RETURN b");
  CHECK(to_text(u) == "||(S[e1](Node(e1)*[t1 = e1])+S[e2](Node(e2)*[t1 = e2]))||");
}

TEST_CASE("natural join multiplies, optional match adds a null branch") {
  GExprPtr g = compiled("MATCH (a) MATCH (b) RETURN a");
  CHECK(to_text(g) == "S[e1,e2](Node(e1)*Node(e2)*[t1 = e1])");

  GExprPtr opt = compiled("MATCH (a) OPTIONAL MATCH (a)-[r]->(b) RETURN a, b");
  std::string s = to_text(opt);
  CHECK(s.find("+") != std::string::npos);
  CHECK(s.find("!(S[e2,e3](") != std::string::npos);
  CHECK(s.find("isNULL(") != std::string::npos);
  CHECK(s.find("[t2 = null]") != std::string::npos);
}

TEST_CASE("aggregates pin tuple columns to summation values") {
  GExprPtr g = compiled("MATCH (n:Person) RETURN SUM(n.age)");
  CHECK(to_text(g) ==
        "[t1 = S[e2](Node(e2)*Lab(e2,'Person')*!([isnull e2.age])*e2.age)]");
  GExprPtr grouped = compiled("MATCH (n) RETURN n.dept, COUNT(*)");
  std::string s = to_text(grouped);
  CHECK(s.find("||S[e1](Node(e1)*[t1 = e1.dept])||") != std::string::npos);
  CHECK(s.find("[t2 = S[e2](Node(e2)*[e2.dept = t1])]") != std::string::npos);
}

TEST_CASE("unwinding a literal list concatenates element branches") {
  GExprPtr g = compiled("MATCH (n) UNWIND [{c1: 0, c2: 1}, {c1: 2, c2: 3}] AS row "
                        "RETURN row.c1, row.c2");
  CHECK(to_text(g) ==
        "(S[e1](Node(e1)*[t1 = 0]*[t2 = 1])+S[e1](Node(e1)*[t1 = 2]*[t2 = 3]))");
}

TEST_CASE("order, limit and skip become result-tuple tags") {
  GExprPtr g = compiled("MATCH (x) RETURN x.name ORDER BY x.age DESC SKIP 2 LIMIT 1");
  std::string s = to_text(g);
  CHECK(s.find("[desc(1) = e1.age]") != std::string::npos);
  CHECK(s.find("[limit() = 1]") != std::string::npos);
  CHECK(s.find("[skip() = 2]") != std::string::npos);
}

TEST_CASE("exists compiles to a squashed summation") {
  GExprPtr g = compiled("MATCH (n) WHERE EXISTS { MATCH (n)-[]->(m) } RETURN n");
  std::string s = to_text(g);
  CHECK(s.find("||S[e2,e3](Node(e1)*Rel(e2)*Node(e3)*[in(e2) = e1]*[out(e2) = e3])||") !=
        std::string::npos);
}

TEST_CASE("nested aggregates are rejected") {
  auto ast = normalize(q("MATCH (n) RETURN COUNT(SUM(n.age))"));
  CHECK_THROWS_AS(build(ast), UnsupportedFeature);
  try {
    build(ast);
  } catch (const UnsupportedFeature& e) {
    CHECK(std::string(e.what()).find("nested aggregate") != std::string::npos);
  }
}

TEST_CASE("simplify eliminates pinned intermediate tuples") {
  GExprPtr g = compiled("MATCH (p) WITH DISTINCT p.name AS name RETURN name");
  GExprPtr s = simplify(g);
  GExprPtr direct = simplify(compiled("MATCH (p) RETURN DISTINCT p.name"));
  CHECK(canon(s) == canon(direct));
  CHECK(to_text(s) == "||S[e1](Node(e1)*[t1 = e1.name])||");
}

TEST_CASE("simplify relocates predicates into the summation binding them") {
  // hand-built: S[e1]([t1 = e1] * Node(e1) * [e1.dept == e2.dept] * ||S[e2](Node(e2))||)
  GExprPtr e1 = g_entity("e1"), e2 = g_entity("e2");
  GExprPtr stray = g_bracket(GExpr::BracketMode::Pred, CmpOp::Eq, g_prop(e1, "dept"),
                             g_prop(e2, "dept"));
  GExprPtr inner = g_squash(g_sum({"e2"}, g_app("Node", {e2})));
  GExprPtr g = g_sum({"e1"}, g_mul({g_bracket(GExpr::BracketMode::TupleEq, CmpOp::Eq,
                                              g_tuple_col(0), e1),
                                    g_app("Node", {e1}), stray, inner}));
  GExprPtr s = simplify(g);
  CHECK(to_text(s) ==
        "S[e1]([t1 = e1]*Node(e1)*||S[e2](Node(e2)*[e1.dept == e2.dept])||)");
}

TEST_CASE("simplify dedups boolean factors and folds trivial brackets") {
  GExprPtr e3 = g_entity("e3");
  GExprPtr g = g_mul({g_app("Node", {e3}), g_app("Node", {e3}),
                      g_bracket(GExpr::BracketMode::Pred, CmpOp::Eq, e3, e3)});
  CHECK(to_text(simplify(g)) == "Node(e3)");
}

TEST_CASE("simplify keeps property self-comparison (null-strict)") {
  GExprPtr e1 = g_entity("e1");
  GExprPtr g = g_bracket(GExpr::BracketMode::Pred, CmpOp::Eq, g_prop(e1, "p"), g_prop(e1, "p"));
  CHECK(to_text(simplify(g)) == "[e1.p == e1.p]");
}

TEST_CASE("simplify detects contradictory constant ranges") {
  GExprPtr g = simplify(compiled("MATCH (n) WHERE n.age = 1 AND n.age = 2 RETURN n"));
  CHECK(to_text(g) == "0");
  GExprPtr h = simplify(compiled("MATCH (n) WHERE n.age < 1 AND n.age > 2 RETURN n"));
  CHECK(to_text(h) == "0");
  GExprPtr ok = simplify(compiled("MATCH (n) WHERE n.age >= 1 AND n.age <= 1 RETURN n"));
  CHECK(to_text(ok) != "0");
}

TEST_CASE("interpret matches hand-computed multiplicities") {
  PropertyGraph g;
  g.nodes.resize(2);
  g.nodes[0].props = {{"age", Value::integer(59)}};
  g.rels.push_back({0, 1, "T", {}});

  GExprPtr expr = simplify(compiled("MATCH (n1)-[r]->(n2) WHERE n1.age = 59 RETURN n1"));
  CHECK(interpret(expr, g, {Value::node_ref(0)}) == 1);
  CHECK(interpret(expr, g, {Value::node_ref(1)}) == 0);

  PropertyGraph empty;
  CHECK(interpret(expr, empty, {Value::node_ref(0)}) == 0);
}

TEST_CASE("interpret honours relationship injectivity") {
  PropertyGraph loop;
  loop.nodes.resize(1);
  loop.rels.push_back({0, 0, "T", {}});
  GExprPtr two = simplify(compiled("MATCH ()-[r1]->()-[r2]->() RETURN 1"));
  CHECK(interpret(two, loop, {Value::integer(1)}) == 0);
  GExprPtr split = simplify(compiled("MATCH ()-[r1]->() MATCH ()-[r2]->() RETURN 1"));
  CHECK(interpret(split, loop, {Value::integer(1)}) == 1);
}

TEST_CASE("interpret rejects uninterpreted symbols") {
  PropertyGraph g;
  g.nodes.resize(1);
  GExprPtr ub = compiled("MATCH (a)-[*]->(b) RETURN a");
  CHECK_THROWS_AS(interpret(ub, g, {Value::node_ref(0)}), NotInterpretable);
}

TEST_CASE("squash and not stay within {0,1} and union matches min semantics") {
  PropertyGraph g;
  g.nodes.resize(3);
  GExprPtr a = compiled("MATCH (n) RETURN 1");
  GExprPtr u = compiled("MATCH (n) RETURN 1 UNION MATCH (m) RETURN 1");
  int64_t plain = interpret(simplify(a), g, {Value::integer(1)});
  CHECK(plain == 3);
  CHECK(interpret(simplify(u), g, {Value::integer(1)}) == 1);
  CHECK(interpret(g_squash(g_const(Value::integer(0))), g, {}) == 0);
  CHECK(interpret(g_not(g_sum({"e1"}, g_app("Node", {g_entity("e1")}))), g, {}) == 0);
}

TEST_CASE("interpret agrees with the oracle multiplicity on simple queries") {
  const char* queries[] = {
      "MATCH (n) RETURN n",
      "MATCH (n1)-[r]->(n2) RETURN n1, n2",
      "MATCH (a)-[:T]->(b) WHERE a.p = 1 RETURN b.p",
      "MATCH (a) RETURN DISTINCT a.p",
      "MATCH (a) RETURN a.p UNION ALL MATCH (b) RETURN b.p",
      "MATCH (a) RETURN a.p UNION MATCH (b) RETURN b.p",
      "MATCH (a) MATCH (b) RETURN a, b",
      "MATCH (a) RETURN COUNT(*)",
      "MATCH (a) RETURN SUM(a.p)",
      "MATCH (a)-[]->(b) RETURN a.p, COUNT(*)",
      "MATCH (a) UNWIND [1, 2] AS x RETURN x",
      "MATCH (a), (b) WHERE id(a) = id(b) RETURN b",
      "MATCH (a)-[]-(b) RETURN a",
      "MATCH (a)-[*1..2]->(b) RETURN a, b",
      "MATCH (a) WHERE EXISTS { MATCH (a)-[]->(c) } RETURN a",
      "MATCH (a) WHERE a.p = 1 OR a.p > 3 RETURN a",
  };
  for (const char* text : queries) {
    INFO(text);
    QueryAst ast = q(text);
    GExprPtr expr = simplify(build(normalize(ast)).g);
    EnumBounds b = derive_bounds(ast, ast, 2, 2, 2);
    size_t graphs = 0;
    for_each_graph(b, [&](const PropertyGraph& g) {
      ++graphs;
      ResultBag bag;
      try {
        bag = evaluate(ast, g);
      } catch (const EvalUnsupported&) {
        return true;
      }
      // multiplicity per distinct tuple, plus a tuple absent from the result
      std::map<std::string, std::pair<std::vector<Value>, int64_t>> mult;
      for (const auto& row : bag.rows) {
        std::string k;
        for (const auto& v : row) k += value_text(v) + "|";
        auto [it, fresh] = mult.emplace(k, std::make_pair(row, 0));
        it->second.second += 1;
        (void)fresh;
      }
      for (const auto& [k, pair] : mult) {
        INFO("graph:\n" << serialize_graph(g) << "tuple " << k);
        REQUIRE(interpret(expr, g, pair.first) == pair.second);
      }
      std::vector<Value> absent(bag.arity, Value::integer(424242));
      bool collides = false;
      for (const auto& row : bag.rows) {
        if (row_equal(row, absent)) collides = true;
      }
      if (!collides && bag.arity > 0) {
        INFO("graph:\n" << serialize_graph(g) << " absent tuple");
        REQUIRE(interpret(expr, g, absent) == 0);
      }
      return true;
    });
    CHECK(graphs > 0);
  }
}
