#include "doctest.h"

#include <string>

#include "ostap/ast.hpp"
#include "ostap/diag.hpp"
#include "ostap/parser.hpp"
#include "testutil.hpp"

using namespace ostap;

namespace {

Program parse_file(const std::string& name) {
  return parse_program(testutil::read_file(testutil::programs_dir() + "/" + name));
}

const char* kWalk =
    "param a in (0, oo)\n"
    "param b in (a, oo)\n"
    "init x := a\n"
    "while (0 < x /\\ x < b) do\n"
    "  z ~ Bern(1/2, {1, -1})\n"
    "  x := x[-1] + z\n"
    "end\n";

}  // namespace

TEST_CASE("shipped programs parse into the expected shapes") {
  Program geom = parse_file("geom.spp");
  REQUIRE(geom.params.size() == 1);
  CHECK(geom.params[0].name == "p");
  CHECK(geom.params[0].loOpen);
  CHECK(geom.params[0].hiOpen);
  CHECK(print_expr(geom.params[0].lo) == "0");
  CHECK(print_expr(geom.params[0].hi) == "1");
  CHECK(geom.inits.size() == 2);
  CHECK(geom.firstLoopIndex == 1);
  CHECK(geom.guard->k == SForm_::K::Cmp);
  CHECK(geom.guard->op == CmpOp::Ne);
  REQUIRE(geom.samples.size() == 1);
  CHECK(geom.samples[0].var == "z");
  CHECK(geom.samples[0].dist.kind == Distribution::Kind::Bernoulli);
  CHECK(geom.assigns.size() == 2);
  REQUIRE(geom.pragmas.seed);
  CHECK(geom.pragmas.atExit.size() == 1);
  REQUIRE(geom.pragmas.variant);
  CHECK(print_expr(geom.pragmas.variant->bound) == "2");
  CHECK(!geom.pragmas.variant->eps);
  REQUIRE(geom.pragmas.solveFor);
  CHECK(geom.pragmas.solveFor->k == SolveTarget::K::Tau);

  Program momentum = parse_file("momentum.spp");
  CHECK(momentum.firstLoopIndex == 2);
  CHECK(momentum.inits.size() == 2);  // x at 0 and 1
  CHECK(momentum.pragmas.assumeOst);
  CHECK(!momentum.pragmas.solveFor);
  CHECK(!momentum.pragmas.variant);

  Program gamble2 = parse_file("gamble2.spp");
  REQUIRE(gamble2.pragmas.useFacts.size() == 1);
  CHECK(gamble2.pragmas.useFacts[0] == "gamble_x.fact");
  REQUIRE(gamble2.pragmas.solveFor);
  CHECK(gamble2.pragmas.solveFor->k == SolveTarget::K::Tau);

  Program mini = parse_file("miniabra.spp");
  CHECK(mini.pragmas.every.size() == 1);
  CHECK(mini.pragmas.implies.size() == 1);
  REQUIRE(mini.samples.size() == 1);
  CHECK(mini.samples[0].dist.kind == Distribution::Kind::Matches);
  CHECK(mini.samples[0].dist.arity == 3);

  Program full = parse_file("fullabra.spp");
  CHECK(full.params.size() == 1);
  CHECK(!full.params[0].loOpen);  // [5, oo)
  CHECK(!full.params[0].hi);
  CHECK(full.inits.size() == 11);
  CHECK(full.samples[0].dist.arity == 11);
}

TEST_CASE("printing then reparsing is the identity") {
  const char* names[] = {"geom.spp",     "gamble.spp",   "gamble2.spp",
                         "momentum.spp", "miniabra.spp", "fullabra.spp"};
  for (const char* n : names) {
    CAPTURE(n);
    Program p = parse_file(n);
    std::string once = print_program(p);
    Program q = parse_program(once);
    CHECK(equal(p, q));
    CHECK(print_program(q) == once);
  }
}

TEST_CASE("expression desugaring") {
  Program p = parse_program(kWalk);

  // constants fold, including ratios
  SExprPtr half = parse_seed("1/2", p);
  REQUIRE(half->k == SExpr_::K::Const);
  CHECK(half->c == Rational(1, 2));

  SExprPtr pow = parse_seed("x^3", p);
  REQUIRE(pow->k == SExpr_::K::Pow);
  CHECK(pow->arg == 3);

  SExprPtr neg = parse_seed("-x + 2", p);
  CHECK(print_expr(neg) == "-x + 2");

  // printing keeps precedence without stray parentheses
  CHECK(print_expr(parse_seed("a + b*x", p)) == "a + b * x");
  CHECK(print_expr(parse_seed("(a + b)*x", p)) == "(a + b) * x");
  CHECK(equal(parse_seed("a + b*x", p), parse_seed("a + (b*x)", p)));
}

TEST_CASE("pragma payload parsers accept the flag forms") {
  Program p = parse_program(kWalk);

  Pragmas out;
  parse_hint("at-exit: x = 0 \\/ x = b", p, out);
  REQUIRE(out.atExit.size() == 1);
  CHECK(out.atExit[0]->k == SForm_::K::Or);

  parse_hint("every: x = 0", p, out);
  CHECK(out.every.size() == 1);

  parse_hint("implies: x = b => x = b", p, out);
  CHECK(out.implies.size() == 1);

  VariantSpec v = parse_variant("x, b", p);
  CHECK(print_expr(v.expr) == "x");
  CHECK(print_expr(v.bound) == "b");
  CHECK(!v.eps);
  VariantSpec veps = parse_variant("x, b, 1/4", p);
  REQUIRE(veps.eps);
  CHECK(veps.eps->c == Rational(1, 4));

  CHECK(parse_solve_target("E[tau]", p).k == SolveTarget::K::Tau);
  SolveTarget mean = parse_solve_target("E[x]", p);
  CHECK(mean.k == SolveTarget::K::Mean);
  CHECK(mean.var == "x");
  SolveTarget prob = parse_solve_target("P[x = b]", p);
  CHECK(prob.k == SolveTarget::K::Prob);
  REQUIRE(prob.formula);

  CHECK_THROWS_AS(parse_solve_target("E[q]", p), Error);
  CHECK_THROWS_AS(parse_variant("x", p), Error);
}

TEST_CASE("parse errors carry their location and kind") {
  auto bad = [](const std::string& text) {
    try {
      parse_program(text);
      return std::string("no error");
    } catch (const Error& e) {
      CHECK(e.where() == "parse");
      return std::string(e.what());
    }
  };

  // duplicate parameter
  CHECK(bad("param p in (0, 1)\nparam p in (0, 1)\ninit x := 0\nwhile (x < 1) do\n  x := x[-1]\nend\n") != "no error");
  // undeclared name
  CHECK(bad("init x := 0\nwhile (x < q) do\n  x := x[-1]\nend\n") != "no error");
  // init referencing a variable
  CHECK(bad("init x := 0\ninit y := x\nwhile (x < 1) do\n  x := x[-1]\nend\n") != "no error");
  // history in the guard
  CHECK(bad("init x := 0\nwhile (x[-1] < 1) do\n  x := x[-1]\nend\n") != "no error");
  // double assignment
  CHECK(bad("init x := 0\nwhile (x < 1) do\n  x := x[-1]\n  x := x[-1]\nend\n") != "no error");
  // sample below an assignment
  CHECK(bad("init x := 0\nwhile (x < 1) do\n  x := x[-1]\n  z ~ Bern(1/2, {1, 0})\nend\n") != "no error");
  // closed infinite endpoint
  CHECK(bad("param a in [0, oo]\ninit x := a\nwhile (x < 1) do\n  x := x[-1]\nend\n") != "no error");
  // projection out of range
  CHECK(bad("init x := 0\nwhile (x < 1) do\n  s ~ Matches(\"AB\", 3)\n  x := pi_3(s)\nend\n") != "no error");
  // pi_1 on a scalar sample is the scalar itself
  CHECK(bad("init x := 0\nwhile (x < 1) do\n  z ~ Bern(1/2, {1, 0})\n  x := pi_1(z)\nend\n") == "no error");
  // t outside an at-exit hint
  CHECK(bad("init x := 0\nwhile (x < 1) do\n  x := x[-1]\nend\n#seed: x + t\n") != "no error");
  CHECK(bad("init x := 0\nwhile (x < 1) do\n  x := x[-1]\nend\n#hint every: x = t\n") != "no error");
  // unknown pragma
  CHECK(bad("init x := 0\nwhile (x < 1) do\n  x := x[-1]\nend\n#frobnicate: x\n") != "no error");

  // location is 1-based line:column
  try {
    parse_program("init x := 0\nwhile (x < ) do\n  x := x[-1]\nend\n");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.loc().line == 2);
  }
}

TEST_CASE("provably negative outcome mass is rejected by analysis") {
  // parses fine: validity over the parameter box is not the parser's call
  Program p = parse_program(
      "init x := 0\nwhile (x < 1) do\n  s ~ Matches(\"ABC\", 2)\n  x := pi_1(s)\nend\n#seed: x\n");
  try {
    analyze_program(p, {});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.where() == "analyze");
    CHECK(std::string(e.what()).find("negative mass") != std::string::npos);
  }
}

TEST_CASE("chained comparisons become conjunctions") {
  Program p = parse_program(
      "param b in (0, oo)\ninit x := 1\nwhile (0 < x < b) do\n  x := x[-1]\nend\n");
  REQUIRE(p.guard->k == SForm_::K::And);
  CHECK(p.guard->kids.size() == 2);
  CHECK(print_formula(p.guard) == "0 < x /\\ x < b");
}
