#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "ostap/diag.hpp"
#include "ostap/rational.hpp"
#include "ostap/sumsimp.hpp"
#include "ostap/symexpr.hpp"
#include "testutil.hpp"

using namespace ostap;
using testutil::C;
using testutil::CQ;
using testutil::EX;
using testutil::P;
using testutil::TS;
using testutil::V;

TEST_CASE("rational parsing and printing") {
  CHECK(*parse_rational("3") == Rational(3));
  CHECK(*parse_rational("-3/2") == Rational(-3, 2));
  CHECK(*parse_rational("2/4") == Rational(1, 2));
  CHECK(*parse_rational("0.25") == Rational(1, 4));
  CHECK(*parse_rational("-1.5") == Rational(-3, 2));
  CHECK(!parse_rational(""));
  CHECK(!parse_rational("x"));
  CHECK(!parse_rational("1/0"));
  CHECK(!parse_rational("1.2.3"));
  CHECK(rat_str(Rational(-3, 2)) == "-3/2");
  CHECK(rat_pow(Rational(2, 3), -2) == Rational(9, 4));
  CHECK(rat_pow(Rational(5), 0) == Rational(1));
}

TEST_CASE("polynomial arithmetic is canonical") {
  SymExpr x = V("x", TimeIndex::loop(0));
  SymExpr y = V("y", TimeIndex::loop(0));

  CHECK((x + x - C(2) * x).is_zero());
  CHECK((x + y) * (x - y) == x.pow(2) - y.pow(2));
  SymExpr sq = (x + y).pow(2);
  CHECK(sq.terms().size() == 3);
  CHECK(sq == x * x + C(2) * x * y + y * y);
  CHECK((x * SymExpr::zero()).is_zero());
  CHECK(-(x - y) == y - x);

  CHECK(*C(7).as_rational() == Rational(7));
  CHECK(!x.as_rational());
  CHECK((P("a") * P("b", -1)).is_scalar());
  CHECK(!x.is_scalar());
  CHECK(normalize(sq) == sq);
}

TEST_CASE("degree caps reject runaway exponents") {
  SymExpr x = V("x", TimeIndex::loop(0));
  CHECK_THROWS_AS(x.pow(SymExpr::kDegreeCap + 1), Error);
  CHECK_THROWS_AS(P("p", SymExpr::kDegreeCap + 1), Error);
  CHECK_THROWS_AS(x.pow(-1), Error);
  CHECK(P("p", -2) * P("p", 2) == C(1));  // Laurent exponents cancel
}

TEST_CASE("ordering is a total order and printing is stable") {
  std::vector<SymExpr> es = {
      C(0), C(3), P("p"), P("p", 2), V("x", TimeIndex::loop(0)),
      V("x", TimeIndex::loop(-1)), V("x", TimeIndex::tau(0)),
      V("x", TimeIndex::abs(0)), TS(TimeIndex::loop(0)),
      EX(V("x", TimeIndex::tau(0))),
  };
  for (const auto& a : es)
    for (const auto& b : es) {
      CHECK(cmp(a, b) == -cmp(b, a));
      if (cmp(a, b) == 0) CHECK(to_string(a) == to_string(b));
    }
  CHECK(to_string(V("x", TimeIndex::loop(0)) - P("p") * TS(TimeIndex::loop(0))) ==
        "x(i) - p*i");
  CHECK(to_string(V("x", TimeIndex::abs(0)) + V("x", TimeIndex::loop(0)) -
                  V("x", TimeIndex::loop(-1))) == "x(0) + x(i) - x(i-1)");
  CHECK(to_string(EX(V("x", TimeIndex::tau(-1)))) == "E{x(tau-1)}");
}

TEST_CASE("retime rebases indices and scalar time") {
  SymExpr m = V("x", TimeIndex::loop(0)) - P("p") * TS(TimeIndex::loop(0));
  SymExpr at = retime(m, TimeBase::Loop, "", TimeIndex::tau(0));
  CHECK(at == V("x", TimeIndex::tau(0)) - P("p") * TS(TimeIndex::tau(0)));
  CHECK(to_string(at) == "x(tau) - p*tau");

  // offsets ride along
  SymExpr prev = retime(V("x", TimeIndex::loop(-1)), TimeBase::Loop, "", TimeIndex::tau(0));
  CHECK(prev == V("x", TimeIndex::tau(-1)));

  // rebasing to a concrete index turns scalar time into a constant
  SymExpr grounded = retime(TS(TimeIndex::loop(2)), TimeBase::Loop, "", TimeIndex::abs(3));
  CHECK(*grounded.as_rational() == Rational(5));

  // other bases are untouched
  SymExpr mixed = V("x", TimeIndex::abs(0)) + V("x", TimeIndex::loop(0));
  CHECK(retime(mixed, TimeBase::Loop, "", TimeIndex::tau(0)) ==
        V("x", TimeIndex::abs(0)) + V("x", TimeIndex::tau(0)));
}

TEST_CASE("substitute replaces atoms at depth but respects sum binders") {
  Atom xj = Atom::process("x", TimeIndex::bnd("j"));
  Atom x0 = Atom::process("x", TimeIndex::abs(0));
  SymExpr body = SymExpr::atom(xj) + SymExpr::atom(x0);
  SymExpr sum = SymExpr::atom(Atom::sum_node("j", TimeIndex::abs(1), TimeIndex::tau(0), body));

  // a binding keyed on the bound variable must not reach inside the sum
  SymExpr s1 = substitute(sum, {{xj, C(5)}});
  CHECK(s1 == sum);

  // a binding on an absolute atom does
  SymExpr s2 = substitute(sum, {{x0, C(2)}});
  SymExpr expect = SymExpr::atom(
      Atom::sum_node("j", TimeIndex::abs(1), TimeIndex::tau(0), SymExpr::atom(xj) + C(2)));
  CHECK(s2 == expect);

  // exponents expand through substitution
  SymExpr y = V("y", TimeIndex::loop(0));
  SymExpr sq = substitute(V("x", TimeIndex::loop(0), 2),
                          {{Atom::process("x", TimeIndex::loop(0)), y + C(1)}});
  CHECK(sq == y * y + C(2) * y + C(1));
}

TEST_CASE("atom visitors and bound-variable queries") {
  SymExpr e = EX(V("x", TimeIndex::tau(0)) * P("b")) + V("y", TimeIndex::loop(0));
  int count = 0;
  visit_atoms(e, [&](const Atom&) { ++count; });
  CHECK(count == 3);  // Exp node, x inside it, y outside
  CHECK(contains_atom_kind(e, AtomKind::ExpNode));
  CHECK(!contains_atom_kind(e, AtomKind::SumNode));

  Atom inner = Atom::sum_node("j", TimeIndex::abs(1), TimeIndex::tau(0),
                              V("x", TimeIndex::bnd("j")));
  CHECK(!mentions_bound(SymExpr::atom(inner), "j"));  // shadowed by its own binder
  CHECK(mentions_bound(V("x", TimeIndex::bnd("j")), "j"));
  CHECK(!mentions_bound(V("x", TimeIndex::bnd("k")), "j"));
}

TEST_CASE("evaluation grounds leaves, sums, and indicators") {
  EvalEnv env;
  env.param = [](const std::string& n) -> Rational {
    if (n == "p") return Rational(1, 3);
    throw Error("eval", "unknown parameter " + n);
  };
  env.leaf = [](const Atom& a) -> Rational {
    if (a.kind == AtomKind::Process && a.name == "x") return 7;
    if (a.kind == AtomKind::TimeSym) return 4;
    throw Error("eval", "unexpected leaf");
  };

  SymExpr x = V("x", TimeIndex::loop(0));
  CHECK(eval(x * x + P("p"), env) == Rational(148, 3));
  CHECK(eval(TS(TimeIndex::loop(-1)), env) == Rational(3));  // offset applies
  CHECK(eval(Formula::lt(x, C(8)), env));
  CHECK(!eval(Formula::eq(x, C(8)), env));

  // sums iterate when the bounds are concrete
  SymExpr s = SymExpr::atom(
      Atom::sum_node("j", TimeIndex::abs(2), TimeIndex::abs(5), TS(TimeIndex::bnd("j"))));
  CHECK(eval(s, env) == Rational(14));

  SymExpr ind = SymExpr::atom(Atom::ind_node(Formula::le(x, C(7))));
  CHECK(eval(ind, env) == Rational(1));
  CHECK_THROWS_AS(eval(EX(x), env), Error);
}

TEST_CASE("s-expression round trips") {
  std::vector<SymExpr> es = {
      SymExpr::zero(),
      C(3) - P("p", 2) * V("x", TimeIndex::loop(-2)),
      CQ(Rational(-7, 3)) * V("x", TimeIndex::tau(0), 3),
      SymExpr::atom(Atom::sample("z", TimeIndex::loop(0), 2)),
      EX(V("x", TimeIndex::tau(0)) - TS(TimeIndex::tau(0))),
      SymExpr::atom(Atom::sum_node("j", TimeIndex::abs(1), TimeIndex::tau(0),
                                   V("x", TimeIndex::bnd("j", -1)))),
      SymExpr::atom(Atom::cond_node(V("x", TimeIndex::loop(0)), TimeIndex::loop(-1))),
      SymExpr::atom(Atom::ind_node(Formula::disj(
          {Formula::eq(V("x", TimeIndex::tau(0)), C(0)),
           Formula::conj({Formula::lt(C(0), P("a")), Formula::negate(Formula::le(P("b"), C(1)))})}))),
  };
  for (const auto& e : es) {
    CAPTURE(sexpr(e));
    CHECK(parse_sexpr_expr(sexpr(e)) == e);
  }
  Formula f = Formula::conj({Formula::truth(true), Formula::lt(P("a"), C(2))});
  CHECK(parse_sexpr_formula(sexpr(f)) == f);
}

TEST_CASE("power sums match brute force") {
  for (int k = 0; k <= 4; ++k) {
    for (long n = 1; n <= 30; ++n) {
      Rational brute = 0;
      for (long t = 1; t <= n; ++t) brute += rat_pow(Rational(t), k);
      SymExpr closed = power_sum_closed(k, C(n));
      REQUIRE(closed.as_rational());
      CHECK(*closed.as_rational() == brute);
    }
  }
}

TEST_CASE("sum simplification: telescoping, constants, powers") {
  auto SUM = [](SymExpr body) {
    return SymExpr::atom(Atom::sum_node("j", TimeIndex::abs(1), TimeIndex::tau(0), body));
  };
  SumSimplifyOptions opts;
  opts.firstLoopIndex = 1;

  // telescoping difference collapses to the endpoints
  SymExpr tel = simplify_sum(
      SUM(V("x", TimeIndex::bnd("j")) - V("x", TimeIndex::bnd("j", -1))), opts);
  CHECK(tel == V("x", TimeIndex::tau(0)) - V("x", TimeIndex::abs(0)));

  // constant bodies scale by the length
  CHECK(simplify_sum(SUM(C(3)), opts) == C(3) * TS(TimeIndex::tau(0)));

  // power sums take their closed form in tau
  CHECK(simplify_sum(SUM(TS(TimeIndex::bnd("j")).pow(2)), opts) ==
        power_sum_closed(2, TS(TimeIndex::tau(0))));

  // an every-iteration equality can erase the leftover terms
  SumSimplifyOptions withHint = opts;
  withHint.everyEq.push_back({"m", SymExpr::zero()});
  CHECK(simplify_sum(SUM(V("m", TimeIndex::bnd("j", -1))), withHint).is_zero());

  // same body without the hint keeps its sum
  SymExpr kept = simplify_sum(SUM(V("m", TimeIndex::bnd("j", -1))), opts);
  CHECK(contains_atom_kind(kept, AtomKind::SumNode));
  CHECK(kept == SUM(V("m", TimeIndex::bnd("j", -1))));
}
