#include "doctest.h"

#include <string>
#include <vector>

#include "ostap/diag.hpp"
#include "ostap/doob.hpp"
#include "ostap/fact.hpp"
#include "ostap/hints.hpp"
#include "ostap/parser.hpp"
#include "ostap/report.hpp"
#include "ostap/sidecond.hpp"
#include "testutil.hpp"

using namespace ostap;
using testutil::C;
using testutil::EX;
using testutil::P;
using testutil::TS;
using testutil::V;

namespace {

struct Loaded {
  Program prog;
  StepSystem sys;
  ParamBox box;
  SymExpr seed;
  SymExpr martingale;
  SideConditionReport sc;
};

Loaded load(const std::string& name) {
  Loaded L;
  L.prog = parse_program(testutil::read_file(testutil::programs_dir() + "/" + name));
  L.sys = extract_recurrences(L.prog);
  L.box = ParamBox(L.prog.params);
  L.seed = lift_seed(L.prog, L.prog.pragmas.seed);
  L.martingale = doob_decompose(L.sys, L.seed).martingale;
  L.sc = check_side_conditions(L.prog, L.sys, L.seed, L.box);
  return L;
}

}  // namespace

TEST_CASE("side conditions: direct increment bound on the counter") {
  Loaded g = load("geom.spp");
  CHECK(g.sc.all_verified());
  REQUIRE(g.sc.find("bounded-increments"));
  CHECK(g.sc.find("bounded-increments")->status == CondStatus::Verified);
  REQUIRE(g.sc.incrementBound);
  CHECK(*g.sc.incrementBound == C(1) + P("p"));
  REQUIRE(g.sc.find("finite-expected-time"));
  CHECK(g.sc.find("finite-expected-time")->status == CondStatus::Verified);
  CHECK(g.sc.find("finite-expected-time")->detail.find("v in [1, 1]") != std::string::npos);
}

TEST_CASE("side conditions: bounded seed bounds the increments") {
  Loaded g = load("gamble.spp");
  CHECK(g.sc.all_verified());
  REQUIRE(g.sc.incrementBound);
  CHECK(*g.sc.incrementBound == P("b"));
  CHECK(g.sc.find("finite-expected-time")->detail.find("v in (0, b)") != std::string::npos);

  Loaded g2 = load("gamble2.spp");
  REQUIRE(g2.sc.incrementBound);
  CHECK(*g2.sc.incrementBound == P("b", 2));
}

TEST_CASE("side conditions: obligations stay open without a variant") {
  Loaded m = load("momentum.spp");
  CHECK(!m.sc.all_verified());
  CHECK(m.sc.find("bounded-increments")->status == CondStatus::Verified);
  REQUIRE(m.sc.incrementBound);
  CHECK(*m.sc.incrementBound == P("b"));
  CHECK(m.sc.find("finite-expected-time")->status == CondStatus::Obligation);
  CHECK(m.sc.find("finite-expected-time")->detail == "no bounded variant supplied");
}

TEST_CASE("side conditions: variant clause reporting") {
  Loaded mini = load("miniabra.spp");
  const SideCondition* fet = mini.sc.find("finite-expected-time");
  REQUIRE(fet);
  CHECK(fet->status == CondStatus::Obligation);  // clause (b) stays open
  CHECK(fet->detail.find("(a) 0 <= v < K verified") != std::string::npos);
  CHECK(fet->detail.find("(b) v = 0 forces exit unproven") != std::string::npos);
  CHECK(fet->detail.find("(c) decrease probability verified") != std::string::npos);
  CHECK(fet->detail.find("provably-decreasing mass 1/2") != std::string::npos);
  REQUIRE(mini.sc.incrementBound);
  CHECK(*mini.sc.incrementBound == C(14));
}

TEST_CASE("optional stopping writes the boundary equation") {
  Loaded g = load("geom.spp");
  Fact f = apply_ost(g.sys, g.seed, g.martingale, g.sc, false);
  CHECK(f.status == Fact::Status::Raw);
  CHECK(f.lhs.is_zero());
  CHECK(f.rhs == EX(V("x", TimeIndex::tau(0)) - P("p") * TS(TimeIndex::tau(0))));
  CHECK(to_string(f.rhs) == "E{x(tau) - p*tau}");

  // initial values substitute on both sides
  Loaded w = load("gamble.spp");
  Fact fw = apply_ost(w.sys, w.seed, w.martingale, w.sc, false);
  CHECK(fw.lhs == P("a"));
  CHECK(fw.rhs == EX(V("x", TimeIndex::tau(0))));
}

TEST_CASE("optional stopping refuses open obligations unless told otherwise") {
  Loaded m = load("momentum.spp");
  try {
    apply_ost(m.sys, m.seed, m.martingale, m.sc, false);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.where() == "ost-refused");
  }
  Fact f = apply_ost(m.sys, m.seed, m.martingale, m.sc, true);
  CHECK(f.lhs == P("a"));
  CHECK(f.rhs == EX(V("x", TimeIndex::tau(0)) - V("x", TimeIndex::tau(-1)) + P("a")));
}

TEST_CASE("exit hints split into cases and saturate implications") {
  Loaded w = load("gamble.spp");
  auto cases = exit_cases(w.prog, w.box);
  REQUIRE(cases.size() == 2);
  CHECK(cases[0].values.size() == 1);
  CHECK(cases[0].values[0].first == "x");
  // one case pins x to 0, the other to b (order follows the hint)
  CHECK(cases[0].values[0].second == C(0));
  CHECK(cases[1].values[0].second == P("b"));

  Loaded mini = load("miniabra.spp");
  auto mcases = exit_cases(mini.prog, mini.box);
  REQUIRE(mcases.size() == 1);
  CHECK(mcases[0].values.size() == 3);  // m3 = 1 plus the two implied pins

  auto eqs = every_eqs(mini.prog);
  REQUIRE(eqs.size() == 1);
  CHECK(eqs[0].first == "m3");
  CHECK(eqs[0].second.is_zero());
}

TEST_CASE("hint application turns boundary equations into expectation polynomials") {
  Loaded g = load("geom.spp");
  Fact raw = apply_ost(g.sys, g.seed, g.martingale, g.sc, false);
  Fact simp = apply_hints(raw, g.prog, g.sys, g.box);
  CHECK(simp.status == Fact::Status::HintSimplified);
  CHECK(simp.lhs.is_zero());
  // x(tau) = tau - 1 substitutes and the expectation distributes
  CHECK(simp.rhs == EX(TS(TimeIndex::tau(0))) - P("p") * EX(TS(TimeIndex::tau(0))) - C(1));
  CHECK(to_string(simp.rhs) == "E{tau} - p*E{tau} - 1");

  Loaded w = load("gamble.spp");
  Fact rawW = apply_ost(w.sys, w.seed, w.martingale, w.sc, false);
  Fact simpW = apply_hints(rawW, w.prog, w.sys, w.box);
  // disjunctive exit: b * Pr[x hits b] is all that survives
  SymExpr hitB = SymExpr::atom(Atom::ind_node(
      Formula::eq(V("x", TimeIndex::tau(0)), P("b"))));
  CHECK(simpW.rhs == P("b") * EX(hitB));
  CHECK(simpW.lhs == P("a"));
}

TEST_CASE("implied facts: disjoint exit cases have total probability one") {
  Loaded w = load("gamble.spp");
  auto implied = implied_facts(w.prog, w.box);
  REQUIRE(implied.size() == 1);
  SymExpr hit0 = SymExpr::atom(Atom::ind_node(Formula::eq(V("x", TimeIndex::tau(0)), C(0))));
  SymExpr hitB = SymExpr::atom(Atom::ind_node(Formula::eq(V("x", TimeIndex::tau(0)), P("b"))));
  CHECK(implied[0].lhs == EX(hit0) + EX(hitB));
  CHECK(implied[0].rhs == C(1));

  // a single-case exit implies nothing
  Loaded g = load("geom.spp");
  CHECK(implied_facts(g.prog, g.box).empty());
}

TEST_CASE("solving isolates the requested expectation") {
  Loaded g = load("geom.spp");
  Fact simp = apply_hints(apply_ost(g.sys, g.seed, g.martingale, g.sc, false), g.prog,
                          g.sys, g.box);
  Fact solved = solve_fact(simp, g.prog.pragmas.solveFor, implied_facts(g.prog, g.box), g.box);
  CHECK(solved.status == Fact::Status::Solved);
  CHECK(solved.targetText == "E{tau}");
  CHECK(solved.solvedNum == C(1));
  CHECK(solved.solvedDen == C(1) - P("p"));
  CHECK(closed_form(solved) == "(1) / (1 - p)");
}

TEST_CASE("solving eliminates unknowns with known facts first") {
  Loaded w2 = load("gamble2.spp");
  Fact simp = apply_hints(apply_ost(w2.sys, w2.seed, w2.martingale, w2.sc, false), w2.prog,
                          w2.sys, w2.box);

  // loaded fact: b * Pr[x(tau) = b] = a
  Fact hit = load_fact_file(testutil::programs_dir() + "/gamble_x.fact", "");
  std::vector<Fact> known = implied_facts(w2.prog, w2.box);
  known.push_back(hit);

  Fact solved = solve_fact(simp, w2.prog.pragmas.solveFor, known, w2.box);
  CHECK(solved.status == Fact::Status::Solved);
  CHECK(solved.targetText == "E{tau}");
  CHECK(solved.solvedNum == P("a") * P("b") - P("a", 2));
  CHECK(solved.solvedDen == C(1));
  CHECK(closed_form(solved) == "a*b - a^2");

  // without the loaded fact the best answer is relational
  Fact relational = solve_fact(simp, w2.prog.pragmas.solveFor,
                               implied_facts(w2.prog, w2.box), w2.box);
  CHECK(relational.status == Fact::Status::Solved);
  CHECK(relational.solvedDen == C(1));
  CHECK(contains_atom_kind(relational.solvedNum, AtomKind::ExpNode));
}

TEST_CASE("solving rejects explicit targets that never occur") {
  Loaded w = load("gamble.spp");
  Fact simp = apply_hints(apply_ost(w.sys, w.seed, w.martingale, w.sc, false), w.prog,
                          w.sys, w.box);
  SolveTarget tau;  // E[tau] never shows up in a = b*Pr[x(tau) = b]
  tau.k = SolveTarget::K::Tau;
  try {
    solve_fact(simp, tau, implied_facts(w.prog, w.box), w.box);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.where() == "solve");
  }
}

TEST_CASE("solving reports residual unknowns when elimination starves") {
  // without the implication hints the per-case exit values stay unknown
  Program prog =
      parse_program(testutil::read_file(testutil::programs_dir() + "/miniabra.spp"));
  prog.pragmas.implies.clear();
  AnalysisOptions opt;
  opt.programDir = testutil::programs_dir();
  AnalysisResult r = analyze_program(prog, opt);
  CHECK(r.outcome == AnalysisResult::Outcome::Residual);
  CHECK(r.fact.status == Fact::Status::Residual);
  CHECK(!r.fact.unknowns.empty());
  CHECK(r.exit_code() == 2);
}

TEST_CASE("relational solving keeps one expectation on the right") {
  Loaded m = load("momentum.spp");
  Fact simp = apply_hints(apply_ost(m.sys, m.seed, m.martingale, m.sc, true), m.prog,
                          m.sys, m.box);
  Fact solved = solve_fact(simp, m.prog.pragmas.solveFor, implied_facts(m.prog, m.box), m.box);
  CHECK(solved.status == Fact::Status::Solved);
  CHECK(solved.targetText == "E{x(tau)}");
  CHECK(solved.solvedNum == EX(V("x", TimeIndex::tau(-1))));
  CHECK(solved.solvedDen == C(1));
  CHECK(closed_form(solved) == "E{x(tau-1)}");
}

TEST_CASE("fact files round-trip and cross-multiply solved forms") {
  Loaded g = load("geom.spp");
  Fact simp = apply_hints(apply_ost(g.sys, g.seed, g.martingale, g.sc, false), g.prog,
                          g.sys, g.box);
  Fact solved = solve_fact(simp, g.prog.pragmas.solveFor, {}, g.box);

  std::string text = fact_to_file(solved);
  Fact back = fact_from_file(text);
  CHECK(back.status == Fact::Status::HintSimplified);  // ready for elimination
  // (1 - p) * E{tau} = 1
  CHECK(back.lhs == (C(1) - P("p")) * EX(TS(TimeIndex::tau(0))));
  CHECK(back.rhs == C(1));

  // comment lines are stripped
  Fact commented = fact_from_file("; provenance note\n" + text);
  CHECK(commented.lhs == back.lhs);

  // raw facts survive unchanged
  Fact raw;
  raw.lhs = P("a");
  raw.rhs = EX(V("x", TimeIndex::tau(0)));
  Fact rawBack = fact_from_file(fact_to_file(raw));
  CHECK(rawBack.lhs == raw.lhs);
  CHECK(rawBack.rhs == raw.rhs);

  CHECK_THROWS_AS(fact_from_file("(not a fact"), Error);
}

TEST_CASE("ost equations survive a full program analysis") {
  AnalysisResult r = testutil::run_analysis("miniabra.spp");
  CHECK(r.outcome == AnalysisResult::Outcome::Solved);
  CHECK(r.assumedOst);
  CHECK(r.fact.solvedNum == C(14));
  CHECK(r.fact.solvedDen == C(1));
  CHECK(to_string(r.simplified.rhs) == "-E{tau} + 14");
}
