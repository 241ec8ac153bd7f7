#include "doctest.h"

#include <map>
#include <random>
#include <string>
#include <vector>

#include "ostap/diag.hpp"
#include "ostap/montecarlo.hpp"
#include "ostap/parser.hpp"
#include "ostap/recurrence.hpp"
#include "testutil.hpp"

using namespace ostap;
using testutil::C;
using testutil::P;
using testutil::TS;
using testutil::V;

namespace {

SymExpr Z(int proj = 0) { return SymExpr::atom(Atom::sample("z", TimeIndex::loop(0), proj)); }

Program parse_file(const std::string& name) {
  return parse_program(testutil::read_file(testutil::programs_dir() + "/" + name));
}

}  // namespace

TEST_CASE("step extraction on the success counter") {
  Program p = parse_file("geom.spp");
  StepSystem sys = extract_recurrences(p);

  CHECK(sys.firstLoopIndex == 1);
  CHECK(sys.processOrder == std::vector<std::string>{"x", "w"});
  CHECK(sys.sampleOrder == std::vector<std::string>{"z"});
  CHECK(sys.step.at("x") == V("x", TimeIndex::loop(-1)) + Z());
  CHECK(sys.step.at("w") == Z());
  REQUIRE(sys.initValues.at("x").size() == 1);
  CHECK(sys.initValues.at("x")[0] == C(0));
  CHECK(sys.initValues.at("w")[0] == C(1));
  CHECK(sys.guard == Formula::negate(Formula::eq(V("w", TimeIndex::loop(0)), C(0))));
}

TEST_CASE("second-order history widens the initial segment") {
  Program p = parse_file("momentum.spp");
  StepSystem sys = extract_recurrences(p);

  CHECK(sys.firstLoopIndex == 2);
  CHECK(sys.step.at("x") ==
        C(2) * V("x", TimeIndex::loop(-1)) - V("x", TimeIndex::loop(-2)) + Z());
  REQUIRE(sys.initValues.at("x").size() == 2);
  CHECK(sys.initValues.at("x")[0] == P("a"));
  CHECK(sys.initValues.at("x")[1] == P("a"));

  auto binds = sys.init_bindings();
  REQUIRE(binds.size() == 2);
  CHECK(binds[0].first == Atom::process("x", TimeIndex::abs(0)));
  CHECK(binds[0].second == P("a"));
  CHECK(binds[1].first == Atom::process("x", TimeIndex::abs(1)));
  CHECK(binds[1].second == P("a"));
}

TEST_CASE("assignments inline in statement order and untouched variables carry") {
  Program p = parse_program(
      "init x := 1\n"
      "init y := 0\n"
      "init u := 5\n"
      "while (x < 10) do\n"
      "  z ~ Uniform{-1, 1}\n"
      "  x := x[-1] + z\n"
      "  y := x + 1\n"
      "end\n");
  StepSystem sys = extract_recurrences(p);

  // y reads the value x was just assigned
  CHECK(sys.step.at("y") == V("x", TimeIndex::loop(-1)) + Z() + C(1));
  // u has no assignment
  CHECK(sys.step.at("u") == V("u", TimeIndex::loop(-1)));
}

TEST_CASE("tuple projections lower to indexed sample atoms") {
  Program p = parse_file("miniabra.spp");
  StepSystem sys = extract_recurrences(p);
  SymExpr s1 = SymExpr::atom(Atom::sample("s", TimeIndex::loop(0), 1));
  SymExpr s2 = SymExpr::atom(Atom::sample("s", TimeIndex::loop(0), 2));
  CHECK(sys.step.at("m1") == s1);
  CHECK(sys.step.at("m2") == V("m1", TimeIndex::loop(-1)) * s2);
}

TEST_CASE("seed lifting rejects samples and the time symbol") {
  Program p = parse_file("gamble.spp");
  SymExpr sq = lift_seed(p, parse_seed("x * x", p));
  CHECK(sq == V("x", TimeIndex::loop(0), 2));
  CHECK_THROWS_AS(parse_seed("z", p), Error);
  CHECK_THROWS_AS(parse_seed("x + t", p), Error);
}

TEST_CASE("trace runner agrees with a direct interpreter") {
  std::mt19937_64 rng(20260817);
  int checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    std::string text = testutil::gen_linear_program(rng);
    CAPTURE(text);
    Program prog = parse_program(text);

    std::vector<SampleRow> rows;
    for (int s = 0; s < 10; ++s) {
      Rational v = prog.samples[0].dist.outcomes[rng() % prog.samples[0].dist.outcomes.size()]
                       .value[0];
      rows.push_back({{"z", {v}}});
    }

    auto got = run_trace(prog, {}, rows);
    auto want = testutil::oracle_trace(prog, {}, rows);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) {
      REQUIRE(got[i].size() == want[i].size());
      for (const auto& [k, v] : want[i]) {
        REQUIRE(got[i].count(k));
        CHECK(got[i].at(k) == v);
        ++checked;
      }
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("trace runner validates its inputs") {
  Program p = parse_file("gamble.spp");
  std::map<std::string, Rational> params = {{"a", 3}, {"b", 10}};

  // missing sample
  CHECK_THROWS_AS(run_trace(p, params, {{}}), Error);
  // wrong arity
  CHECK_THROWS_AS(run_trace(p, params, {{{"z", {1, 1}}}}), Error);
  // unbound parameter
  CHECK_THROWS_AS(run_trace(p, {{"a", 3}}, {}), Error);

  // a well-formed walk
  std::vector<SampleRow> rows = {{{"z", {1}}}, {{"z", {1}}}, {{"z", {-1}}}};
  auto tr = run_trace(p, params, rows);
  REQUIRE(tr.size() == 4);
  CHECK(tr[0].at("x") == 3);
  CHECK(tr[1].at("x") == 4);
  CHECK(tr[2].at("x") == 5);
  CHECK(tr[3].at("x") == 4);
}

TEST_CASE("trace runner handles tuple samples and deep history") {
  Program mini = parse_file("miniabra.spp");
  std::vector<SampleRow> rows = {
      {{"s", {1, 1, 1}}},
      {{"s", {1, 1, 1}}},
      {{"s", {1, 1, 1}}},
  };
  auto tr = run_trace(mini, {}, rows);
  REQUIRE(tr.size() == 4);
  CHECK(tr[1].at("m1") == 1);
  CHECK(tr[1].at("m2") == 0);  // needs yesterday's m1
  CHECK(tr[2].at("m2") == 1);
  CHECK(tr[2].at("m3") == 0);
  CHECK(tr[3].at("m3") == 1);

  Program mom = parse_file("momentum.spp");
  std::map<std::string, Rational> params = {{"a", 3}, {"b", 10}};
  auto tm = run_trace(mom, params, {{{"z", {1}}}, {{"z", {-1}}}});
  REQUIRE(tm.size() == 4);
  CHECK(tm[0].at("x") == 3);
  CHECK(tm[1].at("x") == 3);
  CHECK(tm[2].at("x") == 4);  // 2*3 - 3 + 1
  CHECK(tm[3].at("x") == 4);  // 2*4 - 3 - 1
}
