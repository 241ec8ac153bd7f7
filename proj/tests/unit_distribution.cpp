#include "doctest.h"

#include <utility>
#include <vector>

#include "ostap/distribution.hpp"
#include "ostap/rational.hpp"
#include "ostap/symexpr.hpp"
#include "testutil.hpp"

using namespace ostap;
using testutil::C;
using testutil::CQ;
using testutil::P;

namespace {

// Independent moment computation straight from the outcome table.
SymExpr brute_moment(const Distribution& d, const std::vector<std::pair<int, int>>& pe) {
  SymExpr acc = SymExpr::zero();
  for (const auto& o : d.outcomes) {
    Rational v = 1;
    for (const auto& [proj, exp] : pe) {
      int idx = proj == 0 ? 0 : proj - 1;
      v *= rat_pow(o.value.at((size_t)idx), exp);
    }
    acc += o.prob * CQ(v);
  }
  return acc;
}

// Every multi-index over `arity` coordinates with total degree <= maxDeg.
void all_monomials(int arity, int maxDeg, std::vector<std::vector<std::pair<int, int>>>& out,
                   std::vector<std::pair<int, int>>& cur, int fromProj, int degLeft) {
  out.push_back(cur);
  for (int p = fromProj; p <= arity; ++p)
    for (int e = 1; e <= degLeft; ++e) {
      cur.emplace_back(p, e);
      all_monomials(arity, maxDeg, out, cur, p + 1, degLeft - e);
      cur.pop_back();
    }
}

void check_all_moments(const Distribution& d, int maxDeg = 6) {
  std::vector<std::vector<std::pair<int, int>>> monos;
  std::vector<std::pair<int, int>> cur;
  int lo = d.arity == 1 ? 0 : 1;
  if (d.arity == 1) {
    for (int e = 0; e <= maxDeg; ++e)
      monos.push_back(e == 0 ? std::vector<std::pair<int, int>>{}
                             : std::vector<std::pair<int, int>>{{0, e}});
  } else {
    all_monomials(d.arity, maxDeg, monos, cur, lo, maxDeg);
  }
  for (const auto& pe : monos) {
    CAPTURE(d.to_string());
    CHECK(d.moment(pe) == brute_moment(d, pe));
  }
}

}  // namespace

TEST_CASE("bernoulli moments") {
  Distribution d = Distribution::bernoulli(P("p"), 1, 0);
  CHECK(d.moment({{0, 1}}) == P("p"));
  CHECK(d.moment({{0, 5}}) == P("p"));  // 0/1 valued
  CHECK(d.moment({}) == C(1));

  Distribution pm = Distribution::bernoulli(CQ(Rational(1, 3)), 2, -1);
  CHECK(pm.moment({{0, 1}}) == C(0));                 // 2/3*(-1) + 1/3*2
  CHECK(pm.moment({{0, 2}}) == C(2));                 // 1/3*4 + 2/3*1
  CHECK(pm.support_bounds(0) == std::make_pair(Rational(-1), Rational(2)));
  CHECK(pm.validate().empty());
}

TEST_CASE("uniform moments weight repeats") {
  Distribution d = Distribution::uniform({1, 2, 3});
  CHECK(d.moment({{0, 1}}) == C(2));
  CHECK(d.moment({{0, 2}}) == CQ(Rational(14, 3)));

  Distribution rep = Distribution::uniform({0, 0, 3});
  CHECK(rep.moment({{0, 1}}) == C(1));
  CHECK(rep.support_bounds(0) == std::make_pair(Rational(0), Rational(3)));
  CHECK(rep.validate().empty());
}

TEST_CASE("table moments over tuples") {
  Distribution d = Distribution::table({
      {CQ(Rational(1, 3)), {1, 2}},
      {CQ(Rational(2, 3)), {0, 5}},
  });
  CHECK(d.arity == 2);
  CHECK(d.moment({{1, 1}, {2, 2}}) == CQ(Rational(4, 3)));  // 1/3*1*4
  CHECK(d.moment({{2, 1}}) == C(4));                        // 2/3 + 10/3
  CHECK(d.support_bounds(1) == std::make_pair(Rational(0), Rational(1)));
  CHECK(d.support_bounds(2) == std::make_pair(Rational(2), Rational(5)));
}

TEST_CASE("probability sums are validated symbolically") {
  Distribution bad = Distribution::table({
      {CQ(Rational(1, 3)), {1}},
      {CQ(Rational(1, 3)), {0}},
  });
  CHECK(!bad.validate().empty());

  // parameterized probabilities cancel symbolically
  Distribution ok = Distribution::table({
      {P("q"), {1}},
      {C(1) - P("q"), {0}},
  });
  CHECK(ok.validate().empty());
}

TEST_CASE("letter-match tuples") {
  Distribution d = Distribution::matches("AAB", P("L"));
  // outcomes: letter A, letter B, and the catch-all
  CHECK(d.arity == 3);
  CHECK(d.outcomes.size() == 3);
  CHECK(d.validate().empty());

  SymExpr invL = P("L", -1);
  CHECK(d.moment({{1, 1}}) == invL);            // coordinate hits iff the letter is A
  CHECK(d.moment({{1, 1}, {2, 1}}) == invL);    // same letter, same event
  CHECK(d.moment({{1, 1}, {3, 1}}) == SymExpr::zero());  // A and B never together
  CHECK(d.moment({{3, 4}}) == invL);
  CHECK(d.support_bounds(2) == std::make_pair(Rational(0), Rational(1)));

  // concrete alphabet: catch-all mass is (L-d)/L
  Distribution two = Distribution::matches("111", C(2));
  SymExpr total = SymExpr::zero();
  for (const auto& o : two.outcomes) total += o.prob;
  CHECK(total == C(1));
}

TEST_CASE("moment matches the brute-force sum through degree six") {
  check_all_moments(Distribution::bernoulli(CQ(Rational(2, 5)), 1, 0));
  check_all_moments(Distribution::bernoulli(P("p"), 3, -2));
  check_all_moments(Distribution::uniform({-2, 0, 3}));
  check_all_moments(Distribution::uniform({1, 2, 3, 4, 5, 6}));
  check_all_moments(Distribution::table({
      {CQ(Rational(1, 2)), {1, 2}},
      {CQ(Rational(1, 6)), {-1, 0}},
      {CQ(Rational(1, 3)), {0, 4}},
  }));
  check_all_moments(Distribution::matches("AAB", P("L")));
  check_all_moments(Distribution::matches("ABC", C(4)));
}
