#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ostap/rational.hpp"
#include "ostap/symexpr.hpp"

namespace ostap {

// One point of a finite distribution: a probability (possibly a parameter
// expression, e.g. 1/L) and the sampled value, a tuple of rationals.
// Scalar distributions have arity 1.
struct Outcome {
  SymExpr prob;
  std::vector<Rational> value;
};

struct Distribution {
  enum class Kind { Bernoulli, Uniform, Table, Matches };

  Kind kind = Kind::Table;
  int arity = 1;
  std::vector<Outcome> outcomes;

  // Matches only: the pattern string and the alphabet size expression.
  std::string pattern;
  SymExpr alphabet;

  // Bern(p, {v1, v0}): value v1 with probability p, v0 otherwise.
  static Distribution bernoulli(const SymExpr& p, const Rational& v1, const Rational& v0);

  // Uniform{v1, ..., vn}: each listed value with probability 1/n.
  // Repeats are allowed and weight the value accordingly.
  static Distribution uniform(const std::vector<Rational>& values);

  // Explicit finite table; tuples must share one arity.
  static Distribution table(std::vector<Outcome> outcomes);

  // Indicator tuple of a uniform random letter against `pattern` over an
  // alphabet of size L: coordinate k is 1 exactly when the letter equals
  // pattern[k]. One outcome per distinct pattern letter (probability 1/L)
  // plus a catch-all zero tuple for the remaining L - d letters.
  // Distinct letters beyond L make the catch-all probability negative,
  // which the validity check rejects.
  static Distribution matches(const std::string& pattern, const SymExpr& L);

  // E[prod_k pi_{proj}(s)^exp] as an exact sum over outcomes. Projections
  // are 1-based; 0 addresses coordinate 0 (the scalar view).
  SymExpr moment(const std::vector<std::pair<int, int>>& projExp) const;

  // Smallest and largest value of one coordinate across all outcomes.
  std::pair<Rational, Rational> support_bounds(int proj) const;

  // Probabilities must sum to 1 exactly (symbolically). Returns an error
  // message, or empty when fine. Per-outcome nonnegativity can depend on
  // parameter ranges and is checked later, against the parameter box.
  std::string validate() const;

  std::string to_string() const;
};

}  // namespace ostap
