#include "ostap/distribution.hpp"

#include <algorithm>
#include <set>

#include "ostap/diag.hpp"

namespace ostap {

Distribution Distribution::bernoulli(const SymExpr& p, const Rational& v1, const Rational& v0) {
  Distribution d;
  d.kind = Kind::Bernoulli;
  d.arity = 1;
  d.outcomes.push_back({p, {v1}});
  d.outcomes.push_back({SymExpr::constant(1) - p, {v0}});
  return d;
}

Distribution Distribution::uniform(const std::vector<Rational>& values) {
  if (values.empty()) throw Error("parse", "Uniform needs at least one value");
  Distribution d;
  d.kind = Kind::Uniform;
  d.arity = 1;
  SymExpr w = SymExpr::constant(Rational(1, static_cast<long>(values.size())));
  for (const auto& v : values) d.outcomes.push_back({w, {v}});
  return d;
}

Distribution Distribution::table(std::vector<Outcome> outcomes) {
  if (outcomes.empty()) throw Error("parse", "Table needs at least one entry");
  Distribution d;
  d.kind = Kind::Table;
  d.arity = static_cast<int>(outcomes.front().value.size());
  for (const auto& o : outcomes)
    if (static_cast<int>(o.value.size()) != d.arity)
      throw Error("parse", "Table entries must share one arity");
  d.outcomes = std::move(outcomes);
  return d;
}

Distribution Distribution::matches(const std::string& pattern, const SymExpr& L) {
  if (pattern.empty()) throw Error("parse", "Matches needs a nonempty pattern");
  Distribution d;
  d.kind = Kind::Matches;
  d.arity = static_cast<int>(pattern.size());
  d.pattern = pattern;
  d.alphabet = L;

  SymExpr perLetter;
  if (auto q = L.as_rational()) {
    if (*q <= 0) throw Error("parse", "Matches alphabet size must be positive");
    perLetter = SymExpr::constant(Rational(1) / *q);
  } else if (L.is_scalar() && L.terms().size() == 1) {
    // invert a single scalar monomial: flip the coefficient and every
    // parameter exponent (parameter exponents may be negative)
    Monomial m = L.terms().front();
    m.coeff = Rational(1) / m.coeff;
    for (auto& [name, e] : m.params) e = -e;
    perLetter = SymExpr::from_terms({std::move(m)});
  } else {
    throw Error("parse", "Matches alphabet size must be a constant or a parameter");
  }

  std::set<char> seen;
  for (char c : pattern) {
    if (!seen.insert(c).second) continue;
    Outcome o;
    o.prob = perLetter;
    o.value.reserve(pattern.size());
    for (char pc : pattern) o.value.push_back(pc == c ? 1 : 0);
    d.outcomes.push_back(std::move(o));
  }
  Outcome rest;
  rest.prob = SymExpr::constant(1) - SymExpr::constant(static_cast<long>(seen.size())) * perLetter;
  rest.value.assign(pattern.size(), Rational(0));
  d.outcomes.push_back(std::move(rest));
  return d;
}

SymExpr Distribution::moment(const std::vector<std::pair<int, int>>& projExp) const {
  SymExpr acc;
  for (const auto& o : outcomes) {
    Rational prod(1);
    for (auto [proj, exp] : projExp) {
      int idx = proj == 0 ? 0 : proj - 1;
      if (idx < 0 || idx >= arity)
        throw Error("rewrite", "projection " + std::to_string(proj) + " out of range for arity " +
                                   std::to_string(arity));
      if (exp < 0) throw Error("rewrite", "negative moment exponent");
      prod *= rat_pow(o.value[static_cast<size_t>(idx)], exp);
    }
    acc = acc + o.prob * SymExpr::constant(prod);
  }
  return acc;
}

std::pair<Rational, Rational> Distribution::support_bounds(int proj) const {
  int idx = proj == 0 ? 0 : proj - 1;
  if (idx < 0 || idx >= arity) throw Error("rewrite", "projection out of range");
  Rational lo = outcomes.front().value[static_cast<size_t>(idx)];
  Rational hi = lo;
  for (const auto& o : outcomes) {
    const Rational& v = o.value[static_cast<size_t>(idx)];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

std::string Distribution::validate() const {
  SymExpr total;
  for (const auto& o : outcomes) {
    if (!o.prob.is_scalar()) return "outcome probability is not a parameter expression";
    total = total + o.prob;
  }
  SymExpr one = SymExpr::constant(1);
  if (!(total - one).is_zero())
    return "outcome probabilities sum to " + ostap::to_string(total) + ", expected 1";
  return {};
}

std::string Distribution::to_string() const {
  auto tuple_str = [&](const std::vector<Rational>& v) {
    std::string s;
    if (v.size() != 1) s += "(";
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      s += rat_str(v[i]);
    }
    if (v.size() != 1) s += ")";
    return s;
  };
  switch (kind) {
    case Kind::Bernoulli:
      return "Bern(" + ostap::to_string(outcomes[0].prob) + ", {" + tuple_str(outcomes[0].value) + ", " +
             tuple_str(outcomes[1].value) + "})";
    case Kind::Uniform: {
      std::string s = "Uniform{";
      for (size_t i = 0; i < outcomes.size(); ++i) {
        if (i) s += ", ";
        s += tuple_str(outcomes[i].value);
      }
      return s + "}";
    }
    case Kind::Matches:
      return "Matches(\"" + pattern + "\", " + ostap::to_string(alphabet) + ")";
    case Kind::Table: {
      std::string s = "Table{";
      for (size_t i = 0; i < outcomes.size(); ++i) {
        if (i) s += ", ";
        s += tuple_str(outcomes[i].value) + " -> " + ostap::to_string(outcomes[i].prob);
      }
      return s + "}";
    }
  }
  return {};
}

}  // namespace ostap
