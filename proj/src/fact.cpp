#include "ostap/fact.hpp"

#include <algorithm>

#include "ostap/diag.hpp"
#include "ostap/sumsimp.hpp"

namespace ostap {

std::string to_string(Fact::Status s) {
  switch (s) {
    case Fact::Status::Raw: return "Raw";
    case Fact::Status::HintSimplified: return "HintSimplified";
    case Fact::Status::Solved: return "Solved";
    case Fact::Status::Residual: return "Residual";
  }
  return "?";
}

// --- optional stopping ------------------------------------------------------

Fact apply_ost(const StepSystem& sys, const SymExpr& seed, const SymExpr& martingale,
               const SideConditionReport& sc, bool assumeOst) {
  if (!sc.all_verified() && !assumeOst) {
    std::string open;
    for (const auto& i : sc.items)
      if (i.status != CondStatus::Verified) open += (open.empty() ? "" : ", ") + i.name;
    throw Error("ost-refused",
                "side conditions not verified (" + open + "); pass --assume-ost to proceed");
  }
  auto inits = sys.init_bindings();
  Fact f;
  f.lhs = substitute(
      retime(seed, TimeBase::Loop, "", TimeIndex::abs(sys.firstLoopIndex - 1)), inits);
  SymExpr mtau = substitute(retime(martingale, TimeBase::Loop, "", TimeIndex::tau(0)), inits);
  f.rhs = SymExpr::atom(Atom::exp_node(mtau));
  f.status = Fact::Status::Raw;
  return f;
}

// --- hint simplification ----------------------------------------------------

namespace {

// E[body] -> scalars out, one expectation atom per remaining monomial
SymExpr expand_exp(const SymExpr& body) {
  SymExpr out;
  for (const auto& m : body.terms()) {
    if (m.atoms.empty()) {
      out = out + SymExpr::from_terms({m});
      continue;
    }
    Monomial scal = m;
    scal.atoms.clear();
    Monomial inner;
    inner.coeff = 1;
    inner.atoms = m.atoms;
    out = out + SymExpr::from_terms({scal}) *
                    SymExpr::atom(Atom::exp_node(SymExpr::from_terms({inner})));
  }
  return out;
}

SymExpr eval_inds(const SymExpr& e, const ParamBox& box) {
  SymExpr out;
  for (const auto& m : e.terms()) {
    Monomial scal = m;
    scal.atoms.clear();
    SymExpr factor = SymExpr::from_terms({scal});
    bool dead = false;
    for (const auto& [a, ex] : m.atoms) {
      if (a.kind == AtomKind::IndNode) {
        if (box.proves(a.ind->f)) continue;  // factor of one
        if (box.refutes(a.ind->f)) {
          dead = true;
          break;
        }
      }
      factor = factor * SymExpr::atom(a, ex);
    }
    if (!dead) out = out + factor;
  }
  return out;
}

// applies fn to every expectation atom's body at the top level
SymExpr map_exps(const SymExpr& e, const std::function<SymExpr(const SymExpr&)>& fn) {
  SymExpr out;
  for (const auto& m : e.terms()) {
    Monomial scal = m;
    scal.atoms.clear();
    SymExpr factor = SymExpr::from_terms({scal});
    for (const auto& [a, ex] : m.atoms) {
      SymExpr repl = a.kind == AtomKind::ExpNode ? fn(a.expn->body) : SymExpr::atom(a);
      factor = factor * repl.pow(ex);
    }
    out = out + factor;
  }
  return out;
}

bool mentions_pinned_tau(const SymExpr& body, const std::vector<ExitCase>& cases) {
  bool hit = false;
  visit_atoms(body, [&](const Atom& a) {
    if (a.kind != AtomKind::Process || a.index.base != TimeBase::Tau || a.index.offset != 0)
      return;
    for (const auto& c : cases)
      for (const auto& [v, val] : c.values)
        if (v == a.name) hit = true;
  });
  return hit;
}

std::vector<std::pair<Atom, SymExpr>> tau_bindings(const ExitCase& c) {
  std::vector<std::pair<Atom, SymExpr>> bind;
  for (const auto& [v, val] : c.values)
    bind.emplace_back(Atom::process(v, TimeIndex::tau(0)), val);
  return bind;
}

}  // namespace

Fact apply_hints(const Fact& f, const Program& prog, const StepSystem& sys,
                 const ParamBox& box) {
  auto cases = exit_cases(prog, box);
  SumSimplifyOptions opts;
  opts.firstLoopIndex = sys.firstLoopIndex;
  for (const auto& [v, val] : every_eqs(prog)) opts.everyEq.push_back({v, val});

  auto singleBind =
      cases.size() == 1 ? tau_bindings(cases.front()) : std::vector<std::pair<Atom, SymExpr>>{};

  SymExpr rhs = f.rhs;
  for (int round = 0; round < 64; ++round) {
    SymExpr before = rhs;
    // collapse sums, substitute certain exit values, evaluate indicators,
    // and distribute the expectation
    rhs = map_exps(rhs, [&](const SymExpr& bodyIn) {
      SymExpr body = simplify_sum(bodyIn, opts);
      body = substitute(body, sys.init_bindings());  // telescoping exposes init states
      if (!singleBind.empty()) body = substitute(body, singleBind);
      body = eval_inds(body, box);
      return expand_exp(body);
    });
    // split per-case where disjunctive exit hints pin a value
    if (cases.size() > 1) {
      rhs = map_exps(rhs, [&](const SymExpr& body) {
        if (contains_atom_kind(body, AtomKind::IndNode) || !mentions_pinned_tau(body, cases))
          return SymExpr::atom(Atom::exp_node(body));
        SymExpr split;
        for (const auto& c : cases) {
          Formula evt = retime(c.when, TimeBase::Loop, "", TimeIndex::tau(0));
          SymExpr bd =
              substitute(body, tau_bindings(c)) * SymExpr::atom(Atom::ind_node(evt));
          split = split + SymExpr::atom(Atom::exp_node(bd));
        }
        return split;
      });
    }
    if ((rhs - before).is_zero()) break;
  }

  Fact out = f;
  out.rhs = rhs;
  out.status = Fact::Status::HintSimplified;
  return out;
}

std::vector<Fact> implied_facts(const Program& prog, const ParamBox& box) {
  std::vector<Fact> out;
  auto cases = exit_cases(prog, box);
  if (cases.size() < 2) return out;
  SymExpr sum;
  for (const auto& c : cases) {
    Formula evt = retime(c.when, TimeBase::Loop, "", TimeIndex::tau(0));
    sum = sum + SymExpr::atom(Atom::exp_node(SymExpr::atom(Atom::ind_node(evt))));
  }
  Fact f;
  f.lhs = sum;
  f.rhs = SymExpr::constant(1);
  f.status = Fact::Status::HintSimplified;
  out.push_back(std::move(f));
  return out;
}

// --- solving ----------------------------------------------------------------

namespace {

std::vector<Atom> unknown_atoms(const SymExpr& e) {
  std::vector<Atom> out;
  for (const auto& m : e.terms())
    for (const auto& [a, ex] : m.atoms)
      if (a.kind == AtomKind::ExpNode &&
          std::find(out.begin(), out.end(), a) == out.end())
        out.push_back(a);
  return out;
}

// scalar coefficient of a linearly occurring atom; nullopt when the atom
// appears squared or multiplied into other unknowns
std::optional<SymExpr> linear_coeff(const SymExpr& e, const Atom& u) {
  SymExpr c;
  bool found = false;
  for (const auto& m : e.terms()) {
    auto it = std::find_if(m.atoms.begin(), m.atoms.end(),
                           [&](const auto& ae) { return ae.first == u; });
    if (it == m.atoms.end()) continue;
    if (it->second != 1) return std::nullopt;
    Monomial rest = m;
    rest.atoms.erase(rest.atoms.begin() + (it - m.atoms.begin()));
    if (!rest.atoms.empty()) return std::nullopt;
    c = c + SymExpr::from_terms({rest});
    found = true;
  }
  if (!found) return std::nullopt;
  return c;
}

Rational rgcd(const Rational& a, const Rational& b) {
  using boost::multiprecision::gcd;
  if (a == 0) return b < 0 ? Rational(-b) : b;
  if (b == 0) return a < 0 ? Rational(-a) : a;
  BigInt n = gcd(numerator(a) * denominator(b), numerator(b) * denominator(a));
  if (n < 0) n = -n;
  return Rational(n, denominator(a) * denominator(b));
}

// divides out the numeric gcd and shared parameter powers; flips signs so
// the denominator's leading coefficient is positive
void reduce_fraction(SymExpr& num, SymExpr& den) {
  if (num.is_zero()) {
    den = SymExpr::constant(1);
    return;
  }
  std::vector<Monomial> all = num.terms();
  const auto& dt = den.terms();
  all.insert(all.end(), dt.begin(), dt.end());

  Rational g = 0;
  std::map<std::string, int> minExp;
  bool first = true;
  for (const auto& m : all) {
    g = rgcd(g, m.coeff);
    std::map<std::string, int> cur;
    for (const auto& [p, e] : m.params) cur[p] = e;
    if (first) {
      minExp = cur;
      first = false;
    } else {
      for (auto it = minExp.begin(); it != minExp.end();) {
        auto f2 = cur.find(it->first);
        int e2 = f2 == cur.end() ? 0 : f2->second;
        it->second = std::min(it->second, e2);
        if (it->second == 0)
          it = minExp.erase(it);
        else
          ++it;
      }
      for (const auto& [p, e] : cur)
        if (e < 0 && !minExp.count(p)) minExp[p] = std::min(e, 0);
    }
  }
  if (g == 0) g = 1;

  auto divide = [&](const SymExpr& e) {
    std::vector<Monomial> out;
    for (Monomial m : e.terms()) {
      m.coeff = m.coeff / g;
      for (const auto& [p, drop] : minExp) {
        bool seen = false;
        for (auto& [q, ex] : m.params)
          if (q == p) {
            ex -= drop;
            seen = true;
          }
        if (!seen) m.params.emplace_back(p, -drop);
      }
      out.push_back(std::move(m));
    }
    return SymExpr::from_terms(std::move(out));
  };
  num = divide(num);
  den = divide(den);
  if (!den.terms().empty() && den.terms().front().coeff < 0) {
    num = -num;
    den = -den;
  }
}

bool same_event(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Formula::Kind::True:
    case Formula::Kind::False: return true;
    case Formula::Kind::Eq: {
      SymExpr d1 = a.lhs - a.rhs, d2 = b.lhs - b.rhs;
      return (d1 - d2).is_zero() || (d1 + d2).is_zero();
    }
    case Formula::Kind::Lt:
    case Formula::Kind::Le:
      return ((a.lhs - a.rhs) - (b.lhs - b.rhs)).is_zero();
    default: break;
  }
  if (a.kids.size() != b.kids.size()) return false;
  for (size_t i = 0; i < a.kids.size(); ++i)
    if (!same_event(a.kids[i], b.kids[i])) return false;
  return true;
}

std::optional<Atom> match_target(const std::vector<Atom>& unknowns, const SolveTarget& t) {
  SymExpr want = target_expr(t);
  const Atom& wa = want.terms().front().atoms.front().first;
  for (const auto& u : unknowns) {
    if (u == wa) return u;
    if (t.k == SolveTarget::K::Prob && u.expn) {
      const auto& bt = u.expn->body.terms();
      if (bt.size() == 1 && bt.front().atoms.size() == 1 &&
          bt.front().coeff == 1 && bt.front().params.empty()) {
        const Atom& inner = bt.front().atoms.front().first;
        if (inner.kind == AtomKind::IndNode && wa.expn) {
          const auto& wb = wa.expn->body.terms();
          const Atom& winner = wb.front().atoms.front().first;
          if (winner.kind == AtomKind::IndNode && same_event(inner.ind->f, winner.ind->f))
            return u;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

SymExpr target_expr(const SolveTarget& t) {
  switch (t.k) {
    case SolveTarget::K::Tau:
      return SymExpr::atom(Atom::exp_node(SymExpr::time_scalar(TimeIndex::tau(0))));
    case SolveTarget::K::Mean:
      return SymExpr::atom(
          Atom::exp_node(SymExpr::atom(Atom::process(t.var, TimeIndex::tau(0)))));
    case SolveTarget::K::Prob: {
      LiftCtx ctx;
      ctx.varBase = TimeIndex::tau(0);
      return SymExpr::atom(
          Atom::exp_node(SymExpr::atom(Atom::ind_node(lift_formula(t.formula, ctx)))));
    }
  }
  throw Error("solve", "unhandled target kind");
}

Fact solve_fact(const Fact& f, const std::optional<SolveTarget>& target,
                const std::vector<Fact>& known, const ParamBox& box) {
  SymExpr eq = f.lhs - f.rhs;

  std::vector<SymExpr> rels;
  for (const auto& k : known) rels.push_back(k.lhs - k.rhs);

  std::optional<Atom> keep;
  if (target) keep = match_target(unknown_atoms(eq), *target);

  // Each rel may be used once, to eliminate one unknown it shares with the
  // equation. Prefer the rel bringing in the fewest unknowns the equation
  // does not already have, so a tight fact beats a broad one.
  std::vector<bool> used(rels.size(), false);
  for (;;) {
    auto us = unknown_atoms(eq);
    int bestFresh = -1;
    size_t bestI = 0;
    SymExpr bestP, bestF;
    for (size_t i = 0; i < rels.size(); ++i) {
      if (used[i]) continue;
      auto ru = unknown_atoms(rels[i]);
      for (const auto& u : us) {
        if (keep && u == *keep) continue;
        auto cP = linear_coeff(eq, u);
        auto cF = linear_coeff(rels[i], u);
        if (!cP || !cF || !cP->is_scalar() || !cF->is_scalar()) continue;
        int fresh = 0;
        for (const auto& ra : ru) {
          if (ra == u) continue;
          if (std::find(us.begin(), us.end(), ra) == us.end()) ++fresh;
        }
        if (bestFresh < 0 || fresh < bestFresh) {
          bestFresh = fresh;
          bestI = i;
          bestP = *cP;
          bestF = *cF;
        }
      }
    }
    if (bestFresh < 0) break;
    eq = bestF * eq - bestP * rels[bestI];
    used[bestI] = true;
  }

  auto isolate = [&](const Atom& T) -> std::optional<Fact> {
    auto cT = linear_coeff(eq, T);
    if (!cT || cT->is_zero() || !cT->is_scalar()) return std::nullopt;
    SymExpr rest = eq - *cT * SymExpr::atom(T);
    if (unknown_atoms(rest).size() > 1) return std::nullopt;
    SymExpr num = -rest, den = *cT;
    reduce_fraction(num, den);
    Fact s = f;
    s.status = Fact::Status::Solved;
    s.lhs = SymExpr::atom(T);
    s.solvedNum = num;
    s.solvedDen = den;
    s.targetText = to_string(SymExpr::atom(T));
    return s;
  };

  if (target) {
    auto T = match_target(unknown_atoms(eq), *target);
    if (!T) throw Error("solve", "the requested target does not occur in the final fact");
    if (auto s = isolate(*T)) return *s;
  } else {
    // preference order: stopping time, then newest process mean, then events
    std::vector<Atom> cands;
    auto us = unknown_atoms(eq);
    Atom tauAtom = Atom::exp_node(SymExpr::time_scalar(TimeIndex::tau(0)));
    for (const auto& u : us)
      if (u == tauAtom) cands.push_back(u);
    auto singleProcAt = [](const Atom& u, int offset) {
      const auto& bt = u.expn->body.terms();
      if (bt.size() != 1 || bt.front().atoms.size() != 1 || bt.front().coeff != 1 ||
          !bt.front().params.empty() || bt.front().atoms.front().second != 1)
        return false;
      const Atom& a = bt.front().atoms.front().first;
      return a.kind == AtomKind::Process && a.index.base == TimeBase::Tau &&
             a.index.offset == offset;
    };
    for (const auto& u : us)
      if (singleProcAt(u, 0)) cands.push_back(u);
    for (const auto& u : us)
      if (std::find(cands.begin(), cands.end(), u) == cands.end()) cands.push_back(u);
    for (const auto& T : cands)
      if (auto s = isolate(T)) return *s;
  }

  Fact r = f;
  r.status = Fact::Status::Residual;
  for (const auto& u : unknown_atoms(eq)) r.unknowns.push_back(SymExpr::atom(u));
  return r;
}

// --- fact files ---------------------------------------------------------------

std::string fact_to_file(const Fact& f) {
  SymExpr lhs = f.lhs, rhs = f.rhs;
  if (f.status == Fact::Status::Solved) {
    lhs = f.solvedDen * f.lhs;
    rhs = f.solvedNum;
  }
  return "(fact " + sexpr(lhs) + " " + sexpr(rhs) + ")\n";
}

Fact fact_from_file(const std::string& text) {
  // strip ';' comments
  std::string body;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    size_t c = line.find(';');
    if (c != std::string::npos) line = line.substr(0, c);
    body += line + " ";
    pos = eol + 1;
  }
  size_t at = body.find("(fact");
  if (at == std::string::npos) throw Error("fact-file", "expected a (fact lhs rhs) form");
  size_t i = at + 5;
  auto skip_ws = [&] {
    while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
  };
  auto take_sexpr = [&]() -> std::string {
    skip_ws();
    if (i >= body.size() || body[i] != '(')
      throw Error("fact-file", "expected an s-expression");
    size_t start = i;
    int depth = 0;
    for (; i < body.size(); ++i) {
      if (body[i] == '(') ++depth;
      if (body[i] == ')' && --depth == 0) {
        ++i;
        return body.substr(start, i - start);
      }
    }
    throw Error("fact-file", "unbalanced parentheses");
  };
  std::string l = take_sexpr();
  std::string r = take_sexpr();
  Fact f;
  f.lhs = parse_sexpr_expr(l);
  f.rhs = parse_sexpr_expr(r);
  f.status = Fact::Status::HintSimplified;
  return f;
}

}  // namespace ostap
