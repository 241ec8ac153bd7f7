#include "ostap/sidecond.hpp"

#include <algorithm>
#include <set>

#include "ostap/diag.hpp"
#include "ostap/doob.hpp"
#include "ostap/hints.hpp"
#include "ostap/rewrite.hpp"

namespace ostap {

namespace {

std::string sample_key(const Atom& a) { return a.name + "#" + std::to_string(a.proj); }

// samples become plainly named process atoms so interval environments can
// key on names alone
SymExpr rename_samples(const SymExpr& e) {
  std::vector<std::pair<Atom, SymExpr>> bind;
  std::set<std::string> seen;
  visit_atoms(e, [&](const Atom& a) {
    if (a.kind != AtomKind::Sample) return;
    if (!seen.insert(to_string(a)).second) return;
    bind.emplace_back(a, SymExpr::atom(Atom::process(sample_key(a), a.index)));
  });
  return substitute(e, bind);
}

// --- guard mining -----------------------------------------------------------

struct GuardFacts {
  std::map<std::string, SymInterval> strict;
  std::map<std::string, std::vector<SymExpr>> excluded;
};

struct Affine {
  std::string var;
  Rational c;
  SymExpr k;
};

// d == c*var + k with rational c and scalar k
std::optional<Affine> single_var_affine(const SymExpr& d) {
  std::optional<Affine> out;
  SymExpr k;
  for (const auto& m : d.terms()) {
    if (m.atoms.empty()) {
      k = k + SymExpr::from_terms({m});
      continue;
    }
    if (out || m.atoms.size() != 1 || !m.params.empty()) return std::nullopt;
    const auto& [a, e] = m.atoms.front();
    if (e != 1 || a.kind != AtomKind::Process) return std::nullopt;
    out = Affine{a.name, m.coeff, SymExpr::zero()};
  }
  if (!out) return std::nullopt;
  out->k = k;
  return out;
}

void intersect_into(std::map<std::string, SymInterval>* m, const std::string& var,
                    const SymInterval& iv, const ParamBox& box) {
  auto it = m->find(var);
  if (it == m->end())
    (*m)[var] = iv;
  else
    it->second = sintersect(it->second, iv, box);
}

void mine_conjunct(const Formula& f, bool negated, GuardFacts* out, const ParamBox& box) {
  switch (f.kind) {
    case Formula::Kind::And:
      if (negated) return;
      for (const auto& k : f.kids) mine_conjunct(k, false, out, box);
      return;
    case Formula::Kind::Not:
      mine_conjunct(f.kids.front(), !negated, out, box);
      return;
    case Formula::Kind::Eq:
    case Formula::Kind::Lt:
    case Formula::Kind::Le: break;
    default: return;
  }
  auto af = single_var_affine(f.lhs - f.rhs);
  if (!af || af->c == 0) return;
  SymExpr bound = af->k * SymExpr::constant(Rational(-1) / af->c);
  bool flip = af->c < 0;  // c*x + k cmp 0  ==  x cmp' bound
  if (f.kind == Formula::Kind::Eq) {
    if (negated)
      (*out).excluded[af->var].push_back(bound);
    else
      intersect_into(&out->strict, af->var, SymInterval::point(bound), box);
    return;
  }
  if (negated) return;  // negated orderings never come out of the frontend
  SymInterval iv;
  bool open = f.kind == Formula::Kind::Lt;
  if (!flip) {  // x < bound / x <= bound
    iv.hiInf = false;
    iv.hi = bound;
    iv.hiOpen = open;
  } else {
    iv.loInf = false;
    iv.lo = bound;
    iv.loOpen = open;
  }
  intersect_into(&out->strict, af->var, iv, box);
}

GuardFacts mine_guard(const Formula& g, const ParamBox& box) {
  GuardFacts out;
  mine_conjunct(g, false, &out, box);
  return out;
}

SymInterval closed_of(SymInterval iv) {
  iv.loOpen = false;
  iv.hiOpen = false;
  return iv;
}

// --- integrality ------------------------------------------------------------

std::set<std::string> integer_vars(const StepSystem& sys) {
  std::set<std::string> intSamples;
  for (const auto& [s, d] : sys.dists) {
    for (int p = 0; p <= d.arity; ++p) {
      int coord = p == 0 ? 0 : p - 1;
      bool ok = true;
      for (const auto& o : d.outcomes)
        if (!is_integer(o.value.at(coord))) {
          ok = false;
          break;
        }
      if (ok) intSamples.insert(s + "#" + std::to_string(p));
    }
  }
  std::set<std::string> ints;
  for (const auto& [v, vals] : sys.initValues) {
    bool ok = true;
    for (const auto& val : vals) {
      auto q = val.as_rational();
      if (!q || !is_integer(*q)) {
        ok = false;
        break;
      }
    }
    if (ok) ints.insert(v);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [v, rhs] : sys.step) {
      if (!ints.count(v)) continue;
      bool ok = true;
      for (const auto& m : rhs.terms()) {
        if (!m.params.empty() || !is_integer(m.coeff)) {
          ok = false;
          break;
        }
        for (const auto& [a, e] : m.atoms) {
          if (a.kind == AtomKind::Process && ints.count(a.name)) continue;
          if (a.kind == AtomKind::Sample && intSamples.count(sample_key(a))) continue;
          ok = false;
          break;
        }
        if (!ok) break;
      }
      if (!ok) {
        ints.erase(v);
        changed = true;
      }
    }
  }
  return ints;
}

// --- reachable-value widening -----------------------------------------------

bool same_endpoint(bool aInf, const SymExpr& a, bool aOpen, bool bInf, const SymExpr& b,
                   bool bOpen, const ParamBox& box) {
  if (aInf || bInf) return aInf == bInf;
  return aOpen == bOpen && box.sign(a - b) == Sign::Zero;
}

std::map<std::string, SymInterval> widened_reach(const StepSystem& sys, const ParamBox& box) {
  std::map<std::string, SymInterval> w;
  for (const auto& [v, vals] : sys.initValues) {
    SymInterval iv = SymInterval::point(vals.at(0));
    for (size_t k = 1; k < vals.size(); ++k) iv = shull(iv, SymInterval::point(vals[k]), box);
    w[v] = iv;
  }
  std::map<std::string, SymInterval> senv;
  for (const auto& [s, d] : sys.dists) {
    for (int p = 0; p <= d.arity; ++p) {
      auto [lo, hi] = d.support_bounds(p);
      SymInterval iv;
      iv.loInf = iv.hiInf = false;
      iv.lo = SymExpr::constant(lo);
      iv.hi = SymExpr::constant(hi);
      senv[s + "#" + std::to_string(p)] = iv;
    }
  }
  std::map<std::string, SymExpr> steps;
  for (const auto& [v, rhs] : sys.step) steps[v] = rename_samples(rhs);

  const int widenAfter = 16;
  const int cap = widenAfter + static_cast<int>(steps.size()) + 4;
  for (int round = 1; round <= cap; ++round) {
    std::map<std::string, SymInterval> env = w;
    env.insert(senv.begin(), senv.end());
    std::map<std::string, SymInterval> next = w;
    bool changed = false;
    for (const auto& [v, rhs] : steps) {
      auto iv = eval_interval(rhs, env, box);
      SymInterval n = iv ? shull(w.at(v), *iv, box) : SymInterval::top();
      const SymInterval& cur = w.at(v);
      bool loSame = same_endpoint(n.loInf, n.lo, n.loOpen, cur.loInf, cur.lo, cur.loOpen, box);
      bool hiSame = same_endpoint(n.hiInf, n.hi, n.hiOpen, cur.hiInf, cur.hi, cur.hiOpen, box);
      if (!loSame) {
        changed = true;
        if (round >= widenAfter) {
          n.loInf = true;
          n.loOpen = false;
        }
      }
      if (!hiSame) {
        changed = true;
        if (round >= widenAfter) {
          n.hiInf = true;
          n.hiOpen = false;
        }
      }
      next[v] = n;
    }
    w = std::move(next);
    if (!changed) break;
  }
  return w;
}

std::vector<std::pair<Atom, SymExpr>> step_bindings(const SymExpr& e, const StepSystem& sys) {
  std::vector<std::pair<Atom, SymExpr>> bind;
  std::set<std::string> seen;
  visit_atoms(e, [&](const Atom& a) {
    if (a.kind != AtomKind::Process || a.index.base != TimeBase::Loop || a.index.offset != 0)
      return;
    if (!seen.insert(a.name).second) return;
    auto it = sys.step.find(a.name);
    if (it != sys.step.end()) bind.emplace_back(a, it->second);
  });
  return bind;
}

}  // namespace

// --- state bounds -----------------------------------------------------------

std::map<std::string, SymInterval> seed_state_bounds(const StepSystem& sys, const Program& prog,
                                                     const ParamBox& box) {
  auto w = widened_reach(sys, box);
  GuardFacts gf = mine_guard(sys.guard, box);
  auto cases = exit_cases(prog, box);
  std::map<std::string, SymInterval> out;
  for (const auto& [v, wiv] : w) {
    auto it = gf.strict.find(v);
    if (it == gf.strict.end()) {
      out[v] = wiv;
      continue;
    }
    SymInterval h = closed_of(it->second);
    for (const auto& c : cases)
      for (const auto& [cv, val] : c.values)
        if (cv == v && val.is_scalar()) h = shull(h, SymInterval::point(val), box);
    for (const auto& val : sys.initValues.at(v)) h = shull(h, SymInterval::point(val), box);
    out[v] = sintersect(wiv, h, box);
  }
  return out;
}

std::map<std::string, SymInterval> running_state_bounds(const StepSystem& sys,
                                                        const Program& prog,
                                                        const ParamBox& box) {
  auto w = widened_reach(sys, box);
  GuardFacts gf = mine_guard(sys.guard, box);
  auto ints = integer_vars(sys);
  auto eqs = every_eqs(prog);
  std::map<std::string, SymInterval> out;
  for (const auto& [v, wiv] : w) {
    SymInterval iv = wiv;
    if (auto it = gf.strict.find(v); it != gf.strict.end()) iv = sintersect(iv, it->second, box);
    if (ints.count(v)) {
      const auto exIt = gf.excluded.find(v);
      for (int pass = 0; pass < 4; ++pass) {
        bool moved = false;
        auto bump = [&](SymExpr& end, bool& open, bool inf, int dir) {
          if (inf || !open) return;
          auto q = end.as_rational();
          if (!q || !is_integer(*q)) return;
          end = SymExpr::constant(*q + dir);
          open = false;
          moved = true;
        };
        bump(iv.lo, iv.loOpen, iv.loInf, +1);
        bump(iv.hi, iv.hiOpen, iv.hiInf, -1);
        if (exIt != gf.excluded.end()) {
          for (const auto& e : exIt->second) {
            if (!iv.loInf && !iv.loOpen && box.sign(iv.lo - e) == Sign::Zero) {
              if (auto q = iv.lo.as_rational(); q && is_integer(*q)) {
                iv.lo = SymExpr::constant(*q + 1);
                moved = true;
              }
            }
            if (!iv.hiInf && !iv.hiOpen && box.sign(iv.hi - e) == Sign::Zero) {
              if (auto q = iv.hi.as_rational(); q && is_integer(*q)) {
                iv.hi = SymExpr::constant(*q - 1);
                moved = true;
              }
            }
          }
        }
        if (!moved) break;
      }
    }
    for (const auto& [hv, hval] : eqs)
      if (hv == v) iv = sintersect(iv, SymInterval::point(hval), box);
    out[v] = iv;
  }
  return out;
}

// --- bounded increments -----------------------------------------------------

namespace {

struct IncrementResult {
  std::optional<SymExpr> bound;
  std::string detail;
};

IncrementResult bounded_increments(const Program& prog, const StepSystem& sys,
                                   const SymExpr& seed, const ParamBox& box) {
  auto env = seed_state_bounds(sys, prog, box);
  if (auto iv = eval_interval(seed, env, box)) {
    if (auto C = abs_bound(*iv, box)) {
      return {*C, "seed stays in " + to_string(*iv) + ", so |E_i| <= " + to_string(*C) +
                      " and increments stay within twice that"};
    }
  }

  // the seed range is unbounded; bound the compensated one-step difference
  RewriteContext ctx = make_rewrite_context(sys);
  SymExpr ce =
      resolve_cond(SymExpr::atom(Atom::cond_node(seed, TimeIndex::loop(-1))), ctx);
  SymExpr diff = substitute(seed, step_bindings(seed, sys)) - ce;
  if (contains_atom_kind(diff, AtomKind::CondNode))
    return {std::nullopt,
            "the one-step conditional expectation of the seed did not rewrite away"};

  SymExpr total;
  for (const auto& m : diff.terms()) {
    Monomial sc = m;
    sc.atoms.clear();
    SymExpr scal = SymExpr::from_terms({sc});
    Sign s = box.sign(scal);
    SymExpr mag;
    if (s == Sign::Zero) continue;
    if (s == Sign::Positive || s == Sign::NonNegative)
      mag = scal;
    else if (s == Sign::Negative || s == Sign::NonPositive)
      mag = -scal;
    else
      return {std::nullopt, "coefficient " + to_string(scal) + " has undetermined sign"};
    for (const auto& [a, e] : m.atoms) {
      std::optional<SymExpr> ab;
      if (a.kind == AtomKind::Process) {
        auto it = env.find(a.name);
        if (it != env.end()) ab = abs_bound(it->second, box);
      } else if (a.kind == AtomKind::Sample) {
        auto [lo, hi] = sys.dists.at(a.name).support_bounds(a.proj);
        Rational alo = lo < 0 ? Rational(-lo) : lo;
        Rational ahi = hi < 0 ? Rational(-hi) : hi;
        ab = SymExpr::constant(std::max(alo, ahi));
      }
      if (!ab)
        return {std::nullopt, "no magnitude bound for " + to_string(a) + " in the increment"};
      mag = mag * ab->pow(e);
    }
    total = total + mag;
  }
  return {total, "per-step increment bounded directly: |M_i - M_{i-1}| <= " + to_string(total)};
}

// --- bounded variant --------------------------------------------------------

// v == c*var + k with a single-monomial c; pins var when v is set to zero
std::optional<std::pair<std::string, SymExpr>> pinned_by_zero(const SymExpr& v) {
  std::optional<Monomial> cm;
  std::string var;
  SymExpr k;
  for (const auto& m : v.terms()) {
    if (m.atoms.empty()) {
      k = k + SymExpr::from_terms({m});
      continue;
    }
    if (cm || m.atoms.size() != 1) return std::nullopt;
    const auto& [a, e] = m.atoms.front();
    if (e != 1 || a.kind != AtomKind::Process) return std::nullopt;
    var = a.name;
    cm = m;
    cm->atoms.clear();
  }
  if (!cm) return std::nullopt;
  Monomial inv = *cm;
  inv.coeff = Rational(-1) / inv.coeff;
  for (auto& [p, e] : inv.params) e = -e;
  return std::make_pair(var, k * SymExpr::from_terms({inv}));
}

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

SideCondition check_variant(const Program& prog, const StepSystem& sys, const ParamBox& box) {
  SideCondition item;
  item.name = "finite-expected-time";
  if (!prog.pragmas.variant) {
    item.status = CondStatus::Obligation;
    item.detail = "no bounded variant supplied";
    return item;
  }
  const VariantSpec& vs = *prog.pragmas.variant;
  LiftCtx lctx;
  lctx.varBase = TimeIndex::loop(0);
  SymExpr v = lift_expr(vs.expr, lctx);
  SymExpr K = lift_expr(vs.bound, lctx);
  if (!K.is_scalar()) throw Error("variant", "the bound must be a parameter expression");
  std::optional<SymExpr> eps;
  if (vs.eps) {
    eps = lift_expr(vs.eps, lctx);
    if (!eps->is_scalar())
      throw Error("variant", "the decrease probability must be a parameter expression");
  }

  auto env = running_state_bounds(sys, prog, box);
  std::vector<std::string> notes;
  bool allOk = true;

  {  // (a) 0 <= v < K on running states
    auto iv = eval_interval(v, env, box);
    bool ok = false;
    std::string range = iv ? to_string(*iv) : "unknown";
    if (iv && !iv->loInf && !iv->hiInf) {
      Sign lo = box.sign(iv->lo);
      bool loOk = lo == Sign::Zero || lo == Sign::NonNegative || lo == Sign::Positive;
      Sign gap = box.sign(K - iv->hi);
      bool hiOk = iv->hiOpen
                      ? (gap == Sign::Zero || gap == Sign::NonNegative || gap == Sign::Positive)
                      : gap == Sign::Positive;
      ok = loOk && hiOk;
    }
    allOk = allOk && ok;
    notes.push_back(std::string("(a) 0 <= v < K ") + (ok ? "verified" : "unproven") +
                    ", v in " + range);
  }

  {  // (b) v = 0 only outside the guard
    bool ok = false;
    std::string why;
    if (auto pin = pinned_by_zero(v)) {
      Formula g = substitute(
          sys.guard, {{Atom::process(pin->first, TimeIndex::loop(0)), pin->second}});
      ok = box.refutes(g);
      why = ok ? pin->first + " = " + to_string(pin->second) + " falsifies the guard"
               : "guard not refuted at " + pin->first + " = " + to_string(pin->second);
    } else {
      why = "v = 0 does not pin a single variable";
    }
    allOk = allOk && ok;
    notes.push_back(std::string("(b) v = 0 forces exit ") + (ok ? "verified: " : "unproven: ") +
                    why);
  }

  {  // (c) v decreases with positive probability
    std::vector<std::pair<SymExpr, std::vector<std::pair<Atom, SymExpr>>>> joints;
    joints.emplace_back(SymExpr::constant(1), std::vector<std::pair<Atom, SymExpr>>{});
    for (const auto& s : sys.sampleOrder) {
      const Distribution& d = sys.dists.at(s);
      decltype(joints) next;
      for (const auto& j : joints) {
        for (const auto& o : d.outcomes) {
          auto n = j;
          n.first = n.first * o.prob;
          for (int p = 0; p <= d.arity; ++p) {
            int coord = p == 0 ? 0 : p - 1;
            n.second.emplace_back(Atom::sample(s, TimeIndex::loop(0), p),
                                  SymExpr::constant(o.value.at(coord)));
          }
          next.push_back(std::move(n));
        }
      }
      joints = std::move(next);
    }
    SymExpr vNext = substitute(v, step_bindings(v, sys));
    SymExpr vPrev = retime(v, TimeBase::Loop, "", TimeIndex::loop(-1));
    SymExpr acc;
    for (const auto& [prob, bind] : joints) {
      SymExpr diff = substitute(vNext, bind) - vPrev;
      auto iv = eval_interval(diff, env, box);
      if (!iv || iv->hiInf) continue;
      Sign s = box.sign(iv->hi);
      bool neg = s == Sign::Negative ||
                 (iv->hiOpen && (s == Sign::Zero || s == Sign::NonPositive));
      if (neg) acc = acc + prob;
    }
    bool ok = eps ? box.sign(acc - *eps) == Sign::Positive : box.sign(acc) == Sign::Positive;
    allOk = allOk && ok;
    std::string req = eps ? " > " + to_string(*eps) : " > 0";
    notes.push_back(std::string("(c) decrease probability ") + (ok ? "verified" : "unproven") +
                    ": provably-decreasing mass " + to_string(acc) + ", required" + req);
  }

  item.status = allOk ? CondStatus::Verified : CondStatus::Obligation;
  item.detail = "variant " + to_string(v) + " against bound " + to_string(K) + "; " +
                join(notes, "; ");
  return item;
}

}  // namespace

bool SideConditionReport::all_verified() const {
  for (const auto& i : items)
    if (i.status != CondStatus::Verified) return false;
  return true;
}

const SideCondition* SideConditionReport::find(const std::string& name) const {
  for (const auto& i : items)
    if (i.name == name) return &i;
  return nullptr;
}

SideConditionReport check_side_conditions(const Program& prog, const StepSystem& sys,
                                          const SymExpr& seed, const ParamBox& box) {
  SideConditionReport R;
  auto inc = bounded_increments(prog, sys, seed, box);
  SideCondition c1;
  c1.name = "bounded-increments";
  c1.status = inc.bound ? CondStatus::Verified : CondStatus::Obligation;
  c1.detail = inc.detail;
  R.incrementBound = inc.bound;
  R.items.push_back(std::move(c1));
  R.items.push_back(check_variant(prog, sys, box));
  return R;
}

}  // namespace ostap
