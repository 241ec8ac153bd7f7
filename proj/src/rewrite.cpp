#include "ostap/rewrite.hpp"

#include <deque>
#include <map>

#include "ostap/diag.hpp"

namespace ostap {

namespace {

// Smallest value an index can take when loop states start at m. Loop and
// bound variables range over m..; tau can exit one state before the first
// iteration when the guard fails immediately.
int floor_of(const TimeIndex& ix, int m) {
  switch (ix.base) {
    case TimeBase::Abs:
      return ix.offset;
    case TimeBase::Loop:
    case TimeBase::Bound:
      return m + ix.offset;
    case TimeBase::Tau:
      return m - 1 + ix.offset;
  }
  return 0;
}

bool same_track(const TimeIndex& a, const TimeIndex& b) {
  return a.base == b.base && (a.base != TimeBase::Bound || a.bound == b.bound);
}

// ix <= f guaranteed for every run?
bool index_le(const TimeIndex& ix, const TimeIndex& f, int m) {
  if (same_track(ix, f)) return ix.offset <= f.offset;
  if (ix.base == TimeBase::Abs) return ix.offset <= floor_of(f, m);
  return false;
}

// ix > f guaranteed for every run?
bool index_gt(const TimeIndex& ix, const TimeIndex& f, int m) {
  if (same_track(ix, f)) return ix.offset > f.offset;
  if (f.base == TimeBase::Abs) return floor_of(ix, m) > f.offset;
  return false;
}

bool exactly_next(const TimeIndex& ix, const TimeIndex& f) {
  return same_track(ix, f) && ix.offset == f.offset + 1;
}

bool atom_measurable(const Atom& a, const TimeIndex& f, int m);

bool expr_measurable(const SymExpr& e, const TimeIndex& f, int m) {
  for (const auto& mo : e.terms())
    for (const auto& [a, ex] : mo.atoms)
      if (!atom_measurable(a, f, m)) return false;
  return true;
}

bool formula_measurable(const Formula& fl, const TimeIndex& f, int m) {
  switch (fl.kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
      return true;
    case Formula::Kind::Eq:
    case Formula::Kind::Lt:
    case Formula::Kind::Le:
      return expr_measurable(fl.lhs, f, m) && expr_measurable(fl.rhs, f, m);
    case Formula::Kind::Not:
    case Formula::Kind::And:
    case Formula::Kind::Or:
      for (const auto& k : fl.kids)
        if (!formula_measurable(k, f, m)) return false;
      return true;
  }
  return false;
}

bool atom_measurable(const Atom& a, const TimeIndex& f, int m) {
  switch (a.kind) {
    case AtomKind::Process:
    case AtomKind::Sample:
      return index_le(a.index, f, m);
    case AtomKind::TimeSym:
      // loop counters are deterministic; the stopping time is not
      return a.index.base != TimeBase::Tau;
    case AtomKind::ExpNode:
      return true;  // a number
    case AtomKind::CondNode:
      return index_le(a.cond->filt, f, m);
    case AtomKind::SumNode: {
      if (!index_le(a.sum->hi, f, m)) return false;
      for (const auto& mo : a.sum->body.terms())
        for (const auto& [b, ex] : mo.atoms) {
          bool jAt = (b.kind == AtomKind::Process || b.kind == AtomKind::Sample) &&
                     b.index.base == TimeBase::Bound && b.index.bound == a.sum->bound &&
                     b.index.offset <= 0;
          if (!jAt && !atom_measurable(b, f, m)) return false;
        }
      return true;
    }
    case AtomKind::IndNode:
      return formula_measurable(a.ind->f, f, m);
  }
  return false;
}

using MaybeExpr = std::optional<SymExpr>;

// E[c | F] = c for a constant or parameter expression.
MaybeExpr rule_const(const CondData& cd, const RewriteContext&) {
  if (cd.body.is_scalar()) return cd.body;
  return std::nullopt;
}

// E[sum c_k T_k | F] = sum c_k E[T_k | F]; scalar factors move outside.
MaybeExpr rule_linear(const CondData& cd, const RewriteContext&) {
  const auto& ts = cd.body.terms();
  bool multi = ts.size() > 1;
  bool scalarFactor =
      ts.size() == 1 && (ts[0].coeff != Rational(1) || !ts[0].params.empty());
  if (!multi && !scalarFactor) return std::nullopt;
  SymExpr out;
  for (const auto& mo : ts) {
    Monomial sc;
    sc.coeff = mo.coeff;
    sc.params = mo.params;
    SymExpr scalar = SymExpr::from_terms({sc});
    if (mo.atoms.empty()) {
      out += scalar;
      continue;
    }
    Monomial rest;
    rest.coeff = 1;
    rest.atoms = mo.atoms;
    out += scalar * SymExpr::atom(
                        Atom::cond_node(SymExpr::from_terms({rest}), cd.filt));
  }
  return out;
}

// E[X Y | F] = X E[Y | F] when X is determined by time f.
MaybeExpr rule_measurable(const CondData& cd, const RewriteContext& ctx) {
  if (cd.body.terms().size() != 1) return std::nullopt;
  const Monomial& mo = cd.body.terms()[0];
  std::vector<std::pair<Atom, int>> keep, pull;
  for (const auto& fac : mo.atoms)
    (atom_measurable(fac.first, cd.filt, ctx.firstLoopIndex) ? pull : keep)
        .push_back(fac);
  if (pull.empty()) return std::nullopt;
  Monomial outer;
  outer.coeff = mo.coeff;
  outer.params = mo.params;
  outer.atoms = std::move(pull);
  SymExpr pulled = SymExpr::from_terms({outer});
  if (keep.empty()) return pulled;
  Monomial inner;
  inner.coeff = 1;
  inner.atoms = std::move(keep);
  return pulled *
         SymExpr::atom(Atom::cond_node(SymExpr::from_terms({inner}), cd.filt));
}

// A sum running one step past the filtration splits off its last term:
// sum_{j=lo..f+1} B  ->  sum_{j=lo..f} B + B@(f+1).
MaybeExpr rule_split_sum(const CondData& cd, const RewriteContext&) {
  if (cd.body.terms().size() != 1) return std::nullopt;
  const Monomial& mo = cd.body.terms()[0];
  for (const auto& [a, ex] : mo.atoms) {
    if (a.kind != AtomKind::SumNode) continue;
    const SumData& sd = *a.sum;
    if (!exactly_next(sd.hi, cd.filt)) continue;
    TimeIndex him1 = sd.hi;
    him1.offset -= 1;
    SymExpr last = retime(sd.body, TimeBase::Bound, sd.bound, sd.hi);
    SymExpr repl =
        SymExpr::atom(Atom::sum_node(sd.bound, sd.lo, him1, sd.body)) + last;
    return SymExpr::atom(
        Atom::cond_node(substitute(cd.body, {{a, repl}}), cd.filt));
  }
  return std::nullopt;
}

// A process variable one step past the filtration is replaced by its
// recurrence, leaving state at time f and samples at f+1.
MaybeExpr rule_unroll(const CondData& cd, const RewriteContext& ctx) {
  if (!ctx.recurrence || cd.body.terms().size() != 1) return std::nullopt;
  const Monomial& mo = cd.body.terms()[0];
  for (const auto& [a, ex] : mo.atoms) {
    if (a.kind != AtomKind::Process || !exactly_next(a.index, cd.filt)) continue;
    const SymExpr* rhs = ctx.recurrence(a.name);
    if (!rhs) continue;
    SymExpr stepped = retime(*rhs, TimeBase::Loop, "", a.index);
    return SymExpr::atom(
        Atom::cond_node(substitute(cd.body, {{a, stepped}}), cd.filt));
  }
  return std::nullopt;
}

// A product of samples drawn strictly after time f is independent of F_f;
// its conditional expectation is the plain joint moment. Components of one
// draw stay joint; distinct names and distinct times factorize.
MaybeExpr rule_moment(const CondData& cd, const RewriteContext& ctx) {
  if (!ctx.moment || cd.body.terms().size() != 1) return std::nullopt;
  const Monomial& mo = cd.body.terms()[0];
  if (mo.atoms.empty()) return std::nullopt;
  for (const auto& [a, ex] : mo.atoms) {
    if (a.kind != AtomKind::Sample) return std::nullopt;
    if (!index_gt(a.index, cd.filt, ctx.firstLoopIndex)) return std::nullopt;
  }
  // group by draw: same name and same index
  std::vector<std::pair<Atom, std::vector<std::pair<int, int>>>> draws;
  for (const auto& [a, ex] : mo.atoms) {
    bool found = false;
    for (auto& d : draws) {
      if (d.first.name == a.name && d.first.index == a.index) {
        d.second.emplace_back(a.proj, ex);
        found = true;
      }
    }
    if (!found) draws.push_back({a, {{a.proj, ex}}});
  }
  Monomial sc;
  sc.coeff = mo.coeff;
  sc.params = mo.params;
  SymExpr out = SymExpr::from_terms({sc});
  for (const auto& d : draws) out *= ctx.moment(d.first.name, d.second);
  return out;
}

struct RuleDef {
  const char* name;
  const char* doc;
  MaybeExpr (*fn)(const CondData&, const RewriteContext&);
};

const RuleDef kRules[] = {
    {"ce-const", "a constant or parameter expression is its own conditional expectation",
     rule_const},
    {"ce-linear", "conditional expectation distributes over sums and scalar factors",
     rule_linear},
    {"ce-measurable",
     "factors determined by the conditioning time move outside the expectation",
     rule_measurable},
    {"ce-split-sum",
     "a sum reaching one past the conditioning time splits off its last term",
     rule_split_sum},
    {"ce-unroll",
     "a process variable one step ahead is replaced by its update polynomial",
     rule_unroll},
    {"ce-moment",
     "samples drawn after the conditioning time reduce to their joint moments",
     rule_moment},
};

}  // namespace

const std::vector<RuleInfo>& rewrite_rule_catalog() {
  static const std::vector<RuleInfo> cat = [] {
    std::vector<RuleInfo> v;
    for (const auto& r : kRules) v.push_back({r.name, r.doc});
    return v;
  }();
  return cat;
}

namespace {

// Innermost-first structural rewriting. Rewriting in place (rather than
// substituting the changed atom at top level) keeps conditional
// expectations under a Sum reachable: a substitution keyed on the sum's
// bound variable would be blocked by the capture rule.
struct Driver {
  const RewriteContext& ctx;
  std::vector<RewriteStep>* trace;
  int steps = 0;
  std::deque<std::string> tail;

  static constexpr int kMaxSteps = 100000;

  void note(const char* rule, const Atom& before, const SymExpr& after) {
    if (trace) trace->push_back({rule, to_string(SymExpr::atom(before)), to_string(after)});
    tail.push_back(rule);
    if (tail.size() > 8) tail.pop_front();
    if (++steps > kMaxSteps) {
      std::string recent;
      for (const auto& t : tail) recent += (recent.empty() ? "" : ", ") + t;
      throw Error("rewrite", "no fixpoint after " + std::to_string(kMaxSteps) +
                                 " steps; recent rules: " + recent);
    }
  }

  SymExpr expr(const SymExpr& e) {
    SymExpr acc;
    for (const auto& mo : e.terms()) {
      Monomial sc;
      sc.coeff = mo.coeff;
      sc.params = mo.params;
      SymExpr term = SymExpr::from_terms({sc});
      for (const auto& [a, ex] : mo.atoms) term *= atom(a).pow(ex);
      acc += term;
    }
    return acc;
  }

  Formula formula(const Formula& f) {
    Formula out = f;
    switch (f.kind) {
      case Formula::Kind::Eq:
      case Formula::Kind::Lt:
      case Formula::Kind::Le:
        out.lhs = expr(f.lhs);
        out.rhs = expr(f.rhs);
        break;
      default:
        for (auto& k : out.kids) k = formula(k);
        break;
    }
    return out;
  }

  SymExpr atom(const Atom& a) {
    switch (a.kind) {
      case AtomKind::SumNode:
        return SymExpr::atom(
            Atom::sum_node(a.sum->bound, a.sum->lo, a.sum->hi, expr(a.sum->body)));
      case AtomKind::ExpNode:
        return SymExpr::atom(Atom::exp_node(expr(a.expn->body)));
      case AtomKind::IndNode:
        return SymExpr::atom(Atom::ind_node(formula(a.ind->f)));
      case AtomKind::CondNode: {
        Atom cur = Atom::cond_node(expr(a.cond->body), a.cond->filt);
        for (const auto& r : kRules) {
          MaybeExpr repl = r.fn(*cur.cond, ctx);
          if (repl) {
            note(r.name, cur, *repl);
            return expr(*repl);
          }
        }
        return SymExpr::atom(cur);
      }
      default:
        return SymExpr::atom(a);
    }
  }
};

}  // namespace

SymExpr resolve_cond(const SymExpr& e, const RewriteContext& ctx,
                     std::vector<RewriteStep>* trace) {
  Driver d{ctx, trace};
  return d.expr(e);
}

}  // namespace ostap
