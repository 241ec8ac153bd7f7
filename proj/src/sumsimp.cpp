#include "ostap/sumsimp.hpp"

#include <optional>
#include <utility>
#include <vector>

#include "ostap/diag.hpp"

namespace ostap {

namespace {

// Footprint of one monomial with respect to the bound variable j.
struct JShape {
  bool indexed = false;   // process/sample atoms at (j + r)
  bool compound = false;  // a compound atom mentions j: hands off
  int jPower = 0;         // exponent of the scalar time symbol j
  int maxOff = 0;
  int minOff = 0;
};

JShape shape_of(const Monomial& m, const std::string& j) {
  JShape s;
  bool first = true;
  for (const auto& [a, ex] : m.atoms) {
    switch (a.kind) {
      case AtomKind::Process:
      case AtomKind::Sample:
        if (a.index.base == TimeBase::Bound && a.index.bound == j) {
          if (first || a.index.offset > s.maxOff) s.maxOff = a.index.offset;
          if (first || a.index.offset < s.minOff) s.minOff = a.index.offset;
          s.indexed = true;
          first = false;
        }
        break;
      case AtomKind::TimeSym:
        if (a.index.base == TimeBase::Bound && a.index.bound == j) s.jPower += ex;
        break;
      default:
        if (mentions_bound(a, j)) s.compound = true;
        break;
    }
  }
  return s;
}

using Bindings = std::vector<std::pair<Atom, SymExpr>>;

// Equality hints hold at exactly the states the guard saw: indices
// m-1 .. tau-1 where m = firstLoopIndex. Inside Sum(j, lo, hi) an atom
// v(j+r) ranges over lo+r .. hi+r, so it stays inside that window only
// when lo is absolute, hi is tau-relative, r >= m-1-lo.offset and
// r + hi.offset <= -1.
Bindings hint_bindings(const SymExpr& body, const SumData& sd,
                       const SumSimplifyOptions& opts) {
  Bindings bs;
  if (opts.everyEq.empty()) return bs;
  if (sd.lo.base != TimeBase::Abs || sd.hi.base != TimeBase::Tau) return bs;
  visit_atoms(body, [&](const Atom& a) {
    if (a.kind != AtomKind::Process) return;
    if (a.index.base != TimeBase::Bound || a.index.bound != sd.bound) return;
    int r = a.index.offset;
    if (r < opts.firstLoopIndex - 1 - sd.lo.offset) return;
    if (r + sd.hi.offset > -1) return;
    for (const auto& h : opts.everyEq) {
      if (h.var != a.name) continue;
      bool dup = false;
      for (const auto& [k, v] : bs) dup = dup || cmp(k, a) == 0;
      if (!dup) bs.emplace_back(a, h.value);
    }
  });
  return bs;
}

SymExpr shift_down(const SymExpr& e, const std::string& j) {
  return retime(e, TimeBase::Bound, j, TimeIndex::bnd(j, -1));
}

// Decomposition W == A@j - A@(j-1) + rem with rem free of j. Peels slices
// by leading offset, highest first; whatever survives must lose its j
// dependence, either outright or after the every-iteration equalities are
// applied to it. The applied check matters: shifting a peeled slice
// introduces atoms one step earlier than anything in W, and those can be
// exactly the invariant-pinned ones. A j-free rem is legal because the
// invariants hold at every summed state, so rem contributes rem*(hi-lo+1).
struct Telescoped {
  SymExpr A;
  SymExpr rem;
};

std::optional<Telescoped> telescope(const SymExpr& W, const SumData& sd,
                                    const SumSimplifyOptions& opts) {
  if (W.is_zero()) return Telescoped{};
  int dtop = 0, dmin = 0;
  bool first = true;
  for (const auto& m : W.terms()) {
    JShape s = shape_of(m, sd.bound);
    if (first || s.maxOff > dtop) dtop = s.maxOff;
    if (first || s.minOff < dmin) dmin = s.minOff;
    first = false;
  }
  SymExpr A;
  SymExpr R = W;
  for (int d = dtop; d >= dmin + 1; --d) {
    std::vector<Monomial> slice;
    for (const auto& m : R.terms()) {
      JShape s = shape_of(m, sd.bound);
      if (s.indexed && s.maxOff == d) slice.push_back(m);
    }
    if (slice.empty()) continue;
    SymExpr T = SymExpr::from_terms(std::move(slice));
    A += T;
    R = R - T + shift_down(T, sd.bound);
  }
  R = substitute(R, hint_bindings(R, sd, opts));
  if (!mentions_bound(R, sd.bound)) return Telescoped{std::move(A), std::move(R)};
  return std::nullopt;
}

SymExpr simplify_expr(const SymExpr& e, const SumSimplifyOptions& opts);

SymExpr simplify_sum_atom(const Atom& a, const SumSimplifyOptions& opts) {
  const SumData& sd = *a.sum;
  SymExpr body = simplify_expr(sd.body, opts);
  body = substitute(body, hint_bindings(body, sd, opts));

  std::vector<Monomial> scalarPart, teleCand, residual;
  for (const auto& m : body.terms()) {
    JShape s = shape_of(m, sd.bound);
    if (s.compound || (s.indexed && s.jPower > 0))
      residual.push_back(m);
    else if (s.indexed)
      teleCand.push_back(m);
    else
      scalarPart.push_back(m);
  }

  SymExpr hiv = SymExpr::time_scalar(sd.hi);
  SymExpr lom1 = SymExpr::time_scalar(sd.lo) - SymExpr::constant(1);
  SymExpr out;

  // sum_{j=lo..hi} c * j^k  =  c * (P_k(hi) - P_k(lo-1))
  for (const auto& m : scalarPart) {
    Monomial rest = m;
    int k = 0;
    std::vector<std::pair<Atom, int>> keep;
    for (const auto& [at, ex] : rest.atoms) {
      if (at.kind == AtomKind::TimeSym && at.index.base == TimeBase::Bound &&
          at.index.bound == sd.bound)
        k += ex;
      else
        keep.emplace_back(at, ex);
    }
    if (k > 4) {
      residual.push_back(m);
      continue;
    }
    rest.atoms = std::move(keep);
    out += SymExpr::from_terms({rest}) *
           (power_sum_closed(k, hiv) - power_sum_closed(k, lom1));
  }

  if (!teleCand.empty()) {
    SymExpr W = SymExpr::from_terms(teleCand);
    if (auto t = telescope(W, sd, opts)) {
      TimeIndex lo1 = sd.lo;
      lo1.offset -= 1;
      out += retime(t->A, TimeBase::Bound, sd.bound, sd.hi) -
             retime(t->A, TimeBase::Bound, sd.bound, lo1);
      out += t->rem * (hiv - SymExpr::time_scalar(sd.lo) + SymExpr::constant(1));
    } else {
      for (const auto& m : W.terms()) residual.push_back(m);
    }
  }

  if (!residual.empty())
    out += SymExpr::atom(
        Atom::sum_node(sd.bound, sd.lo, sd.hi, SymExpr::from_terms(std::move(residual))));
  return out;
}

SymExpr simplify_expr(const SymExpr& e, const SumSimplifyOptions& opts) {
  SymExpr acc;
  for (const auto& m : e.terms()) {
    Monomial scalar;
    scalar.coeff = m.coeff;
    scalar.params = m.params;
    SymExpr part = SymExpr::from_terms({scalar});
    for (const auto& [a, ex] : m.atoms) {
      SymExpr repl;
      switch (a.kind) {
        case AtomKind::SumNode:
          repl = simplify_sum_atom(a, opts);
          break;
        case AtomKind::CondNode:
          repl = SymExpr::atom(
              Atom::cond_node(simplify_expr(a.cond->body, opts), a.cond->filt));
          break;
        case AtomKind::ExpNode:
          repl = SymExpr::atom(Atom::exp_node(simplify_expr(a.expn->body, opts)));
          break;
        default:
          repl = SymExpr::atom(a);
          break;
      }
      part = part * repl.pow(ex);
    }
    acc += part;
  }
  return acc;
}

}  // namespace

SymExpr power_sum_closed(int k, const SymExpr& n) {
  const SymExpr one = SymExpr::constant(1);
  auto frac = [](long num, long den) {
    return SymExpr::constant(Rational(num) / Rational(den));
  };
  switch (k) {
    case 0:
      return n;
    case 1:
      return frac(1, 2) * n * (n + one);
    case 2:
      return frac(1, 6) * n * (n + one) * (SymExpr::constant(2) * n + one);
    case 3: {
      SymExpr h = frac(1, 2) * n * (n + one);
      return h * h;
    }
    case 4:
      return frac(1, 30) * n * (n + one) * (SymExpr::constant(2) * n + one) *
             (SymExpr::constant(3) * n * n + SymExpr::constant(3) * n - one);
    default:
      throw Error("sum", "no closed power sum for exponent " + std::to_string(k));
  }
}

SymExpr simplify_sum(const SymExpr& e, const SumSimplifyOptions& opts) {
  return simplify_expr(e, opts);
}

}  // namespace ostap
