#include "ostap/interval.hpp"

#include <algorithm>

#include "ostap/diag.hpp"
#include "ostap/recurrence.hpp"

namespace ostap {

namespace {

struct EndPt {
  Rational v;
  int inf = 0;  // -1, 0, +1
  bool open = false;
};

// value order with infinities; ties prefer closed (the sound choice for
// either bound)
bool ept_less(const EndPt& a, const EndPt& b) {
  if (a.inf != b.inf) return a.inf < b.inf;
  if (a.inf != 0) return false;
  return a.v < b.v;
}

EndPt ept_mul(const EndPt& a, const EndPt& b) {
  EndPt r;
  r.open = a.open || b.open;
  if (a.inf != 0 || b.inf != 0) {
    // 0 * inf contributes 0; other products keep the signed infinity
    int sa = a.inf != 0 ? a.inf : (a.v > 0 ? 1 : a.v < 0 ? -1 : 0);
    int sb = b.inf != 0 ? b.inf : (b.v > 0 ? 1 : b.v < 0 ? -1 : 0);
    if (sa == 0 || sb == 0) {
      r.v = 0;
      r.open = a.inf != 0 ? b.open : a.open;
      return r;
    }
    r.inf = sa * sb;
    return r;
  }
  r.v = a.v * b.v;
  return r;
}

}  // namespace

QInterval qadd(const QInterval& a, const QInterval& b) {
  QInterval r;
  r.loInf = a.loInf || b.loInf;
  r.hiInf = a.hiInf || b.hiInf;
  if (!r.loInf) {
    r.lo = a.lo + b.lo;
    r.loOpen = a.loOpen || b.loOpen;
  }
  if (!r.hiInf) {
    r.hi = a.hi + b.hi;
    r.hiOpen = a.hiOpen || b.hiOpen;
  }
  return r;
}

QInterval qneg(const QInterval& a) {
  QInterval r;
  r.loInf = a.hiInf;
  r.hiInf = a.loInf;
  r.lo = -a.hi;
  r.hi = -a.lo;
  r.loOpen = a.hiOpen;
  r.hiOpen = a.loOpen;
  return r;
}

QInterval qmul(const QInterval& a, const QInterval& b) {
  EndPt as[2] = {{a.lo, a.loInf ? -1 : 0, a.loOpen}, {a.hi, a.hiInf ? 1 : 0, a.hiOpen}};
  EndPt bs[2] = {{b.lo, b.loInf ? -1 : 0, b.loOpen}, {b.hi, b.hiInf ? 1 : 0, b.hiOpen}};
  EndPt lo, hi;
  bool first = true;
  for (const auto& x : as) {
    for (const auto& y : bs) {
      EndPt p = ept_mul(x, y);
      if (first) {
        lo = hi = p;
        first = false;
        continue;
      }
      if (ept_less(p, lo) || (!ept_less(lo, p) && !p.open)) lo = p;
      if (ept_less(hi, p) || (!ept_less(p, hi) && !p.open)) hi = p;
    }
  }
  QInterval r;
  r.loInf = lo.inf < 0;
  r.hiInf = hi.inf > 0;
  if (!r.loInf) {
    r.lo = lo.v;
    r.loOpen = lo.open;
  }
  if (!r.hiInf) {
    r.hi = hi.v;
    r.hiOpen = hi.open;
  }
  return r;
}

namespace {

// reciprocal; widens to everything when 0 is interior or a closed endpoint
QInterval qinv(const QInterval& a) {
  bool loPos = !a.loInf && (a.lo > 0 || (a.lo == 0 && a.loOpen));
  bool hiNeg = !a.hiInf && (a.hi < 0 || (a.hi == 0 && a.hiOpen));
  if (!loPos && !hiNeg) return QInterval::all();
  QInterval r;
  if (loPos) {
    // [lo, hi] -> [1/hi, 1/lo], infinity collapsing to an open 0
    if (a.hiInf || a.hi == 0) {
      r.lo = 0;
      r.loOpen = true;
    } else {
      r.lo = Rational(1) / a.hi;
      r.loOpen = a.hiOpen;
    }
    if (a.lo == 0) {
      r.hiInf = true;
    } else {
      r.hi = Rational(1) / a.lo;
      r.hiOpen = a.loOpen;
    }
    return r;
  }
  return qneg(qinv(qneg(a)));
}

}  // namespace

QInterval qpow(const QInterval& a, int e) {
  if (e == 0) return QInterval::point(1);
  if (e < 0) return qpow(qinv(a), -e);
  if (e == 1) return a;
  bool nonneg = !a.loInf && a.lo >= 0;
  bool nonpos = !a.hiInf && a.hi <= 0;
  QInterval r;
  if (nonneg) {
    r.loInf = false;
    r.lo = rat_pow(a.lo, e);
    r.loOpen = a.loOpen;
    r.hiInf = a.hiInf;
    if (!a.hiInf) {
      r.hi = rat_pow(a.hi, e);
      r.hiOpen = a.hiOpen;
    }
    return r;
  }
  if (nonpos) {
    QInterval p = qpow(qneg(a), e);
    return e % 2 == 0 ? p : qneg(p);
  }
  if (e % 2 == 1) {
    r.loInf = a.loInf;
    r.hiInf = a.hiInf;
    if (!a.loInf) {
      r.lo = rat_pow(a.lo, e);
      r.loOpen = a.loOpen;
    }
    if (!a.hiInf) {
      r.hi = rat_pow(a.hi, e);
      r.hiOpen = a.hiOpen;
    }
    return r;
  }
  r.loInf = false;
  r.lo = 0;
  if (a.loInf || a.hiInf) {
    r.hiInf = true;
    return r;
  }
  Rational negLo = -a.lo;
  Rational m = std::max(negLo, a.hi);
  r.hi = rat_pow(m, e);
  r.hiOpen = (negLo == a.hi) ? (a.loOpen && a.hiOpen) : (m == negLo ? a.loOpen : a.hiOpen);
  return r;
}

QInterval qhull(const QInterval& a, const QInterval& b) {
  QInterval r;
  r.loInf = a.loInf || b.loInf;
  r.hiInf = a.hiInf || b.hiInf;
  if (!r.loInf) {
    if (a.lo < b.lo || (a.lo == b.lo && !a.loOpen)) {
      r.lo = a.lo;
      r.loOpen = a.loOpen && (a.lo != b.lo || b.loOpen);
    } else {
      r.lo = b.lo;
      r.loOpen = b.loOpen && (a.lo != b.lo || a.loOpen);
    }
  }
  if (!r.hiInf) {
    if (a.hi > b.hi || (a.hi == b.hi && !a.hiOpen)) {
      r.hi = a.hi;
      r.hiOpen = a.hiOpen && (a.hi != b.hi || b.hiOpen);
    } else {
      r.hi = b.hi;
      r.hiOpen = b.hiOpen && (a.hi != b.hi || a.hiOpen);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// ParamBox.

namespace {

std::optional<SymExpr> subst_params(const SymExpr& e,
                                    const std::vector<std::pair<std::string, SymExpr>>& map) {
  if (map.empty()) return e;
  SymExpr out;
  for (const auto& m : e.terms()) {
    Monomial rest = m;
    rest.params.clear();
    SymExpr part = SymExpr::from_terms({rest});
    for (const auto& [name, exp] : m.params) {
      const SymExpr* repl = nullptr;
      for (const auto& [k, v] : map)
        if (k == name) repl = &v;
      if (!repl) {
        part = part * SymExpr::param(name, exp);
      } else {
        if (exp < 0) return std::nullopt;
        part = part * repl->pow(exp);
      }
    }
    out = out + part;
  }
  return out;
}

}  // namespace

ParamBox::ParamBox(const std::vector<ParamDecl>& decls) {
  LiftCtx scalarCtx;
  for (const auto& d : decls) {
    SymExpr lo, hi;
    bool haveLo = d.lo != nullptr, haveHi = d.hi != nullptr;
    if (haveLo) lo = expand(lift_expr(d.lo, scalarCtx));
    if (haveHi) hi = expand(lift_expr(d.hi, scalarCtx));

    if (haveLo && !lo.as_rational().has_value()) {
      // dependent lower bound: d = lo + slack keeps the ordering fact
      std::string slack = "_gap_" + d.name;
      subst_.emplace_back(d.name, lo + SymExpr::param(slack));
      QInterval s;
      s.loInf = false;
      s.lo = 0;
      s.loOpen = d.loOpen;
      s.hiInf = true;
      if (haveHi) {
        QInterval width = eval(hi - lo);
        s.hiInf = width.hiInf;
        s.hi = width.hi;
        s.hiOpen = width.hiOpen || d.hiOpen;
      }
      box_[slack] = s;
      continue;
    }

    QInterval q = QInterval::all();
    if (haveLo) {
      q.loInf = false;
      q.lo = *lo.as_rational();
      q.loOpen = d.loOpen;
    }
    if (haveHi) {
      QInterval h = eval(hi);
      q.hiInf = h.hiInf;
      q.hi = h.hi;
      q.hiOpen = h.hiOpen || d.hiOpen;
    }
    box_[d.name] = q;
  }
}

SymExpr ParamBox::expand(const SymExpr& scalar) const {
  auto r = subst_params(scalar, subst_);
  return r ? *r : scalar;
}

QInterval ParamBox::range(const std::string& name) const {
  auto it = box_.find(name);
  return it == box_.end() ? QInterval::all() : it->second;
}

QInterval ParamBox::eval(const SymExpr& scalar) const {
  SymExpr e = expand(scalar);
  QInterval total = QInterval::point(0);
  for (const auto& m : e.terms()) {
    if (!m.atoms.empty()) return QInterval::all();
    QInterval acc = QInterval::point(m.coeff);
    for (const auto& [name, exp] : m.params) acc = qmul(acc, qpow(range(name), exp));
    total = qadd(total, acc);
  }
  return total;
}

Sign ParamBox::sign(const SymExpr& scalar) const {
  if (scalar.is_zero()) return Sign::Zero;
  QInterval q = eval(scalar);
  if (!q.loInf && !q.hiInf && !q.loOpen && !q.hiOpen && q.lo == 0 && q.hi == 0) return Sign::Zero;
  if (!q.loInf && (q.lo > 0 || (q.lo == 0 && q.loOpen))) return Sign::Positive;
  if (!q.hiInf && (q.hi < 0 || (q.hi == 0 && q.hiOpen))) return Sign::Negative;
  if (!q.loInf && q.lo >= 0) return Sign::NonNegative;
  if (!q.hiInf && q.hi <= 0) return Sign::NonPositive;
  return Sign::Unknown;
}

bool ParamBox::proves(const Formula& f) const {
  switch (f.kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Eq: return sign(f.lhs - f.rhs) == Sign::Zero;
    case Formula::Kind::Lt: return sign(f.lhs - f.rhs) == Sign::Negative;
    case Formula::Kind::Le: {
      Sign s = sign(f.lhs - f.rhs);
      return s == Sign::Negative || s == Sign::NonPositive || s == Sign::Zero;
    }
    case Formula::Kind::Not: return refutes(f.kids.front());
    case Formula::Kind::And: {
      for (const auto& k : f.kids)
        if (!proves(k)) return false;
      return true;
    }
    case Formula::Kind::Or: {
      for (const auto& k : f.kids)
        if (proves(k)) return true;
      return false;
    }
  }
  return false;
}

bool ParamBox::refutes(const Formula& f) const {
  switch (f.kind) {
    case Formula::Kind::True: return false;
    case Formula::Kind::False: return true;
    case Formula::Kind::Eq: {
      Sign s = sign(f.lhs - f.rhs);
      return s == Sign::Negative || s == Sign::Positive;
    }
    case Formula::Kind::Lt: {
      Sign s = sign(f.lhs - f.rhs);
      return s == Sign::NonNegative || s == Sign::Positive || s == Sign::Zero;
    }
    case Formula::Kind::Le: return sign(f.lhs - f.rhs) == Sign::Positive;
    case Formula::Kind::Not: return proves(f.kids.front());
    case Formula::Kind::And: {
      for (const auto& k : f.kids)
        if (refutes(k)) return true;
      return false;
    }
    case Formula::Kind::Or: {
      for (const auto& k : f.kids)
        if (!refutes(k)) return false;
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Symbolic intervals.

std::string to_string(const SymInterval& s) {
  std::string out = s.loOpen || s.loInf ? "(" : "[";
  out += s.loInf ? "-oo" : to_string(s.lo);
  out += ", ";
  out += s.hiInf ? "oo" : to_string(s.hi);
  out += s.hiOpen || s.hiInf ? ")" : "]";
  return out;
}

SymInterval shull(const SymInterval& a, const SymInterval& b, const ParamBox& box) {
  SymInterval r;
  r.loInf = a.loInf || b.loInf;
  r.hiInf = a.hiInf || b.hiInf;
  if (!r.loInf) {
    Sign s = box.sign(a.lo - b.lo);
    if (s == Sign::Zero) {
      r.lo = a.lo;
      r.loOpen = a.loOpen && b.loOpen;
    } else if (s == Sign::Negative || s == Sign::NonPositive) {
      r.lo = a.lo;
      r.loOpen = false;
    } else if (s == Sign::Positive || s == Sign::NonNegative) {
      r.lo = b.lo;
      r.loOpen = false;
    } else {
      r.loInf = true;
    }
  }
  if (!r.hiInf) {
    Sign s = box.sign(a.hi - b.hi);
    if (s == Sign::Zero) {
      r.hi = a.hi;
      r.hiOpen = a.hiOpen && b.hiOpen;
    } else if (s == Sign::Positive || s == Sign::NonNegative) {
      r.hi = a.hi;
      r.hiOpen = false;
    } else if (s == Sign::Negative || s == Sign::NonPositive) {
      r.hi = b.hi;
      r.hiOpen = false;
    } else {
      r.hiInf = true;
    }
  }
  return r;
}

SymInterval sintersect(const SymInterval& a, const SymInterval& b, const ParamBox& box) {
  SymInterval r = a;
  if (r.loInf) {
    r.loInf = b.loInf;
    r.lo = b.lo;
    r.loOpen = b.loOpen;
  } else if (!b.loInf) {
    Sign s = box.sign(b.lo - a.lo);
    if (s == Sign::Zero) {
      r.loOpen = a.loOpen || b.loOpen;
    } else if (s == Sign::Positive || s == Sign::NonNegative) {
      r.lo = b.lo;
      r.loOpen = b.loOpen;
    }
    // undecidable: keep a's endpoint
  }
  if (r.hiInf) {
    r.hiInf = b.hiInf;
    r.hi = b.hi;
    r.hiOpen = b.hiOpen;
  } else if (!b.hiInf) {
    Sign s = box.sign(b.hi - a.hi);
    if (s == Sign::Zero) {
      r.hiOpen = a.hiOpen || b.hiOpen;
    } else if (s == Sign::Negative || s == Sign::NonPositive) {
      r.hi = b.hi;
      r.hiOpen = b.hiOpen;
    }
  }
  return r;
}

namespace {

SymInterval sneg(const SymInterval& a) {
  SymInterval r;
  r.loInf = a.hiInf;
  r.hiInf = a.loInf;
  r.lo = -a.hi;
  r.hi = -a.lo;
  r.loOpen = a.hiOpen;
  r.hiOpen = a.loOpen;
  return r;
}

SymInterval sadd(const SymInterval& a, const SymInterval& b) {
  SymInterval r;
  r.loInf = a.loInf || b.loInf;
  r.hiInf = a.hiInf || b.hiInf;
  if (!r.loInf) {
    r.lo = a.lo + b.lo;
    r.loOpen = a.loOpen || b.loOpen;
  }
  if (!r.hiInf) {
    r.hi = a.hi + b.hi;
    r.hiOpen = a.hiOpen || b.hiOpen;
  }
  return r;
}

bool nonneg_lo(const SymInterval& a, const ParamBox& box) {
  if (a.loInf) return false;
  Sign s = box.sign(a.lo);
  return s == Sign::Zero || s == Sign::NonNegative || s == Sign::Positive;
}

bool nonpos_hi(const SymInterval& a, const ParamBox& box) {
  if (a.hiInf) return false;
  Sign s = box.sign(a.hi);
  return s == Sign::Zero || s == Sign::NonPositive || s == Sign::Negative;
}

// both factors nonnegative from below; an endpoint stays open when no
// attained pair of factor endpoints can reach it
SymInterval smul_nn(const SymInterval& a, const SymInterval& b, const ParamBox& box) {
  SymInterval r;
  r.loInf = false;
  r.lo = a.lo * b.lo;
  r.loOpen = (a.loOpen && b.loOpen) ||
             (a.loOpen && box.sign(b.lo) == Sign::Positive) ||
             (b.loOpen && box.sign(a.lo) == Sign::Positive);
  r.hiInf = a.hiInf || b.hiInf;
  if (!r.hiInf) {
    r.hi = a.hi * b.hi;
    r.hiOpen = (a.hiOpen && box.sign(b.hi) == Sign::Positive) ||
               (b.hiOpen && box.sign(a.hi) == Sign::Positive);
  }
  return r;
}

// products stay within sign-definite factors
std::optional<SymInterval> smul(const SymInterval& a, const SymInterval& b,
                                const ParamBox& box) {
  bool an = nonneg_lo(a, box), bn = nonneg_lo(b, box);
  bool ap = nonpos_hi(a, box), bp = nonpos_hi(b, box);
  if (an && bn) return smul_nn(a, b, box);
  if (ap && bn) return sneg(smul_nn(sneg(a), b, box));
  if (an && bp) return sneg(smul_nn(a, sneg(b), box));
  if (ap && bp) return smul_nn(sneg(a), sneg(b), box);
  return std::nullopt;
}

std::optional<SymInterval> spow(const SymInterval& a, int e, const ParamBox& box) {
  if (e == 1) return a;
  if (nonneg_lo(a, box)) {
    SymInterval r;
    r.loInf = false;
    r.lo = a.lo.pow(e);
    r.loOpen = a.loOpen;
    r.hiInf = a.hiInf;
    if (!a.hiInf) {
      r.hi = a.hi.pow(e);
      r.hiOpen = a.hiOpen;
    }
    return r;
  }
  if (nonpos_hi(a, box)) {
    auto p = spow(sneg(a), e, box);
    if (!p) return std::nullopt;
    return e % 2 == 0 ? *p : sneg(*p);
  }
  if (a.loInf || a.hiInf) {
    if (e % 2 == 1) return SymInterval::top();
    SymInterval r;
    r.loInf = false;
    r.lo = SymExpr::zero();
    r.hiInf = true;
    return r;
  }
  if (e % 2 == 1) {
    SymInterval r;
    r.loInf = r.hiInf = false;
    r.lo = a.lo.pow(e);
    r.hi = a.hi.pow(e);
    return r;
  }
  SymInterval r;
  r.loInf = false;
  r.lo = SymExpr::zero();
  Sign s = box.sign(a.hi + a.lo);  // compares |hi| against |lo|
  if (s == Sign::Zero || s == Sign::NonNegative || s == Sign::Positive) {
    r.hiInf = false;
    r.hi = a.hi.pow(e);
  } else if (s == Sign::Negative || s == Sign::NonPositive) {
    r.hiInf = false;
    r.hi = (-a.lo).pow(e);
  } else {
    return std::nullopt;
  }
  return r;
}

}  // namespace

std::optional<SymInterval> eval_interval(const SymExpr& e,
                                         const std::map<std::string, SymInterval>& env,
                                         const ParamBox& box) {
  SymInterval total = SymInterval::point(SymExpr::zero());
  for (const auto& m : e.terms()) {
    Monomial scalarPart = m;
    scalarPart.atoms.clear();
    SymExpr scalar = SymExpr::from_terms({scalarPart});

    SymInterval acc = SymInterval::point(SymExpr::constant(1));
    for (const auto& [atom, exp] : m.atoms) {
      if (atom.kind != AtomKind::Process && atom.kind != AtomKind::Sample) return std::nullopt;
      auto it = env.find(atom.name);
      if (it == env.end() || it->second.is_top()) return std::nullopt;
      auto powd = spow(it->second, exp, box);
      if (!powd) return std::nullopt;
      auto mult = smul(acc, *powd, box);
      if (!mult) {
        // single-factor monomials may keep sign-mixed intervals
        if (m.atoms.size() == 1 && exp >= 1 &&
            (acc.lo - SymExpr::constant(1)).is_zero() && !acc.loInf) {
          acc = *powd;
          continue;
        }
        return std::nullopt;
      }
      acc = *mult;
    }

    Sign s = box.sign(scalar);
    SymInterval scaled;
    switch (s) {
      case Sign::Zero: continue;
      case Sign::Positive:
      case Sign::NonNegative:
        scaled.loInf = acc.loInf;
        scaled.hiInf = acc.hiInf;
        if (!acc.loInf) {
          scaled.lo = scalar * acc.lo;
          scaled.loOpen = acc.loOpen && s == Sign::Positive;
        }
        if (!acc.hiInf) {
          scaled.hi = scalar * acc.hi;
          scaled.hiOpen = acc.hiOpen && s == Sign::Positive;
        }
        break;
      case Sign::Negative:
      case Sign::NonPositive:
        scaled.loInf = acc.hiInf;
        scaled.hiInf = acc.loInf;
        if (!acc.hiInf) {
          scaled.lo = scalar * acc.hi;
          scaled.loOpen = acc.hiOpen && s == Sign::Negative;
        }
        if (!acc.loInf) {
          scaled.hi = scalar * acc.lo;
          scaled.hiOpen = acc.loOpen && s == Sign::Negative;
        }
        break;
      default:
        return std::nullopt;
    }
    total = sadd(total, scaled);
  }
  return total;
}

std::optional<SymExpr> abs_bound(const SymInterval& iv, const ParamBox& box) {
  if (iv.loInf || iv.hiInf) return std::nullopt;
  Sign lo = box.sign(iv.lo);
  if (lo == Sign::Zero || lo == Sign::NonNegative || lo == Sign::Positive) return iv.hi;
  Sign hi = box.sign(iv.hi);
  if (hi == Sign::Zero || hi == Sign::NonPositive || hi == Sign::Negative) return -iv.lo;
  if ((iv.lo + iv.hi).is_zero()) return iv.hi;
  return std::nullopt;
}

}  // namespace ostap
