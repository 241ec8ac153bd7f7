#include "ostap/symexpr.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace ostap {

// ---------------------------------------------------------------------------
// TimeIndex

int cmp(const TimeIndex& a, const TimeIndex& b) {
  if (a.base != b.base) return static_cast<int>(a.base) < static_cast<int>(b.base) ? -1 : 1;
  if (a.bound != b.bound) return a.bound < b.bound ? -1 : 1;
  // Newer indices sort first (X_i ahead of X_{i-1}); for Abs this means higher
  // history index first, matching the same rule.
  if (a.offset != b.offset) return a.offset > b.offset ? -1 : 1;
  return 0;
}

std::string to_string(const TimeIndex& ix) {
  auto with_off = [&](const std::string& s) {
    if (ix.offset == 0) return s;
    if (ix.offset > 0) return s + "+" + std::to_string(ix.offset);
    return s + "-" + std::to_string(-ix.offset);
  };
  switch (ix.base) {
    case TimeBase::Abs:
      return std::to_string(ix.offset);
    case TimeBase::Loop:
      return with_off("i");
    case TimeBase::Bound:
      return with_off(ix.bound);
    case TimeBase::Tau:
      return with_off("tau");
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Atom

Atom Atom::process(std::string name, TimeIndex ix) {
  Atom a;
  a.kind = AtomKind::Process;
  a.name = std::move(name);
  a.index = std::move(ix);
  return a;
}

Atom Atom::sample(std::string name, TimeIndex ix, int proj) {
  Atom a;
  a.kind = AtomKind::Sample;
  a.name = std::move(name);
  a.index = std::move(ix);
  a.proj = proj;
  return a;
}

Atom Atom::timesym(TimeIndex ix) {
  assert(ix.offset == 0 && "scalar time symbols carry no offset; use time_scalar");
  Atom a;
  a.kind = AtomKind::TimeSym;
  a.index = std::move(ix);
  return a;
}

Atom Atom::sum_node(std::string bound, TimeIndex lo, TimeIndex hi, SymExpr body) {
  Atom a;
  a.kind = AtomKind::SumNode;
  a.sum = std::make_shared<const SumData>(SumData{std::move(bound), std::move(lo), std::move(hi), std::move(body)});
  return a;
}

Atom Atom::cond_node(SymExpr body, TimeIndex filt) {
  Atom a;
  a.kind = AtomKind::CondNode;
  a.cond = std::make_shared<const CondData>(CondData{std::move(body), std::move(filt)});
  return a;
}

Atom Atom::exp_node(SymExpr body) {
  Atom a;
  a.kind = AtomKind::ExpNode;
  a.expn = std::make_shared<const ExpData>(ExpData{std::move(body)});
  return a;
}

Atom Atom::ind_node(Formula f) {
  Atom a;
  a.kind = AtomKind::IndNode;
  a.ind = std::make_shared<const IndData>(IndData{std::move(f)});
  return a;
}

int cmp(const Atom& a, const Atom& b) {
  if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
  switch (a.kind) {
    case AtomKind::Process:
    case AtomKind::Sample: {
      if (a.name != b.name) return a.name < b.name ? -1 : 1;
      if (int c = cmp(a.index, b.index)) return c;
      if (a.proj != b.proj) return a.proj < b.proj ? -1 : 1;
      return 0;
    }
    case AtomKind::TimeSym:
      return cmp(a.index, b.index);
    case AtomKind::SumNode: {
      if (a.sum->bound != b.sum->bound) return a.sum->bound < b.sum->bound ? -1 : 1;
      if (int c = cmp(a.sum->lo, b.sum->lo)) return c;
      if (int c = cmp(a.sum->hi, b.sum->hi)) return c;
      return cmp(a.sum->body, b.sum->body);
    }
    case AtomKind::CondNode: {
      if (int c = cmp(a.cond->filt, b.cond->filt)) return c;
      return cmp(a.cond->body, b.cond->body);
    }
    case AtomKind::ExpNode:
      return cmp(a.expn->body, b.expn->body);
    case AtomKind::IndNode:
      return Formula::cmp_formula(a.ind->f, b.ind->f);
  }
  return 0;
}

bool Atom::operator==(const Atom& o) const { return cmp(*this, o) == 0; }
bool Atom::operator<(const Atom& o) const { return cmp(*this, o) < 0; }

// ---------------------------------------------------------------------------
// Monomial ordering. One total order serves storage, comparison and printing:
//   1. atom-bearing monomials before scalar ones;
//   2. atom-bearing: lexicographic on the atom vector (atom order ascending,
//      exponent descending, longer vector wins a shared prefix);
//   3. scalar: total parameter degree ascending, then name ascending with the
//      *lower* exponent first (prints a*b - a^2, 1 - p, L + L^4 + L^11).

namespace {

int cmp_param_vec(const std::vector<std::pair<std::string, int>>& a,
                  const std::vector<std::pair<std::string, int>>& b) {
  long da = 0, db = 0;
  for (auto& [n, e] : a) da += e;
  for (auto& [n, e] : b) db += e;
  if (da != db) return da < db ? -1 : 1;
  size_t n = std::min(a.size(), b.size());
  for (size_t k = 0; k < n; ++k) {
    if (a[k].first != b[k].first) return a[k].first < b[k].first ? -1 : 1;
    if (a[k].second != b[k].second) return a[k].second < b[k].second ? -1 : 1;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

int cmp_atom_vec(const std::vector<std::pair<Atom, int>>& a,
                 const std::vector<std::pair<Atom, int>>& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t k = 0; k < n; ++k) {
    if (int c = cmp(a[k].first, b[k].first)) return c;
    if (a[k].second != b[k].second) return a[k].second > b[k].second ? -1 : 1;
  }
  if (a.size() != b.size()) return a.size() > b.size() ? -1 : 1;
  return 0;
}

}  // namespace

int cmp_key(const Monomial& a, const Monomial& b) {
  bool sa = a.atoms.empty(), sb = b.atoms.empty();
  if (sa != sb) return sa ? 1 : -1;
  if (!sa) {
    if (int c = cmp_atom_vec(a.atoms, b.atoms)) return c;
  }
  return cmp_param_vec(a.params, b.params);
}

// ---------------------------------------------------------------------------
// Canonicalization

namespace {

void canon_monomial(Monomial& m) {
  std::sort(m.params.begin(), m.params.end());
  {
    size_t w = 0;
    for (size_t r = 0; r < m.params.size();) {
      std::string name = m.params[r].first;
      long e = 0;
      while (r < m.params.size() && m.params[r].first == name) e += m.params[r++].second;
      if (e != 0) {
        if (e > SymExpr::kDegreeCap || e < -SymExpr::kDegreeCap)
          throw Error("normalize", "parameter degree cap exceeded for '" + name + "'");
        m.params[w++] = {std::move(name), static_cast<int>(e)};
      }
    }
    m.params.resize(w);
  }
  std::sort(m.atoms.begin(), m.atoms.end(),
            [](const auto& x, const auto& y) { return cmp(x.first, y.first) < 0; });
  {
    size_t w = 0;
    for (size_t r = 0; r < m.atoms.size();) {
      Atom at = m.atoms[r].first;
      long e = 0;
      while (r < m.atoms.size() && cmp(m.atoms[r].first, at) == 0) e += m.atoms[r++].second;
      if (at.kind == AtomKind::IndNode && e > 1) e = 1;  // indicators are idempotent
      if (e != 0) {
        if (e > SymExpr::kDegreeCap || e < 0)
          throw Error("normalize", "atom degree cap exceeded at " + to_string(at));
        m.atoms[w++] = {std::move(at), static_cast<int>(e)};
      }
    }
    m.atoms.resize(w);
  }
}

}  // namespace

SymExpr normalize_terms(std::vector<Monomial>&& raw) {
  for (auto& m : raw) canon_monomial(m);
  std::sort(raw.begin(), raw.end(), [](const Monomial& a, const Monomial& b) {
    return cmp_key(a, b) < 0;
  });
  std::vector<Monomial> out;
  out.reserve(raw.size());
  for (auto& m : raw) {
    if (!out.empty() && cmp_key(out.back(), m) == 0) {
      out.back().coeff += m.coeff;
      if (out.back().coeff == 0) out.pop_back();
    } else if (m.coeff != 0) {
      out.push_back(std::move(m));
    }
  }
  SymExpr e;
  e.terms_ = std::move(out);
  return e;
}

SymExpr SymExpr::from_terms(std::vector<Monomial> terms) {
  return normalize_terms(std::move(terms));
}

SymExpr normalize(const SymExpr& e) {
  std::vector<Monomial> copy = e.terms();
  return normalize_terms(std::move(copy));
}

SymExpr SymExpr::constant(Rational q) {
  if (q == 0) return {};
  Monomial m;
  m.coeff = std::move(q);
  return normalize_terms({std::move(m)});
}

SymExpr SymExpr::param(const std::string& name, int exp) {
  Monomial m;
  m.coeff = 1;
  if (exp != 0) m.params.push_back({name, exp});
  return normalize_terms({std::move(m)});
}

SymExpr SymExpr::atom(Atom a, int exp) {
  if (exp == 0) return constant(1);
  Monomial m;
  m.coeff = 1;
  m.atoms.push_back({std::move(a), exp});
  return normalize_terms({std::move(m)});
}

SymExpr SymExpr::time_scalar(const TimeIndex& ix) {
  if (ix.base == TimeBase::Abs) return constant(Rational(ix.offset));
  TimeIndex base = ix;
  base.offset = 0;
  return atom(Atom::timesym(base)) + constant(Rational(ix.offset));
}

std::optional<Rational> SymExpr::as_rational() const {
  if (terms_.empty()) return Rational(0);
  if (terms_.size() == 1 && terms_[0].is_constant()) return terms_[0].coeff;
  return std::nullopt;
}

bool SymExpr::is_scalar() const {
  for (auto& m : terms_)
    if (!m.atoms.empty()) return false;
  return true;
}

bool SymExpr::operator==(const SymExpr& o) const { return cmp(*this, o) == 0; }

SymExpr SymExpr::operator-() const {
  SymExpr r = *this;
  for (auto& m : r.terms_) m.coeff = -m.coeff;
  return r;
}

SymExpr SymExpr::operator+(const SymExpr& o) const {
  std::vector<Monomial> all = terms_;
  all.insert(all.end(), o.terms_.begin(), o.terms_.end());
  return normalize_terms(std::move(all));
}

SymExpr SymExpr::operator-(const SymExpr& o) const { return *this + (-o); }

SymExpr SymExpr::operator*(const SymExpr& o) const {
  std::vector<Monomial> prod;
  prod.reserve(terms_.size() * o.terms_.size());
  for (const auto& a : terms_) {
    for (const auto& b : o.terms_) {
      Monomial m;
      m.coeff = a.coeff * b.coeff;
      m.params = a.params;
      m.params.insert(m.params.end(), b.params.begin(), b.params.end());
      m.atoms = a.atoms;
      m.atoms.insert(m.atoms.end(), b.atoms.begin(), b.atoms.end());
      prod.push_back(std::move(m));
    }
  }
  return normalize_terms(std::move(prod));
}

SymExpr SymExpr::pow(int e) const {
  if (e < 0) throw Error("normalize", "negative exponent on expression");
  SymExpr acc = constant(1);
  SymExpr base = *this;
  unsigned n = static_cast<unsigned>(e);
  while (n) {
    if (n & 1) acc = acc * base;
    if (n >>= 1) base = base * base;
  }
  return acc;
}

int cmp(const SymExpr& a, const SymExpr& b) {
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  size_t n = std::min(ta.size(), tb.size());
  for (size_t k = 0; k < n; ++k) {
    if (int c = cmp_key(ta[k], tb[k])) return c;
    if (ta[k].coeff != tb[k].coeff) return ta[k].coeff < tb[k].coeff ? -1 : 1;
  }
  if (ta.size() != tb.size()) return ta.size() < tb.size() ? -1 : 1;
  return 0;
}

// ---------------------------------------------------------------------------
// Formula

Formula Formula::truth(bool v) {
  Formula f;
  f.kind = v ? Kind::True : Kind::False;
  return f;
}

Formula Formula::eq(SymExpr a, SymExpr b) {
  Formula f;
  f.kind = Kind::Eq;
  f.lhs = std::move(a);
  f.rhs = std::move(b);
  return f;
}

Formula Formula::lt(SymExpr a, SymExpr b) {
  Formula f;
  f.kind = Kind::Lt;
  f.lhs = std::move(a);
  f.rhs = std::move(b);
  return f;
}

Formula Formula::le(SymExpr a, SymExpr b) {
  Formula f;
  f.kind = Kind::Le;
  f.lhs = std::move(a);
  f.rhs = std::move(b);
  return f;
}

Formula Formula::negate(Formula f) {
  if (f.kind == Kind::True) return truth(false);
  if (f.kind == Kind::False) return truth(true);
  if (f.kind == Kind::Not) return std::move(f.kids[0]);
  Formula r;
  r.kind = Kind::Not;
  r.kids.push_back(std::move(f));
  return r;
}

Formula Formula::conj(std::vector<Formula> fs) {
  std::vector<Formula> flat;
  for (auto& f : fs) {
    if (f.kind == Kind::True) continue;
    if (f.kind == Kind::False) return truth(false);
    if (f.kind == Kind::And)
      for (auto& k : f.kids) flat.push_back(std::move(k));
    else
      flat.push_back(std::move(f));
  }
  if (flat.empty()) return truth(true);
  if (flat.size() == 1) return std::move(flat[0]);
  Formula r;
  r.kind = Kind::And;
  r.kids = std::move(flat);
  return r;
}

Formula Formula::disj(std::vector<Formula> fs) {
  std::vector<Formula> flat;
  for (auto& f : fs) {
    if (f.kind == Kind::False) continue;
    if (f.kind == Kind::True) return truth(true);
    if (f.kind == Kind::Or)
      for (auto& k : f.kids) flat.push_back(std::move(k));
    else
      flat.push_back(std::move(f));
  }
  if (flat.empty()) return truth(false);
  if (flat.size() == 1) return std::move(flat[0]);
  Formula r;
  r.kind = Kind::Or;
  r.kids = std::move(flat);
  return r;
}

int Formula::cmp_formula(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
  if (int c = cmp(a.lhs, b.lhs)) return c;
  if (int c = cmp(a.rhs, b.rhs)) return c;
  size_t n = std::min(a.kids.size(), b.kids.size());
  for (size_t k = 0; k < n; ++k)
    if (int c = cmp_formula(a.kids[k], b.kids[k])) return c;
  if (a.kids.size() != b.kids.size()) return a.kids.size() < b.kids.size() ? -1 : 1;
  return 0;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string mono_body_str(const Monomial& m) {
  // everything except the sign: |coeff| (unless 1 with factors), params, atoms
  std::ostringstream os;
  Rational c = m.coeff < 0 ? Rational(-m.coeff) : m.coeff;
  bool have = false;
  if (c != 1 || (m.params.empty() && m.atoms.empty())) {
    os << rat_str(c);
    have = true;
  }
  for (auto& [n, e] : m.params) {
    if (have) os << "*";
    os << n;
    if (e != 1) os << "^" << e;
    have = true;
  }
  for (auto& [a, e] : m.atoms) {
    if (have) os << "*";
    os << to_string(a);
    if (e != 1) os << "^" << e;
    have = true;
  }
  return os.str();
}

}  // namespace

std::string to_string(const SymExpr& e) {
  if (e.terms().empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& m : e.terms()) {
    bool neg = m.coeff < 0;
    if (first) {
      if (neg) os << "-";
    } else {
      os << (neg ? " - " : " + ");
    }
    os << mono_body_str(m);
    first = false;
  }
  return os.str();
}

std::string to_string(const Atom& a) {
  switch (a.kind) {
    case AtomKind::Process:
      return a.name + "(" + to_string(a.index) + ")";
    case AtomKind::Sample: {
      std::string core = a.name + "(" + to_string(a.index) + ")";
      if (a.proj > 0) return "pi_" + std::to_string(a.proj) + "(" + core + ")";
      return core;
    }
    case AtomKind::TimeSym:
      return to_string(a.index);
    case AtomKind::SumNode:
      return "sum_{" + a.sum->bound + "=" + to_string(a.sum->lo) + ".." + to_string(a.sum->hi) +
             "}{" + to_string(a.sum->body) + "}";
    case AtomKind::CondNode:
      return "CE{" + to_string(a.cond->body) + " | F(" + to_string(a.cond->filt) + ")}";
    case AtomKind::ExpNode:
      return "E{" + to_string(a.expn->body) + "}";
    case AtomKind::IndNode:
      return "[" + to_string(a.ind->f) + "]";
  }
  return "?";
}

std::string to_string(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::True:
      return "true";
    case K::False:
      return "false";
    case K::Eq:
      return to_string(f.lhs) + " = " + to_string(f.rhs);
    case K::Lt:
      return to_string(f.lhs) + " < " + to_string(f.rhs);
    case K::Le:
      return to_string(f.lhs) + " <= " + to_string(f.rhs);
    case K::Not:
      return "not(" + to_string(f.kids[0]) + ")";
    case K::And:
    case K::Or: {
      std::string sep = f.kind == K::And ? " /\\ " : " \\/ ";
      std::string out;
      for (size_t k = 0; k < f.kids.size(); ++k) {
        if (k) out += sep;
        out += "(" + to_string(f.kids[k]) + ")";
      }
      return out;
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Substitution / retime / visiting

namespace {

bool index_mentions_bound(const TimeIndex& ix, const std::string& name) {
  return ix.base == TimeBase::Bound && ix.bound == name;
}

bool expr_mentions_bound(const SymExpr& e, const std::string& name);

bool atom_mentions_bound(const Atom& a, const std::string& name) {
  switch (a.kind) {
    case AtomKind::Process:
    case AtomKind::Sample:
    case AtomKind::TimeSym:
      return index_mentions_bound(a.index, name);
    case AtomKind::SumNode:
      if (index_mentions_bound(a.sum->lo, name) || index_mentions_bound(a.sum->hi, name))
        return true;
      if (a.sum->bound == name) return false;  // shadowed inside
      return expr_mentions_bound(a.sum->body, name);
    case AtomKind::CondNode:
      return index_mentions_bound(a.cond->filt, name) || expr_mentions_bound(a.cond->body, name);
    case AtomKind::ExpNode:
      return expr_mentions_bound(a.expn->body, name);
    case AtomKind::IndNode: {
      bool found = false;
      visit_atoms(a.ind->f, [&](const Atom& x) { found = found || atom_mentions_bound(x, name); });
      return found;
    }
  }
  return false;
}

bool expr_mentions_bound(const SymExpr& e, const std::string& name) {
  for (const auto& m : e.terms())
    for (const auto& [a, ex] : m.atoms)
      if (atom_mentions_bound(a, name)) return true;
  return false;
}

using Bindings = std::vector<std::pair<Atom, SymExpr>>;

const SymExpr* lookup(const Bindings& bs, const Atom& a) {
  for (const auto& [k, v] : bs)
    if (cmp(k, a) == 0) return &v;
  return nullptr;
}

}  // namespace

bool mentions_bound(const Atom& a, const std::string& name) {
  return atom_mentions_bound(a, name);
}
bool mentions_bound(const SymExpr& e, const std::string& name) {
  return expr_mentions_bound(e, name);
}

Formula substitute(const Formula& f, const Bindings& bindings) {
  Formula r = f;
  if (f.kind == Formula::Kind::Eq || f.kind == Formula::Kind::Lt || f.kind == Formula::Kind::Le) {
    r.lhs = substitute(f.lhs, bindings);
    r.rhs = substitute(f.rhs, bindings);
  }
  for (size_t k = 0; k < r.kids.size(); ++k) r.kids[k] = substitute(f.kids[k], bindings);
  return r;
}

SymExpr substitute(const SymExpr& e, const Bindings& bindings) {
  if (bindings.empty()) return e;
  SymExpr acc;
  for (const auto& m : e.terms()) {
    Monomial scalar;
    scalar.coeff = m.coeff;
    scalar.params = m.params;
    SymExpr part = normalize_terms({scalar});
    for (const auto& [a, ex] : m.atoms) {
      Atom cur = a;
      switch (a.kind) {
        case AtomKind::SumNode: {
          Bindings inner;
          for (const auto& b : bindings)
            if (!atom_mentions_bound(b.first, a.sum->bound)) inner.push_back(b);
          cur = Atom::sum_node(a.sum->bound, a.sum->lo, a.sum->hi,
                               substitute(a.sum->body, inner));
          break;
        }
        case AtomKind::CondNode:
          cur = Atom::cond_node(substitute(a.cond->body, bindings), a.cond->filt);
          break;
        case AtomKind::ExpNode:
          cur = Atom::exp_node(substitute(a.expn->body, bindings));
          break;
        case AtomKind::IndNode:
          cur = Atom::ind_node(substitute(a.ind->f, bindings));
          break;
        default:
          break;
      }
      if (const SymExpr* v = lookup(bindings, cur))
        part = part * v->pow(ex);
      else
        part = part * SymExpr::atom(cur, ex);
    }
    acc += part;
  }
  return acc;
}

namespace {

struct Retimer {
  TimeBase from;
  const std::string& fromBound;
  const TimeIndex& to;

  bool matches(const TimeIndex& ix) const {
    return ix.base == from && (from != TimeBase::Bound || ix.bound == fromBound);
  }
  TimeIndex map_index(const TimeIndex& ix) const {
    if (!matches(ix)) return ix;
    TimeIndex r = to;
    r.offset += ix.offset;
    return r;
  }
  SymExpr run(const SymExpr& e) const;
  Formula run_formula(const Formula& f) const {
    Formula r = f;
    if (f.kind == Formula::Kind::Eq || f.kind == Formula::Kind::Lt ||
        f.kind == Formula::Kind::Le) {
      r.lhs = run(f.lhs);
      r.rhs = run(f.rhs);
    }
    for (size_t k = 0; k < r.kids.size(); ++k) r.kids[k] = run_formula(f.kids[k]);
    return r;
  }
};

SymExpr Retimer::run(const SymExpr& e) const {
  SymExpr acc;
  for (const auto& m : e.terms()) {
    Monomial scalar;
    scalar.coeff = m.coeff;
    scalar.params = m.params;
    SymExpr part = normalize_terms({scalar});
    for (const auto& [a, ex] : m.atoms) {
      switch (a.kind) {
        case AtomKind::Process:
          part = part * SymExpr::atom(Atom::process(a.name, map_index(a.index)), ex);
          break;
        case AtomKind::Sample:
          part = part * SymExpr::atom(Atom::sample(a.name, map_index(a.index), a.proj), ex);
          break;
        case AtomKind::TimeSym:
          if (matches(a.index))
            part = part * SymExpr::time_scalar(map_index(a.index)).pow(ex);
          else
            part = part * SymExpr::atom(a, ex);
          break;
        case AtomKind::SumNode: {
          SymExpr body = a.sum->body;
          if (!(from == TimeBase::Bound && a.sum->bound == fromBound)) body = run(body);
          part = part * SymExpr::atom(
                            Atom::sum_node(a.sum->bound, map_index(a.sum->lo),
                                           map_index(a.sum->hi), std::move(body)),
                            ex);
          break;
        }
        case AtomKind::CondNode:
          part = part * SymExpr::atom(
                            Atom::cond_node(run(a.cond->body), map_index(a.cond->filt)), ex);
          break;
        case AtomKind::ExpNode:
          part = part * SymExpr::atom(Atom::exp_node(run(a.expn->body)), ex);
          break;
        case AtomKind::IndNode:
          part = part * SymExpr::atom(Atom::ind_node(run_formula(a.ind->f)), ex);
          break;
      }
    }
    acc += part;
  }
  return acc;
}

}  // namespace

SymExpr retime(const SymExpr& e, TimeBase from, const std::string& fromBound,
               const TimeIndex& to) {
  return Retimer{from, fromBound, to}.run(e);
}

Formula retime(const Formula& f, TimeBase from, const std::string& fromBound,
               const TimeIndex& to) {
  return Retimer{from, fromBound, to}.run_formula(f);
}

void visit_atoms(const SymExpr& e, const std::function<void(const Atom&)>& fn) {
  for (const auto& m : e.terms()) {
    for (const auto& [a, ex] : m.atoms) {
      fn(a);
      switch (a.kind) {
        case AtomKind::SumNode:
          visit_atoms(a.sum->body, fn);
          break;
        case AtomKind::CondNode:
          visit_atoms(a.cond->body, fn);
          break;
        case AtomKind::ExpNode:
          visit_atoms(a.expn->body, fn);
          break;
        case AtomKind::IndNode:
          visit_atoms(a.ind->f, fn);
          break;
        default:
          break;
      }
    }
  }
}

void visit_atoms(const Formula& f, const std::function<void(const Atom&)>& fn) {
  if (f.kind == Formula::Kind::Eq || f.kind == Formula::Kind::Lt || f.kind == Formula::Kind::Le) {
    visit_atoms(f.lhs, fn);
    visit_atoms(f.rhs, fn);
  }
  for (const auto& k : f.kids) visit_atoms(k, fn);
}

bool contains_atom_kind(const SymExpr& e, AtomKind k) {
  bool found = false;
  visit_atoms(e, [&](const Atom& a) { found = found || a.kind == k; });
  return found;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

Rational eval_atom(const Atom& a, const EvalEnv& env) {
  switch (a.kind) {
    case AtomKind::Process:
    case AtomKind::Sample:
    case AtomKind::TimeSym:
      return env.leaf(a);
    case AtomKind::SumNode: {
      auto scalar_of = [&](const TimeIndex& ix) -> Rational {
        if (ix.base == TimeBase::Abs) return Rational(ix.offset);
        TimeIndex b = ix;
        b.offset = 0;
        return env.leaf(Atom::timesym(b)) + Rational(ix.offset);
      };
      Rational lo = scalar_of(a.sum->lo), hi = scalar_of(a.sum->hi);
      if (!is_integer(lo) || !is_integer(hi))
        throw Error("eval", "sum bounds must evaluate to integers");
      Rational total = 0;
      for (BigInt j = numerator(lo); j <= numerator(hi); ++j) {
        SymExpr body = retime(a.sum->body, TimeBase::Bound, a.sum->bound,
                              TimeIndex::abs(static_cast<int>(j)));
        total += eval(body, env);
      }
      return total;
    }
    case AtomKind::IndNode:
      return eval(a.ind->f, env) ? Rational(1) : Rational(0);
    case AtomKind::CondNode:
    case AtomKind::ExpNode:
      throw Error("eval", "cannot pointwise-evaluate " + to_string(a));
  }
  return 0;
}

}  // namespace

Rational eval(const SymExpr& e, const EvalEnv& env) {
  Rational total = 0;
  for (const auto& m : e.terms()) {
    Rational v = m.coeff;
    for (const auto& [n, ex] : m.params) v *= rat_pow(env.param(n), ex);
    for (const auto& [a, ex] : m.atoms) v *= rat_pow(eval_atom(a, env), ex);
    total += v;
  }
  return total;
}

bool eval(const Formula& f, const EvalEnv& env) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::True:
      return true;
    case K::False:
      return false;
    case K::Eq:
      return eval(f.lhs, env) == eval(f.rhs, env);
    case K::Lt:
      return eval(f.lhs, env) < eval(f.rhs, env);
    case K::Le:
      return eval(f.lhs, env) <= eval(f.rhs, env);
    case K::Not:
      return !eval(f.kids[0], env);
    case K::And:
      for (const auto& k : f.kids)
        if (!eval(k, env)) return false;
      return true;
    case K::Or:
      for (const auto& k : f.kids)
        if (eval(k, env)) return true;
      return false;
  }
  return false;
}

}  // namespace ostap
