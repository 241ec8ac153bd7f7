#include <cctype>
#include <sstream>
#include <vector>

#include "ostap/symexpr.hpp"

// S-expression wire format for SymExpr/Formula. Grammar:
//   poly    := (p mono*)
//   mono    := (m RAT (param*) (apow*))      param := (NAME INT)
//   apow    := (ATOM INT)
//   atom    := (v NAME ix) | (s NAME INT ix) | (t ix)
//            | (sum NAME ix ix poly) | (ce poly ix) | (ex poly) | (ind formula)
//   ix      := (a INT) | (i INT) | (b NAME INT) | (ta INT)
//   formula := (tt) | (ff) | (eq poly poly) | (lt poly poly) | (le poly poly)
//            | (not formula) | (and formula*) | (or formula*)

namespace ostap {

namespace {

void put_ix(std::ostream& os, const TimeIndex& ix) {
  switch (ix.base) {
    case TimeBase::Abs:
      os << "(a " << ix.offset << ")";
      break;
    case TimeBase::Loop:
      os << "(i " << ix.offset << ")";
      break;
    case TimeBase::Bound:
      os << "(b " << ix.bound << " " << ix.offset << ")";
      break;
    case TimeBase::Tau:
      os << "(ta " << ix.offset << ")";
      break;
  }
}

void put_expr(std::ostream& os, const SymExpr& e);
void put_formula(std::ostream& os, const Formula& f);

void put_atom(std::ostream& os, const Atom& a) {
  switch (a.kind) {
    case AtomKind::Process:
      os << "(v " << a.name << " ";
      put_ix(os, a.index);
      os << ")";
      break;
    case AtomKind::Sample:
      os << "(s " << a.name << " " << a.proj << " ";
      put_ix(os, a.index);
      os << ")";
      break;
    case AtomKind::TimeSym:
      os << "(t ";
      put_ix(os, a.index);
      os << ")";
      break;
    case AtomKind::SumNode:
      os << "(sum " << a.sum->bound << " ";
      put_ix(os, a.sum->lo);
      os << " ";
      put_ix(os, a.sum->hi);
      os << " ";
      put_expr(os, a.sum->body);
      os << ")";
      break;
    case AtomKind::CondNode:
      os << "(ce ";
      put_expr(os, a.cond->body);
      os << " ";
      put_ix(os, a.cond->filt);
      os << ")";
      break;
    case AtomKind::ExpNode:
      os << "(ex ";
      put_expr(os, a.expn->body);
      os << ")";
      break;
    case AtomKind::IndNode:
      os << "(ind ";
      put_formula(os, a.ind->f);
      os << ")";
      break;
  }
}

void put_expr(std::ostream& os, const SymExpr& e) {
  os << "(p";
  for (const auto& m : e.terms()) {
    os << " (m " << rat_str(m.coeff) << " (";
    for (size_t k = 0; k < m.params.size(); ++k) {
      if (k) os << " ";
      os << "(" << m.params[k].first << " " << m.params[k].second << ")";
    }
    os << ") (";
    for (size_t k = 0; k < m.atoms.size(); ++k) {
      if (k) os << " ";
      os << "(";
      put_atom(os, m.atoms[k].first);
      os << " " << m.atoms[k].second << ")";
    }
    os << "))";
  }
  os << ")";
}

void put_formula(std::ostream& os, const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::True:
      os << "(tt)";
      return;
    case K::False:
      os << "(ff)";
      return;
    case K::Eq:
    case K::Lt:
    case K::Le:
      os << (f.kind == K::Eq ? "(eq " : f.kind == K::Lt ? "(lt " : "(le ");
      put_expr(os, f.lhs);
      os << " ";
      put_expr(os, f.rhs);
      os << ")";
      return;
    case K::Not:
      os << "(not ";
      put_formula(os, f.kids[0]);
      os << ")";
      return;
    case K::And:
    case K::Or:
      os << (f.kind == K::And ? "(and" : "(or");
      for (const auto& k : f.kids) {
        os << " ";
        put_formula(os, k);
      }
      os << ")";
      return;
  }
}

// -- reader -----------------------------------------------------------------

struct SexprReader {
  const std::string& s;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) {
    throw Error("sexpr", msg + " at byte " + std::to_string(pos));
  }
  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  void expect(char c) {
    skip_ws();
    if (pos >= s.size() || s[pos] != c) fail(std::string("expected '") + c + "'");
    ++pos;
  }
  bool peek_close() {
    skip_ws();
    return pos < s.size() && s[pos] == ')';
  }
  std::string token() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) &&
           s[pos] != '(' && s[pos] != ')')
      ++pos;
    if (start == pos) fail("expected token");
    return s.substr(start, pos - start);
  }
  long integer() {
    std::string t = token();
    try {
      return std::stol(t);
    } catch (...) {
      fail("expected integer, got '" + t + "'");
    }
  }
  Rational rational() {
    std::string t = token();
    auto q = parse_rational(t);
    if (!q) fail("expected rational, got '" + t + "'");
    return *q;
  }

  TimeIndex ix() {
    expect('(');
    std::string tag = token();
    TimeIndex r;
    if (tag == "a")
      r = TimeIndex::abs(static_cast<int>(integer()));
    else if (tag == "i")
      r = TimeIndex::loop(static_cast<int>(integer()));
    else if (tag == "b") {
      std::string name = token();
      r = TimeIndex::bnd(name, static_cast<int>(integer()));
    } else if (tag == "ta")
      r = TimeIndex::tau(static_cast<int>(integer()));
    else
      fail("unknown index tag '" + tag + "'");
    expect(')');
    return r;
  }

  Atom atom() {
    expect('(');
    std::string tag = token();
    Atom a;
    if (tag == "v") {
      std::string name = token();
      a = Atom::process(name, ix());
    } else if (tag == "s") {
      std::string name = token();
      int proj = static_cast<int>(integer());
      a = Atom::sample(name, ix(), proj);
    } else if (tag == "t") {
      a = Atom::timesym(ix());
    } else if (tag == "sum") {
      std::string bound = token();
      TimeIndex lo = ix(), hi = ix();
      a = Atom::sum_node(bound, lo, hi, expr());
    } else if (tag == "ce") {
      SymExpr body = expr();
      a = Atom::cond_node(std::move(body), ix());
    } else if (tag == "ex") {
      a = Atom::exp_node(expr());
    } else if (tag == "ind") {
      a = Atom::ind_node(formula());
    } else {
      fail("unknown atom tag '" + tag + "'");
    }
    expect(')');
    return a;
  }

  SymExpr expr() {
    expect('(');
    std::string tag = token();
    if (tag != "p") fail("expected poly");
    std::vector<Monomial> terms;
    while (!peek_close()) {
      expect('(');
      if (token() != "m") fail("expected mono");
      Monomial m;
      m.coeff = rational();
      expect('(');
      while (!peek_close()) {
        expect('(');
        std::string name = token();
        m.params.push_back({name, static_cast<int>(integer())});
        expect(')');
      }
      expect(')');
      expect('(');
      while (!peek_close()) {
        expect('(');
        Atom a = atom();
        m.atoms.push_back({std::move(a), static_cast<int>(integer())});
        expect(')');
      }
      expect(')');
      expect(')');
      terms.push_back(std::move(m));
    }
    expect(')');
    return SymExpr::from_terms(std::move(terms));
  }

  Formula formula() {
    expect('(');
    std::string tag = token();
    Formula f;
    if (tag == "tt")
      f = Formula::truth(true);
    else if (tag == "ff")
      f = Formula::truth(false);
    else if (tag == "eq" || tag == "lt" || tag == "le") {
      SymExpr a = expr(), b = expr();
      f = tag == "eq" ? Formula::eq(a, b) : tag == "lt" ? Formula::lt(a, b) : Formula::le(a, b);
    } else if (tag == "not") {
      f = Formula::negate(formula());
    } else if (tag == "and" || tag == "or") {
      std::vector<Formula> kids;
      while (!peek_close()) kids.push_back(formula());
      f = tag == "and" ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
    } else {
      fail("unknown formula tag '" + tag + "'");
    }
    expect(')');
    return f;
  }
};

}  // namespace

std::string sexpr(const SymExpr& e) {
  std::ostringstream os;
  put_expr(os, e);
  return os.str();
}

std::string sexpr(const Formula& f) {
  std::ostringstream os;
  put_formula(os, f);
  return os.str();
}

SymExpr parse_sexpr_expr(const std::string& s) {
  SexprReader r{s};
  SymExpr e = r.expr();
  r.skip_ws();
  if (r.pos != s.size()) throw Error("sexpr", "trailing input");
  return e;
}

Formula parse_sexpr_formula(const std::string& s) {
  SexprReader r{s};
  Formula f = r.formula();
  r.skip_ws();
  if (r.pos != s.size()) throw Error("sexpr", "trailing input");
  return f;
}

}  // namespace ostap
