#pragma once

// Exact symbolic expression kernel.
//
// A SymExpr is always held in canonical polynomial normal form: a sorted sum of
// monomials, each `rational * parameter Laurent-monomial * product of atoms^k`.
// Atoms are either leaves (process variable at a time index, sample variable with
// optional tuple projection, scalar time symbol) or opaque compound nodes
// (Sum, CondExp, Exp, Indicator) whose payloads are themselves canonical.
//
// Parameter exponents are integers and may be negative (Laurent): moment tables
// for uniform-over-alphabet distributions produce 1/L factors that must stay in
// the coefficient ring.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ostap/diag.hpp"
#include "ostap/rational.hpp"

namespace ostap {

// ---------------------------------------------------------------------------
// Time indices: affine offsets of one base symbol.
// Abs(k) is a concrete history index (inits, telescoped endpoints), Loop is the
// generic iteration symbol i, Bound is a summation variable, Tau the stopping time.

enum class TimeBase : uint8_t { Abs = 0, Loop = 1, Bound = 2, Tau = 3 };

struct TimeIndex {
  TimeBase base = TimeBase::Abs;
  int offset = 0;       // for Abs this *is* the index
  std::string bound;    // bound-variable name, Bound only

  static TimeIndex abs(int k) { return {TimeBase::Abs, k, {}}; }
  static TimeIndex loop(int off = 0) { return {TimeBase::Loop, off, {}}; }
  static TimeIndex tau(int off = 0) { return {TimeBase::Tau, off, {}}; }
  static TimeIndex bnd(std::string name, int off = 0) {
    return {TimeBase::Bound, off, std::move(name)};
  }

  bool operator==(const TimeIndex& o) const {
    return base == o.base && offset == o.offset && bound == o.bound;
  }
};

int cmp(const TimeIndex& a, const TimeIndex& b);
std::string to_string(const TimeIndex& ix);

// ---------------------------------------------------------------------------
// Atoms.

class SymExpr;
struct Formula;

struct SumData;      // sum_{bound = lo .. hi} body
struct CondData;     // E[ body | F_filt ]
struct ExpData;      // E[ body ]
struct IndData;      // 1{ formula }

enum class AtomKind : uint8_t {
  Process = 0,
  Sample = 1,
  TimeSym = 2,
  SumNode = 3,
  CondNode = 4,
  ExpNode = 5,
  IndNode = 6,
};

struct Atom {
  AtomKind kind = AtomKind::Process;
  std::string name;   // Process/Sample
  TimeIndex index;    // Process/Sample/TimeSym (TimeSym offset always 0)
  int proj = 0;       // Sample: 1-based tuple coordinate, 0 = scalar distribution
  std::shared_ptr<const SumData> sum;
  std::shared_ptr<const CondData> cond;
  std::shared_ptr<const ExpData> expn;
  std::shared_ptr<const IndData> ind;

  static Atom process(std::string name, TimeIndex ix);
  static Atom sample(std::string name, TimeIndex ix, int proj = 0);
  static Atom timesym(TimeIndex ix);  // offset folded out by callers
  static Atom sum_node(std::string bound, TimeIndex lo, TimeIndex hi, SymExpr body);
  static Atom cond_node(SymExpr body, TimeIndex filt);
  static Atom exp_node(SymExpr body);
  static Atom ind_node(Formula f);

  bool operator==(const Atom& o) const;
  bool operator<(const Atom& o) const;
};

int cmp(const Atom& a, const Atom& b);
std::string to_string(const Atom& a);

// ---------------------------------------------------------------------------
// Monomial: coeff * prod params^e (e in Z, != 0) * prod atoms^e (e >= 1).

struct Monomial {
  Rational coeff = 0;
  std::vector<std::pair<std::string, int>> params;  // sorted by name
  std::vector<std::pair<Atom, int>> atoms;          // sorted by atom order

  bool is_scalar() const { return atoms.empty(); }          // params/constant only
  bool is_constant() const { return atoms.empty() && params.empty(); }
};

int cmp_key(const Monomial& a, const Monomial& b);  // ignores coeff

// ---------------------------------------------------------------------------
// SymExpr: canonical sum of monomials. Construction canonicalizes, so
// normalize() is the identity re-canonicalization used after raw edits.

class SymExpr {
 public:
  SymExpr() = default;  // zero

  static SymExpr zero() { return SymExpr(); }
  static SymExpr constant(Rational q);
  static SymExpr constant(long v) { return constant(Rational(v)); }
  static SymExpr param(const std::string& name, int exp = 1);
  static SymExpr atom(Atom a, int exp = 1);
  // scalar value of a time index: Abs -> constant, otherwise TimeSym + offset
  static SymExpr time_scalar(const TimeIndex& ix);
  static SymExpr from_terms(std::vector<Monomial> terms);  // canonicalizes

  const std::vector<Monomial>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::optional<Rational> as_rational() const;  // set iff constant
  bool is_scalar() const;                       // no atoms anywhere at top level
  bool operator==(const SymExpr& o) const;

  SymExpr operator-() const;
  SymExpr operator+(const SymExpr& o) const;
  SymExpr operator-(const SymExpr& o) const;
  SymExpr operator*(const SymExpr& o) const;
  SymExpr& operator+=(const SymExpr& o) { return *this = *this + o; }
  SymExpr& operator-=(const SymExpr& o) { return *this = *this - o; }
  SymExpr& operator*=(const SymExpr& o) { return *this = *this * o; }
  SymExpr pow(int e) const;  // e >= 0

  // Max per-atom / per-param exponent allowed anywhere (spec default).
  static constexpr int kDegreeCap = 64;

 private:
  std::vector<Monomial> terms_;
  friend SymExpr normalize_terms(std::vector<Monomial>&& raw);
};

int cmp(const SymExpr& a, const SymExpr& b);
std::string to_string(const SymExpr& e);

// Re-canonicalization; exposed for tests (idempotent by construction).
SymExpr normalize(const SymExpr& e);

// ---------------------------------------------------------------------------
// Boolean formulas over SymExpr comparisons (guards, hints, indicator events).

struct Formula {
  enum class Kind : uint8_t { True, False, Eq, Lt, Le, Not, And, Or };
  Kind kind = Kind::True;
  SymExpr lhs, rhs;            // Eq/Lt/Le
  std::vector<Formula> kids;   // Not(1) / And(n) / Or(n)

  static Formula truth(bool v);
  static Formula eq(SymExpr a, SymExpr b);
  static Formula lt(SymExpr a, SymExpr b);
  static Formula le(SymExpr a, SymExpr b);
  static Formula negate(Formula f);
  static Formula conj(std::vector<Formula> fs);
  static Formula disj(std::vector<Formula> fs);

  bool operator==(const Formula& o) const { return cmp_formula(*this, o) == 0; }
  static int cmp_formula(const Formula& a, const Formula& b);
};

std::string to_string(const Formula& f);

struct SumData {
  std::string bound;
  TimeIndex lo, hi;
  SymExpr body;
};
struct CondData {
  SymExpr body;
  TimeIndex filt;
};
struct ExpData {
  SymExpr body;
};
struct IndData {
  Formula f;
};

// ---------------------------------------------------------------------------
// Structural operations.

// Replace exact atom occurrences by expressions, at every depth. Bindings whose
// key mentions a Sum's bound variable do not apply inside that Sum.
SymExpr substitute(const SymExpr& e,
                   const std::vector<std::pair<Atom, SymExpr>>& bindings);
Formula substitute(const Formula& f,
                   const std::vector<std::pair<Atom, SymExpr>>& bindings);

// Rebase every index on `from` (with bound name `fromBound` when from==Bound):
// offsets are preserved, i.e. (from, k) -> (to.base, to.offset + k). Scalar
// time symbols on `from` become scalar polynomials of the target.
SymExpr retime(const SymExpr& e, TimeBase from, const std::string& fromBound,
               const TimeIndex& to);
Formula retime(const Formula& f, TimeBase from, const std::string& fromBound,
               const TimeIndex& to);

// Visit every atom (outermost first); recurses into compound payloads.
void visit_atoms(const SymExpr& e, const std::function<void(const Atom&)>& fn);
void visit_atoms(const Formula& f, const std::function<void(const Atom&)>& fn);

bool contains_atom_kind(const SymExpr& e, AtomKind k);

// True if the atom/expression refers to the sum bound variable `name`
// (occurrences shadowed by an inner sum over the same name don't count).
bool mentions_bound(const Atom& a, const std::string& name);
bool mentions_bound(const SymExpr& e, const std::string& name);

// ---------------------------------------------------------------------------
// Evaluation (test oracles). Compound nodes: Sum is iterated when its bounds
// ground to integers, Indicator evaluates its formula; CondExp/Exp throw.

struct EvalEnv {
  std::function<Rational(const std::string&)> param;          // by name
  std::function<Rational(const Atom&)> leaf;                  // Process/Sample/TimeSym
};

Rational eval(const SymExpr& e, const EvalEnv& env);
bool eval(const Formula& f, const EvalEnv& env);

// S-expression dump/parse used by .fact files and debugging; round-trips
// exactly for every SymExpr/Formula.
std::string sexpr(const SymExpr& e);
std::string sexpr(const Formula& f);
SymExpr parse_sexpr_expr(const std::string& s);
Formula parse_sexpr_formula(const std::string& s);

}  // namespace ostap
