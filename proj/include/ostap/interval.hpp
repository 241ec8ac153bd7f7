#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ostap/ast.hpp"
#include "ostap/symexpr.hpp"

namespace ostap {

// Closed rational interval with optional open/infinite endpoints.
struct QInterval {
  Rational lo, hi;
  bool loInf = false, hiInf = false;
  bool loOpen = false, hiOpen = false;

  static QInterval all() {
    QInterval q;
    q.loInf = q.hiInf = true;
    return q;
  }
  static QInterval point(const Rational& v) { return {v, v}; }
  static QInterval closed(const Rational& a, const Rational& b) { return {a, b}; }

  bool is_point(const Rational& v) const {
    return !loInf && !hiInf && !loOpen && !hiOpen && lo == v && hi == v;
  }
};

QInterval qadd(const QInterval& a, const QInterval& b);
QInterval qneg(const QInterval& a);
QInterval qmul(const QInterval& a, const QInterval& b);
QInterval qpow(const QInterval& a, int e);  // e < 0 inverts; undefined over 0 widens to all
QInterval qhull(const QInterval& a, const QInterval& b);

enum class Sign { Negative, NonPositive, Zero, NonNegative, Positive, Unknown };

// Decides signs of parameter polynomials over the declared ranges. Ranges
// whose endpoints mention earlier parameters are handled by rewriting the
// parameter as that endpoint plus a fresh nonnegative slack, so facts like
// "b in (a, oo) implies b - a > 0" survive the box approximation.
class ParamBox {
 public:
  ParamBox() = default;
  explicit ParamBox(const std::vector<ParamDecl>& decls);

  QInterval eval(const SymExpr& scalar) const;
  Sign sign(const SymExpr& scalar) const;

  // three-valued proof obligations over scalar comparisons
  bool proves(const Formula& f) const;
  bool refutes(const Formula& f) const;

  // interval of one named parameter
  QInterval range(const std::string& name) const;

 private:
  std::map<std::string, QInterval> box_;                 // base params and slacks
  std::vector<std::pair<std::string, SymExpr>> subst_;   // decl order, fully expanded
  SymExpr expand(const SymExpr& scalar) const;
};

// Interval with parameter-polynomial endpoints (infinite when flagged).
struct SymInterval {
  SymExpr lo, hi;
  bool loInf = true, hiInf = true;
  bool loOpen = false, hiOpen = false;

  static SymInterval top() { return {}; }
  static SymInterval point(const SymExpr& v) {
    SymInterval s;
    s.lo = s.hi = v;
    s.loInf = s.hiInf = false;
    return s;
  }
  bool is_top() const { return loInf && hiInf; }
};

std::string to_string(const SymInterval& s);

// Smallest decidable interval containing both.
SymInterval shull(const SymInterval& a, const SymInterval& b, const ParamBox& box);

// Conservative intersection: refinements that cannot be ordered against the
// current endpoint are dropped rather than guessed.
SymInterval sintersect(const SymInterval& a, const SymInterval& b, const ParamBox& box);

// Evaluates a polynomial over per-variable intervals, looking atoms up by
// name only (any time index). Returns nullopt when some step is undecidable
// (mixed-sign products, unknown scalar signs, compound atoms).
std::optional<SymInterval> eval_interval(const SymExpr& e,
                                         const std::map<std::string, SymInterval>& env,
                                         const ParamBox& box);

// |e| <= C extraction: lo >= 0 gives hi, hi <= 0 gives -lo, and a symmetric
// interval gives its upper endpoint. Nullopt otherwise.
std::optional<SymExpr> abs_bound(const SymInterval& iv, const ParamBox& box);

}  // namespace ostap
