#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ostap/distribution.hpp"
#include "ostap/rational.hpp"

namespace ostap {

// Surface syntax tree. Parsing desugars on the way in (x^2 becomes Pow,
// chained comparisons become conjunctions, "1/2" is folded to a rational),
// so printing then reparsing reproduces the same tree.

struct SExpr_;
using SExprPtr = std::shared_ptr<const SExpr_>;

struct SExpr_ {
  enum class K {
    Const,   // rational literal
    Param,   // declared parameter
    Var,     // process variable, current value in context
    Hist,    // process variable at a negative offset: x[-n]
    Sample,  // sample variable drawn this iteration (scalar view)
    Proj,    // pi_k(s), 1-based tuple coordinate
    Time,    // reserved symbol t (hints only)
    Add,
    Sub,
    Mul,
    Neg,
    Pow,     // integer exponent in `arg`
  };

  K k = K::Const;
  Rational c;
  std::string name;
  int arg = 0;  // Hist: offset (negative), Proj: coordinate, Pow: exponent
  SExprPtr a, b;
};

SExprPtr se_const(Rational q);
SExprPtr se_name(SExpr_::K k, std::string name);
SExprPtr se_hist(std::string name, int offset);
SExprPtr se_proj(std::string name, int coord);
SExprPtr se_binop(SExpr_::K k, SExprPtr a, SExprPtr b);
SExprPtr se_neg(SExprPtr a);
SExprPtr se_pow(SExprPtr a, int e);

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

struct SForm_;
using SFormPtr = std::shared_ptr<const SForm_>;

struct SForm_ {
  enum class K { Cmp, And, Or, Not };
  K k = K::Cmp;
  CmpOp op = CmpOp::Eq;
  SExprPtr lhs, rhs;            // Cmp
  std::vector<SFormPtr> kids;   // And/Or (>= 2), Not (1)
};

SFormPtr sf_cmp(CmpOp op, SExprPtr lhs, SExprPtr rhs);
SFormPtr sf_junction(SForm_::K k, std::vector<SFormPtr> kids);
SFormPtr sf_not(SFormPtr f);

bool equal(const SExprPtr& a, const SExprPtr& b);
bool equal(const SFormPtr& a, const SFormPtr& b);

// ---------------------------------------------------------------------------
// Program.

struct ParamDecl {
  std::string name;
  SExprPtr lo;       // null means unbounded below
  SExprPtr hi;       // null means unbounded above (oo)
  bool loOpen = true;
  bool hiOpen = true;
};

struct InitStmt {
  std::string var;
  int index = 0;     // init x[k] := e; bare form is index 0
  SExprPtr value;    // parameters and constants only
};

struct SampleStmt {
  std::string var;
  Distribution dist;
};

struct AssignStmt {
  std::string var;
  SExprPtr value;
};

struct ImplicationHint {
  SFormPtr premise;
  SFormPtr conclusion;
};

struct VariantSpec {
  SExprPtr expr;
  SExprPtr bound;
  SExprPtr eps;  // optional, null when absent
};

struct SolveTarget {
  enum class K { Tau, Mean, Prob };
  K k = K::Tau;
  std::string var;   // Mean
  SFormPtr formula;  // Prob
};

struct Pragmas {
  SExprPtr seed;
  std::vector<SFormPtr> atExit;
  std::vector<SFormPtr> every;
  std::vector<ImplicationHint> implies;
  std::optional<VariantSpec> variant;
  std::optional<SolveTarget> solveFor;
  std::vector<std::string> useFacts;
  bool assumeOst = false;
};

struct Program {
  std::vector<ParamDecl> params;
  std::vector<InitStmt> inits;
  SFormPtr guard;
  std::vector<SampleStmt> samples;
  std::vector<AssignStmt> assigns;
  Pragmas pragmas;

  // 1 + the largest init index; states 0 .. firstLoopIndex-1 are initial.
  int firstLoopIndex = 1;

  bool has_param(const std::string& n) const;
  bool has_var(const std::string& n) const;
  bool has_sample(const std::string& n) const;
  const Distribution* sample_dist(const std::string& n) const;
};

bool equal(const Program& a, const Program& b);

}  // namespace ostap
