#pragma once

#include <map>
#include <string>
#include <vector>

#include "ostap/ast.hpp"
#include "ostap/symexpr.hpp"

namespace ostap {

// Controls how surface names resolve when lowering to symbolic form.
struct LiftCtx {
  // where a bare process variable lands; x[-n] shifts n below this
  TimeIndex varBase = TimeIndex::loop(0);
  // values already assigned this iteration (loop bodies only)
  const std::map<std::string, SymExpr>* inlined = nullptr;
  bool samplesAllowed = false;  // z / pi_k(s), placed at varBase
  bool timeAllowed = false;     // 't', lowered to the stopping time symbol
};

SymExpr lift_expr(const SExprPtr& e, const LiftCtx& ctx);
Formula lift_formula(const SFormPtr& f, const LiftCtx& ctx);

// One-step update system extracted from the loop body. step[v] gives the
// value of v at loop state i as a polynomial over process atoms at i-1,
// i-2, ... and sample atoms at i (encoded relative to Loop(0)). Assignments
// earlier in the body are inlined into later right-hand sides; variables the
// body never assigns carry their previous value.
struct StepSystem {
  std::map<std::string, SymExpr> step;
  std::map<std::string, Distribution> dists;                 // by sample variable
  std::vector<std::string> processOrder;                     // first-init order
  std::vector<std::string> sampleOrder;                      // statement order
  std::map<std::string, std::vector<SymExpr>> initValues;    // states 0..m-1, parameter polys
  Formula guard;                                             // process atoms at Loop(0)
  int firstLoopIndex = 1;

  // process atoms at Abs k (k < firstLoopIndex) -> init value
  std::vector<std::pair<Atom, SymExpr>> init_bindings() const;
};

StepSystem extract_recurrences(const Program& prog);

// Seed expression E(X_i) with process atoms at Loop(0); rejects samples.
SymExpr lift_seed(const Program& prog, const SExprPtr& seed);

}  // namespace ostap
