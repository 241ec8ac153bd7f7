#pragma once

// Closed forms for Sum atoms: telescoping differences, constants, and
// power sums of the bound variable up to degree 4. Anything else stays
// a residual Sum.

#include <string>
#include <vector>

#include "ostap/symexpr.hpp"

namespace ostap {

// Equality invariant `var = value` that holds at every state the guard
// saw (indices firstLoopIndex-1 .. tau-1). Used both to rewrite summands
// and to complete near-telescoping bodies.
struct EveryEq {
  std::string var;
  SymExpr value;  // parameter-only
};

struct SumSimplifyOptions {
  int firstLoopIndex = 1;  // m: states m-1..tau-1 are guard states
  std::vector<EveryEq> everyEq;
};

SymExpr simplify_sum(const SymExpr& e, const SumSimplifyOptions& opts = {});

// Sum of t^k for t = 1..n, as a polynomial in the scalar n. k <= 4.
SymExpr power_sum_closed(int k, const SymExpr& n);

}  // namespace ostap
