#pragma once

#include <vector>

#include "ostap/recurrence.hpp"
#include "ostap/rewrite.hpp"

namespace ostap {

// Rewrite context backed by a step system. Holds pointers into `sys`,
// which must outlive the returned context.
RewriteContext make_rewrite_context(const StepSystem& sys);

struct DoobResult {
  SymExpr seed;        // E at Loop(0), as given
  SymExpr martingale;  // M at Loop(0); may keep a residual sum over states
  std::vector<RewriteStep> trace;
};

// Compensates the seed into a martingale: the value at the last init state
// plus the accumulated one-step surprises E_j - E[E_j | F_{j-1}]. The
// conditional expectations are eliminated by rewriting; whatever closed
// forms exist for the resulting sum are taken, the rest stays summed.
DoobResult doob_decompose(const StepSystem& sys, const SymExpr& seed);

struct MartingaleCheck {
  enum class Verdict { Yes, No, Unknown };
  Verdict verdict = Verdict::Unknown;
  SymExpr residual;  // E[M_i | F_{i-1}] - M_{i-1} after rewriting
  std::vector<RewriteStep> trace;
};

// Decides E[M_i | F_{i-1}] = M_{i-1} by rewriting. Unknown when a
// conditional expectation survives, No when the difference is a nonzero
// expression free of them.
MartingaleCheck check_martingale(const StepSystem& sys, const SymExpr& candidate);

}  // namespace ostap
