#pragma once

// Conditional expectation elimination. Works directly on CE atoms with a
// small rule set: linearity, measurability against the step filtration,
// splitting a sum at the filtration edge, one-step unrolling of process
// variables, and moment substitution for samples drawn after the
// filtration time.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ostap/symexpr.hpp"

namespace ostap {

struct RewriteContext {
  // One-step recurrence of a process variable: its value at Loop(0) as a
  // polynomial over process atoms at Loop(-1) and sample atoms at Loop(0).
  // Return null for names without one (the unroll rule then skips them).
  std::function<const SymExpr*(const std::string&)> recurrence;

  // Joint moment E[prod_k pi_{p_k}(s)^{e_k}] for one sample name as a
  // parameter polynomial; pairs are (projection, exponent), projection 0
  // meaning the scalar value.
  std::function<SymExpr(const std::string&, const std::vector<std::pair<int, int>>&)>
      moment;

  int firstLoopIndex = 1;  // loop states start here; earlier states are init
};

struct RewriteStep {
  std::string rule;
  std::string before;  // conditional expectation that was rewritten
  std::string after;
};

struct RuleInfo {
  std::string name;
  std::string doc;
};

// The rules in application order, with one-line descriptions.
const std::vector<RuleInfo>& rewrite_rule_catalog();

// Apply rules to a fixpoint, innermost conditional expectations first.
// Ones no rule matches stay in place; callers decide whether that is
// fatal. Throws after 100000 steps with a trailing-rule diagnostic.
SymExpr resolve_cond(const SymExpr& e, const RewriteContext& ctx,
                     std::vector<RewriteStep>* trace = nullptr);

}  // namespace ostap
