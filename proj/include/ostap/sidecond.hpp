#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ostap/ast.hpp"
#include "ostap/interval.hpp"
#include "ostap/recurrence.hpp"
#include "ostap/symexpr.hpp"

namespace ostap {

enum class CondStatus { Verified, Obligation };

struct SideCondition {
  std::string name;  // "bounded-increments" / "finite-expected-time"
  CondStatus status = CondStatus::Obligation;
  std::string detail;
};

struct SideConditionReport {
  std::vector<SideCondition> items;
  // C such that |M_i - M_{i-1}| <= 2C on every run; set when the
  // bounded-increments item is Verified
  std::optional<SymExpr> incrementBound;

  bool all_verified() const;
  const SideCondition* find(const std::string& name) const;
};

// Per-variable intervals covering every state the seed is evaluated at:
// initial states, states the guard admits, and hinted exit states.
std::map<std::string, SymInterval> seed_state_bounds(const StepSystem& sys, const Program& prog,
                                                     const ParamBox& box);

// Per-variable intervals for states the loop is still running from: the
// guard holds strictly, every-iteration hints apply, integer-valued
// variables get their ranges tightened across excluded points.
std::map<std::string, SymInterval> running_state_bounds(const StepSystem& sys,
                                                        const Program& prog,
                                                        const ParamBox& box);

SideConditionReport check_side_conditions(const Program& prog, const StepSystem& sys,
                                          const SymExpr& seed, const ParamBox& box);

}  // namespace ostap
