#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ostap/ast.hpp"
#include "ostap/interval.hpp"
#include "ostap/recurrence.hpp"
#include "ostap/symexpr.hpp"

namespace ostap {

// One terminal case induced by the at-exit hints: the case formula (a
// disjunct, or True when the hints are plain conjunctions) plus every
// variable value known to hold in that case once the implication hints
// have been applied to fixpoint.
struct ExitCase {
  Formula when = Formula::truth(true);                  // process atoms at Loop(0)
  std::vector<std::pair<std::string, SymExpr>> values;  // values may mention tau
};

// Expands disjunctive at-exit hints into cases and saturates each case with
// the implication hints. Throws when two hints pin one variable to values
// the parameter ranges show are different.
std::vector<ExitCase> exit_cases(const Program& prog, const ParamBox& box);

// Equalities the every-iteration hints assert about the running loop.
std::vector<std::pair<std::string, SymExpr>> every_eqs(const Program& prog);

// Implication hints as formula pairs at Loop(0).
std::vector<std::pair<Formula, Formula>> implication_rules(const Program& prog);

}  // namespace ostap
