#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ostap/ast.hpp"
#include "ostap/hints.hpp"
#include "ostap/interval.hpp"
#include "ostap/recurrence.hpp"
#include "ostap/sidecond.hpp"

namespace ostap {

// An equation between two symbolic expressions, possibly containing
// expectation atoms. Solved facts isolate one expectation: lhs is the
// target atom and the closed form is solvedNum / solvedDen.
struct Fact {
  enum class Status { Raw, HintSimplified, Solved, Residual };
  SymExpr lhs, rhs;
  Status status = Status::Raw;

  SymExpr solvedNum, solvedDen;     // Solved only
  std::string targetText;           // Solved only
  std::vector<SymExpr> unknowns;    // Residual only
};

std::string to_string(Fact::Status s);

// Equation at the stopping time: seed value at the last initial state on
// the left, the expectation of the martingale at tau on the right, initial
// values substituted on both sides. Throws with where() == "ost-refused"
// when the side conditions are neither verified nor assumed.
Fact apply_ost(const StepSystem& sys, const SymExpr& seed, const SymExpr& martingale,
               const SideConditionReport& sc, bool assumeOst);

// Applies hints to fixpoint: residual sums are collapsed under
// every-iteration equalities, at-exit values substitute at tau, disjunctive
// exit hints split expectations into per-case indicator terms, decidable
// indicators evaluate, and expectations distribute over sums and scalars.
Fact apply_hints(const Fact& f, const Program& prog, const StepSystem& sys,
                 const ParamBox& box);

// Facts implied by the hint structure alone: when the at-exit hints are
// disjunctive, the case probabilities sum to one.
std::vector<Fact> implied_facts(const Program& prog, const ParamBox& box);

// The expectation atom a solve target denotes.
SymExpr target_expr(const SolveTarget& t);

// Eliminates other unknowns with the known facts, then isolates the target.
// With no explicit target, tries Exp(tau), then process means at tau, then
// event probabilities. Never divides: the closed form is kept as a
// numerator/denominator pair, reduced by their common monomial content.
Fact solve_fact(const Fact& f, const std::optional<SolveTarget>& target,
                const std::vector<Fact>& known, const ParamBox& box);

// One-line s-expression file round-trip. Solved facts are emitted
// cross-multiplied so files never carry division.
std::string fact_to_file(const Fact& f);
Fact fact_from_file(const std::string& text);

}  // namespace ostap
