#pragma once

// End-to-end driver: program + seed + hints in, martingale + fact out.
// The CLI and the tests both go through this layer so they agree on how
// flags merge with pragmas and how fact files resolve.

#include <string>
#include <vector>

#include "ostap/ast.hpp"
#include "ostap/doob.hpp"
#include "ostap/fact.hpp"
#include "ostap/interval.hpp"
#include "ostap/recurrence.hpp"
#include "ostap/sidecond.hpp"

namespace ostap {

struct AnalysisOptions {
  std::string seedText;  // flag values; empty means "use the pragma"
  std::vector<std::string> hintTexts;
  std::string variantText;
  std::string solveForText;
  std::vector<std::string> useFacts;
  bool assumeOst = false;
  bool traceRules = false;
  std::string programDir;  // fact files resolve against the cwd, then here
};

struct AnalysisResult {
  enum class Outcome { Solved, Residual, Refused };

  Program prog;  // pragmas after flag merging
  StepSystem sys;
  ParamBox box;
  SymExpr seed;
  SymExpr martingale;
  SideConditionReport sideConditions;
  bool assumedOst = false;  // applied OST on trust of the listed obligations
  Outcome outcome = Outcome::Refused;
  Fact raw;         // straight OST output
  Fact simplified;  // after hint application
  Fact fact;        // after solving
  std::vector<Fact> knownFacts;
  std::vector<std::string> warnings;
  std::vector<RewriteStep> trace;

  int exit_code() const;  // 0 solved, 2 residual, 3 refused
};

Program load_program(const std::string& path);
Fact load_fact_file(const std::string& path, const std::string& programDir);
AnalysisResult analyze_program(Program prog, const AnalysisOptions& opt);

}  // namespace ostap
