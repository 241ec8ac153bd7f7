#include "ostap/analysis.hpp"

#include <fstream>
#include <sstream>

#include "ostap/diag.hpp"
#include "ostap/hints.hpp"
#include "ostap/parser.hpp"

namespace ostap {

int AnalysisResult::exit_code() const {
  switch (outcome) {
    case Outcome::Solved: return 0;
    case Outcome::Residual: return 2;
    case Outcome::Refused: return 3;
  }
  return 1;
}

Program load_program(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open program file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

Fact load_fact_file(const std::string& path, const std::string& programDir) {
  std::ifstream in(path);
  if (!in && !programDir.empty()) in.open(programDir + "/" + path);
  if (!in) throw Error("io", "cannot open fact file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return fact_from_file(ss.str());
}

AnalysisResult analyze_program(Program prog, const AnalysisOptions& opt) {
  AnalysisResult R;

  if (!opt.seedText.empty()) {
    if (prog.pragmas.seed)
      R.warnings.push_back("--seed overrides the program's #seed pragma");
    prog.pragmas.seed = parse_seed(opt.seedText, prog);
  }
  for (const auto& h : opt.hintTexts) parse_hint(h, prog, prog.pragmas);
  if (!opt.variantText.empty()) {
    if (prog.pragmas.variant)
      R.warnings.push_back("--variant overrides the program's #variant pragma");
    prog.pragmas.variant = parse_variant(opt.variantText, prog);
  }
  if (!opt.solveForText.empty()) {
    if (prog.pragmas.solveFor)
      R.warnings.push_back("--solve-for overrides the program's #solve-for pragma");
    prog.pragmas.solveFor = parse_solve_target(opt.solveForText, prog);
  }
  for (const auto& f : opt.useFacts) prog.pragmas.useFacts.push_back(f);
  if (opt.assumeOst) prog.pragmas.assumeOst = true;

  if (!prog.pragmas.seed)
    throw Error("analyze", "no seed expression; pass --seed <expr> or add a '#seed:' pragma");

  R.prog = prog;
  R.sys = extract_recurrences(prog);
  R.box = ParamBox(prog.params);
  for (const auto& [name, dist] : R.sys.dists)
    for (const auto& o : dist.outcomes)
      if (R.box.proves(Formula::lt(o.prob, SymExpr::zero())))
        throw Error("analyze", "distribution of '" + name + "' puts negative mass " +
                                   to_string(o.prob) + " on an outcome");
  R.seed = lift_seed(prog, prog.pragmas.seed);

  DoobResult d = doob_decompose(R.sys, R.seed);
  R.martingale = d.martingale;
  if (opt.traceRules) R.trace = d.trace;

  R.sideConditions = check_side_conditions(prog, R.sys, R.seed, R.box);
  const bool assume = prog.pragmas.assumeOst;
  R.assumedOst = assume && !R.sideConditions.all_verified();
  try {
    R.raw = apply_ost(R.sys, R.seed, R.martingale, R.sideConditions, assume);
  } catch (const Error& e) {
    if (std::string(e.where()) == "ost-refused") {
      R.outcome = AnalysisResult::Outcome::Refused;
      return R;
    }
    throw;
  }

  R.simplified = apply_hints(R.raw, prog, R.sys, R.box);
  R.knownFacts = implied_facts(prog, R.box);
  for (const auto& path : prog.pragmas.useFacts)
    R.knownFacts.push_back(load_fact_file(path, opt.programDir));
  R.fact = solve_fact(R.simplified, prog.pragmas.solveFor, R.knownFacts, R.box);
  R.outcome = R.fact.status == Fact::Status::Solved ? AnalysisResult::Outcome::Solved
                                                    : AnalysisResult::Outcome::Residual;
  return R;
}

}  // namespace ostap
