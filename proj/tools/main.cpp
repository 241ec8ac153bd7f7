// ostap command line: analyze | simulate | check-martingale | bench.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ostap/analysis.hpp"
#include "ostap/diag.hpp"
#include "ostap/doob.hpp"
#include "ostap/hints.hpp"
#include "ostap/interval.hpp"
#include "ostap/montecarlo.hpp"
#include "ostap/parser.hpp"
#include "ostap/rational.hpp"
#include "ostap/recurrence.hpp"
#include "ostap/report.hpp"
#include "ostap/sidecond.hpp"

namespace fs = std::filesystem;
using namespace ostap;

namespace {

struct SimFlags {
  std::vector<std::string> params;
  long long trials = 100000;
  std::uint64_t rngSeed = 0;
  long long maxSteps = 1000000;
};

std::map<std::string, Rational> parse_param_flags(const std::vector<std::string>& kvs) {
  std::map<std::string, Rational> out;
  for (const auto& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw Error("cli", "--param expects name=value, got '" + kv + "'");
    auto v = parse_rational(kv.substr(eq + 1));
    if (!v) throw Error("cli", "cannot parse '" + kv.substr(eq + 1) + "' as a rational");
    out[kv.substr(0, eq)] = *v;
  }
  return out;
}

SimConfig sim_config(const SimFlags& sf) {
  SimConfig cfg;
  cfg.paramValues = parse_param_flags(sf.params);
  cfg.trials = sf.trials;
  cfg.masterSeed = sf.rngSeed;
  cfg.maxSteps = sf.maxSteps;
  return cfg;
}

int run_analyze(const std::string& file, AnalysisOptions opt, const std::string& emitFact,
                bool doValidate, const SimFlags& sf, const std::string& format) {
  opt.programDir = fs::path(file).parent_path().string();
  AnalysisResult r = analyze_program(load_program(file), opt);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";

  bool refused = r.outcome == AnalysisResult::Outcome::Refused;
  if (!emitFact.empty()) {
    if (refused) {
      std::cerr << "warning: no fact to emit (analysis was refused)\n";
    } else {
      std::ofstream out(emitFact, std::ios::binary);
      if (!out) throw Error("cli", "cannot open '" + emitFact + "' for writing");
      out << fact_to_file(r.fact);
    }
  }

  std::optional<ValidateResult> val;
  if (doValidate && !refused) val = validate(r.fact, r.prog, sim_config(sf));

  if (format == "json") {
    std::cout << json_report(r, val ? &*val : nullptr);
  } else {
    std::cout << text_report(r);
    if (val) std::cout << "\n" << text_validation(*val);
  }
  return r.exit_code();
}

int run_simulate(const std::string& file, const std::string& seedText, const SimFlags& sf,
                 const std::string& format) {
  Program prog = load_program(file);
  if (!seedText.empty()) prog.pragmas.seed = parse_seed(seedText, prog);

  SimConfig cfg = sim_config(sf);
  SimInputs in;
  StepSystem sys = extract_recurrences(prog);
  ParamBox box(prog.params);

  if (prog.pragmas.seed) {
    SymExpr seed = lift_seed(prog, prog.pragmas.seed);
    DoobResult d = doob_decompose(sys, seed);
    in.seed = seed;
    in.martingale = d.martingale;
    cfg.probeIndices = {1, 5, 10};
    auto sc = check_side_conditions(prog, sys, seed, box);
    const auto* bi = sc.find("bounded-increments");
    if (bi && bi->status == CondStatus::Verified && sc.incrementBound) {
      EvalEnv env;
      env.param = [&cfg](const std::string& n) -> Rational {
        auto it = cfg.paramValues.find(n);
        if (it == cfg.paramValues.end())
          throw Error("cli", "parameter '" + n + "' needs --param " + n + "=<value>");
        return it->second;
      };
      env.leaf = [](const Atom& a) -> Rational {
        throw Error("cli", "increment bound mentions non-parameter '" + to_string(a) + "'");
      };
      in.incrementBound = eval(*sc.incrementBound, env);
    }
  }

  if (!prog.pragmas.atExit.empty()) {
    auto cases = exit_cases(prog, box);
    if (cases.size() > 1) {
      for (const auto& c : cases) {
        Formula shown = retime(c.when, TimeBase::Loop, "", TimeIndex::tau(0));
        in.events.emplace_back("Pr[" + to_string(shown) + "]", c.when);
      }
    }
  }

  SimReport rep = run_trials(prog, in, cfg);
  std::cout << (format == "json" ? json_sim_report(rep) : text_sim_report(rep));
  return 0;
}

int run_check(const std::string& file, const std::string& seedText) {
  Program prog = load_program(file);
  StepSystem sys = extract_recurrences(prog);
  SymExpr cand = lift_seed(prog, parse_seed(seedText, prog));
  MartingaleCheck mc = check_martingale(sys, cand);
  switch (mc.verdict) {
    case MartingaleCheck::Verdict::Yes:
      std::cout << "martingale: yes\n";
      return 0;
    case MartingaleCheck::Verdict::No:
      std::cout << "martingale: no\n  drift E[M_i | F_(i-1)] - M_(i-1) = "
                << to_string(mc.residual) << "\n";
      return 1;
    default:
      std::cout << "martingale: unknown\n  residual " << to_string(mc.residual) << "\n";
      return 2;
  }
}

int run_bench(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error("cli", "'" + dir + "' is not a directory");

  std::set<std::string> present;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".spp")
      present.insert(e.path().stem().string());

  std::cout << std::left << std::setw(12) << "program" << std::setw(10) << "status"
            << "seconds\n";
  if (present.empty()) return 0;

  const std::vector<std::string> canonical = {"geom", "gamble", "gamble2", "miniabra",
                                              "fullabra"};
  std::vector<std::string> order = canonical;
  for (const auto& name : present)
    if (std::find(canonical.begin(), canonical.end(), name) == canonical.end())
      order.push_back(name);

  for (const auto& name : order) {
    std::cout << std::left << std::setw(12) << name;
    if (!present.count(name)) {
      std::cout << std::setw(10) << "SKIPPED" << "-\n";
      continue;
    }
    auto t0 = std::chrono::steady_clock::now();
    std::string status;
    try {
      AnalysisOptions opt;
      opt.programDir = dir;
      AnalysisResult r = analyze_program(load_program(dir + "/" + name + ".spp"), opt);
      switch (r.outcome) {
        case AnalysisResult::Outcome::Solved: status = "Solved"; break;
        case AnalysisResult::Outcome::Residual: status = "Residual"; break;
        default: status = "Refused"; break;
      }
    } catch (const Error&) {
      status = "Error";
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << std::setw(10) << status << std::fixed << std::setprecision(2) << secs << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"martingale synthesis for probabilistic loops"};
  app.require_subcommand(1);

  std::string file, seedText, variantText, solveForText, emitFact, format = "text";
  std::vector<std::string> hintTexts, useFacts;
  bool assumeOst = false, traceRules = false, doValidate = false;
  SimFlags sf;

  auto add_sim_flags = [&sf](CLI::App* cmd) {
    cmd->add_option("--param", sf.params, "parameter value, name=value (repeatable)");
    cmd->add_option("--trials", sf.trials, "number of Monte Carlo trials");
    cmd->add_option("--rng-seed", sf.rngSeed, "master seed for the trial RNG");
    cmd->add_option("--max-steps", sf.maxSteps, "censor a trial after this many iterations");
  };

  CLI::App* an = app.add_subcommand("analyze", "derive a martingale and a stopping-time fact");
  an->add_option("file", file, "program (.spp)")->required();
  an->add_option("--seed", seedText, "seed expression over program variables");
  an->add_option("--hint", hintTexts, "exit knowledge, e.g. 'at-exit: x = 0 \\/ x = b'");
  an->add_option("--variant", variantText, "bounded variant 'expr, bound[, eps]'");
  an->add_option("--solve-for", solveForText, "target: E[tau], E[x@tau], or Pr[<formula>]");
  an->add_option("--use-fact", useFacts, "fact file from an earlier run (repeatable)");
  an->add_option("--emit-fact", emitFact, "write the final fact to this file");
  an->add_flag("--assume-ost", assumeOst, "apply optional stopping on unverified obligations");
  an->add_flag("--trace-rules", traceRules, "append the rewrite trace to the report");
  an->add_option("--format", format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  an->add_flag("--validate", doValidate, "Monte Carlo check of the final fact");
  add_sim_flags(an);

  CLI::App* si = app.add_subcommand("simulate", "run the loop and report sample statistics");
  si->add_option("file", file, "program (.spp)")->required();
  si->add_option("--seed", seedText, "track this seed's martingale during the run");
  si->add_option("--format", format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  add_sim_flags(si);

  CLI::App* ck = app.add_subcommand("check-martingale", "test a candidate martingale");
  ck->add_option("file", file, "program (.spp)")->required();
  ck->add_option("--seed", seedText, "candidate expression M_i")->required();

  CLI::App* be = app.add_subcommand("bench", "analyze every .spp in a directory and time it");
  be->add_option("dir", file, "directory of programs")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (an->parsed()) {
      AnalysisOptions opt;
      opt.seedText = seedText;
      opt.hintTexts = hintTexts;
      opt.variantText = variantText;
      opt.solveForText = solveForText;
      opt.useFacts = useFacts;
      opt.assumeOst = assumeOst;
      opt.traceRules = traceRules;
      return run_analyze(file, std::move(opt), emitFact, doValidate, sf, format);
    }
    if (si->parsed()) return run_simulate(file, seedText, sf, format);
    if (ck->parsed()) return run_check(file, seedText);
    if (be->parsed()) return run_bench(file);
  } catch (const Error& e) {
    std::cerr << "ostap: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ostap: internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
