#pragma once

// Concrete interpreter for loop programs plus the statistical cross-check
// that compares symbolic facts against simulation at fixed parameter values.
//
// Trials are deterministic functions of (masterSeed, absolute trial index),
// so reports from disjoint trial ranges merge to exactly the single-run
// result. Accumulators hold exact rationals; doubles appear only in the
// derived mean / variance / standard-error views.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ostap/ast.hpp"
#include "ostap/fact.hpp"
#include "ostap/recurrence.hpp"

namespace ostap {

struct SimConfig {
  std::map<std::string, Rational> paramValues;
  long long trials = 100000;
  std::uint64_t masterSeed = 0;
  long long maxSteps = 1000000;       // per-trial cutoff; beyond it the trial is censored
  long long firstTrial = 0;           // absolute index of the first trial in this range
  std::vector<long long> probeIndices;  // fixed indices n at which to record M
};

struct Acc {
  long long n = 0;
  Rational sum = 0;
  Rational sumsq = 0;
  void add(const Rational& x);
  void merge(const Acc& o);
  double mean() const;
  double variance() const;  // sample variance
  double se() const;
};

struct SimReport {
  long long trials = 0;
  long long censored = 0;
  Acc tau;       // stopping index; censored trials excluded
  bool hasSeed = false;
  Acc seedAtTau;
  std::vector<std::pair<std::string, Acc>> events;  // exit-event hit rates
  bool hasMartingale = false;
  std::map<long long, Acc> probes;  // M at index min(max(n, first), tau)
  bool checkedIncrements = false;
  long long incrementViolations = 0;  // realized |M_i - M_{i-1}| above twice the bound
  double maxIncrement = 0;
  void merge(const SimReport& o);
};

// What to measure along each trial. All expressions use process atoms on the
// loop index; the martingale may also mention the loop counter itself.
struct SimInputs {
  std::optional<SymExpr> seed;
  std::optional<SymExpr> martingale;
  std::optional<Rational> incrementBound;  // verified C; flags |M_i - M_{i-1}| > 2C
  std::vector<std::pair<std::string, Formula>> events;  // evaluated on the exit state
};

SimReport run_trials(const Program& prog, const SimInputs& in, const SimConfig& cfg);

struct ValidateResult {
  bool pass = false;
  bool aborted = false;  // censoring above one in a thousand
  double lhsMean = 0;
  double rhsMean = 0;
  double diffMean = 0;
  double diffSe = 0;
  long long trials = 0;
  long long censored = 0;
  std::string note;
};

// Estimates both sides of a fact on a shared trial stream and accepts when the
// per-trial difference sits within four standard errors of zero (plus a 1e-9
// floor for exactly-zero cases). Solved facts are checked cross-multiplied.
ValidateResult validate(const Fact& fact, const Program& prog, const SimConfig& cfg);

// Deterministic-trace oracle: runs the body exactly steps.size() times with
// the supplied sample tuples (guard ignored) and returns states 0..m-1+steps.
// Each row maps a sample variable to its tuple, coordinate k at position k-1
// (scalar samples are one-element rows).
using SampleRow = std::map<std::string, std::vector<Rational>>;
std::vector<std::map<std::string, Rational>> run_trace(
    const Program& prog, const std::map<std::string, Rational>& params,
    const std::vector<SampleRow>& steps);

}  // namespace ostap
