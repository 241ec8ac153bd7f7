#pragma once

// Shared helpers for the test binaries: expression shorthands, program
// loading against the source tree, a generator for random first-order
// linear loop programs, and a direct AST interpreter used as the trace
// oracle.

#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ostap/analysis.hpp"
#include "ostap/ast.hpp"
#include "ostap/distribution.hpp"
#include "ostap/montecarlo.hpp"
#include "ostap/parser.hpp"
#include "ostap/rational.hpp"
#include "ostap/symexpr.hpp"

namespace testutil {

inline std::string source_dir() { return OSTAP_SOURCE_DIR; }

inline std::string programs_dir() { return source_dir() + "/programs"; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ostap::AnalysisResult run_analysis(const std::string& name,
                                          ostap::AnalysisOptions opt = {}) {
  opt.programDir = programs_dir();
  return ostap::analyze_program(ostap::load_program(programs_dir() + "/" + name), opt);
}

// expression shorthands
inline ostap::SymExpr C(long v) { return ostap::SymExpr::constant(v); }
inline ostap::SymExpr CQ(const ostap::Rational& q) { return ostap::SymExpr::constant(q); }
inline ostap::SymExpr P(const std::string& n, int e = 1) { return ostap::SymExpr::param(n, e); }
inline ostap::SymExpr V(const std::string& n, const ostap::TimeIndex& ix, int e = 1) {
  return ostap::SymExpr::atom(ostap::Atom::process(n, ix), e);
}
inline ostap::SymExpr EX(const ostap::SymExpr& body) {
  return ostap::SymExpr::atom(ostap::Atom::exp_node(body));
}
inline ostap::SymExpr TS(const ostap::TimeIndex& ix) { return ostap::SymExpr::time_scalar(ix); }

// ---------------------------------------------------------------------------
// Random first-order linear programs. Every variable is initialized to a
// small integer and assigned once per iteration as an affine combination of
// previous values and one scalar sample.

struct GenOptions {
  int maxVars = 3;
  bool allowSampleFree = false;  // let some variables ignore the sample
};

inline std::string gen_linear_program(std::mt19937_64& rng, const GenOptions& go = {}) {
  auto pick = [&](int n) { return (int)(rng() % (unsigned)n); };
  static const char* kCoef[] = {"1", "-1", "2", "-2", "1/2", "-1/2", "3/2", "-3/2"};
  int k = 1 + pick(go.maxVars);
  std::string t;
  for (int v = 0; v < k; ++v)
    t += "init x" + std::to_string(v + 1) + " := " + std::to_string(pick(7) - 3) + "\n";
  t += "while (x1 < 100) do\n";
  t += pick(2) ? "  z ~ Bern(1/2, {1, -1})\n" : "  z ~ Uniform{-1, 0, 2}\n";
  for (int v = 0; v < k; ++v) {
    std::string rhs = std::to_string(pick(5) - 2);
    for (int w = 0; w < k; ++w)
      if (pick(2)) rhs += " + (" + std::string(kCoef[pick(8)]) + ")*x" + std::to_string(w + 1) + "[-1]";
    if (!go.allowSampleFree || pick(4))
      rhs += " + (" + std::string(kCoef[pick(8)]) + ")*z";
    t += "  x" + std::to_string(v + 1) + " := " + rhs + "\n";
  }
  t += "end\n";
  return t;
}

// Random linear seed over the program's variables, never identically zero.
inline std::string gen_linear_seed(std::mt19937_64& rng, int nVars) {
  auto pick = [&](int n) { return (int)(rng() % (unsigned)n); };
  static const char* kCoef[] = {"1", "-1", "2", "-2", "1/2", "3/2"};
  std::string s;
  for (int v = 0; v < nVars; ++v) {
    if (pick(3) == 0 && !(v + 1 == nVars && s.empty())) continue;
    if (!s.empty()) s += " + ";
    s += "(" + std::string(kCoef[pick(6)]) + ")*x" + std::to_string(v + 1);
  }
  if (pick(2)) s += std::string(s.empty() ? "" : " + ") + std::to_string(pick(5) - 2);
  if (s.empty()) s = "x1";
  return s;
}

// ---------------------------------------------------------------------------
// Programs whose variables are drift-compensated walks, paired with a linear
// combination that is a martingale by construction. Every variable steps as
// x := x[-1] + a*z + b, so c.x + d*i + e is a martingale exactly when d
// cancels the accumulated drift.

struct MartingaleCase {
  std::string text;
  ostap::SymExpr martingale;
};

inline MartingaleCase gen_martingale_case(std::mt19937_64& rng) {
  using ostap::Rational;
  auto pick = [&](int n) { return (int)(rng() % (unsigned)n); };
  static const std::pair<const char*, Rational> kNoise[] = {
      {"Bern(1/2, {1, -1})", Rational(0)},
      {"Bern(1/3, {2, -1})", Rational(0)},
      {"Uniform{-1, 0, 2}", Rational(1, 3)},
      {"Uniform{-2, 0, 2}", Rational(0)},
  };
  static const Rational kCoef[] = {Rational(0), Rational(1),     Rational(-1),
                                   Rational(2), Rational(1, 2),  Rational(-3, 2)};
  auto lit = [](const Rational& q) { return "(" + ostap::rat_str(q) + ")"; };

  int k = 1 + pick(3);
  auto [noise, mu] = kNoise[pick(4)];
  std::string t;
  for (int v = 0; v < k; ++v)
    t += "init x" + std::to_string(v + 1) + " := " + std::to_string(pick(7) - 3) + "\n";
  t += "while (x1 < 100) do\n  z ~ " + std::string(noise) + "\n";

  ostap::SymExpr m;
  Rational drift = 0;
  bool any = false;
  for (int v = 0; v < k; ++v) {
    Rational a = kCoef[pick(6)], b = kCoef[pick(6)];
    std::string var = "x" + std::to_string(v + 1);
    t += "  " + var + " := " + var + "[-1] + " + lit(a) + "*z + " + lit(b) + "\n";
    Rational c = kCoef[pick(6)];
    if (v + 1 == k && !any && c == 0) c = 1;
    if (c != 0) {
      any = true;
      m += CQ(c) * V(var, ostap::TimeIndex::loop(0));
      drift += c * (b + a * mu);
    }
  }
  t += "end\n";
  m += CQ(-drift) * TS(ostap::TimeIndex::loop(0));
  if (int e = pick(5) - 2; e != 0) m += C(e);
  return {t, m};
}

// ---------------------------------------------------------------------------
// Direct interpreter over the surface tree; independent of the recurrence
// extraction that backs run_trace. States are complete maps over the
// program's variables, indices 0 .. firstLoopIndex-1 + steps.

inline ostap::Rational eval_surface(const ostap::SExprPtr& e,
                                    const std::map<std::string, ostap::Rational>& params,
                                    const std::vector<std::map<std::string, ostap::Rational>>& states,
                                    const std::map<std::string, ostap::Rational>* cur,
                                    const ostap::SampleRow* row) {
  using K = ostap::SExpr_::K;
  auto rec = [&](const ostap::SExprPtr& s) { return eval_surface(s, params, states, cur, row); };
  switch (e->k) {
    case K::Const: return e->c;
    case K::Param: return params.at(e->name);
    case K::Var:
      if (cur && cur->count(e->name)) return cur->at(e->name);
      throw std::runtime_error("variable read before assignment: " + e->name);
    case K::Hist: {
      size_t i = states.size();
      size_t k = i + e->arg;  // arg is negative
      return states.at(k).at(e->name);
    }
    case K::Sample: return row->at(e->name).at(0);
    case K::Proj: return row->at(e->name).at((size_t)e->arg - 1);
    case K::Time: throw std::runtime_error("t in a trace expression");
    case K::Add: return rec(e->a) + rec(e->b);
    case K::Sub: return rec(e->a) - rec(e->b);
    case K::Mul: return rec(e->a) * rec(e->b);
    case K::Neg: return -rec(e->a);
    case K::Pow: return ostap::rat_pow(rec(e->a), e->arg);
  }
  throw std::runtime_error("unhandled surface node");
}

inline std::vector<std::map<std::string, ostap::Rational>> oracle_trace(
    const ostap::Program& prog, const std::map<std::string, ostap::Rational>& params,
    const std::vector<ostap::SampleRow>& rows) {
  std::vector<std::map<std::string, ostap::Rational>> states;
  std::vector<std::string> vars;
  for (const auto& in : prog.inits) {
    bool seen = false;
    for (const auto& v : vars) seen = seen || v == in.var;
    if (!seen) vars.push_back(in.var);
  }
  for (int k = 0; k < prog.firstLoopIndex; ++k) {
    std::map<std::string, ostap::Rational> st;
    for (const auto& in : prog.inits)
      if (in.index == k) st[in.var] = eval_surface(in.value, params, states, nullptr, nullptr);
    states.push_back(std::move(st));
  }
  for (const auto& row : rows) {
    std::map<std::string, ostap::Rational> cur;
    for (const auto& as : prog.assigns)
      cur[as.var] = eval_surface(as.value, params, states, &cur, &row);
    for (const auto& v : vars)
      if (!cur.count(v)) cur[v] = states.back().at(v);
    states.push_back(std::move(cur));
  }
  return states;
}

}  // namespace testutil
