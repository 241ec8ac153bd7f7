#include "ostap/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ostap/diag.hpp"

namespace ostap {

namespace {

double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace

void Acc::add(const Rational& x) {
  ++n;
  sum += x;
  sumsq += x * x;
}

void Acc::merge(const Acc& o) {
  n += o.n;
  sum += o.sum;
  sumsq += o.sumsq;
}

double Acc::mean() const { return n ? to_double(sum / n) : 0.0; }

double Acc::variance() const {
  if (n < 2) return 0.0;
  Rational v = (sumsq - sum * sum / n) / (n - 1);
  return std::max(0.0, to_double(v));
}

double Acc::se() const { return n ? std::sqrt(variance() / n) : 0.0; }

void SimReport::merge(const SimReport& o) {
  trials += o.trials;
  censored += o.censored;
  tau.merge(o.tau);
  hasSeed = hasSeed || o.hasSeed;
  seedAtTau.merge(o.seedAtTau);
  if (events.size() < o.events.size()) events.resize(o.events.size());
  for (size_t i = 0; i < o.events.size(); ++i) {
    if (events[i].first.empty()) events[i].first = o.events[i].first;
    events[i].second.merge(o.events[i].second);
  }
  for (const auto& [k, a] : o.probes) probes[k].merge(a);
  hasMartingale = hasMartingale || o.hasMartingale;
  checkedIncrements = checkedIncrements || o.checkedIncrements;
  incrementViolations += o.incrementViolations;
  maxIncrement = std::max(maxIncrement, o.maxIncrement);
}

// ---------------------------------------------------------------------------
// Compiled evaluation. State history lives in a ring buffer (slot = var *
// depth + lag); samples get their own slots, refilled each iteration. The
// integer path scales each polynomial by the lcm of its coefficient
// denominators and evaluates in 128 bits with range checks; any excursion
// beyond 2^62 falls back to exact rationals for the rest of the run.

namespace {

constexpr __int128 kLim = (__int128)1 << 62;

struct FastOverflow {};

inline __int128 chk(__int128 v) {
  if (v > kLim || v < -kLim) throw FastOverflow{};
  return v;
}

Rational q_from_i128(__int128 v) {
  bool neg = v < 0;
  unsigned __int128 u = neg ? (unsigned __int128)0 - (unsigned __int128)v
                            : (unsigned __int128)v;
  BigInt b = BigInt((std::uint64_t)(u >> 64));
  b <<= 64;
  b += BigInt((std::uint64_t)u);
  if (neg) b = -b;
  return Rational(b);
}

std::optional<long long> fit_ll(const Rational& q) {
  if (!is_integer(q)) return std::nullopt;
  BigInt n = numerator(q);
  static const BigInt lim = BigInt(1) << 62;
  if (n > lim || n < -lim) return std::nullopt;
  return n.convert_to<long long>();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t idx) {
  return splitmix64(master ^ (0x9E3779B97F4A7C15ull * (idx + 1)));
}

SymExpr subst_params_total(const SymExpr& e, const std::map<std::string, Rational>& pv,
                           const char* who) {
  std::vector<Monomial> out;
  for (Monomial m : e.terms()) {
    Rational c = m.coeff;
    for (const auto& [p, ex] : m.params) {
      auto it = pv.find(p);
      if (it == pv.end()) throw Error(who, "parameter '" + p + "' is unbound");
      if (ex < 0 && it->second == 0)
        throw Error(who, "parameter '" + p + "' is zero but appears in a denominator");
      c *= rat_pow(it->second, ex);
    }
    m.coeff = c;
    m.params.clear();
    out.push_back(std::move(m));
  }
  return SymExpr::from_terms(std::move(out));
}

struct CTerm {
  Rational q;
  long long qi = 0;
  std::vector<std::pair<int, int>> stateSlots;   // (ring slot, exponent)
  std::vector<std::pair<int, int>> sampleSlots;  // (sample slot, exponent)
  int timeExp = 0;
};

struct CPoly {
  std::vector<CTerm> terms;
  Rational scale = 1;  // integer; qi == q * scale on the fast path
  bool intOK = true;
};

struct CForm {
  Formula::Kind kind = Formula::Kind::True;
  CPoly diff;  // lhs - rhs, compared against zero
  std::vector<CForm> kids;
};

struct CDist {
  std::string var;
  int arity = 1;
  // pick the smallest k with r <= thresholds[k]; entries are
  // ceil(cumulative * 2^64) - 1, so the comparison is exact
  std::vector<std::uint64_t> thresholds;
  std::vector<std::vector<Rational>> values;  // nonzero-probability outcomes
  std::vector<std::vector<long long>> ivalues;
  bool intOK = true;
  std::vector<std::pair<int, int>> writes;  // (sample slot, coordinate index)
};

struct Engine {
  StepSystem sys;
  int m = 1;
  int depth = 2;
  int nVars = 0;
  std::vector<std::string> vars;
  std::map<std::string, int> varIx;
  std::map<std::pair<std::string, int>, int> sampleSlotIx;
  int nSampleSlots = 0;
  std::vector<Rational> initQ;  // var-major, m states each
  std::vector<long long> initI;
  std::vector<CPoly> steps;  // by var index
  CForm guard;
  std::optional<CPoly> seed;
  std::optional<CPoly> mart;
  Rational martScale = 1;
  std::vector<std::pair<std::string, CForm>> events;
  std::vector<CDist> dists;  // sample order
  bool fastOK = true;
  bool haveBound = false;
  Rational bound2 = 0;        // 2C
  Rational bound2Scaled = 0;  // 2C * martScale
  long long bound2Floor = 0;
  long long maxSteps = 1000000;
  std::vector<long long> probes;
};

void check_params(const Program& prog, const std::map<std::string, Rational>& pv,
                  const char* who) {
  for (const auto& [name, v] : pv)
    if (!prog.has_param(name)) throw Error(who, "unknown parameter '" + name + "'");
  EvalEnv env;
  env.param = [&](const std::string& p) -> Rational {
    auto it = pv.find(p);
    if (it == pv.end()) throw Error(who, std::string("parameter '") + p + "' is unbound");
    return it->second;
  };
  env.leaf = [who](const Atom&) -> Rational {
    throw Error(who, "parameter constraint references a state");
  };
  for (const auto& d : prog.params) {
    auto it = pv.find(d.name);
    if (it == pv.end())
      throw Error(who, "parameter '" + d.name + "' is unbound; pass --param " + d.name +
                           "=<value>");
    const Rational& v = it->second;
    if (d.lo) {
      Rational lo = eval(lift_expr(d.lo, LiftCtx{}), env);
      if (d.loOpen ? !(v > lo) : !(v >= lo))
        throw Error(who, "parameter '" + d.name + "' = " + rat_str(v) +
                             " is below its declared range");
    }
    if (d.hi) {
      Rational hi = eval(lift_expr(d.hi, LiftCtx{}), env);
      if (d.hiOpen ? !(v < hi) : !(v <= hi))
        throw Error(who, "parameter '" + d.name + "' = " + rat_str(v) +
                             " is above its declared range");
    }
  }
}

struct Builder {
  const std::map<std::string, Rational>& pv;
  Engine& E;

  int sample_slot(const std::string& name, int idx) {
    auto key = std::make_pair(name, idx);
    auto it = E.sampleSlotIx.find(key);
    if (it != E.sampleSlotIx.end()) return it->second;
    int id = E.nSampleSlots++;
    E.sampleSlotIx.emplace(key, id);
    return id;
  }

  CPoly compile(const SymExpr& e0) {
    SymExpr e = subst_params_total(e0, pv, "simulate");
    CPoly p;
    BigInt den = 1;
    for (const auto& m : e.terms()) {
      CTerm t;
      t.q = m.coeff;
      for (const auto& [a, ex] : m.atoms) {
        switch (a.kind) {
          case AtomKind::Process: {
            auto vit = E.varIx.find(a.name);
            if (vit == E.varIx.end())
              throw Error("simulate", "unknown process variable '" + a.name + "'");
            if (a.index.base == TimeBase::Abs) {
              int k = a.index.offset;
              if (k < 0 || k >= E.m)
                throw Error("simulate", "expression references state " + std::to_string(k) +
                                            " which is not an initial state");
              t.q *= rat_pow(E.initQ[vit->second * E.m + k], ex);
            } else if (a.index.base == TimeBase::Loop) {
              if (a.index.offset > 0)
                throw Error("simulate", "expression references a future state");
              int lag = -a.index.offset;
              t.stateSlots.emplace_back(vit->second * E.depth + lag, ex);
            } else {
              throw Error("simulate",
                          "expression references the stopping time and cannot be "
                          "evaluated along a trial");
            }
            break;
          }
          case AtomKind::Sample: {
            if (a.index.base != TimeBase::Loop || a.index.offset != 0)
              throw Error("simulate", "sample draw referenced outside its iteration");
            int idx = a.proj == 0 ? 0 : a.proj - 1;
            t.sampleSlots.emplace_back(sample_slot(a.name, idx), ex);
            break;
          }
          case AtomKind::TimeSym: {
            if (a.index.base != TimeBase::Loop)
              throw Error("simulate", "expression references the stopping time symbol");
            t.timeExp += ex;
            break;
          }
          default:
            throw Error("simulate",
                        "expression contains a symbolic node the interpreter cannot "
                        "evaluate");
        }
      }
      using boost::multiprecision::lcm;
      den = lcm(den, denominator(t.q));
      p.terms.push_back(std::move(t));
    }
    p.scale = Rational(den);
    for (auto& t : p.terms) {
      auto f = fit_ll(t.q * p.scale);
      if (f)
        t.qi = *f;
      else
        p.intOK = false;
    }
    return p;
  }

  CForm compile_form(const Formula& f) {
    CForm c;
    c.kind = f.kind;
    switch (f.kind) {
      case Formula::Kind::True:
      case Formula::Kind::False: break;
      case Formula::Kind::Eq:
      case Formula::Kind::Lt:
      case Formula::Kind::Le: c.diff = compile(f.lhs - f.rhs); break;
      default:
        for (const auto& k : f.kids) c.kids.push_back(compile_form(k));
    }
    return c;
  }
};

bool form_int_ok(const CForm& f) {
  if (!f.diff.intOK) return false;
  for (const auto& k : f.kids)
    if (!form_int_ok(k)) return false;
  return true;
}

Engine build_engine(const Program& prog, const SimInputs& in, const SimConfig& cfg) {
  check_params(prog, cfg.paramValues, "simulate");
  Engine E;
  E.sys = extract_recurrences(prog);
  E.m = E.sys.firstLoopIndex;
  E.vars = E.sys.processOrder;
  E.nVars = (int)E.vars.size();
  for (int i = 0; i < E.nVars; ++i) E.varIx[E.vars[i]] = i;
  E.maxSteps = cfg.maxSteps;
  E.probes = cfg.probeIndices;
  std::sort(E.probes.begin(), E.probes.end());
  E.probes.erase(std::unique(E.probes.begin(), E.probes.end()), E.probes.end());

  // initial states
  E.initQ.resize((size_t)E.nVars * E.m);
  E.initI.resize((size_t)E.nVars * E.m, 0);
  bool initsInt = true;
  for (int v = 0; v < E.nVars; ++v) {
    const auto& states = E.sys.initValues.at(E.vars[v]);
    for (int k = 0; k < E.m; ++k) {
      SymExpr iv = subst_params_total(states[k], cfg.paramValues, "simulate");
      auto r = iv.as_rational();
      if (!r)
        throw Error("simulate", "initial value of '" + E.vars[v] +
                                    "' is not numeric at these parameters");
      E.initQ[(size_t)v * E.m + k] = *r;
      auto f = fit_ll(*r);
      if (f)
        E.initI[(size_t)v * E.m + k] = *f;
      else
        initsInt = false;
    }
  }

  // ring depth: one slot past the deepest lag used anywhere
  int maxLag = 1;
  auto scanE = [&](const SymExpr& e) {
    visit_atoms(e, [&](const Atom& a) {
      if (a.kind == AtomKind::Process && a.index.base == TimeBase::Loop &&
          a.index.offset < 0)
        maxLag = std::max(maxLag, -a.index.offset);
    });
  };
  auto scanF = [&](const Formula& f) {
    visit_atoms(f, [&](const Atom& a) {
      if (a.kind == AtomKind::Process && a.index.base == TimeBase::Loop &&
          a.index.offset < 0)
        maxLag = std::max(maxLag, -a.index.offset);
    });
  };
  for (const auto& v : E.vars) scanE(E.sys.step.at(v));
  scanF(E.sys.guard);
  if (in.seed) scanE(*in.seed);
  if (in.martingale) scanE(*in.martingale);
  for (const auto& [name, f] : in.events) scanF(f);
  E.depth = maxLag + 1;

  Builder b{cfg.paramValues, E};
  bool polysInt = true;
  for (const auto& v : E.vars) {
    CPoly p = b.compile(E.sys.step.at(v));
    if (!p.intOK || p.scale != 1) polysInt = false;  // states must stay integer
    E.steps.push_back(std::move(p));
  }
  E.guard = b.compile_form(E.sys.guard);
  if (!form_int_ok(E.guard)) polysInt = false;
  if (in.seed) {
    E.seed = b.compile(*in.seed);
    if (!E.seed->intOK) polysInt = false;
  }
  if (in.martingale) {
    E.mart = b.compile(*in.martingale);
    E.martScale = E.mart->scale;
    if (!E.mart->intOK) polysInt = false;
  }
  for (const auto& [name, f] : in.events) {
    CForm c = b.compile_form(f);
    if (!form_int_ok(c)) polysInt = false;
    E.events.emplace_back(name, std::move(c));
  }

  // distributions: exact cumulative thresholds against a 64-bit uniform draw
  bool distsInt = true;
  for (const auto& name : E.sys.sampleOrder) {
    const Distribution& d = E.sys.dists.at(name);
    CDist cd;
    cd.var = name;
    cd.arity = d.arity;
    Rational cum = 0;
    for (const auto& oc : d.outcomes) {
      SymExpr pe = subst_params_total(oc.prob, cfg.paramValues, "simulate");
      auto pr = pe.as_rational();
      if (!pr || *pr < 0 || *pr > 1)
        throw Error("simulate", "an outcome probability for '" + name +
                                    "' is not in [0,1] at these parameters");
      if (*pr == 0) continue;
      cum += *pr;
      BigInt t = ((numerator(cum) << 64) + denominator(cum) - 1) / denominator(cum);
      cd.thresholds.push_back((t - 1).convert_to<std::uint64_t>());
      cd.values.push_back(oc.value);
      std::vector<long long> iv;
      for (const auto& q : oc.value) {
        auto f = fit_ll(q);
        if (!f) {
          cd.intOK = false;
          break;
        }
        iv.push_back(*f);
      }
      cd.ivalues.push_back(std::move(iv));
    }
    if (cum != 1)
      throw Error("simulate", "probabilities for '" + name + "' sum to " + rat_str(cum) +
                                  " instead of 1 at these parameters");
    if (!cd.intOK) distsInt = false;
    E.dists.push_back(std::move(cd));
  }
  for (const auto& [key, slot] : E.sampleSlotIx) {
    bool found = false;
    for (auto& cd : E.dists) {
      if (cd.var != key.first) continue;
      if (key.second >= cd.arity)
        throw Error("simulate", "projection " + std::to_string(key.second + 1) +
                                    " out of range for sample '" + key.first + "'");
      cd.writes.emplace_back(slot, key.second);
      found = true;
    }
    if (!found) throw Error("simulate", "unknown sample variable '" + key.first + "'");
  }

  E.fastOK = initsInt && polysInt && distsInt;

  if (in.incrementBound && E.mart) {
    E.haveBound = true;
    E.bound2 = 2 * *in.incrementBound;
    E.bound2Scaled = E.bound2 * E.martScale;
    BigInt fl = numerator(E.bound2Scaled) / denominator(E.bound2Scaled);
    static const BigInt lim = BigInt(1) << 62;
    E.bound2Floor = fl > lim ? (long long)(1ll << 62) : fl.convert_to<long long>();
  }
  return E;
}

// ---- polynomial / formula evaluation ---------------------------------------

__int128 eval_i(const CPoly& p, const std::vector<long long>& ring,
                const std::vector<long long>& smp, long long i) {
  __int128 acc = 0;
  for (const auto& t : p.terms) {
    __int128 f = t.qi;
    for (const auto& [s, e] : t.stateSlots)
      for (int k = 0; k < e; ++k) f = chk(f * ring[s]);
    for (const auto& [s, e] : t.sampleSlots)
      for (int k = 0; k < e; ++k) f = chk(f * smp[s]);
    for (int k = 0; k < t.timeExp; ++k) f = chk(f * (__int128)i);
    acc = chk(acc + f);
  }
  return acc;
}

Rational eval_q(const CPoly& p, const std::vector<Rational>& ring,
                const std::vector<Rational>& smp, long long i) {
  Rational acc = 0;
  for (const auto& t : p.terms) {
    Rational f = t.q;
    for (const auto& [s, e] : t.stateSlots)
      for (int k = 0; k < e; ++k) f *= ring[s];
    for (const auto& [s, e] : t.sampleSlots)
      for (int k = 0; k < e; ++k) f *= smp[s];
    for (int k = 0; k < t.timeExp; ++k) f *= i;
    acc += f;
  }
  return acc;
}

template <bool kInt>
bool eval_form(const CForm& f,
               const std::vector<std::conditional_t<kInt, long long, Rational>>& ring,
               const std::vector<std::conditional_t<kInt, long long, Rational>>& smp,
               long long i) {
  auto val = [&]() {
    if constexpr (kInt)
      return eval_i(f.diff, ring, smp, i);
    else
      return eval_q(f.diff, ring, smp, i);
  };
  switch (f.kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Eq: return val() == 0;
    case Formula::Kind::Lt: return val() < 0;
    case Formula::Kind::Le: return val() <= 0;
    case Formula::Kind::Not: return !eval_form<kInt>(f.kids[0], ring, smp, i);
    case Formula::Kind::And:
      for (const auto& k : f.kids)
        if (!eval_form<kInt>(k, ring, smp, i)) return false;
      return true;
    case Formula::Kind::Or:
      for (const auto& k : f.kids)
        if (eval_form<kInt>(k, ring, smp, i)) return true;
      return false;
  }
  return false;
}

// ---- one trial --------------------------------------------------------------

struct TrialOut {
  bool censored = false;
  long long tau = 0;
  bool hasSeedVal = false;
  Rational seedVal;
  std::vector<char> eventHit;
  std::vector<std::pair<long long, Rational>> probeVals;
  long long violations = 0;
  double maxInc = 0;
};

template <bool kInt>
void run_one(const Engine& E, std::uint64_t rngSeed, bool keepHist,
             std::vector<std::vector<std::conditional_t<kInt, long long, Rational>>>* hist,
             TrialOut& out) {
  using V = std::conditional_t<kInt, long long, Rational>;
  using MV = std::conditional_t<kInt, __int128, Rational>;
  std::mt19937_64 rng(rngSeed);

  const int depth = E.depth, m = E.m;
  std::vector<V> ring((size_t)E.nVars * depth, V(0));
  std::vector<V> smp((size_t)E.nSampleSlots, V(0));
  for (int v = 0; v < E.nVars; ++v)
    for (int l = 0; l < depth; ++l) {
      int k = m - 1 - l;
      if (k >= 0) {
        if constexpr (kInt)
          ring[(size_t)v * depth + l] = E.initI[(size_t)v * m + k];
        else
          ring[(size_t)v * depth + l] = E.initQ[(size_t)v * m + k];
      }
    }
  if (keepHist) {
    hist->assign(E.nVars, {});
    for (int v = 0; v < E.nVars; ++v)
      for (int k = 0; k < m; ++k) {
        if constexpr (kInt)
          (*hist)[v].push_back(E.initI[(size_t)v * m + k]);
        else
          (*hist)[v].push_back(E.initQ[(size_t)v * m + k]);
      }
  }

  auto evalP = [&](const CPoly& p, long long i) -> MV {
    if constexpr (kInt)
      return eval_i(p, ring, smp, i);
    else
      return eval_q(p, ring, smp, i);
  };
  auto toQ = [&](const MV& v, const Rational& scale) -> Rational {
    if constexpr (kInt)
      return q_from_i128(v) / scale;
    else
      return v;
  };

  long long i = m - 1;
  const bool haveM = E.mart.has_value();
  MV Mprev{};
  MV maxAbsDM{};
  size_t np = 0;
  if (haveM) {
    Mprev = evalP(*E.mart, i);
    while (np < E.probes.size() && E.probes[np] <= m - 1) {
      out.probeVals.emplace_back(E.probes[np], toQ(Mprev, E.martScale));
      ++np;
    }
  }

  while (true) {
    if (!eval_form<kInt>(E.guard, ring, smp, i)) {
      out.tau = i;
      break;
    }
    if (i - (m - 1) >= E.maxSteps) {
      out.censored = true;
      break;
    }
    for (const auto& cd : E.dists) {
      std::uint64_t r = rng();
      size_t k = 0;
      while (k + 1 < cd.thresholds.size() && r > cd.thresholds[k]) ++k;
      for (const auto& [slot, idx] : cd.writes) {
        if constexpr (kInt)
          smp[slot] = cd.ivalues[k][idx];
        else
          smp[slot] = cd.values[k][idx];
      }
    }
    for (int v = 0; v < E.nVars; ++v)
      for (int l = depth - 1; l >= 1; --l)
        ring[(size_t)v * depth + l] = ring[(size_t)v * depth + l - 1];
    ++i;
    for (int v = 0; v < E.nVars; ++v) {
      MV nv = evalP(E.steps[v], i);
      if constexpr (kInt)
        ring[(size_t)v * depth] = (long long)nv;  // chk already bounded it
      else
        ring[(size_t)v * depth] = nv;
      if (keepHist) (*hist)[v].push_back(ring[(size_t)v * depth]);
    }
    if (haveM) {
      MV Mi = evalP(*E.mart, i);
      MV dM = Mi - Mprev;
      MV ad = dM < 0 ? MV(-dM) : dM;
      if (E.haveBound) {
        bool ok;
        if constexpr (kInt)
          ok = ad <= (__int128)E.bound2Floor || q_from_i128(ad) <= E.bound2Scaled;
        else
          ok = ad <= E.bound2;
        if (!ok) ++out.violations;
      }
      if (ad > maxAbsDM) maxAbsDM = ad;
      Mprev = Mi;
      if (np < E.probes.size() && E.probes[np] == i) {
        out.probeVals.emplace_back(i, toQ(Mprev, E.martScale));
        ++np;
      }
    }
  }

  if (haveM) {
    while (np < E.probes.size()) {
      out.probeVals.emplace_back(E.probes[np], toQ(Mprev, E.martScale));
      ++np;
    }
    out.maxInc = to_double(toQ(maxAbsDM, E.martScale));
  }
  if (!out.censored) {
    out.eventHit.resize(E.events.size(), 0);
    for (size_t k = 0; k < E.events.size(); ++k)
      out.eventHit[k] = eval_form<kInt>(E.events[k].second, ring, smp, i) ? 1 : 0;
    if (E.seed) {
      out.hasSeedVal = true;
      out.seedVal = toQ(evalP(*E.seed, i), E.seed->scale);
    }
  }
}

void fold(SimReport& rep, const TrialOut& t) {
  ++rep.trials;
  if (t.censored) {
    ++rep.censored;
  } else {
    rep.tau.add(Rational(t.tau));
    if (t.hasSeedVal) rep.seedAtTau.add(t.seedVal);
    for (size_t k = 0; k < t.eventHit.size(); ++k)
      rep.events[k].second.add(t.eventHit[k] ? Rational(1) : Rational(0));
  }
  for (const auto& [n, v] : t.probeVals) rep.probes[n].add(v);
  rep.incrementViolations += t.violations;
  rep.maxIncrement = std::max(rep.maxIncrement, t.maxInc);
}

}  // namespace

SimReport run_trials(const Program& prog, const SimInputs& in, const SimConfig& cfg) {
  Engine E = build_engine(prog, in, cfg);
  SimReport rep;
  rep.hasSeed = in.seed.has_value();
  rep.hasMartingale = in.martingale.has_value();
  rep.checkedIncrements = E.haveBound;
  for (const auto& [name, f] : in.events) rep.events.emplace_back(name, Acc{});

  bool fast = E.fastOK;
  std::vector<std::vector<long long>> hi;
  std::vector<std::vector<Rational>> hq;
  for (long long t = 0; t < cfg.trials; ++t) {
    std::uint64_t s = trial_seed(cfg.masterSeed, (std::uint64_t)(cfg.firstTrial + t));
    TrialOut out;
    if (fast) {
      try {
        run_one<true>(E, s, false, &hi, out);
      } catch (const FastOverflow&) {
        fast = false;
        out = TrialOut{};
      }
    }
    if (!fast) run_one<false>(E, s, false, &hq, out);
    fold(rep, out);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Per-trial realization of fact expressions: every expectation atom collapses
// to the value its body takes on this trial, indicators evaluate on the
// realized states, and sums over stopping-time ranges iterate concretely.

namespace {

struct TrialView {
  long long tau = 0;
  const Engine* E = nullptr;
  const std::vector<std::vector<long long>>* histI = nullptr;
  const std::vector<std::vector<Rational>>* histQ = nullptr;

  Rational state(const std::string& var, long long k) const {
    auto it = E->varIx.find(var);
    if (it == E->varIx.end())
      throw Error("validate", "fact references unknown variable '" + var + "'");
    if (k < 0 || k > tau)
      throw Error("validate",
                  "fact references state " + std::to_string(k) + " outside the trial");
    return histI ? Rational((*histI)[it->second][k]) : (*histQ)[it->second][k];
  }
};

long long ground_time(const TimeIndex& ix, const TrialView& tv,
                      const std::map<std::string, long long>* bnd) {
  switch (ix.base) {
    case TimeBase::Abs: return ix.offset;
    case TimeBase::Tau: return tv.tau + ix.offset;
    case TimeBase::Bound: {
      if (bnd) {
        auto it = bnd->find(ix.bound);
        if (it != bnd->end()) return it->second + ix.offset;
      }
      throw Error("validate", "fact references an unbound summation index");
    }
    case TimeBase::Loop:
      throw Error("validate", "fact mentions the running loop index");
  }
  return 0;
}

Rational realize(const SymExpr& e, const TrialView& tv,
                 const std::map<std::string, Rational>& pv,
                 const std::map<std::string, long long>* bnd);

bool realize_form(const Formula& f, const TrialView& tv,
                  const std::map<std::string, Rational>& pv,
                  const std::map<std::string, long long>* bnd) {
  switch (f.kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Eq: return realize(f.lhs - f.rhs, tv, pv, bnd) == 0;
    case Formula::Kind::Lt: return realize(f.lhs - f.rhs, tv, pv, bnd) < 0;
    case Formula::Kind::Le: return realize(f.lhs - f.rhs, tv, pv, bnd) <= 0;
    case Formula::Kind::Not: return !realize_form(f.kids[0], tv, pv, bnd);
    case Formula::Kind::And:
      for (const auto& k : f.kids)
        if (!realize_form(k, tv, pv, bnd)) return false;
      return true;
    case Formula::Kind::Or:
      for (const auto& k : f.kids)
        if (realize_form(k, tv, pv, bnd)) return true;
      return false;
  }
  return false;
}

Rational atom_value(const Atom& a, const TrialView& tv,
                    const std::map<std::string, Rational>& pv,
                    const std::map<std::string, long long>* bnd) {
  switch (a.kind) {
    case AtomKind::Process: return tv.state(a.name, ground_time(a.index, tv, bnd));
    case AtomKind::TimeSym: return Rational(ground_time(a.index, tv, bnd));
    case AtomKind::Sample:
      throw Error("validate", "fact mentions a raw sample draw");
    case AtomKind::IndNode: return realize_form(a.ind->f, tv, pv, bnd) ? 1 : 0;
    case AtomKind::ExpNode: return realize(a.expn->body, tv, pv, bnd);
    case AtomKind::SumNode: {
      long long lo = ground_time(a.sum->lo, tv, bnd);
      long long hi = ground_time(a.sum->hi, tv, bnd);
      Rational acc = 0;
      std::map<std::string, long long> inner = bnd ? *bnd : std::map<std::string, long long>{};
      for (long long j = lo; j <= hi; ++j) {
        inner[a.sum->bound] = j;
        acc += realize(a.sum->body, tv, pv, &inner);
      }
      return acc;
    }
    case AtomKind::CondNode:
      throw Error("validate", "fact still contains a conditional expectation");
  }
  throw Error("validate", "fact contains an unexpected node");
}

Rational realize(const SymExpr& e, const TrialView& tv,
                 const std::map<std::string, Rational>& pv,
                 const std::map<std::string, long long>* bnd) {
  Rational acc = 0;
  for (const auto& m : e.terms()) {
    Rational f = m.coeff;
    for (const auto& [p, ex] : m.params) {
      auto it = pv.find(p);
      if (it == pv.end()) throw Error("validate", "parameter '" + p + "' is unbound");
      if (ex < 0 && it->second == 0)
        throw Error("validate", "parameter '" + p + "' is zero but appears in a denominator");
      f *= rat_pow(it->second, ex);
    }
    for (const auto& [a, ex] : m.atoms) f *= rat_pow(atom_value(a, tv, pv, bnd), ex);
    acc += f;
  }
  return acc;
}

}  // namespace

ValidateResult validate(const Fact& fact, const Program& prog, const SimConfig& cfg) {
  SimInputs none;
  Engine E = build_engine(prog, none, cfg);

  const bool solved = fact.status == Fact::Status::Solved;
  SymExpr diffE, lhsE, rhsE;
  Rational denVal = 1;
  if (solved) {
    lhsE = fact.lhs;
    rhsE = fact.solvedNum;
    SymExpr den = subst_params_total(fact.solvedDen, cfg.paramValues, "validate");
    auto dv = den.as_rational();
    if (!dv) throw Error("validate", "solved denominator is not numeric at these parameters");
    if (*dv == 0) throw Error("validate", "solved denominator is zero at these parameters");
    denVal = *dv;
    diffE = fact.lhs * fact.solvedDen - fact.solvedNum;
  } else {
    lhsE = fact.lhs;
    rhsE = fact.rhs;
    diffE = fact.lhs - fact.rhs;
  }

  Acc D, L, R;
  long long cens = 0;
  bool fast = E.fastOK;
  std::vector<std::vector<long long>> hi;
  std::vector<std::vector<Rational>> hq;
  ValidateResult res;

  for (long long t = 0; t < cfg.trials; ++t) {
    std::uint64_t s = trial_seed(cfg.masterSeed, (std::uint64_t)(cfg.firstTrial + t));
    TrialOut out;
    bool ranInt = false;
    if (fast) {
      try {
        run_one<true>(E, s, true, &hi, out);
        ranInt = true;
      } catch (const FastOverflow&) {
        fast = false;
        out = TrialOut{};
      }
    }
    if (!ranInt) run_one<false>(E, s, true, &hq, out);
    if (out.censored) {
      ++cens;
      if (cens * 1000 > cfg.trials) {
        res.aborted = true;
        break;
      }
      continue;
    }
    TrialView tv;
    tv.tau = out.tau;
    tv.E = &E;
    if (ranInt)
      tv.histI = &hi;
    else
      tv.histQ = &hq;
    D.add(realize(diffE, tv, cfg.paramValues, nullptr));
    L.add(realize(lhsE, tv, cfg.paramValues, nullptr));
    Rational rv = realize(rhsE, tv, cfg.paramValues, nullptr);
    R.add(solved ? rv / denVal : rv);
  }

  res.trials = D.n;
  res.censored = cens;
  res.lhsMean = L.mean();
  res.rhsMean = R.mean();
  res.diffMean = D.mean();
  res.diffSe = D.se();
  if (res.aborted) {
    res.pass = false;
    res.note = "censoring exceeded 0.1% of trials; validation aborted";
  } else {
    res.pass = std::abs(res.diffMean) <= 4 * res.diffSe + 1e-9;
    if (cens > 0) res.note = std::to_string(cens) + " trial(s) censored";
  }
  return res;
}

// ---------------------------------------------------------------------------

std::vector<std::map<std::string, Rational>> run_trace(
    const Program& prog, const std::map<std::string, Rational>& params,
    const std::vector<SampleRow>& steps) {
  check_params(prog, params, "simulate");
  StepSystem sys = extract_recurrences(prog);
  const int m = sys.firstLoopIndex;
  std::vector<std::map<std::string, Rational>> out;

  auto paramFn = [&](const std::string& p) -> Rational {
    auto it = params.find(p);
    if (it == params.end()) throw Error("simulate", "parameter '" + p + "' is unbound");
    return it->second;
  };

  for (int k = 0; k < m; ++k) {
    std::map<std::string, Rational> st;
    for (const auto& v : sys.processOrder) {
      EvalEnv env;
      env.param = paramFn;
      env.leaf = [](const Atom&) -> Rational {
        throw Error("simulate", "initial value references a state");
      };
      st[v] = eval(sys.initValues.at(v)[k], env);
    }
    out.push_back(std::move(st));
  }

  for (size_t j = 0; j < steps.size(); ++j) {
    const SampleRow& row = steps[j];
    for (const auto& name : sys.sampleOrder) {
      const Distribution& d = sys.dists.at(name);
      auto it = row.find(name);
      if (it == row.end() || (int)it->second.size() != d.arity)
        throw Error("simulate", "sample row " + std::to_string(j) + " must supply '" + name +
                                    "' with arity " + std::to_string(d.arity));
    }
    long long i = (long long)out.size();
    EvalEnv env;
    env.param = paramFn;
    env.leaf = [&](const Atom& a) -> Rational {
      if (a.kind == AtomKind::Process) {
        if (a.index.base == TimeBase::Loop && a.index.offset < 0) {
          long long k = i + a.index.offset;
          if (k < 0)
            throw Error("simulate", "step references a state before the first one");
          return out[(size_t)k].at(a.name);
        }
        if (a.index.base == TimeBase::Abs && a.index.offset >= 0 &&
            a.index.offset < (int)out.size())
          return out[(size_t)a.index.offset].at(a.name);
      }
      if (a.kind == AtomKind::Sample) {
        int idx = a.proj == 0 ? 0 : a.proj - 1;
        return row.at(a.name).at((size_t)idx);
      }
      throw Error("simulate", "step expression contains a node the trace runner cannot evaluate");
    };
    std::map<std::string, Rational> st;
    for (const auto& v : sys.processOrder) st[v] = eval(sys.step.at(v), env);
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace ostap
