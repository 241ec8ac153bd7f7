#include "ostap/report.hpp"

#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace ostap {

namespace {

using json = nlohmann::ordered_json;

const char* status_name(AnalysisResult::Outcome o) {
  switch (o) {
    case AnalysisResult::Outcome::Solved: return "Solved";
    case AnalysisResult::Outcome::Residual: return "Residual";
    case AnalysisResult::Outcome::Refused: return "Refused";
  }
  return "?";
}

const char* cond_name(CondStatus s) {
  return s == CondStatus::Verified ? "Verified" : "Obligation";
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

std::string closed_form(const Fact& f) {
  auto den = f.solvedDen.as_rational();
  if (den && *den == 1) return to_string(f.solvedNum);
  return "(" + to_string(f.solvedNum) + ") / (" + to_string(f.solvedDen) + ")";
}

std::string text_report(const AnalysisResult& r) {
  std::ostringstream os;
  os << "SIDE CONDITIONS\n";
  for (const auto& it : r.sideConditions.items) {
    os << "  " << it.name << ": " << cond_name(it.status) << "\n";
    if (!it.detail.empty()) os << "    " << it.detail << "\n";
  }
  if (r.assumedOst)
    os << "  (assumed via --assume-ost: the obligations above are taken on trust)\n";
  os << "\n";

  os << "OST FACT\n";
  if (r.outcome == AnalysisResult::Outcome::Refused) {
    os << "  refused: side conditions not verified; pass --assume-ost to acknowledge "
          "the obligations\n";
    os << "\nFINAL FACT\n  status: Refused\n";
    return os.str();
  }
  os << "  martingale M_i = " << to_string(r.martingale) << "\n";
  os << "  " << to_string(r.raw.lhs) << " = " << to_string(r.raw.rhs) << "\n\n";

  os << "FINAL FACT\n";
  os << "  status: " << status_name(r.outcome) << "\n";
  os << "  " << to_string(r.simplified.lhs) << " = " << to_string(r.simplified.rhs) << "\n";
  if (r.outcome == AnalysisResult::Outcome::Solved) {
    os << "  " << r.fact.targetText << " = " << closed_form(r.fact) << "\n";
  } else {
    os << "  unknowns:";
    for (const auto& u : r.fact.unknowns) os << " " << to_string(u);
    os << "\n";
  }
  if (!r.trace.empty()) {
    os << "\nREWRITES\n";
    for (const auto& s : r.trace)
      os << "  [" << s.rule << "] " << s.before << " => " << s.after << "\n";
  }
  return os.str();
}

std::string json_report(const AnalysisResult& r) { return json_report(r, nullptr); }

std::string json_report(const AnalysisResult& r, const ValidateResult* val) {
  json j;
  j["schema"] = 1;
  j["status"] = status_name(r.outcome);
  json conds = json::array();
  json obligations = json::array();
  for (const auto& it : r.sideConditions.items) {
    conds.push_back({{"name", it.name}, {"status", cond_name(it.status)}, {"detail", it.detail}});
    if (it.status != CondStatus::Verified) obligations.push_back(it.name + ": " + it.detail);
  }
  j["side_conditions"] = conds;
  j["obligations"] = obligations;
  j["assumed"] = r.assumedOst;
  if (r.outcome != AnalysisResult::Outcome::Refused) {
    j["martingale"] = to_string(r.martingale);
    j["fact"] = {{"lhs", to_string(r.simplified.lhs)}, {"rhs", to_string(r.simplified.rhs)}};
    if (r.outcome == AnalysisResult::Outcome::Solved)
      j["solved"] = {{"target", r.fact.targetText}, {"closed_form", closed_form(r.fact)}};
    else {
      json u = json::array();
      for (const auto& e : r.fact.unknowns) u.push_back(to_string(e));
      j["unknowns"] = u;
    }
  }
  if (val) {
    json v;
    v["pass"] = val->pass;
    v["lhs_mean"] = val->lhsMean;
    v["rhs_mean"] = val->rhsMean;
    v["diff_mean"] = val->diffMean;
    v["diff_stderr"] = val->diffSe;
    v["trials"] = val->trials;
    v["censored"] = val->censored;
    if (!val->note.empty()) v["note"] = val->note;
    j["validation"] = v;
  }
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  if (!r.trace.empty()) {
    json t = json::array();
    for (const auto& s : r.trace)
      t.push_back({{"rule", s.rule}, {"before", s.before}, {"after", s.after}});
    j["rewrites"] = t;
  }
  return j.dump(2) + "\n";
}

namespace {

void acc_text(std::ostringstream& os, const char* label, const Acc& a) {
  os << "  " << label << ": mean " << fmt(a.mean()) << "  stderr " << fmt(a.se())
     << "  n " << a.n << "\n";
}

json acc_json(const Acc& a) {
  return {{"mean", a.mean()}, {"variance", a.variance()}, {"stderr", a.se()}, {"count", a.n}};
}

}  // namespace

std::string text_sim_report(const SimReport& rep) {
  std::ostringstream os;
  os << "SIMULATION\n";
  os << "  trials: " << rep.trials << "\n";
  os << "  censored: " << rep.censored << "\n";
  acc_text(os, "tau", rep.tau);
  if (rep.hasSeed) acc_text(os, "seed at tau", rep.seedAtTau);
  for (const auto& [name, a] : rep.events) acc_text(os, name.c_str(), a);
  for (const auto& [n, a] : rep.probes)
    acc_text(os, ("M at " + std::to_string(n)).c_str(), a);
  if (rep.checkedIncrements) {
    os << "  increment violations: " << rep.incrementViolations << "\n";
    os << "  max |M_i - M_{i-1}|: " << fmt(rep.maxIncrement) << "\n";
  }
  return os.str();
}

std::string json_sim_report(const SimReport& rep) {
  json j;
  j["schema"] = 1;
  j["trials"] = rep.trials;
  j["censored"] = rep.censored;
  j["tau"] = acc_json(rep.tau);
  if (rep.hasSeed) j["seed_at_tau"] = acc_json(rep.seedAtTau);
  if (!rep.events.empty()) {
    json ev = json::array();
    for (const auto& [name, a] : rep.events) {
      json e = acc_json(a);
      e["name"] = name;
      ev.push_back(e);
    }
    j["events"] = ev;
  }
  if (!rep.probes.empty()) {
    json ps = json::array();
    for (const auto& [n, a] : rep.probes) {
      json p = acc_json(a);
      p["index"] = n;
      ps.push_back(p);
    }
    j["probes"] = ps;
  }
  if (rep.checkedIncrements) {
    j["increment_violations"] = rep.incrementViolations;
    j["max_increment"] = rep.maxIncrement;
  }
  return j.dump(2) + "\n";
}

std::string text_validation(const ValidateResult& v) {
  std::ostringstream os;
  os << "VALIDATION\n";
  os << "  verdict: " << (v.pass ? "PASS" : "FAIL") << "\n";
  os << "  lhs mean: " << fmt(v.lhsMean) << "\n";
  os << "  rhs mean: " << fmt(v.rhsMean) << "\n";
  os << "  diff: " << fmt(v.diffMean) << "  stderr: " << fmt(v.diffSe) << "\n";
  os << "  trials: " << v.trials << "  censored: " << v.censored << "\n";
  if (!v.note.empty()) os << "  note: " << v.note << "\n";
  return os.str();
}

}  // namespace ostap
