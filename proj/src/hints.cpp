#include "ostap/hints.hpp"

#include "ostap/diag.hpp"

namespace ostap {

namespace {

// pulls (var, value) out of Eq(process-atom, value); other shapes were
// rejected by the frontend
bool eq_parts(const Formula& f, std::string* var, SymExpr* value) {
  if (f.kind != Formula::Kind::Eq) return false;
  auto pick = [&](const SymExpr& side, const SymExpr& other) {
    const auto& ts = side.terms();
    if (ts.size() != 1) return false;
    const Monomial& m = ts.front();
    if (m.atoms.size() != 1 || !m.params.empty() || m.coeff != 1) return false;
    const auto& [a, e] = m.atoms.front();
    if (e != 1 || a.kind != AtomKind::Process) return false;
    *var = a.name;
    *value = other;
    return true;
  };
  return pick(f.lhs, f.rhs) || pick(f.rhs, f.lhs);
}

void collect_eqs(const Formula& f, std::vector<std::pair<std::string, SymExpr>>* out,
                 const char* where) {
  if (f.kind == Formula::Kind::And) {
    for (const auto& k : f.kids) collect_eqs(k, out, where);
    return;
  }
  std::string var;
  SymExpr value;
  if (!eq_parts(f, &var, &value))
    throw Error(where, "hint is not a conjunction of variable equalities: " + to_string(f));
  out->emplace_back(std::move(var), std::move(value));
}

void add_value(ExitCase* c, const std::string& var, const SymExpr& value, const ParamBox& box) {
  for (const auto& [v, val] : c->values) {
    if (v != var) continue;
    if (box.sign(val - value) == Sign::Zero) return;  // same value again
    throw Error("hints", "conflicting at-exit values for '" + var + "': " + to_string(val) +
                             " vs " + to_string(value));
  }
  c->values.emplace_back(var, value);
}

Formula lift_hint(const SFormPtr& f, bool timeAllowed) {
  LiftCtx ctx;
  ctx.varBase = TimeIndex::loop(0);
  ctx.samplesAllowed = false;
  ctx.timeAllowed = timeAllowed;
  return lift_formula(f, ctx);
}

std::vector<std::pair<Atom, SymExpr>> value_bindings(const ExitCase& c) {
  std::vector<std::pair<Atom, SymExpr>> b;
  for (const auto& [v, val] : c.values)
    b.emplace_back(Atom::process(v, TimeIndex::loop(0)), val);
  return b;
}

}  // namespace

std::vector<std::pair<Formula, Formula>> implication_rules(const Program& prog) {
  std::vector<std::pair<Formula, Formula>> out;
  for (const auto& h : prog.pragmas.implies)
    out.emplace_back(lift_hint(h.premise, false), lift_hint(h.conclusion, false));
  return out;
}

std::vector<std::pair<std::string, SymExpr>> every_eqs(const Program& prog) {
  std::vector<std::pair<std::string, SymExpr>> out;
  for (const auto& h : prog.pragmas.every) collect_eqs(lift_hint(h, false), &out, "hints");
  return out;
}

std::vector<ExitCase> exit_cases(const Program& prog, const ParamBox& box) {
  std::vector<ExitCase> cases{ExitCase{}};
  for (const auto& h : prog.pragmas.atExit) {
    Formula f = lift_hint(h, true);
    if (f.kind == Formula::Kind::Or) {
      std::vector<ExitCase> next;
      for (const auto& base : cases) {
        for (const auto& d : f.kids) {
          ExitCase c = base;
          c.when = c.when.kind == Formula::Kind::True ? d : Formula::conj({c.when, d});
          std::vector<std::pair<std::string, SymExpr>> eqs;
          collect_eqs(d, &eqs, "hints");
          for (const auto& [v, val] : eqs) add_value(&c, v, val, box);
          next.push_back(std::move(c));
        }
      }
      cases = std::move(next);
      continue;
    }
    std::vector<std::pair<std::string, SymExpr>> eqs;
    collect_eqs(f, &eqs, "hints");
    for (auto& c : cases)
      for (const auto& [v, val] : eqs) add_value(&c, v, val, box);
  }

  auto rules = implication_rules(prog);
  for (auto& c : cases) {
    bool grew = true;
    int rounds = 0;
    while (grew && ++rounds < 64) {
      grew = false;
      auto bind = value_bindings(c);
      for (const auto& [premise, conclusion] : rules) {
        if (!box.proves(substitute(premise, bind))) continue;
        std::vector<std::pair<std::string, SymExpr>> eqs;
        collect_eqs(conclusion, &eqs, "hints");
        for (const auto& [v, val] : eqs) {
          size_t before = c.values.size();
          add_value(&c, v, val, box);
          if (c.values.size() != before) grew = true;
        }
      }
    }
  }
  return cases;
}

}  // namespace ostap
