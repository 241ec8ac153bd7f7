#include "ostap/recurrence.hpp"

#include <set>

#include "ostap/diag.hpp"

namespace ostap {

namespace {

TimeIndex shifted(const TimeIndex& base, int delta) {
  TimeIndex ix = base;
  ix.offset += delta;
  return ix;
}

}  // namespace

SymExpr lift_expr(const SExprPtr& e, const LiftCtx& ctx) {
  switch (e->k) {
    case SExpr_::K::Const:
      return SymExpr::constant(e->c);
    case SExpr_::K::Param:
      return SymExpr::param(e->name);
    case SExpr_::K::Var: {
      if (ctx.inlined) {
        auto it = ctx.inlined->find(e->name);
        if (it != ctx.inlined->end()) return it->second;
        // not yet assigned this iteration: previous state
        return SymExpr::atom(Atom::process(e->name, shifted(ctx.varBase, -1)));
      }
      return SymExpr::atom(Atom::process(e->name, ctx.varBase));
    }
    case SExpr_::K::Hist:
      return SymExpr::atom(Atom::process(e->name, shifted(ctx.varBase, e->arg)));
    case SExpr_::K::Sample:
      if (!ctx.samplesAllowed) throw Error("lift", "sample variables are not allowed here");
      return SymExpr::atom(Atom::sample(e->name, ctx.varBase, 0));
    case SExpr_::K::Proj:
      if (!ctx.samplesAllowed) throw Error("lift", "sample variables are not allowed here");
      return SymExpr::atom(Atom::sample(e->name, ctx.varBase, e->arg));
    case SExpr_::K::Time:
      if (!ctx.timeAllowed) throw Error("lift", "'t' is not allowed here");
      return SymExpr::time_scalar(TimeIndex::tau(0));
    case SExpr_::K::Add:
      return lift_expr(e->a, ctx) + lift_expr(e->b, ctx);
    case SExpr_::K::Sub:
      return lift_expr(e->a, ctx) - lift_expr(e->b, ctx);
    case SExpr_::K::Mul:
      return lift_expr(e->a, ctx) * lift_expr(e->b, ctx);
    case SExpr_::K::Neg:
      return -lift_expr(e->a, ctx);
    case SExpr_::K::Pow:
      return lift_expr(e->a, ctx).pow(e->arg);
  }
  throw Error("lift", "unhandled expression node");
}

Formula lift_formula(const SFormPtr& f, const LiftCtx& ctx) {
  switch (f->k) {
    case SForm_::K::Cmp: {
      SymExpr a = lift_expr(f->lhs, ctx);
      SymExpr b = lift_expr(f->rhs, ctx);
      switch (f->op) {
        case CmpOp::Eq: return Formula::eq(a, b);
        case CmpOp::Ne: return Formula::negate(Formula::eq(a, b));
        case CmpOp::Lt: return Formula::lt(a, b);
        case CmpOp::Le: return Formula::le(a, b);
        case CmpOp::Gt: return Formula::lt(b, a);
        case CmpOp::Ge: return Formula::le(b, a);
      }
      throw Error("lift", "unhandled comparison");
    }
    case SForm_::K::Not:
      return Formula::negate(lift_formula(f->kids.front(), ctx));
    case SForm_::K::And: {
      std::vector<Formula> ks;
      ks.reserve(f->kids.size());
      for (const auto& k : f->kids) ks.push_back(lift_formula(k, ctx));
      return Formula::conj(std::move(ks));
    }
    case SForm_::K::Or: {
      std::vector<Formula> ks;
      ks.reserve(f->kids.size());
      for (const auto& k : f->kids) ks.push_back(lift_formula(k, ctx));
      return Formula::disj(std::move(ks));
    }
  }
  throw Error("lift", "unhandled formula node");
}

std::vector<std::pair<Atom, SymExpr>> StepSystem::init_bindings() const {
  std::vector<std::pair<Atom, SymExpr>> out;
  for (const auto& [var, vals] : initValues)
    for (int k = 0; k < static_cast<int>(vals.size()); ++k)
      out.emplace_back(Atom::process(var, TimeIndex::abs(k)), vals[static_cast<size_t>(k)]);
  return out;
}

StepSystem extract_recurrences(const Program& prog) {
  StepSystem sys;
  sys.firstLoopIndex = prog.firstLoopIndex;

  std::set<std::string> seen;
  for (const auto& st : prog.inits) {
    if (seen.insert(st.var).second) sys.processOrder.push_back(st.var);
    auto& slots = sys.initValues[st.var];
    if (static_cast<int>(slots.size()) < prog.firstLoopIndex)
      slots.resize(static_cast<size_t>(prog.firstLoopIndex));
    LiftCtx init;  // parser restricted init values to parameters already
    slots[static_cast<size_t>(st.index)] = lift_expr(st.value, init);
  }

  for (const auto& st : prog.samples) {
    sys.dists.emplace(st.var, st.dist);
    sys.sampleOrder.push_back(st.var);
  }

  std::map<std::string, SymExpr> current;
  LiftCtx body;
  body.inlined = &current;
  body.samplesAllowed = true;
  for (const auto& st : prog.assigns) {
    SymExpr rhs = lift_expr(st.value, body);
    current[st.var] = rhs;
    sys.step[st.var] = std::move(rhs);
  }
  for (const auto& v : sys.processOrder)
    if (!sys.step.count(v))
      sys.step[v] = SymExpr::atom(Atom::process(v, TimeIndex::loop(-1)));

  LiftCtx guardCtx;  // process atoms at Loop(0)
  sys.guard = lift_formula(prog.guard, guardCtx);
  return sys;
}

SymExpr lift_seed(const Program& prog, const SExprPtr& seed) {
  (void)prog;
  if (!seed) throw Error("lift", "no seed expression given");
  LiftCtx ctx;  // vars at Loop(0), no samples, no t
  return lift_expr(seed, ctx);
}

}  // namespace ostap
