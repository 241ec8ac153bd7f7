#include "ostap/doob.hpp"

#include "ostap/diag.hpp"
#include "ostap/sumsimp.hpp"

namespace ostap {

RewriteContext make_rewrite_context(const StepSystem& sys) {
  RewriteContext ctx;
  ctx.firstLoopIndex = sys.firstLoopIndex;
  ctx.recurrence = [&sys](const std::string& name) -> const SymExpr* {
    auto it = sys.step.find(name);
    return it == sys.step.end() ? nullptr : &it->second;
  };
  ctx.moment = [&sys](const std::string& name,
                      const std::vector<std::pair<int, int>>& projExp) -> SymExpr {
    auto it = sys.dists.find(name);
    if (it == sys.dists.end()) throw Error("rewrite", "unknown sample variable '" + name + "'");
    return it->second.moment(projExp);
  };
  return ctx;
}

DoobResult doob_decompose(const StepSystem& sys, const SymExpr& seed) {
  const int m = sys.firstLoopIndex;
  DoobResult out;
  out.seed = seed;

  SymExpr ej = retime(seed, TimeBase::Loop, "", TimeIndex::bnd("j", 0));
  SymExpr ce = SymExpr::atom(Atom::cond_node(ej, TimeIndex::bnd("j", -1)));
  SymExpr raw = retime(seed, TimeBase::Loop, "", TimeIndex::abs(m - 1)) +
                SymExpr::atom(Atom::sum_node("j", TimeIndex::abs(m), TimeIndex::loop(0), ej - ce));

  RewriteContext ctx = make_rewrite_context(sys);
  SymExpr resolved = resolve_cond(raw, ctx, &out.trace);
  if (contains_atom_kind(resolved, AtomKind::CondNode))
    throw Error("doob", "a conditional expectation survived rewriting; the seed is outside "
                        "the supported fragment");

  SumSimplifyOptions opts;
  opts.firstLoopIndex = m;
  out.martingale = simplify_sum(resolved, opts);
  return out;
}

MartingaleCheck check_martingale(const StepSystem& sys, const SymExpr& candidate) {
  MartingaleCheck out;
  SymExpr ce = SymExpr::atom(Atom::cond_node(candidate, TimeIndex::loop(-1)));
  RewriteContext ctx = make_rewrite_context(sys);
  SymExpr resolved = resolve_cond(ce, ctx, &out.trace);

  SumSimplifyOptions opts;
  opts.firstLoopIndex = sys.firstLoopIndex;
  SymExpr prev = retime(candidate, TimeBase::Loop, "", TimeIndex::loop(-1));
  out.residual = simplify_sum(resolved - prev, opts);

  if (out.residual.is_zero()) {
    out.verdict = MartingaleCheck::Verdict::Yes;
  } else if (contains_atom_kind(out.residual, AtomKind::CondNode)) {
    out.verdict = MartingaleCheck::Verdict::Unknown;
  } else {
    out.verdict = MartingaleCheck::Verdict::No;
  }
  return out;
}

}  // namespace ostap
