#include "ostap/ast.hpp"

namespace ostap {

namespace {

std::shared_ptr<SExpr_> node(SExpr_::K k) {
  auto n = std::make_shared<SExpr_>();
  n->k = k;
  return n;
}

bool dist_equal(const Distribution& a, const Distribution& b) {
  if (a.kind != b.kind || a.arity != b.arity || a.pattern != b.pattern) return false;
  if (!(a.alphabet - b.alphabet).is_zero()) return false;
  if (a.outcomes.size() != b.outcomes.size()) return false;
  for (size_t i = 0; i < a.outcomes.size(); ++i) {
    if (!(a.outcomes[i].prob - b.outcomes[i].prob).is_zero()) return false;
    if (a.outcomes[i].value != b.outcomes[i].value) return false;
  }
  return true;
}

}  // namespace

SExprPtr se_const(Rational q) {
  auto n = node(SExpr_::K::Const);
  n->c = std::move(q);
  return n;
}

SExprPtr se_name(SExpr_::K k, std::string name) {
  auto n = node(k);
  n->name = std::move(name);
  return n;
}

SExprPtr se_hist(std::string name, int offset) {
  auto n = node(SExpr_::K::Hist);
  n->name = std::move(name);
  n->arg = offset;
  return n;
}

SExprPtr se_proj(std::string name, int coord) {
  auto n = node(SExpr_::K::Proj);
  n->name = std::move(name);
  n->arg = coord;
  return n;
}

SExprPtr se_binop(SExpr_::K k, SExprPtr a, SExprPtr b) {
  auto n = node(k);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

SExprPtr se_neg(SExprPtr a) {
  auto n = node(SExpr_::K::Neg);
  n->a = std::move(a);
  return n;
}

SExprPtr se_pow(SExprPtr a, int e) {
  auto n = node(SExpr_::K::Pow);
  n->a = std::move(a);
  n->arg = e;
  return n;
}

SFormPtr sf_cmp(CmpOp op, SExprPtr lhs, SExprPtr rhs) {
  auto n = std::make_shared<SForm_>();
  n->k = SForm_::K::Cmp;
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

SFormPtr sf_junction(SForm_::K k, std::vector<SFormPtr> kids) {
  if (kids.size() == 1) return kids.front();
  auto n = std::make_shared<SForm_>();
  n->k = k;
  n->kids = std::move(kids);
  return n;
}

SFormPtr sf_not(SFormPtr f) {
  auto n = std::make_shared<SForm_>();
  n->k = SForm_::K::Not;
  n->kids.push_back(std::move(f));
  return n;
}

bool equal(const SExprPtr& a, const SExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->k != b->k || a->c != b->c || a->name != b->name || a->arg != b->arg) return false;
  return equal(a->a, b->a) && equal(a->b, b->b);
}

bool equal(const SFormPtr& a, const SFormPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->k != b->k || a->op != b->op) return false;
  if (!equal(a->lhs, b->lhs) || !equal(a->rhs, b->rhs)) return false;
  if (a->kids.size() != b->kids.size()) return false;
  for (size_t i = 0; i < a->kids.size(); ++i)
    if (!equal(a->kids[i], b->kids[i])) return false;
  return true;
}

bool Program::has_param(const std::string& n) const {
  for (const auto& p : params)
    if (p.name == n) return true;
  return false;
}

bool Program::has_var(const std::string& n) const {
  for (const auto& i : inits)
    if (i.var == n) return true;
  return false;
}

bool Program::has_sample(const std::string& n) const {
  for (const auto& s : samples)
    if (s.var == n) return true;
  return false;
}

const Distribution* Program::sample_dist(const std::string& n) const {
  for (const auto& s : samples)
    if (s.var == n) return &s.dist;
  return nullptr;
}

bool equal(const Program& a, const Program& b) {
  if (a.params.size() != b.params.size() || a.inits.size() != b.inits.size() ||
      a.samples.size() != b.samples.size() || a.assigns.size() != b.assigns.size())
    return false;
  if (a.firstLoopIndex != b.firstLoopIndex) return false;
  for (size_t i = 0; i < a.params.size(); ++i) {
    const auto& x = a.params[i];
    const auto& y = b.params[i];
    if (x.name != y.name || x.loOpen != y.loOpen || x.hiOpen != y.hiOpen) return false;
    if (!equal(x.lo, y.lo) || !equal(x.hi, y.hi)) return false;
  }
  for (size_t i = 0; i < a.inits.size(); ++i) {
    const auto& x = a.inits[i];
    const auto& y = b.inits[i];
    if (x.var != y.var || x.index != y.index || !equal(x.value, y.value)) return false;
  }
  if (!equal(a.guard, b.guard)) return false;
  for (size_t i = 0; i < a.samples.size(); ++i) {
    if (a.samples[i].var != b.samples[i].var) return false;
    if (!dist_equal(a.samples[i].dist, b.samples[i].dist)) return false;
  }
  for (size_t i = 0; i < a.assigns.size(); ++i) {
    if (a.assigns[i].var != b.assigns[i].var) return false;
    if (!equal(a.assigns[i].value, b.assigns[i].value)) return false;
  }
  const Pragmas& pa = a.pragmas;
  const Pragmas& pb = b.pragmas;
  if (!equal(pa.seed, pb.seed)) return false;
  if (pa.atExit.size() != pb.atExit.size() || pa.every.size() != pb.every.size() ||
      pa.implies.size() != pb.implies.size())
    return false;
  for (size_t i = 0; i < pa.atExit.size(); ++i)
    if (!equal(pa.atExit[i], pb.atExit[i])) return false;
  for (size_t i = 0; i < pa.every.size(); ++i)
    if (!equal(pa.every[i], pb.every[i])) return false;
  for (size_t i = 0; i < pa.implies.size(); ++i) {
    if (!equal(pa.implies[i].premise, pb.implies[i].premise)) return false;
    if (!equal(pa.implies[i].conclusion, pb.implies[i].conclusion)) return false;
  }
  if (pa.variant.has_value() != pb.variant.has_value()) return false;
  if (pa.variant) {
    if (!equal(pa.variant->expr, pb.variant->expr)) return false;
    if (!equal(pa.variant->bound, pb.variant->bound)) return false;
    if (!equal(pa.variant->eps, pb.variant->eps)) return false;
  }
  if (pa.solveFor.has_value() != pb.solveFor.has_value()) return false;
  if (pa.solveFor) {
    if (pa.solveFor->k != pb.solveFor->k || pa.solveFor->var != pb.solveFor->var) return false;
    if (!equal(pa.solveFor->formula, pb.solveFor->formula)) return false;
  }
  return pa.useFacts == pb.useFacts && pa.assumeOst == pb.assumeOst;
}

}  // namespace ostap
