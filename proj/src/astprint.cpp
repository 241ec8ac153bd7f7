#include <string>

#include "ostap/parser.hpp"

namespace ostap {

namespace {

// precedence: Add/Sub 1, Mul 2, Neg 3, Pow 4, atoms 5
int prec(const SExprPtr& e) {
  switch (e->k) {
    case SExpr_::K::Add:
    case SExpr_::K::Sub: return 1;
    case SExpr_::K::Mul: return 2;
    case SExpr_::K::Neg: return 3;
    case SExpr_::K::Pow: return 4;
    default: return 5;
  }
}

std::string pr(const SExprPtr& e, int min) {
  std::string s;
  switch (e->k) {
    case SExpr_::K::Const: s = rat_str(e->c); break;
    case SExpr_::K::Param:
    case SExpr_::K::Var:
    case SExpr_::K::Sample: s = e->name; break;
    case SExpr_::K::Time: s = "t"; break;
    case SExpr_::K::Hist: s = e->name + "[" + std::to_string(e->arg) + "]"; break;
    case SExpr_::K::Proj: s = "pi_" + std::to_string(e->arg) + "(" + e->name + ")"; break;
    case SExpr_::K::Add: s = pr(e->a, 1) + " + " + pr(e->b, 2); break;
    case SExpr_::K::Sub: s = pr(e->a, 1) + " - " + pr(e->b, 2); break;
    case SExpr_::K::Mul: s = pr(e->a, 2) + " * " + pr(e->b, 3); break;
    case SExpr_::K::Neg: s = "-" + pr(e->a, 3); break;
    case SExpr_::K::Pow: s = pr(e->a, 5) + "^" + std::to_string(e->arg); break;
  }
  // negative literals bind like Neg when embedded in a larger expression
  int p = e->k == SExpr_::K::Const && e->c < 0 && min > 1 ? 3 : prec(e);
  if (p < min) return "(" + s + ")";
  return s;
}

const char* cmp_str(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    default: return ">=";
  }
}

std::string prf(const SFormPtr& f) {
  switch (f->k) {
    case SForm_::K::Cmp:
      return pr(f->lhs, 1) + " " + cmp_str(f->op) + " " + pr(f->rhs, 1);
    case SForm_::K::Not: {
      const SFormPtr& kid = f->kids.front();
      return "not (" + prf(kid) + ")";
    }
    case SForm_::K::And: {
      std::string s;
      for (size_t i = 0; i < f->kids.size(); ++i) {
        if (i) s += " /\\ ";
        const SFormPtr& k = f->kids[i];
        s += k->k == SForm_::K::Or ? "(" + prf(k) + ")" : prf(k);
      }
      return s;
    }
    case SForm_::K::Or: {
      std::string s;
      for (size_t i = 0; i < f->kids.size(); ++i) {
        if (i) s += " \\/ ";
        s += "(" + prf(f->kids[i]) + ")";
      }
      return s;
    }
  }
  return {};
}

}  // namespace

std::string print_expr(const SExprPtr& e) { return pr(e, 1); }

std::string print_formula(const SFormPtr& f) { return prf(f); }

std::string print_program(const Program& prog) {
  std::string s;
  for (const auto& d : prog.params) {
    s += "param " + d.name + " in ";
    s += d.loOpen ? "(" : "[";
    s += d.lo ? print_expr(d.lo) : "-oo";
    s += ", ";
    s += d.hi ? print_expr(d.hi) : "oo";
    s += d.hiOpen ? ")" : "]";
    s += "\n";
  }
  for (const auto& st : prog.inits) {
    s += "init " + st.var;
    if (prog.firstLoopIndex > 1) s += "[" + std::to_string(st.index) + "]";
    s += " := " + print_expr(st.value) + "\n";
  }
  s += "while (" + print_formula(prog.guard) + ") do\n";
  for (const auto& st : prog.samples) s += "  " + st.var + " ~ " + st.dist.to_string() + "\n";
  for (const auto& st : prog.assigns)
    s += "  " + st.var + " := " + print_expr(st.value) + "\n";
  s += "end\n";

  const Pragmas& pg = prog.pragmas;
  if (pg.seed) s += "\n#seed: " + print_expr(pg.seed) + "\n";
  for (const auto& h : pg.atExit) s += "#hint at-exit: " + print_formula(h) + "\n";
  for (const auto& h : pg.every) s += "#hint every: " + print_formula(h) + "\n";
  for (const auto& h : pg.implies)
    s += "#hint implies: (" + print_formula(h.premise) + ") => (" + print_formula(h.conclusion) +
         ")\n";
  if (pg.variant) {
    s += "#variant: " + print_expr(pg.variant->expr) + ", " + print_expr(pg.variant->bound);
    if (pg.variant->eps) s += ", " + print_expr(pg.variant->eps);
    s += "\n";
  }
  if (pg.solveFor) {
    s += "#solve-for: ";
    switch (pg.solveFor->k) {
      case SolveTarget::K::Tau: s += "E[tau]"; break;
      case SolveTarget::K::Mean: s += "E[" + pg.solveFor->var + "]"; break;
      case SolveTarget::K::Prob: s += "P[" + print_formula(pg.solveFor->formula) + "]"; break;
    }
    s += "\n";
  }
  for (const auto& f : pg.useFacts) s += "#use-fact: " + f + "\n";
  if (pg.assumeOst) s += "#assume-ost\n";
  return s;
}

}  // namespace ostap
