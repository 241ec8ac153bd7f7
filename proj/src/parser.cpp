#include "ostap/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>

#include "ostap/diag.hpp"

namespace ostap {

namespace {

enum class Tok {
  Ident, Num, Str,
  LPar, RPar, LBrk, RBrk, LBrc, RBrc,
  Comma, Tilde, Assign,
  Eq, Ne, Lt, Le, Gt, Ge,
  Plus, Minus, Star, Slash, Caret,
  AndT, OrT, Implies, Arrow,
  Eof,
};

struct Token {
  Tok t = Tok::Eof;
  std::string s;
  Rational q;
  SourceLoc loc;
};

[[noreturn]] void fail(const SourceLoc& loc, const std::string& msg) {
  throw Error("parse", msg, loc);
}

std::vector<Token> lex(const std::string& text, int lineBase, int colBase) {
  std::vector<Token> out;
  int line = lineBase;
  int col = colBase;
  size_t i = 0;
  auto loc = [&]() { return SourceLoc{line, col}; };
  auto push = [&](Tok t, std::string s, SourceLoc at) { out.push_back({t, std::move(s), 0, at}); };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++col;
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    SourceLoc at = loc();
    auto two = [&](char a, char b) {
      return c == a && i + 1 < text.size() && text[i + 1] == b;
    };
    if (two('/', '\\')) { push(Tok::AndT, "/\\", at); i += 2; col += 2; continue; }
    if (two('\\', '/')) { push(Tok::OrT, "\\/", at); i += 2; col += 2; continue; }
    if (two(':', '=')) { push(Tok::Assign, ":=", at); i += 2; col += 2; continue; }
    if (two('=', '>')) { push(Tok::Implies, "=>", at); i += 2; col += 2; continue; }
    if (two('-', '>')) { push(Tok::Arrow, "->", at); i += 2; col += 2; continue; }
    if (two('=', '=')) { push(Tok::Eq, "==", at); i += 2; col += 2; continue; }
    if (two('!', '=')) { push(Tok::Ne, "!=", at); i += 2; col += 2; continue; }
    if (two('<', '=')) { push(Tok::Le, "<=", at); i += 2; col += 2; continue; }
    if (two('>', '=')) { push(Tok::Ge, ">=", at); i += 2; col += 2; continue; }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.'))
        ++j;
      std::string num = text.substr(i, j - i);
      auto q = parse_rational(num);
      if (!q) fail(at, "malformed number '" + num + "'");
      Token tk{Tok::Num, num, *q, at};
      out.push_back(tk);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      push(Tok::Ident, text.substr(i, j - i), at);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (c == '"') {
      size_t j = i + 1;
      while (j < text.size() && text[j] != '"' && text[j] != '\n') ++j;
      if (j >= text.size() || text[j] != '"') fail(at, "unterminated string");
      push(Tok::Str, text.substr(i + 1, j - i - 1), at);
      col += static_cast<int>(j - i + 1);
      i = j + 1;
      continue;
    }
    Tok t;
    switch (c) {
      case '(': t = Tok::LPar; break;
      case ')': t = Tok::RPar; break;
      case '[': t = Tok::LBrk; break;
      case ']': t = Tok::RBrk; break;
      case '{': t = Tok::LBrc; break;
      case '}': t = Tok::RBrc; break;
      case ',': t = Tok::Comma; break;
      case '~': t = Tok::Tilde; break;
      case '=': t = Tok::Eq; break;
      case '<': t = Tok::Lt; break;
      case '>': t = Tok::Gt; break;
      case '+': t = Tok::Plus; break;
      case '-': t = Tok::Minus; break;
      case '*': t = Tok::Star; break;
      case '/': t = Tok::Slash; break;
      case '^': t = Tok::Caret; break;
      default:
        fail(at, std::string("unexpected character '") + c + "'");
    }
    push(t, std::string(1, c), at);
    ++col;
    ++i;
  }
  out.push_back({Tok::Eof, "", 0, loc()});
  return out;
}

bool reserved_name(const std::string& n) {
  static const std::set<std::string> r = {"t",     "tau",  "oo",   "E",    "P",
                                          "not",   "param", "in",  "init", "while",
                                          "do",    "end",  "Bern", "Uniform", "Table",
                                          "Matches"};
  return r.count(n) > 0 || n.rfind("pi_", 0) == 0;
}

// What a bare name may mean in each position.
enum class Scope { Init, Guard, Body, Seed, HintT, HintNoT, ParamOnly };

struct Parser {
  std::vector<Token> ts;
  size_t p = 0;
  const Program* sym = nullptr;  // name lookup; points at the program under construction

  const Token& peek() const { return ts[p]; }
  const Token& ahead(size_t k) const { return ts[std::min(p + k, ts.size() - 1)]; }
  Token eat() { return ts[p == ts.size() - 1 ? p : p++]; }
  bool at(Tok t) const { return ts[p].t == t; }
  bool at_ident(const char* s) const { return at(Tok::Ident) && ts[p].s == s; }

  Token expect(Tok t, const char* what) {
    if (!at(t)) fail(peek().loc, std::string("expected ") + what);
    return eat();
  }
  void expect_ident(const char* s) {
    if (!at_ident(s)) fail(peek().loc, std::string("expected '") + s + "'");
    eat();
  }

  // ---- expressions ----

  SExprPtr parse_expr(Scope sc) {
    SExprPtr e = parse_term(sc);
    while (at(Tok::Plus) || at(Tok::Minus)) {
      Tok op = eat().t;
      SExprPtr r = parse_term(sc);
      e = se_binop(op == Tok::Plus ? SExpr_::K::Add : SExpr_::K::Sub, e, r);
    }
    return e;
  }

  SExprPtr parse_term(Scope sc) {
    SExprPtr e = parse_factor(sc);
    while (at(Tok::Star) || at(Tok::Slash)) {
      Token op = eat();
      SExprPtr r = parse_factor(sc);
      if (op.t == Tok::Slash) {
        if (e->k != SExpr_::K::Const || r->k != SExpr_::K::Const)
          fail(op.loc, "'/' only folds rational literals, e.g. 1/2");
        if (r->c == 0) fail(op.loc, "division by zero");
        e = se_const(e->c / r->c);
      } else {
        e = se_binop(SExpr_::K::Mul, e, r);
      }
    }
    return e;
  }

  SExprPtr parse_factor(Scope sc) {
    if (at(Tok::Minus)) {
      SourceLoc at0 = eat().loc;
      SExprPtr e = parse_factor(sc);
      (void)at0;
      if (e->k == SExpr_::K::Const) return se_const(-e->c);
      return se_neg(e);
    }
    SExprPtr e = parse_primary(sc);
    if (at(Tok::Caret)) {
      Token caret = eat();
      Token n = expect(Tok::Num, "integer exponent after '^'");
      if (!is_integer(n.q) || n.q < 0) fail(caret.loc, "exponent must be a nonnegative integer");
      int k = static_cast<int>(numerator(n.q).convert_to<long>());
      if (e->k == SExpr_::K::Const) return se_const(rat_pow(e->c, k));
      return se_pow(e, k);
    }
    return e;
  }

  SExprPtr parse_primary(Scope sc) {
    if (at(Tok::Num)) return se_const(eat().q);
    if (at(Tok::LPar)) {
      eat();
      SExprPtr e = parse_expr(sc);
      expect(Tok::RPar, "')'");
      return e;
    }
    if (!at(Tok::Ident)) fail(peek().loc, "expected an expression");
    Token id = eat();
    const std::string& n = id.s;

    if (n.rfind("pi_", 0) == 0) {
      if (sc != Scope::Body) fail(id.loc, "pi_k(...) is only allowed in loop assignments");
      int k = 0;
      try {
        k = std::stoi(n.substr(3));
      } catch (...) {
        fail(id.loc, "malformed projection '" + n + "'");
      }
      if (k < 1) fail(id.loc, "projection index must be >= 1");
      expect(Tok::LPar, "'(' after projection");
      Token sv = expect(Tok::Ident, "sample variable");
      expect(Tok::RPar, "')'");
      const Distribution* d = sym->sample_dist(sv.s);
      if (!d) fail(sv.loc, "'" + sv.s + "' is not a sample variable");
      if (k > d->arity)
        fail(sv.loc, "projection " + std::to_string(k) + " exceeds arity " +
                         std::to_string(d->arity) + " of '" + sv.s + "'");
      return se_proj(sv.s, k);
    }

    if (n == "t") {
      if (sc != Scope::HintT) fail(id.loc, "'t' is only allowed in at-exit hint values");
      return se_name(SExpr_::K::Time, "t");
    }

    if (sym->has_param(n)) return se_name(SExpr_::K::Param, n);

    if (sym->has_sample(n)) {
      if (sc != Scope::Body) fail(id.loc, "sample variable '" + n + "' is only allowed in loop assignments");
      const Distribution* d = sym->sample_dist(n);
      if (d->arity != 1)
        fail(id.loc, "'" + n + "' samples tuples; address a coordinate with pi_k(" + n + ")");
      return se_name(SExpr_::K::Sample, n);
    }

    if (sym->has_var(n)) {
      if (sc == Scope::Init) fail(id.loc, "init values may only use parameters and constants");
      if (sc == Scope::ParamOnly) fail(id.loc, "only parameters and constants are allowed here");
      if (at(Tok::LBrk)) {
        if (sc == Scope::Guard) fail(peek().loc, "history indexing is not allowed in the guard");
        eat();
        bool negative = false;
        if (at(Tok::Minus)) {
          negative = true;
          eat();
        }
        Token off = expect(Tok::Num, "history offset");
        expect(Tok::RBrk, "']'");
        if (!negative || !is_integer(off.q) || off.q == 0)
          fail(off.loc, "history offsets are negative integers, e.g. " + n + "[-1]");
        int k = static_cast<int>(numerator(off.q).convert_to<long>());
        return se_hist(n, -k);
      }
      return se_name(SExpr_::K::Var, n);
    }

    fail(id.loc, "unknown name '" + n + "'");
  }

  // ---- formulas ----

  static bool is_cmp(Tok t) {
    return t == Tok::Eq || t == Tok::Ne || t == Tok::Lt || t == Tok::Le || t == Tok::Gt ||
           t == Tok::Ge;
  }
  static CmpOp cmp_of(Tok t) {
    switch (t) {
      case Tok::Eq: return CmpOp::Eq;
      case Tok::Ne: return CmpOp::Ne;
      case Tok::Lt: return CmpOp::Lt;
      case Tok::Le: return CmpOp::Le;
      case Tok::Gt: return CmpOp::Gt;
      default: return CmpOp::Ge;
    }
  }

  SFormPtr parse_formula(Scope sc) {
    std::vector<SFormPtr> kids{parse_conj(sc)};
    while (at(Tok::OrT)) {
      eat();
      kids.push_back(parse_conj(sc));
    }
    return sf_junction(SForm_::K::Or, std::move(kids));
  }

  SFormPtr parse_conj(Scope sc) {
    std::vector<SFormPtr> kids{parse_formula_atom(sc)};
    while (at(Tok::AndT)) {
      eat();
      kids.push_back(parse_formula_atom(sc));
    }
    return sf_junction(SForm_::K::And, std::move(kids));
  }

  SFormPtr parse_formula_atom(Scope sc) {
    if (at_ident("not")) {
      eat();
      return sf_not(parse_formula_atom(sc));
    }
    // a comparison chain starts with an expression; when that reading fails
    // at the opening token, fall back to a parenthesized formula
    size_t save = p;
    SExprPtr e;
    bool haveExpr = false;
    try {
      e = parse_expr(sc);
      haveExpr = true;
    } catch (const Error&) {
      p = save;
    }
    if (haveExpr) {
      if (!is_cmp(peek().t)) fail(peek().loc, "expected a comparison");
      std::vector<SFormPtr> kids;
      while (is_cmp(peek().t)) {
        CmpOp op = cmp_of(eat().t);
        SExprPtr r = parse_expr(sc);
        kids.push_back(sf_cmp(op, e, r));
        e = r;
      }
      return sf_junction(SForm_::K::And, std::move(kids));
    }
    expect(Tok::LPar, "a comparison or '('");
    SFormPtr f = parse_formula(sc);
    expect(Tok::RPar, "')'");
    return f;
  }

  // ---- distributions ----

  Rational parse_const_value() {
    SExprPtr e = parse_expr(Scope::ParamOnly);
    if (e->k != SExpr_::K::Const) fail(peek().loc, "expected a rational constant");
    return e->c;
  }

  SymExpr parse_param_symexpr() {
    Token at0 = peek();
    SExprPtr e = parse_expr(Scope::ParamOnly);
    return fold_params(e, at0.loc);
  }

  static SymExpr fold_params(const SExprPtr& e, const SourceLoc& loc) {
    switch (e->k) {
      case SExpr_::K::Const: return SymExpr::constant(e->c);
      case SExpr_::K::Param: return SymExpr::param(e->name);
      case SExpr_::K::Add: return fold_params(e->a, loc) + fold_params(e->b, loc);
      case SExpr_::K::Sub: return fold_params(e->a, loc) - fold_params(e->b, loc);
      case SExpr_::K::Mul: return fold_params(e->a, loc) * fold_params(e->b, loc);
      case SExpr_::K::Neg: return -fold_params(e->a, loc);
      case SExpr_::K::Pow: return fold_params(e->a, loc).pow(e->arg);
      default: fail(loc, "only parameters and constants are allowed here");
    }
  }

  Distribution parse_distribution() {
    Token id = expect(Tok::Ident, "a distribution");
    if (id.s == "Bern") {
      expect(Tok::LPar, "'('");
      SymExpr prob = parse_param_symexpr();
      expect(Tok::Comma, "','");
      expect(Tok::LBrc, "'{'");
      Rational v1 = parse_const_value();
      expect(Tok::Comma, "','");
      Rational v0 = parse_const_value();
      expect(Tok::RBrc, "'}'");
      expect(Tok::RPar, "')'");
      return Distribution::bernoulli(prob, v1, v0);
    }
    if (id.s == "Uniform") {
      expect(Tok::LBrc, "'{'");
      std::vector<Rational> vals{parse_const_value()};
      while (at(Tok::Comma)) {
        eat();
        vals.push_back(parse_const_value());
      }
      expect(Tok::RBrc, "'}'");
      return Distribution::uniform(vals);
    }
    if (id.s == "Table") {
      expect(Tok::LBrc, "'{'");
      std::vector<Outcome> outs;
      for (;;) {
        Outcome o;
        if (at(Tok::LPar)) {
          eat();
          o.value.push_back(parse_const_value());
          while (at(Tok::Comma)) {
            eat();
            o.value.push_back(parse_const_value());
          }
          expect(Tok::RPar, "')'");
        } else {
          o.value.push_back(parse_const_value());
        }
        expect(Tok::Arrow, "'->'");
        o.prob = SymExpr::constant(parse_const_value());
        outs.push_back(std::move(o));
        if (!at(Tok::Comma)) break;
        eat();
      }
      expect(Tok::RBrc, "'}'");
      return Distribution::table(std::move(outs));
    }
    if (id.s == "Matches") {
      expect(Tok::LPar, "'('");
      Token pat = expect(Tok::Str, "a pattern string");
      expect(Tok::Comma, "','");
      SymExpr L = parse_param_symexpr();
      expect(Tok::RPar, "')'");
      return Distribution::matches(pat.s, L);
    }
    fail(id.loc, "unknown distribution '" + id.s + "'");
  }
};

// Pragma line: stripped of the leading '#', with its source line number.
struct PragmaLine {
  int line = 0;
  std::string head;
  std::string payload;
  bool hasPayload = false;
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Splits pragma lines out of the source; they parse separately once the
// program's names are known.
std::string split_pragmas(const std::string& text, std::vector<PragmaLine>& pragmas) {
  std::string body;
  body.reserve(text.size());
  int line = 1;
  size_t i = 0;
  while (i <= text.size()) {
    size_t end = text.find('\n', i);
    std::string ln = text.substr(i, end == std::string::npos ? std::string::npos : end - i);
    std::string t = trim(ln);
    if (!t.empty() && t[0] == '#') {
      PragmaLine pl;
      pl.line = line;
      std::string rest = trim(t.substr(1));
      size_t colon = rest.find(':');
      if (colon == std::string::npos) {
        pl.head = trim(rest);
      } else {
        pl.head = trim(rest.substr(0, colon));
        pl.payload = trim(rest.substr(colon + 1));
        pl.hasPayload = true;
      }
      pragmas.push_back(std::move(pl));
      body += "\n";
    } else {
      body += ln;
      body += "\n";
    }
    if (end == std::string::npos) break;
    i = end + 1;
    ++line;
  }
  return body;
}

Parser payload_parser(const std::string& payload, const Program& prog, int line) {
  Parser q;
  q.ts = lex(payload, line, 1);
  q.sym = &prog;
  return q;
}

bool expr_mentions_time(const SExprPtr& e) {
  if (!e) return false;
  if (e->k == SExpr_::K::Time) return true;
  return expr_mentions_time(e->a) || expr_mentions_time(e->b);
}

bool formula_mentions_time(const SFormPtr& f) {
  if (!f) return false;
  if (f->k == SForm_::K::Cmp) return expr_mentions_time(f->lhs) || expr_mentions_time(f->rhs);
  for (const auto& k : f->kids)
    if (formula_mentions_time(k)) return true;
  return false;
}

// Hints must be (disjunctions of) conjunctions of "var = value" equations.
void check_hint_shape(const SFormPtr& f, bool disjAllowed, const char* what, int line) {
  auto is_eq_conj = [&](const SFormPtr& g) {
    std::vector<SFormPtr> cmps;
    if (g->k == SForm_::K::Cmp) {
      cmps.push_back(g);
    } else if (g->k == SForm_::K::And) {
      cmps = g->kids;
    } else {
      return false;
    }
    for (const auto& c : cmps) {
      if (c->k != SForm_::K::Cmp || c->op != CmpOp::Eq) return false;
      if (c->lhs->k != SExpr_::K::Var) return false;
    }
    return true;
  };
  if (is_eq_conj(f)) return;
  if (disjAllowed && f->k == SForm_::K::Or) {
    bool ok = true;
    for (const auto& k : f->kids) ok = ok && is_eq_conj(k);
    if (ok) return;
  }
  fail({line, 1}, std::string(what) +
                      " hints must be conjunctions of 'var = value' equations" +
                      (disjAllowed ? ", optionally joined by \\/" : ""));
}

void route_pragma(const PragmaLine& pl, Program& prog, std::set<std::string>& seenOnce) {
  auto once = [&](const std::string& key) {
    if (!seenOnce.insert(key).second) fail({pl.line, 1}, "duplicate #" + key + " pragma");
  };
  if (pl.head == "assume-ost") {
    if (pl.hasPayload && !pl.payload.empty()) fail({pl.line, 1}, "#assume-ost takes no payload");
    prog.pragmas.assumeOst = true;
    return;
  }
  if (!pl.hasPayload) fail({pl.line, 1}, "unknown pragma '#" + pl.head + "'");
  if (pl.head == "seed") {
    once("seed");
    Parser q = payload_parser(pl.payload, prog, pl.line);
    prog.pragmas.seed = q.parse_expr(Scope::Seed);
    q.expect(Tok::Eof, "end of seed expression");
    return;
  }
  auto at_line = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.loc().line > 1) throw;
      throw Error("parse", std::string(e.what()) + " (pragma at line " +
                               std::to_string(pl.line) + ")");
    }
  };
  if (pl.head == "hint at-exit" || pl.head == "hint every" || pl.head == "hint implies") {
    at_line([&] { parse_hint(pl.head.substr(5) + ": " + pl.payload, prog, prog.pragmas); });
    return;
  }
  if (pl.head == "variant") {
    once("variant");
    at_line([&] { prog.pragmas.variant = parse_variant(pl.payload, prog); });
    return;
  }
  if (pl.head == "solve-for") {
    once("solve-for");
    at_line([&] { prog.pragmas.solveFor = parse_solve_target(pl.payload, prog); });
    return;
  }
  if (pl.head == "use-fact") {
    if (pl.payload.empty()) fail({pl.line, 1}, "#use-fact needs a file path");
    prog.pragmas.useFacts.push_back(pl.payload);
    return;
  }
  fail({pl.line, 1}, "unknown pragma '#" + pl.head + "'");
}

}  // namespace

Program parse_program(const std::string& text) {
  std::vector<PragmaLine> pragmas;
  std::string body = split_pragmas(text, pragmas);

  Program prog;
  Parser ps;
  ps.ts = lex(body, 1, 1);
  ps.sym = &prog;

  while (ps.at_ident("param")) {
    ps.eat();
    Token name = ps.expect(Tok::Ident, "parameter name");
    if (reserved_name(name.s)) fail(name.loc, "'" + name.s + "' is reserved");
    if (prog.has_param(name.s)) fail(name.loc, "duplicate parameter '" + name.s + "'");
    ps.expect_ident("in");
    ParamDecl d;
    d.name = name.s;
    if (ps.at(Tok::LPar)) {
      d.loOpen = true;
    } else if (ps.at(Tok::LBrk)) {
      d.loOpen = false;
    } else {
      fail(ps.peek().loc, "expected '(' or '[' to open the range");
    }
    ps.eat();
    if (ps.at(Tok::Minus) && ps.ahead(1).t == Tok::Ident && ps.ahead(1).s == "oo") {
      ps.eat();
      ps.eat();
      d.lo = nullptr;
      if (!d.loOpen) fail(name.loc, "an infinite endpoint must be open");
    } else {
      d.lo = ps.parse_expr(Scope::ParamOnly);
    }
    ps.expect(Tok::Comma, "','");
    if (ps.at_ident("oo")) {
      ps.eat();
      d.hi = nullptr;
      if (!ps.at(Tok::RPar)) fail(ps.peek().loc, "an infinite endpoint must be open");
    } else {
      d.hi = ps.parse_expr(Scope::ParamOnly);
    }
    if (ps.at(Tok::RPar)) {
      d.hiOpen = true;
    } else if (ps.at(Tok::RBrk)) {
      d.hiOpen = false;
    } else {
      fail(ps.peek().loc, "expected ')' or ']' to close the range");
    }
    ps.eat();
    prog.params.push_back(std::move(d));
  }

  std::set<std::pair<std::string, int>> initSeen;
  while (ps.at_ident("init")) {
    ps.eat();
    Token name = ps.expect(Tok::Ident, "variable name");
    if (reserved_name(name.s)) fail(name.loc, "'" + name.s + "' is reserved");
    if (prog.has_param(name.s)) fail(name.loc, "'" + name.s + "' is already a parameter");
    InitStmt st;
    st.var = name.s;
    st.index = 0;
    if (ps.at(Tok::LBrk)) {
      ps.eat();
      Token ix = ps.expect(Tok::Num, "init state index");
      if (!is_integer(ix.q) || ix.q < 0) fail(ix.loc, "init state index must be >= 0");
      st.index = static_cast<int>(numerator(ix.q).convert_to<long>());
      ps.expect(Tok::RBrk, "']'");
    }
    if (!initSeen.insert({st.var, st.index}).second)
      fail(name.loc, "duplicate init for " + st.var + "[" + std::to_string(st.index) + "]");
    ps.expect(Tok::Assign, "':='");
    st.value = ps.parse_expr(Scope::Init);
    prog.inits.push_back(std::move(st));
  }
  if (prog.inits.empty()) fail(ps.peek().loc, "expected at least one init statement");

  // every variable must cover states 0..d for one shared depth d
  {
    std::map<std::string, std::set<int>> byVar;
    for (const auto& st : prog.inits) byVar[st.var].insert(st.index);
    int depth = -1;
    for (const auto& [v, ixs] : byVar) {
      int d = *ixs.rbegin();
      if (static_cast<int>(ixs.size()) != d + 1)
        fail({1, 1}, "init states of '" + v + "' must cover 0.." + std::to_string(d));
      if (depth == -1) depth = d;
      if (d != depth) fail({1, 1}, "all variables must share one init depth");
    }
    prog.firstLoopIndex = depth + 1;
  }

  ps.expect_ident("while");
  ps.expect(Tok::LPar, "'('");
  prog.guard = ps.parse_formula(Scope::Guard);
  ps.expect(Tok::RPar, "')'");
  ps.expect_ident("do");

  bool sawAssign = false;
  std::set<std::string> assigned;
  while (!ps.at_ident("end")) {
    Token name = ps.expect(Tok::Ident, "a statement or 'end'");
    if (ps.at(Tok::Tilde)) {
      ps.eat();
      if (sawAssign) fail(name.loc, "sampling statements must precede assignments");
      if (reserved_name(name.s)) fail(name.loc, "'" + name.s + "' is reserved");
      if (prog.has_param(name.s) || prog.has_var(name.s) || prog.has_sample(name.s))
        fail(name.loc, "'" + name.s + "' is already declared");
      SampleStmt st;
      st.var = name.s;
      st.dist = ps.parse_distribution();
      std::string err = st.dist.validate();
      if (!err.empty()) fail(name.loc, err);
      prog.samples.push_back(std::move(st));
    } else if (ps.at(Tok::Assign)) {
      ps.eat();
      sawAssign = true;
      if (!prog.has_var(name.s))
        fail(name.loc, "'" + name.s + "' is assigned in the loop but has no init");
      if (!assigned.insert(name.s).second)
        fail(name.loc, "'" + name.s + "' is assigned twice in the loop body");
      AssignStmt st;
      st.var = name.s;
      st.value = ps.parse_expr(Scope::Body);
      prog.assigns.push_back(std::move(st));
    } else {
      fail(ps.peek().loc, "expected '~' or ':='");
    }
  }
  ps.eat();  // end
  ps.expect(Tok::Eof, "end of program");

  std::set<std::string> seenOnce;
  for (const auto& pl : pragmas) route_pragma(pl, prog, seenOnce);
  return prog;
}

SExprPtr parse_seed(const std::string& payload, const Program& prog) {
  Parser q = payload_parser(payload, prog, 1);
  SExprPtr e = q.parse_expr(Scope::Seed);
  q.expect(Tok::Eof, "end of seed expression");
  return e;
}

void parse_hint(const std::string& payload, const Program& prog, Pragmas& out) {
  size_t colon = payload.find(':');
  if (colon == std::string::npos)
    throw Error("parse", "hint must look like 'at-exit: ...', 'every: ...' or 'implies: ...'");
  std::string kind = trim(payload.substr(0, colon));
  std::string rest = trim(payload.substr(colon + 1));
  Parser q = payload_parser(rest, prog, 1);
  if (kind == "at-exit") {
    SFormPtr f = q.parse_formula(Scope::HintT);
    q.expect(Tok::Eof, "end of hint");
    check_hint_shape(f, /*disjAllowed=*/true, "at-exit", 1);
    out.atExit.push_back(std::move(f));
    return;
  }
  if (kind == "every") {
    SFormPtr f = q.parse_formula(Scope::HintNoT);
    q.expect(Tok::Eof, "end of hint");
    check_hint_shape(f, /*disjAllowed=*/false, "every", 1);
    if (formula_mentions_time(f))
      throw Error("parse", "every-iteration hints may not mention 't'");
    out.every.push_back(std::move(f));
    return;
  }
  if (kind == "implies") {
    SFormPtr a = q.parse_formula(Scope::HintNoT);
    q.expect(Tok::Implies, "'=>'");
    SFormPtr b = q.parse_formula(Scope::HintNoT);
    q.expect(Tok::Eof, "end of hint");
    check_hint_shape(a, false, "implication", 1);
    check_hint_shape(b, false, "implication", 1);
    out.implies.push_back({std::move(a), std::move(b)});
    return;
  }
  throw Error("parse", "unknown hint kind '" + kind + "'");
}

VariantSpec parse_variant(const std::string& payload, const Program& prog) {
  Parser q = payload_parser(payload, prog, 1);
  VariantSpec v;
  v.expr = q.parse_expr(Scope::HintNoT);
  q.expect(Tok::Comma, "',' before the variant bound");
  v.bound = q.parse_expr(Scope::ParamOnly);
  if (q.at(Tok::Comma)) {
    q.eat();
    v.eps = q.parse_expr(Scope::ParamOnly);
  }
  q.expect(Tok::Eof, "end of variant");
  return v;
}

SolveTarget parse_solve_target(const std::string& payload, const Program& prog) {
  Parser q = payload_parser(payload, prog, 1);
  SolveTarget t;
  Token id = q.expect(Tok::Ident, "'E' or 'P'");
  if (id.s == "E") {
    q.expect(Tok::LBrk, "'['");
    Token inner = q.expect(Tok::Ident, "'tau' or a variable");
    if (inner.s == "tau") {
      t.k = SolveTarget::K::Tau;
    } else {
      if (!prog.has_var(inner.s)) fail(inner.loc, "unknown variable '" + inner.s + "'");
      t.k = SolveTarget::K::Mean;
      t.var = inner.s;
    }
    q.expect(Tok::RBrk, "']'");
  } else if (id.s == "P") {
    q.expect(Tok::LBrk, "'['");
    t.k = SolveTarget::K::Prob;
    t.formula = q.parse_formula(Scope::HintNoT);
    q.expect(Tok::RBrk, "']'");
  } else {
    fail(id.loc, "solve target must be E[tau], E[var] or P[formula]");
  }
  q.expect(Tok::Eof, "end of solve target");
  return t;
}

}  // namespace ostap
