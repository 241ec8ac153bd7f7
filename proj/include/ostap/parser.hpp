#pragma once

#include <string>

#include "ostap/ast.hpp"

namespace ostap {

// Parses a .spp program, including any pragma lines ("#seed: ...").
// Throws Error("parse", ...) with a 1-based source location.
Program parse_program(const std::string& text);

// Pragma payload parsers. The same routines back the CLI flags, so
// "--hint 'at-exit: x = t - 1'" and "#hint at-exit: x = t - 1" agree.
// Names are resolved against the given program.
SExprPtr parse_seed(const std::string& payload, const Program& prog);
void parse_hint(const std::string& payload, const Program& prog, Pragmas& out);
VariantSpec parse_variant(const std::string& payload, const Program& prog);
SolveTarget parse_solve_target(const std::string& payload, const Program& prog);

// Canonical text forms; parse(print_program(p)) reproduces p.
std::string print_program(const Program& prog);
std::string print_expr(const SExprPtr& e);
std::string print_formula(const SFormPtr& f);

}  // namespace ostap
