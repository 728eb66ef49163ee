#pragma once

#include "liesynth/expr.hpp"

#include <string>
#include <string_view>

namespace liesynth {

/// Prefix s-expression text, e.g. `(* (var 2) (sin (var 3)))` for z_2 sin z_3.
///
/// Grammar (components are 1-based in text):
///   expr   := number | (var K) | (+ expr...) | (* expr...) | (^ expr INT)
///           | (sin expr) | (cos expr) | (sec expr) | (exp expr) | (log expr)
///   number := INT | INT/INT | decimal-or-exponent float | inf | -inf | nan
/// The parser also accepts `(- a)`, `(- a b...)` and `(/ a b)`, which it lowers
/// to the canonical node kinds.
std::string to_sexpr(const Expr& e);

/// Throws Error(ParseError) with the byte offset of the problem.
Expr parse_sexpr(std::string_view text);

}  // namespace liesynth
