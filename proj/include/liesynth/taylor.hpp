#pragma once

#include "liesynth/expr.hpp"

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace liesynth {

/// Sparse multi-index: (0-based component, positive exponent), sorted by component.
using MultiIndex = std::vector<std::pair<int, int>>;

int total_degree(const MultiIndex& alpha);

struct Monomial {
  Number coefficient;
  MultiIndex powers;

  /// coefficient * prod (z_k - center_k)^a_k.
  Expr to_expr(std::span<const double> center) const;
};

/// Every nonzero term of total degree <= degree of the Taylor expansion of e
/// about center, coefficients from repeated symbolic differentiation. Output
/// is graded (degree 0 first); within a degree, earlier components carry the
/// higher powers. Coefficients are exact when the derivatives evaluate
/// exactly at the center. Throws DomainError if e is singular at the center.
std::vector<Monomial> taylor_monomials(const Expr& e, std::span<const double> center, int degree);

/// Sum of monomials as a single expression (not simplified).
Expr monomial_sum(std::span<const Monomial> monomials, std::span<const double> center);

/// Exact polynomial with rational coefficients.
using Polynomial = std::map<MultiIndex, Rational>;

/// Canonical expansion of e if it is a polynomial with exact coefficients
/// (only +, *, non-negative integer powers, rational constants).
std::optional<Polynomial> to_polynomial(const Expr& e);

/// Simplified sum of monomials.
Expr polynomial_expr(const Polynomial& p);

/// Expanded canonical form when e is an exact polynomial, simplify(e) otherwise.
/// Two polynomial expressions are equal iff their expansions are identical.
Expr expand_polynomial(const Expr& e);

}  // namespace liesynth
