#pragma once

#include "liesynth/number.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace liesynth {

/// Node kinds of a scalar expression. Sec is kept as its own kind so that the
/// cos/sec link family prints and differentiates naturally.
enum class Kind : std::uint8_t { Const, Var, Power, Sin, Cos, Sec, Exp, Log, Product, Sum };

/// Immutable scalar expression over state components z_0 .. z_{N-1}.
///
/// Expr is a cheap value type (one shared pointer). Construction never
/// rewrites; call simplify() for the canonical form. Component indices are
/// 0-based in the C++ API and 1-based in every text format.
class Expr {
 public:
  Expr();  // the exact constant 0

  static Expr constant(Number value);
  static Expr var(int component);
  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);
  static Expr power(Expr base, int exponent);
  static Expr function(Kind kind, Expr argument);

  Kind kind() const;
  const Number& value() const;  // Const only
  int component() const;        // Var only
  int exponent() const;         // Power only
  std::span<const Expr> operands() const;
  const Expr& operand(std::size_t i) const { return operands()[i]; }

  /// Sorted, duplicate-free 0-based component indices the expression mentions.
  const std::vector<int>& free_vars() const;
  bool depends_on(int component) const;
  bool is_constant() const { return free_vars().empty(); }

  bool is_zero() const;  // syntactic: Const 0
  bool is_one() const;   // syntactic: Const 1

  /// Number of nodes, counting shared subtrees once per occurrence.
  std::size_t size() const;

  bool same_node(const Expr& other) const { return node_ == other.node_; }
  const void* identity() const { return node_.get(); }

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Total structural order; equal iff the trees are identical.
int compare(const Expr& a, const Expr& b);
inline bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
inline bool operator!=(const Expr& a, const Expr& b) { return compare(a, b) != 0; }
inline bool operator<(const Expr& a, const Expr& b) { return compare(a, b) < 0; }

// Raw builders (no simplification).
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, int exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr sec(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);

inline Expr constant(Number value) { return Expr::constant(std::move(value)); }
inline Expr var(int component) { return Expr::var(component); }

/// Terminating rewrite to canonical form: flattening, constant folding, 0/1
/// identities, like-term and like-base collection (sec u counted as cos u^-1).
/// Idempotent.
Expr simplify(const Expr& e);

/// Exact symbolic partial derivative d e / d z_component, simplified.
Expr differentiate(const Expr& e, int component);

/// Antiderivative with respect to z_component, integration constant 0.
/// Throws Error(NotClosedForm) when e leaves the integrable basis.
Expr antiderivative(const Expr& e, int component);

/// Pointwise evaluation. Throws DomainError at poles of sec, non-positive log
/// arguments, negative powers of zero, and non-finite results.
double evaluate(const Expr& e, std::span<const double> point);

/// Exact evaluation when every operation stays rational; nullopt otherwise.
/// Transcendental kinds are exact only at the trivial points (sin 0, log 1, ...).
std::optional<Rational> evaluate_exact(const Expr& e, std::span<const Rational> point);

/// Coefficient c and remainder r with e == c * r, c a constant factor.
std::pair<Number, Expr> split_coefficient(const Expr& e);

/// Replaces every occurrence of z_component with `replacement`.
Expr substitute(const Expr& e, int component, const Expr& replacement);

/// Multiplicative factors of a simplified expression (a non-product is its own
/// single factor; a constant coefficient is returned as a Const factor).
std::vector<Expr> factors_of(const Expr& e);

}  // namespace liesynth
