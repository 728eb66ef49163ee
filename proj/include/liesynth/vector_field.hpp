#pragma once

#include "liesynth/expr.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace liesynth {

/// Vector field on R^N stored sparsely: component -> Expr. Absent components
/// are identically zero; stored entries are simplified and never the
/// syntactic zero.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(int dimension);

  /// e_component * f
  static VectorField unit(int dimension, int component, const Expr& f);

  int dimension() const { return dimension_; }
  const std::map<int, Expr>& components() const { return components_; }
  Expr component(int k) const;
  bool is_zero() const { return components_.empty(); }

  void set(int k, const Expr& e);
  void add(int k, const Expr& e);

  VectorField& operator+=(const VectorField& other);
  VectorField operator+(const VectorField& other) const;
  VectorField operator-(const VectorField& other) const;
  VectorField scaled(const Number& a) const;

  std::vector<double> evaluate(std::span<const double> point) const;

 private:
  void check_component(int k) const;

  int dimension_ = 0;
  std::map<int, Expr> components_;
};

bool operator==(const VectorField& a, const VectorField& b);

/// [f1, f2] = (d f2 / dz) f1 - (d f1 / dz) f2, symbolically.
VectorField lie_bracket(const VectorField& f1, const VectorField& f2);

/// Same bracket from central finite-difference Jacobians of the evaluator.
std::vector<double> lie_bracket_numeric(const VectorField& f1, const VectorField& f2,
                                        std::span<const double> point, double h = 1e-6);

/// JSON: {"dim": N, "components": {"1": "<s-expression>", ...}} (1-based keys).
std::string to_json(const VectorField& f);
VectorField vector_field_from_json(std::string_view text);

/// h_{i,j} = e_j f(z_I(j), z_I(i)): `target` is j, `source` is a component of
/// the sending agent i (both 0-based). The optional factorization is
/// (f1 over the target block, f2 over the source block).
struct SeparableField {
  int target = 0;
  int source = 0;
  Expr f;
  std::optional<std::pair<Expr, Expr>> factors;

  SeparableField() = default;
  SeparableField(int target, int source, Expr f);
  SeparableField(int target, int source, Expr f1, Expr f2);

  VectorField to_vector_field(int dimension) const;
};

}  // namespace liesynth
