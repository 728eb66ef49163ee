#include "liesynth/vector_field.hpp"

#include "json_util.hpp"
#include "liesynth/error.hpp"
#include "liesynth/sexpr.hpp"
#include "liesynth/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace liesynth {

VectorField::VectorField(int dimension) : dimension_(dimension) {
  if (dimension < 0) throw Error(ErrorCode::InvalidArgument, "negative dimension");
}

VectorField VectorField::unit(int dimension, int component, const Expr& f) {
  VectorField v(dimension);
  v.set(component, f);
  return v;
}

void VectorField::check_component(int k) const {
  if (k < 0 || k >= dimension_) throw Error(ErrorCode::InvalidArgument, "component out of range");
}

Expr VectorField::component(int k) const {
  check_component(k);
  auto it = components_.find(k);
  return it == components_.end() ? Expr() : it->second;
}

void VectorField::set(int k, const Expr& e) {
  check_component(k);
  Expr s = simplify(e);
  for (int v : s.free_vars()) {
    if (v >= dimension_) throw Error(ErrorCode::InvalidArgument, "expression reads a component beyond the field dimension");
  }
  if (s.is_zero()) {
    components_.erase(k);
  } else {
    components_[k] = s;
  }
}

void VectorField::add(int k, const Expr& e) {
  auto it = components_.find(k);
  set(k, it == components_.end() ? e : it->second + e);
}

VectorField& VectorField::operator+=(const VectorField& other) {
  if (other.dimension_ != dimension_) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  for (const auto& [k, e] : other.components_) add(k, e);
  return *this;
}

VectorField VectorField::operator+(const VectorField& other) const {
  VectorField out = *this;
  out += other;
  return out;
}

VectorField VectorField::operator-(const VectorField& other) const { return *this + other.scaled(Number(-1)); }

VectorField VectorField::scaled(const Number& a) const {
  VectorField out(dimension_);
  for (const auto& [k, e] : components_) out.set(k, Expr::constant(a) * e);
  return out;
}

std::vector<double> VectorField::evaluate(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != dimension_) throw Error(ErrorCode::InvalidArgument, "point dimension mismatch");
  std::vector<double> out(static_cast<std::size_t>(dimension_), 0.0);
  for (const auto& [k, e] : components_) out[static_cast<std::size_t>(k)] = liesynth::evaluate(e, point);
  return out;
}

bool operator==(const VectorField& a, const VectorField& b) {
  return a.dimension() == b.dimension() && a.components() == b.components();
}

VectorField lie_bracket(const VectorField& f1, const VectorField& f2) {
  if (f1.dimension() != f2.dimension()) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  VectorField out(f1.dimension());
  // component i: sum_k d f2_i/dz_k f1_k - d f1_i/dz_k f2_k
  auto accumulate = [&](const VectorField& a, const VectorField& b, std::vector<Expr>& terms, int i, bool negate) {
    auto it = b.components().find(i);
    if (it == b.components().end()) return;
    for (int k : it->second.free_vars()) {
      auto ak = a.components().find(k);
      if (ak == a.components().end()) continue;
      Expr t = differentiate(it->second, k) * ak->second;
      terms.push_back(negate ? -t : t);
    }
  };
  std::vector<int> rows;
  for (const auto& [i, e] : f1.components()) rows.push_back(i);
  for (const auto& [i, e] : f2.components()) rows.push_back(i);
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  for (int i : rows) {
    std::vector<Expr> terms;
    accumulate(f1, f2, terms, i, false);
    accumulate(f2, f1, terms, i, true);
    if (!terms.empty()) out.set(i, expand_polynomial(Expr::sum(std::move(terms))));
  }
  return out;
}

std::vector<double> lie_bracket_numeric(const VectorField& f1, const VectorField& f2,
                                        std::span<const double> point, double h) {
  if (f1.dimension() != f2.dimension()) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  const auto n = static_cast<std::size_t>(f1.dimension());
  std::vector<double> z(point.begin(), point.end());
  auto v1 = f1.evaluate(z);
  auto v2 = f2.evaluate(z);
  std::vector<double> out(n, 0.0);
  // Directional derivative J_f v = sum_k v_k * d f / dz_k, column by column.
  for (std::size_t k = 0; k < n; ++k) {
    if (v1[k] == 0.0 && v2[k] == 0.0) continue;
    const double x = z[k];
    z[k] = x + h;
    auto p1 = f1.evaluate(z);
    auto p2 = f2.evaluate(z);
    z[k] = x - h;
    auto m1 = f1.evaluate(z);
    auto m2 = f2.evaluate(z);
    z[k] = x;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] += (p2[i] - m2[i]) / (2 * h) * v1[k] - (p1[i] - m1[i]) / (2 * h) * v2[k];
    }
  }
  return out;
}

std::string to_json(const VectorField& f) { return detail::field_to_json(f).dump(); }

VectorField vector_field_from_json(std::string_view text) { return detail::field_from_json(detail::parse_json(text)); }

SeparableField::SeparableField(int target_, int source_, Expr f_)
    : target(target_), source(source_), f(simplify(f_)) {}

SeparableField::SeparableField(int target_, int source_, Expr f1, Expr f2)
    : target(target_), source(source_), f(simplify(f1 * f2)), factors(std::make_pair(simplify(f1), simplify(f2))) {}

VectorField SeparableField::to_vector_field(int dimension) const { return VectorField::unit(dimension, target, f); }

// ---------------------------------------------------------------------------

namespace detail {

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("JSON: ") + e.what());
  }
}

void malformed(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

json number_json(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  malformed("expected a number");
}

json field_to_json(const VectorField& f) {
  json comps = json::object();
  for (const auto& [k, e] : f.components()) comps[std::to_string(k + 1)] = to_sexpr(e);
  return json{{"dim", f.dimension()}, {"components", comps}};
}

VectorField field_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j["dim"].is_number_integer()) malformed("vector field needs an integer \"dim\"");
  VectorField f(j["dim"].get<int>());
  if (j.contains("components")) {
    const auto& c = j["components"];
    if (!c.is_object()) malformed("\"components\" must be an object");
    for (const auto& [key, value] : c.items()) {
      int k = 0;
      try {
        std::size_t used = 0;
        k = std::stoi(key, &used);
        if (used != key.size()) malformed("bad component key " + key);
      } catch (const std::logic_error&) {
        malformed("bad component key " + key);
      }
      if (k < 1 || k > f.dimension()) malformed("component key out of range: " + key);
      if (!value.is_string()) malformed("component values are s-expression strings");
      Expr e = parse_sexpr(value.get<std::string>());
      for (int v : e.free_vars()) {
        if (v >= f.dimension()) malformed("component " + key + " reads a variable beyond dim");
      }
      f.add(k - 1, e);
    }
  }
  return f;
}

}  // namespace detail

}  // namespace liesynth
