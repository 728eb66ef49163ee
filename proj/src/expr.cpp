#include "liesynth/expr.hpp"

#include "liesynth/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace liesynth {

struct Expr::Node {
  Kind kind = Kind::Const;
  Number value;
  int index = 0;  // Var component or Power exponent
  std::vector<Expr> operands;
  std::vector<int> free;
  std::size_t size = 1;
};

namespace {

constexpr double kPoleThreshold = 1e-12;

std::vector<int> merge_free(const std::vector<Expr>& operands) {
  std::vector<int> out;
  for (const auto& op : operands) {
    std::vector<int> merged;
    merged.reserve(out.size() + op.free_vars().size());
    std::set_union(out.begin(), out.end(), op.free_vars().begin(), op.free_vars().end(),
                   std::back_inserter(merged));
    out = std::move(merged);
  }
  return out;
}

bool is_function(Kind k) {
  return k == Kind::Sin || k == Kind::Cos || k == Kind::Sec || k == Kind::Exp || k == Kind::Log;
}

}  // namespace

Expr::Expr() {
  static const auto zero = [] {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->value = Number(0);
    return std::shared_ptr<const Node>(n);
  }();
  node_ = zero;
}

Expr Expr::constant(Number value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->value = std::move(value);
  return Expr(std::move(n));
}

Expr Expr::var(int component) {
  if (component < 0) throw Error(ErrorCode::InvalidArgument, "negative component index");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->index = component;
  n->free = {component};
  return Expr(std::move(n));
}

Expr Expr::sum(std::vector<Expr> terms) {
  if (terms.empty()) return Expr();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Sum;
  n->free = merge_free(terms);
  for (const auto& t : terms) n->size += t.size();
  n->operands = std::move(terms);
  return Expr(std::move(n));
}

Expr Expr::product(std::vector<Expr> factors) {
  if (factors.empty()) return Expr::constant(Number(1));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Product;
  n->free = merge_free(factors);
  for (const auto& t : factors) n->size += t.size();
  n->operands = std::move(factors);
  return Expr(std::move(n));
}

Expr Expr::power(Expr base, int exponent) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Power;
  n->index = exponent;
  n->free = base.free_vars();
  n->size = 1 + base.size();
  n->operands = {std::move(base)};
  return Expr(std::move(n));
}

Expr Expr::function(Kind kind, Expr argument) {
  if (!is_function(kind)) throw Error(ErrorCode::InvalidArgument, "not a function kind");
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->free = argument.free_vars();
  n->size = 1 + argument.size();
  n->operands = {std::move(argument)};
  return Expr(std::move(n));
}

Kind Expr::kind() const { return node_->kind; }
const Number& Expr::value() const { return node_->value; }
int Expr::component() const { return node_->index; }
int Expr::exponent() const { return node_->index; }
std::span<const Expr> Expr::operands() const { return node_->operands; }
const std::vector<int>& Expr::free_vars() const { return node_->free; }
std::size_t Expr::size() const { return node_->size; }

bool Expr::depends_on(int component) const {
  return std::binary_search(node_->free.begin(), node_->free.end(), component);
}

bool Expr::is_zero() const { return kind() == Kind::Const && value().is_zero(); }
bool Expr::is_one() const { return kind() == Kind::Const && value().is_one(); }

int compare(const Expr& a, const Expr& b) {
  if (a.same_node(b)) return 0;
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  switch (a.kind()) {
    case Kind::Const:
      return compare(a.value(), b.value());
    case Kind::Var:
      return a.component() == b.component() ? 0 : (a.component() < b.component() ? -1 : 1);
    case Kind::Power: {
      int c = compare(a.operand(0), b.operand(0));
      if (c != 0) return c;
      return a.exponent() == b.exponent() ? 0 : (a.exponent() < b.exponent() ? -1 : 1);
    }
    default: {
      auto x = a.operands();
      auto y = b.operands();
      std::size_t n = std::min(x.size(), y.size());
      for (std::size_t i = 0; i < n; ++i) {
        int c = compare(x[i], y[i]);
        if (c != 0) return c;
      }
      if (x.size() == y.size()) return 0;
      return x.size() < y.size() ? -1 : 1;
    }
  }
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::sum({a, -b}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::product({a, Expr::power(b, -1)}); }
Expr operator-(const Expr& a) { return Expr::product({Expr::constant(Number(-1)), a}); }
Expr pow(const Expr& base, int exponent) { return Expr::power(base, exponent); }
Expr sin(const Expr& a) { return Expr::function(Kind::Sin, a); }
Expr cos(const Expr& a) { return Expr::function(Kind::Cos, a); }
Expr sec(const Expr& a) { return Expr::function(Kind::Sec, a); }
Expr exp(const Expr& a) { return Expr::function(Kind::Exp, a); }
Expr log(const Expr& a) { return Expr::function(Kind::Log, a); }

// ---------------------------------------------------------------------------
// Simplification

namespace {

struct BaseExponent {
  Expr base;
  int exponent;
};

Expr collect_product_scaled(const Expr& t, const Number& c);

class ProductCollector {
 public:
  void add(const Expr& f, int multiplicity) {
    switch (f.kind()) {
      case Kind::Const:
        if (f.value().is_zero() && multiplicity < 0) {
          add_base(f, multiplicity);
        } else {
          coefficient_ = coefficient_ * pow(f.value(), multiplicity);
        }
        return;
      case Kind::Product:
        for (const auto& op : f.operands()) add(op, multiplicity);
        return;
      case Kind::Power:
        add(f.operand(0), f.exponent() * multiplicity);
        return;
      case Kind::Sec:
        add_base(cos(f.operand(0)), -multiplicity);
        return;
      default:
        add_base(f, multiplicity);
    }
  }

  Expr build() const {
    if (coefficient_.is_zero()) return Expr::constant(zero_like());
    std::vector<Expr> factors;
    for (const auto& [base, e] : bases_) {
      if (e == 0) continue;
      if (base.kind() == Kind::Cos && e < 0) {
        Expr s = sec(base.operand(0));
        factors.push_back(e == -1 ? s : Expr::power(s, -e));
      } else {
        factors.push_back(e == 1 ? base : Expr::power(base, e));
      }
    }
    std::sort(factors.begin(), factors.end(), [](const Expr& a, const Expr& b) { return a < b; });
    if (factors.empty()) return Expr::constant(coefficient_);
    if (!coefficient_.is_one() && factors.size() == 1 && factors.front().kind() == Kind::Sum) {
      // distribute a bare constant over a sum so like terms can meet
      std::vector<Expr> terms;
      for (const auto& t : factors.front().operands()) terms.push_back(collect_product_scaled(t, coefficient_));
      return Expr::sum(std::move(terms));
    }
    if (!coefficient_.is_one()) {
      factors.insert(factors.begin(), Expr::constant(coefficient_));
    } else if (factors.size() == 1) {
      return factors.front();
    }
    return Expr::product(std::move(factors));
  }

 private:
  Number zero_like() const { return coefficient_.is_exact() ? Number(0) : Number(0.0); }

  void add_base(const Expr& base, int multiplicity) {
    for (auto& be : bases_) {
      if (be.base == base) {
        be.exponent += multiplicity;
        return;
      }
    }
    bases_.push_back({base, multiplicity});
  }

  Number coefficient_{1};
  std::vector<BaseExponent> bases_;
};

Expr collect_product(const std::vector<Expr>& factors) {
  ProductCollector c;
  for (const auto& f : factors) c.add(f, 1);
  return c.build();
}

Expr collect_product_scaled(const Expr& t, const Number& c) { return collect_product({Expr::constant(c), t}); }

struct CoreCoefficient {
  Expr core;
  Number coefficient;
};

class SumCollector {
 public:
  void add(const Expr& t, const Number& scale) {
    switch (t.kind()) {
      case Kind::Const:
        constant_ = constant_ + t.value() * scale;
        return;
      case Kind::Sum:
        for (const auto& op : t.operands()) add(op, scale);
        return;
      default: {
        auto [c, core] = split_coefficient(t);
        if (core.kind() == Kind::Sum) {
          // c * (a + b) contributes c*a + c*b
          add(core, c * scale);
        } else {
          add_core(core, c * scale);
        }
      }
    }
  }

  Expr build() const {
    // Order by core, not by the full term, so negating every coefficient
    // keeps the summation order (and the rounding) unchanged.
    std::vector<const CoreCoefficient*> order;
    for (const auto& cc : cores_) {
      if (!cc.coefficient.is_zero()) order.push_back(&cc);
    }
    std::sort(order.begin(), order.end(), [](const CoreCoefficient* a, const CoreCoefficient* b) { return a->core < b->core; });
    std::vector<Expr> terms;
    for (const auto* cc : order) {
      terms.push_back(cc->coefficient.is_one() ? cc->core : collect_product({Expr::constant(cc->coefficient), cc->core}));
    }
    if (!constant_.is_zero()) terms.insert(terms.begin(), Expr::constant(constant_));
    if (terms.empty()) return Expr::constant(constant_);
    if (terms.size() == 1) return terms.front();
    return Expr::sum(std::move(terms));
  }

 private:
  void add_core(const Expr& core, const Number& c) {
    for (auto& cc : cores_) {
      if (cc.core == core) {
        cc.coefficient = cc.coefficient + c;
        return;
      }
    }
    cores_.push_back({core, c});
  }

  Number constant_{0};
  std::vector<CoreCoefficient> cores_;
};

double apply_function(Kind kind, double x, int component) {
  switch (kind) {
    case Kind::Sin: return std::sin(x);
    case Kind::Cos: return std::cos(x);
    case Kind::Sec: {
      double c = std::cos(x);
      if (std::abs(c) < kPoleThreshold) throw DomainError(component, x, "sec evaluated at a pole");
      return 1.0 / c;
    }
    case Kind::Exp: return std::exp(x);
    case Kind::Log:
      if (!(x > 0.0)) throw DomainError(component, x, "log of a non-positive argument");
      return std::log(x);
    default: throw Error(ErrorCode::InvalidArgument, "not a function kind");
  }
}

std::optional<Number> exact_special_value(Kind kind, const Rational& x) {
  if (x == 0) {
    switch (kind) {
      case Kind::Sin: return Number(0);
      case Kind::Cos:
      case Kind::Sec:
      case Kind::Exp: return Number(1);
      default: break;
    }
  }
  if (kind == Kind::Log && x == 1) return Number(0);
  return std::nullopt;
}

Expr fold_function(Kind kind, const Expr& arg) {
  if (arg.kind() == Kind::Const) {
    const Number& v = arg.value();
    if (v.is_exact()) {
      if (auto special = exact_special_value(kind, v.rational())) return Expr::constant(*special);
    }
    try {
      double r = apply_function(kind, v.to_double(), -1);
      if (std::isfinite(r)) return Expr::constant(Number(r));
    } catch (const DomainError&) {
      // singular constant argument: leave symbolic, evaluation reports it
    }
  }
  return Expr::function(kind, arg);
}

class Simplifier {
 public:
  Expr run(const Expr& e) { return pass(e); }

 private:
  Expr pass(const Expr& e) {
    switch (e.kind()) {
      case Kind::Const:
      case Kind::Var:
        return e;
      default:
        break;
    }
    // Memo on identity: derivatives share subtrees heavily.
    const void* id = e.identity();
    if (auto it = memo_.find(id); it != memo_.end()) return it->second;
    Expr out = compute(e);
    memo_.emplace(id, out);
    keep_.push_back(e);
    return out;
  }

  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case Kind::Power:
        return collect_product({Expr::power(pass(e.operand(0)), e.exponent())});
      case Kind::Product: {
        std::vector<Expr> fs;
        fs.reserve(e.operands().size());
        for (const auto& op : e.operands()) {
          Expr s = pass(op);
          if (s.is_zero()) return Expr::constant(s.value());
          fs.push_back(std::move(s));
        }
        return collect_product(fs);
      }
      case Kind::Sum: {
        SumCollector c;
        for (const auto& op : e.operands()) c.add(pass(op), Number(1));
        return c.build();
      }
      default:
        return fold_function(e.kind(), pass(e.operand(0)));
    }
  }

  std::unordered_map<const void*, Expr> memo_;
  std::vector<Expr> keep_;  // pins memo keys alive for the pass
};

}  // namespace

std::pair<Number, Expr> split_coefficient(const Expr& e) {
  if (e.kind() == Kind::Const) return {e.value(), Expr::constant(Number(1))};
  if (e.kind() == Kind::Product && e.operand(0).kind() == Kind::Const) {
    auto ops = e.operands();
    if (ops.size() == 2) return {ops[0].value(), ops[1]};
    return {ops[0].value(), Expr::product(std::vector<Expr>(ops.begin() + 1, ops.end()))};
  }
  return {Number(1), e};
}

Expr simplify(const Expr& e) {
  Expr current = Simplifier().run(e);
  for (int i = 0; i < 32; ++i) {
    Expr next = Simplifier().run(current);
    if (next == current) return current;
    current = std::move(next);
  }
  return current;
}

std::vector<Expr> factors_of(const Expr& e) {
  if (e.kind() == Kind::Product) return {e.operands().begin(), e.operands().end()};
  return {e};
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr derive(const Expr& e, int k) {
  if (!e.depends_on(k)) return Expr();
  switch (e.kind()) {
    case Kind::Var:
      return Expr::constant(Number(1));
    case Kind::Sum: {
      std::vector<Expr> terms;
      for (const auto& t : e.operands()) {
        if (t.depends_on(k)) terms.push_back(derive(t, k));
      }
      return Expr::sum(std::move(terms));
    }
    case Kind::Product: {
      auto ops = e.operands();
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < ops.size(); ++i) {
        if (!ops[i].depends_on(k)) continue;
        std::vector<Expr> fs;
        fs.reserve(ops.size());
        for (std::size_t j = 0; j < ops.size(); ++j) fs.push_back(i == j ? derive(ops[j], k) : ops[j]);
        terms.push_back(Expr::product(std::move(fs)));
      }
      return Expr::sum(std::move(terms));
    }
    case Kind::Power: {
      const Expr& b = e.operand(0);
      int n = e.exponent();
      return Expr::product({Expr::constant(Number(n)), Expr::power(b, n - 1), derive(b, k)});
    }
    case Kind::Sin:
      return cos(e.operand(0)) * derive(e.operand(0), k);
    case Kind::Cos:
      return Expr::product({Expr::constant(Number(-1)), sin(e.operand(0)), derive(e.operand(0), k)});
    case Kind::Sec:
      return Expr::product({sin(e.operand(0)), Expr::power(sec(e.operand(0)), 2), derive(e.operand(0), k)});
    case Kind::Exp:
      return e * derive(e.operand(0), k);
    case Kind::Log:
      return Expr::power(e.operand(0), -1) * derive(e.operand(0), k);
    case Kind::Const:
      break;
  }
  return Expr();
}

}  // namespace

Expr differentiate(const Expr& e, int component) {
  if (component < 0) throw Error(ErrorCode::InvalidArgument, "negative component index");
  if (!e.depends_on(component)) return Expr();
  return simplify(derive(e, component));
}

// ---------------------------------------------------------------------------
// Antidifferentiation over {polynomials, sin, cos, sec, exp, log} of affine
// arguments.

namespace {

[[noreturn]] void not_closed_form(const std::string& what) {
  throw Error(ErrorCode::NotClosedForm, "no closed-form antiderivative: " + what);
}

// Slope a when u = a*z_k + (terms free of z_k), a a nonzero constant.
std::optional<Number> affine_slope(const Expr& u, int k) {
  Expr du = differentiate(u, k);
  if (du.kind() == Kind::Const && !du.value().is_zero()) return du.value();
  return std::nullopt;
}

Expr integrate(const Expr& e, int k);

Expr integrate_factor(const Expr& f, int k) {
  switch (f.kind()) {
    case Kind::Var:
      return Expr::product({Expr::constant(Number::ratio(1, 2)), Expr::power(f, 2)});
    case Kind::Power: {
      const Expr& b = f.operand(0);
      auto a = affine_slope(b, k);
      if (!a) not_closed_form("power of a non-affine argument");
      int n = f.exponent();
      if (n == -1) return Expr::constant(Number(1) / *a) * log(b);
      return Expr::product({Expr::constant(Number(1) / (*a * Number(n + 1))), Expr::power(b, n + 1)});
    }
    case Kind::Sin:
    case Kind::Cos:
    case Kind::Sec:
    case Kind::Exp:
    case Kind::Log: {
      const Expr& u = f.operand(0);
      auto a = affine_slope(u, k);
      if (!a) not_closed_form("function of a non-affine argument");
      Expr inv = Expr::constant(Number(1) / *a);
      switch (f.kind()) {
        case Kind::Sin: return Expr::product({Expr::constant(-(Number(1) / *a)), cos(u)});
        case Kind::Cos: return inv * sin(u);
        case Kind::Exp: return inv * f;
        case Kind::Sec:
          // log(sec u + tan u), tan written as sin * sec; positive on the
          // principal window |u| < pi/2.
          return inv * log(sec(u) + sin(u) * sec(u));
        default:  // Log
          return inv * (u * log(u) - u);
      }
    }
    case Kind::Sum:
      return integrate(f, k);
    default:
      not_closed_form("unsupported factor");
  }
}

Expr integrate(const Expr& e, int k) {
  if (!e.depends_on(k)) return e * Expr::var(k);
  switch (e.kind()) {
    case Kind::Sum: {
      std::vector<Expr> terms;
      for (const auto& t : e.operands()) terms.push_back(integrate(t, k));
      return Expr::sum(std::move(terms));
    }
    case Kind::Product: {
      std::vector<Expr> constant_part;
      std::vector<Expr> dependent;
      for (const auto& f : e.operands()) (f.depends_on(k) ? dependent : constant_part).push_back(f);
      if (dependent.size() != 1) not_closed_form("product of several factors in the integration variable");
      constant_part.push_back(integrate_factor(dependent.front(), k));
      return Expr::product(std::move(constant_part));
    }
    default:
      return integrate_factor(e, k);
  }
}

}  // namespace

Expr antiderivative(const Expr& e, int component) {
  if (component < 0) throw Error(ErrorCode::InvalidArgument, "negative component index");
  return simplify(integrate(simplify(e), component));
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

int driving_component(const Expr& e) { return e.free_vars().empty() ? -1 : e.free_vars().front(); }

double eval(const Expr& e, std::span<const double> z) {
  switch (e.kind()) {
    case Kind::Const:
      return e.value().to_double();
    case Kind::Var: {
      auto k = static_cast<std::size_t>(e.component());
      if (k >= z.size()) throw Error(ErrorCode::InvalidArgument, "point has no entry for a free variable");
      return z[k];
    }
    case Kind::Sum: {
      double s = 0.0;
      for (const auto& t : e.operands()) s += eval(t, z);
      return s;
    }
    case Kind::Product: {
      double p = 1.0;
      for (const auto& f : e.operands()) p *= eval(f, z);
      return p;
    }
    case Kind::Power: {
      double b = eval(e.operand(0), z);
      int n = e.exponent();
      if (n < 0 && b == 0.0) throw DomainError(driving_component(e), b, "negative power of zero");
      return std::pow(b, n);
    }
    default: {
      double x = eval(e.operand(0), z);
      double r = apply_function(e.kind(), x, driving_component(e));
      if (!std::isfinite(r)) throw DomainError(driving_component(e), x, "non-finite function value");
      return r;
    }
  }
}

std::optional<Rational> eval_exact(const Expr& e, std::span<const Rational> z) {
  switch (e.kind()) {
    case Kind::Const:
      if (!e.value().is_exact()) return std::nullopt;
      return e.value().rational();
    case Kind::Var: {
      auto k = static_cast<std::size_t>(e.component());
      if (k >= z.size()) throw Error(ErrorCode::InvalidArgument, "point has no entry for a free variable");
      return z[k];
    }
    case Kind::Sum: {
      Rational s = 0;
      for (const auto& t : e.operands()) {
        auto v = eval_exact(t, z);
        if (!v) return std::nullopt;
        s += *v;
      }
      return s;
    }
    case Kind::Product: {
      Rational p = 1;
      for (const auto& f : e.operands()) {
        auto v = eval_exact(f, z);
        if (!v) return std::nullopt;
        p *= *v;
      }
      return p;
    }
    case Kind::Power: {
      auto b = eval_exact(e.operand(0), z);
      if (!b) return std::nullopt;
      if (e.exponent() < 0 && *b == 0) return std::nullopt;
      return pow(Number(*b), e.exponent()).rational();
    }
    default: {
      auto x = eval_exact(e.operand(0), z);
      if (!x) return std::nullopt;
      auto v = exact_special_value(e.kind(), *x);
      if (!v) return std::nullopt;
      return v->rational();
    }
  }
}

}  // namespace

double evaluate(const Expr& e, std::span<const double> point) {
  double r = eval(e, point);
  if (!std::isfinite(r)) throw DomainError(driving_component(e), r, "non-finite result");
  return r;
}

std::optional<Rational> evaluate_exact(const Expr& e, std::span<const Rational> point) {
  return eval_exact(e, point);
}

Expr substitute(const Expr& e, int component, const Expr& replacement) {
  if (!e.depends_on(component)) return e;
  switch (e.kind()) {
    case Kind::Var:
      return replacement;
    case Kind::Power:
      return Expr::power(substitute(e.operand(0), component, replacement), e.exponent());
    case Kind::Sum:
    case Kind::Product: {
      std::vector<Expr> ops;
      for (const auto& op : e.operands()) ops.push_back(substitute(op, component, replacement));
      return e.kind() == Kind::Sum ? Expr::sum(std::move(ops)) : Expr::product(std::move(ops));
    }
    default:
      return Expr::function(e.kind(), substitute(e.operand(0), component, replacement));
  }
}

}  // namespace liesynth
