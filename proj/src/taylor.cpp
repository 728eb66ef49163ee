#include "liesynth/taylor.hpp"

#include "liesynth/error.hpp"

#include <functional>

namespace liesynth {

int total_degree(const MultiIndex& alpha) {
  int d = 0;
  for (const auto& [k, a] : alpha) d += a;
  return d;
}

Expr Monomial::to_expr(std::span<const double> center) const {
  std::vector<Expr> factors{Expr::constant(coefficient)};
  for (const auto& [k, a] : powers) {
    double c = static_cast<std::size_t>(k) < center.size() ? center[k] : 0.0;
    Expr base = c == 0.0 ? Expr::var(k) : Expr::var(k) - Expr::constant(Number(exact_rational(c)));
    factors.push_back(Expr::power(base, a));
  }
  return Expr::product(std::move(factors));
}

namespace {

Rational factorial(int n) {
  Rational r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Multi-indices over `vars` of exactly total degree d; earlier variables get
// the higher powers first.
void enumerate(const std::vector<int>& vars, std::size_t pos, int remaining, MultiIndex& current,
               std::vector<MultiIndex>& out) {
  if (pos + 1 == vars.size()) {
    MultiIndex m = current;
    if (remaining > 0) m.emplace_back(vars[pos], remaining);
    out.push_back(std::move(m));
    return;
  }
  for (int a = remaining; a >= 0; --a) {
    if (a > 0) current.emplace_back(vars[pos], a);
    enumerate(vars, pos + 1, remaining - a, current, out);
    if (a > 0) current.pop_back();
  }
}

}  // namespace

std::vector<Monomial> taylor_monomials(const Expr& e, std::span<const double> center, int degree) {
  if (degree < 0) throw Error(ErrorCode::InvalidArgument, "negative Taylor degree");
  const std::vector<int>& vars = e.free_vars();
  for (int k : vars) {
    if (static_cast<std::size_t>(k) >= center.size()) {
      throw Error(ErrorCode::InvalidArgument, "center has no entry for a free variable");
    }
  }
  (void)evaluate(e, center);  // DomainError when the center is singular

  std::vector<Rational> exact_center;
  exact_center.reserve(center.size());
  for (double c : center) exact_center.push_back(exact_rational(c));

  // Derivatives are built incrementally: D(alpha) = d/dz_k D(alpha - e_k)
  // with k the last variable of alpha, so each is one differentiation away.
  std::map<MultiIndex, Expr> derivative;
  derivative[{}] = simplify(e);

  std::vector<Monomial> out;
  for (int d = 0; d <= degree; ++d) {
    std::vector<MultiIndex> level;
    if (vars.empty()) {
      if (d == 0) level.push_back({});
    } else {
      MultiIndex scratch;
      enumerate(vars, 0, d, scratch, level);
    }
    for (const auto& alpha : level) {
      if (!derivative.count(alpha)) {
        MultiIndex parent = alpha;
        int k = parent.back().first;
        if (--parent.back().second == 0) parent.pop_back();
        derivative[alpha] = differentiate(derivative.at(parent), k);
      }
      const Expr& dexpr = derivative.at(alpha);
      if (dexpr.is_zero()) continue;
      Rational denom = 1;
      for (const auto& [k, a] : alpha) denom *= factorial(a);
      Number coefficient;
      if (auto exact = evaluate_exact(dexpr, exact_center)) {
        coefficient = Number(Rational(*exact / denom));
      } else {
        coefficient = Number(evaluate(dexpr, center) / denom.convert_to<double>());
      }
      if (coefficient.is_zero()) continue;
      out.push_back({coefficient, alpha});
    }
  }
  return out;
}

Expr monomial_sum(std::span<const Monomial> monomials, std::span<const double> center) {
  std::vector<Expr> terms;
  terms.reserve(monomials.size());
  for (const auto& m : monomials) terms.push_back(m.to_expr(center));
  return Expr::sum(std::move(terms));
}

namespace {

Polynomial multiply(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      std::map<int, int> merged;
      for (const auto& [k, p] : ma) merged[k] += p;
      for (const auto& [k, p] : mb) merged[k] += p;
      MultiIndex m(merged.begin(), merged.end());
      out[m] += ca * cb;
    }
  }
  std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
  return out;
}

}  // namespace

std::optional<Polynomial> to_polynomial(const Expr& e) {
  switch (e.kind()) {
    case Kind::Const: {
      if (!e.value().is_exact()) return std::nullopt;
      Polynomial p;
      if (!e.value().is_zero()) p[{}] = e.value().rational();
      return p;
    }
    case Kind::Var:
      return Polynomial{{MultiIndex{{e.component(), 1}}, Rational(1)}};
    case Kind::Sum: {
      Polynomial out;
      for (const auto& t : e.operands()) {
        auto p = to_polynomial(t);
        if (!p) return std::nullopt;
        for (const auto& [m, c] : *p) out[m] += c;
      }
      std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
      return out;
    }
    case Kind::Product: {
      Polynomial out{{MultiIndex{}, Rational(1)}};
      for (const auto& f : e.operands()) {
        auto p = to_polynomial(f);
        if (!p) return std::nullopt;
        out = multiply(out, *p);
      }
      return out;
    }
    case Kind::Power: {
      if (e.exponent() < 0) return std::nullopt;
      auto base = to_polynomial(e.operand(0));
      if (!base) return std::nullopt;
      Polynomial out{{MultiIndex{}, Rational(1)}};
      for (int i = 0; i < e.exponent(); ++i) out = multiply(out, *base);
      return out;
    }
    default:
      return std::nullopt;
  }
}

Expr polynomial_expr(const Polynomial& p) {
  std::vector<Expr> terms;
  for (const auto& [m, c] : p) {
    std::vector<Expr> fs{Expr::constant(Number(c))};
    for (const auto& [k, a] : m) fs.push_back(a == 1 ? Expr::var(k) : Expr::power(Expr::var(k), a));
    terms.push_back(Expr::product(std::move(fs)));
  }
  return simplify(Expr::sum(std::move(terms)));
}

Expr expand_polynomial(const Expr& e) {
  Expr s = simplify(e);
  if (auto p = to_polynomial(s)) return polynomial_expr(*p);
  return s;
}

}  // namespace liesynth
