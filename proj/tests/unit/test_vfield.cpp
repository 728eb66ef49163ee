#include "doctest.h"

#include "liesynth/bracket_tree.hpp"
#include "liesynth/error.hpp"
#include "liesynth/sexpr.hpp"
#include "liesynth/vector_field.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace liesynth;
using testing::as_field_function;
using testing::bracket_fd;
using testing::close_rel;

namespace {

const Expr z1 = var(0);
const Expr z2 = var(1);
const Expr z3 = var(2);

Expr half() { return constant(Number::ratio(1, 2)); }

// Five-node example pair with phi_1 = z2, phi_2 = sin z3:
// h_{3,2} = e_2 sin z3, h_{2,1} = e_1 z2^2 / 2 (antiderivative of phi_1).
SeparableField h32() { return SeparableField(1, 2, sin(z3)); }
SeparableField h21() { return SeparableField(0, 1, half() * pow(z2, 2)); }

const std::vector<double> p12345{1, 2, 3, 4, 5};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("lie_bracket: [f, f] is zero") {
  Rng rng(1);
  testing::ExprGenerator gen(rng, 5);
  for (int t = 0; t < 20; ++t) {
    auto f = testing::random_polynomial_field(rng, gen, 5, 3);
    CHECK(lie_bracket(f, f).is_zero());
  }
  VectorField g = VectorField::unit(5, 1, sin(z3));
  CHECK(lie_bracket(g, g).is_zero());
}

TEST_CASE("lie_bracket: example pair") {
  VectorField f1 = h32().to_vector_field(5);
  VectorField f2 = h21().to_vector_field(5);
  VectorField b = lie_bracket(f1, f2);
  CHECK(b == VectorField::unit(5, 0, z2 * sin(z3)));

  auto sym = b.evaluate(p12345);
  auto fd = bracket_fd(as_field_function(f1), as_field_function(f2), p12345);
  auto num = lie_bracket_numeric(f1, f2, p12345);
  CHECK(sym[0] == doctest::Approx(2 * std::sin(3.0)).epsilon(1e-12));
  CHECK(sym[0] == doctest::Approx(0.28224).epsilon(1e-4));
  for (int i = 0; i < 5; ++i) {
    CHECK(close_rel(sym[static_cast<std::size_t>(i)], fd[static_cast<std::size_t>(i)], 1e-4));
    CHECK(close_rel(sym[static_cast<std::size_t>(i)], num[static_cast<std::size_t>(i)], 1e-4));
    if (i > 0) CHECK(sym[static_cast<std::size_t>(i)] == 0.0);
  }
}

TEST_CASE("evaluate_tree: leaf and the example tree") {
  BracketTree leaf = BracketTree::leaf(h21());
  CHECK(leaf.depth() == 0);
  CHECK(evaluate_tree(leaf, 5, p12345) == h21().to_vector_field(5).evaluate(p12345));

  BracketTree t = BracketTree::right_nested({h21(), h32()});
  CHECK(t.depth() == 1);
  CHECK(t.left().field().target == 1);
  auto v = evaluate_tree(t, 5, p12345);
  auto oracle = bracket_fd(as_field_function(h32().to_vector_field(5)), as_field_function(h21().to_vector_field(5)), p12345);
  CHECK(max_abs_diff(v, oracle) < 1e-6);
  CHECK(v[0] == doctest::Approx(0.28224).epsilon(1e-4));
}

TEST_CASE("right_nested and left_nested shapes") {
  std::vector<SeparableField> links{SeparableField(0, 1, z2), SeparableField(1, 2, z3), SeparableField(2, 3, var(3))};
  BracketTree r = BracketTree::right_nested(links);
  // [h_43, [h_32, h_21]]
  CHECK(r.left().is_leaf());
  CHECK(r.left().field().target == 2);
  CHECK(r.right().left().field().target == 1);
  CHECK(r.right().right().field().target == 0);
  CHECK(r.depth() == 2);
  CHECK(r.leaves().size() == 3);
  CHECK(r.leaves().front().target == 2);

  std::vector<BracketTree> psi{BracketTree::leaf(links[0]), BracketTree::leaf(links[1]), BracketTree::leaf(links[2])};
  BracketTree l = BracketTree::left_nested(psi);
  // [[psi_3, psi_2], psi_1]
  CHECK(l.right().field().target == 0);
  CHECK(l.left().left().field().target == 2);
  CHECK(l.nesting() == Nesting::Left);
  CHECK_THROWS_AS(BracketTree::right_nested({}), Error);
}

TEST_CASE("property: antisymmetry, exact and numeric") {
  Rng rng(3);
  testing::ExprGenerator gen(rng, 5);
  for (int t = 0; t < 20; ++t) {
    auto f = testing::random_polynomial_field(rng, gen, 5, 3);
    auto g = testing::random_polynomial_field(rng, gen, 5, 3);
    VectorField fg = lie_bracket(f, g);
    VectorField gf = lie_bracket(g, f);
    CHECK((fg + gf).is_zero());
    auto p = testing::uniform_point(rng, 5, -1, 1);
    auto a = fg.evaluate(p);
    auto b = gf.evaluate(p);
    for (std::size_t i = 0; i < 5; ++i) CHECK(a[i] == -b[i]);
  }
}

TEST_CASE("property: bilinearity over constants") {
  Rng rng(5);
  testing::ExprGenerator gen(rng, 5);
  for (int t = 0; t < 20; ++t) {
    auto f = testing::random_polynomial_field(rng, gen, 5, 2);
    auto g = testing::random_polynomial_field(rng, gen, 5, 2);
    auto h = testing::random_polynomial_field(rng, gen, 5, 2);
    Number a = Number::ratio(static_cast<long long>(rng.below(7)) - 3, 2);
    for (int s = 0; s < 8; ++s) {
      auto p = testing::uniform_point(rng, 5, -1, 1);
      auto lhs = lie_bracket(f.scaled(a), g).evaluate(p);
      auto rhs = lie_bracket(f, g).evaluate(p);
      auto sum = lie_bracket(f + h, g).evaluate(p);
      auto parts = (lie_bracket(f, g) + lie_bracket(h, g)).evaluate(p);
      for (std::size_t i = 0; i < 5; ++i) {
        CHECK(close_rel(lhs[i], a.to_double() * rhs[i], 1e-9));
        CHECK(close_rel(sum[i], parts[i], 1e-9));
      }
    }
  }
}

TEST_CASE("property: Jacobi identity on polynomial fields in R^5") {
  Rng rng(7);
  testing::ExprGenerator gen(rng, 5);
  for (int t = 0; t < 20; ++t) {
    auto f = testing::random_polynomial_field(rng, gen, 5, 3);
    auto g = testing::random_polynomial_field(rng, gen, 5, 3);
    auto h = testing::random_polynomial_field(rng, gen, 5, 3);
    VectorField j = lie_bracket(f, lie_bracket(g, h)) + lie_bracket(g, lie_bracket(h, f)) + lie_bracket(h, lie_bracket(f, g));
    CHECK(j.is_zero());
    for (int s = 0; s < 8; ++s) {
      auto p = testing::uniform_point(rng, 5, -1, 1);
      auto a = lie_bracket(f, lie_bracket(g, h)).evaluate(p);
      auto b = lie_bracket(g, lie_bracket(h, f)).evaluate(p);
      auto c = lie_bracket(h, lie_bracket(f, g)).evaluate(p);
      for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(a[i] + b[i] + c[i]) <= 1e-6);
    }
  }
}

TEST_CASE("property: symbolic bracket agrees with finite differences") {
  Rng rng(2);
  testing::ExprGenerator gen(rng, 5);
  for (int t = 0; t < 40; ++t) {
    VectorField f(5);
    VectorField g(5);
    if (t % 2 == 0) {
      f = testing::random_polynomial_field(rng, gen, 5, 3);
      g = testing::random_polynomial_field(rng, gen, 5, 3);
    } else {
      for (int c = 0; c < 3; ++c) {
        f.add(static_cast<int>(rng.below(5)), gen.generate(3));
        g.add(static_cast<int>(rng.below(5)), gen.generate(3));
      }
    }
    VectorField b = lie_bracket(f, g);
    for (int s = 0; s < 32; ++s) {
      auto p = testing::uniform_point(rng, 5, -1, 1);
      auto sym = b.evaluate(p);
      auto fd = bracket_fd(as_field_function(f), as_field_function(g), p);
      auto num = lie_bracket_numeric(f, g, p);
      for (std::size_t i = 0; i < 5; ++i) {
        CHECK(close_rel(sym[i], fd[i], 1e-4));
        CHECK(close_rel(sym[i], num[i], 1e-4));
      }
    }
  }
}

TEST_CASE("vector field: zero entries are dropped") {
  VectorField f(3);
  f.set(1, z1 - z1);
  CHECK(f.is_zero());
  f.add(2, z1);
  f.add(2, -z1);
  CHECK(f.is_zero());
  CHECK_THROWS_AS(f.set(3, z1), Error);
  CHECK_THROWS_AS(f.set(0, var(5)), Error);
}

TEST_CASE("separable field: factorization matches its product") {
  SeparableField s(0, 1, cos(z1), sin(z2));
  REQUIRE(s.factors.has_value());
  Rng rng(4);
  for (int i = 0; i < 32; ++i) {
    auto p = testing::uniform_point(rng, 2, -2, 2);
    CHECK(std::abs(evaluate(s.f, p) - evaluate(s.factors->first, p) * evaluate(s.factors->second, p)) <= 1e-10);
  }
}

TEST_CASE("admissibility of leaves and trees") {
  CommGraph g(5, {{0, 1}, {1, 2}, {0, 3}, {3, 4}});
  auto m = AgentIndexMap::identity(5);
  CHECK(is_admissible_leaf(g, m, h21()));
  CHECK(is_admissible_leaf(g, m, h32()));
  CHECK_FALSE(is_admissible_leaf(g, m, SeparableField(0, 2, z3)));
  // f reading a third agent's variable is rejected even if (target, source) is an edge
  CHECK_FALSE(is_admissible_leaf(g, m, SeparableField(0, 1, z2 * z3)));
  CHECK(all_leaves_admissible(g, m, BracketTree::right_nested({h21(), h32()})));
}

TEST_CASE("JSON round trips") {
  VectorField f(5);
  f.set(0, z2 * sin(z3));
  f.set(4, constant(Number::ratio(1, 3)));
  const std::string text = to_json(f);
  CHECK(text == R"J({"dim":5,"components":{"1":"(* (var 2) (sin (var 3)))","5":"1/3"}})J");
  CHECK(vector_field_from_json(text) == f);

  BracketTree t = BracketTree::right_nested({h21(), SeparableField(1, 2, constant(Number(1)), sin(z3))});
  BracketTree back = bracket_tree_from_json(to_json(t));
  CHECK(to_json(back) == to_json(t));
  CHECK(back.left().field().factors.has_value());
  CHECK(to_vector_field(back, 5) == to_vector_field(t, 5));

  for (const char* bad : {"{", R"J({"dim":2,"components":{"3":"1"}})J", R"J({"dim":2,"components":{"1":"(var 3)"}})J",
                          R"J({"components":{}})J"}) {
    try {
      (void)vector_field_from_json(bad);
      FAIL("expected ParseError for " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  }
  CHECK_THROWS_AS((void)bracket_tree_from_json(R"J({"leaf":{"j":1}})J"), Error);
}
