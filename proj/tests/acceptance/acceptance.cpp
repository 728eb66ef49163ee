// Standalone acceptance runner: one PASS/FAIL line per criterion.

#include "liesynth/approx.hpp"
#include "liesynth/distopt.hpp"
#include "liesynth/error.hpp"
#include "liesynth/rewrite.hpp"
#include "rewrite_support.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace liesynth;

namespace {

Expr z(int one_based) { return var(one_based - 1); }
Expr c(long long n, long long d = 1) { return constant(Number::ratio(n, d)); }

double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

double max_rel_err(const VectorField& a, const VectorField& b, const Domain& dom, Rng& rng, int samples,
                   double box = 2.0) {
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    auto p = dom.sample(rng, box);
    auto va = a.evaluate(p);
    auto vb = b.evaluate(p);
    for (std::size_t i = 0; i < va.size(); ++i) worst = std::max(worst, rel_err(va[i], vb[i]));
  }
  return worst;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates failed sub-checks so a criterion reports the first reason.
struct Checks {
  bool ok = true;
  std::string why;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      why = what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome finish(const Checks& ck, const std::string& summary) { return {ck.ok, ck.ok ? summary : ck.why}; }

Outcome chain_identity() {
  Checks ck;
  Rng rng(2024);
  double worst = 0.0;
  int stray = 0;
  for (int t = 0; t < 50; ++t) {
    const int r = 2 + t % 4;
    PathChain ch = testing::random_generic_chain(rng, r);
    validate_chain(testing::line_graph(r), AgentIndexMap::identity(r), ch);
    BracketTree tree = chain_tree(ch);
    VectorField rhs = chain_bracket_formula(ch, r);
    for (int s = 0; s < 32; ++s) {
      auto p = Domain(r).sample(rng, 1.0);
      auto a = evaluate_tree(tree, r, p);
      auto b = rhs.evaluate(p);
      worst = std::max(worst, rel_err(a[0], b[0]));
      for (int i = 1; i < r; ++i) stray += a[static_cast<std::size_t>(i)] != 0.0;
    }
  }
  ck.require(worst <= 1e-6, "max relative error " + fmt(worst) + " > 1e-6");
  ck.require(stray == 0, std::to_string(stray) + " nonzero off-target components");
  return finish(ck, "50 chains x 32 points, max rel err " + fmt(worst));
}

Outcome special_case_syntheses() {
  Checks ck;
  Rng rng(7);
  double worst = 0.0;
  int syntheses = 0;
  for (int t = 0; t < 20; ++t) {
    const int n = 3 + static_cast<int>(rng.below(4));
    CommGraph g = testing::line_graph(n);
    auto m = AgentIndexMap::identity(n);
    Expr f1 = testing::random_basis_function(rng, 0);
    Expr f2 = testing::random_basis_function(rng, n - 1);
    for (bool trig : {false, true}) {
      TrigParams tp{0.25 + 0.25 * static_cast<double>(rng.below(3)), static_cast<double>(rng.below(3)) - 1.0};
      RewriteResult r = trig ? synth_trig(g, m, 0, f1, f2, tp) : synth_simple(g, m, 0, f1, f2);
      ++syntheses;
      ck.require(r.trees.size() == 1, "expected one tree");
      for (const auto& tree : r.trees) ck.require(all_leaves_admissible(g, m, tree), "non-admissible leaf");
      PathChain ch = trig ? trig_chain(m, r.paths[0], r.paths[0], f1, f2, tp)
                          : simple_chain(m, r.paths[0], r.paths[0], f1, f2);
      auto cc = check_cancellation_constraint(ch, r.validity, rng);
      ck.require(cc.ok, "constraint product violated at link " + std::to_string(cc.link));
      worst = std::max(worst, max_rel_err(r.sum_of_trees(), VectorField::unit(n, 0, f1 * f2), r.validity, rng, 32));
    }
  }
  ck.require(worst <= 1e-6, "max relative error " + fmt(worst) + " > 1e-6");
  return finish(ck, std::to_string(syntheses) + " syntheses, max rel err " + fmt(worst));
}

Outcome product_syntheses() {
  Checks ck;
  double worst = 0.0;
  {
    CommGraph g = testing::example_graph();
    auto m = AgentIndexMap::identity(5);
    RewriteResult r = synth_product(g, m, 0, c(1), {{2, sin(z(3))}, {4, cos(z(5))}});
    ck.require(r.trees.size() == 1 && r.trees.front().depth() == 2, "example instance has the wrong shape");
    ck.require(all_leaves_admissible(g, m, r.trees.front()), "example instance has a non-admissible leaf");
    auto v = evaluate_tree(r.trees.front(), 5, std::vector<double>{1, 2, 3, 4, 5});
    worst = std::max(worst, rel_err(v[0], std::sin(3.0) * std::cos(5.0)));
    Rng rng(1);
    worst = std::max(worst, max_rel_err(r.sum_of_trees(), VectorField::unit(5, 0, sin(z(3)) * cos(z(5))), Domain(5),
                                        rng, 32));
  }
  CommGraph g(6, {{0, 1}, {1, 2}, {0, 3}, {3, 4}, {4, 5}});
  auto m = AgentIndexMap::identity(6);
  Rng rng(99);
  for (int t = 0; t < 20; ++t) {
    const int mcount = 2 + t % 3;
    std::vector<int> pool{1, 2, 3, 4, 5};
    std::vector<ProductFactor> fs;
    std::vector<Expr> all;
    Expr eta0 = rng.below(2) == 0 ? c(1) : testing::random_basis_function(rng, 0);
    all.push_back(eta0);
    for (int k = 0; k < mcount; ++k) {
      const std::size_t pick = rng.below(pool.size());
      const int comp = pool[pick];
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
      fs.push_back({comp, testing::random_basis_function(rng, comp)});
      all.push_back(fs.back().eta);
    }
    RewriteResult r = synth_product(g, m, 0, eta0, fs);
    for (const auto& tree : r.trees) ck.require(all_leaves_admissible(g, m, tree), "non-admissible leaf");
    // expansion to leaves vs the product formed independently of the synthesizer
    VectorField expanded(6);
    for (const auto& tree : r.trees) expanded = expanded + to_vector_field(tree, 6);
    worst = std::max(worst, max_rel_err(expanded, VectorField::unit(6, 0, Expr::product(all)), Domain(6), rng, 16, 1.0));
  }
  ck.require(worst <= 1e-6, "max relative error " + fmt(worst) + " > 1e-6");
  return finish(ck, "example instance + 20 random products, max rel err " + fmt(worst));
}

Outcome bracket_algebra() {
  Checks ck;
  Rng rng(11);
  testing::ExprGenerator gen(rng, 5);
  double jacobi = 0.0, fd = 0.0;
  bool antisym = true;
  for (int t = 0; t < 20; ++t) {
    auto f = testing::random_polynomial_field(rng, gen, 5, 3);
    auto g = testing::random_polynomial_field(rng, gen, 5, 3);
    auto h = testing::random_polynomial_field(rng, gen, 5, 3);
    VectorField fg = lie_bracket(f, g);
    antisym = antisym && (fg + lie_bracket(g, f)).is_zero();
    VectorField a = lie_bracket(f, lie_bracket(g, h));
    VectorField b = lie_bracket(g, lie_bracket(h, f));
    VectorField cc = lie_bracket(h, lie_bracket(f, g));
    for (int s = 0; s < 8; ++s) {
      auto p = testing::uniform_point(rng, 5, -1, 1);
      auto va = a.evaluate(p), vb = b.evaluate(p), vc = cc.evaluate(p);
      auto sym = fg.evaluate(p);
      auto num = testing::bracket_fd(testing::as_field_function(f), testing::as_field_function(g), p);
      for (std::size_t i = 0; i < 5; ++i) {
        jacobi = std::max(jacobi, std::abs(va[i] + vb[i] + vc[i]));
        fd = std::max(fd, rel_err(sym[i], num[i]));
      }
    }
  }
  ck.require(antisym, "antisymmetry not exact");
  ck.require(jacobi <= 1e-6, "Jacobi residual " + fmt(jacobi) + " > 1e-6");
  ck.require(fd <= 1e-4, "symbolic vs finite-difference " + fmt(fd) + " > 1e-4");
  return finish(ck, "antisymmetry exact, Jacobi " + fmt(jacobi) + ", FD rel " + fmt(fd));
}

Outcome averaging_convergence() {
  Checks ck;
  const std::vector<double> omegas{50.0, 200.0, 800.0};
  BracketTree canonical =
      BracketTree::bracket(BracketTree::leaf(SeparableField(0, 0, c(1))), BracketTree::leaf(SeparableField(1, 0, z(1))));
  BracketTree example = BracketTree::bracket(BracketTree::leaf(SeparableField(1, 2, sin(z(3)))),
                                             BracketTree::leaf(SeparableField(0, 1, c(1, 2) * pow(z(2), 2))));
  std::string summary;
  for (const auto& [name, sys, z0] : std::vector<std::tuple<std::string, ApproxSystem, std::vector<double>>>{
           {"canonical", ApproxSystem::from_tree(canonical, 2), {0.0, 0.0}},
           {"example", ApproxSystem::from_tree(example, 5), {1, 2, 3, 4, 5}}}) {
    auto pts = convergence_sweep(sys, z0, 2.0, omegas, {}, 3);
    ck.require(pts.size() == 3, name + ": sweep size");
    if (pts.size() != 3) continue;
    ck.require(pts[1].sup_error < pts[0].sup_error && pts[2].sup_error < pts[1].sup_error,
               name + ": errors not strictly decreasing");
    ck.require(pts[2].sup_error <= 0.5 * pts[0].sup_error, name + ": err(800) > 0.5 err(50)");
    summary += (summary.empty() ? "" : ", ") + name + " " + fmt(pts[0].sup_error) + " > " + fmt(pts[1].sup_error) +
               " > " + fmt(pts[2].sup_error);
  }
  return finish(ck, summary);
}

std::string data_dir() { return LIESYNTH_DATA_DIR; }

Outcome distributed_demo() {
  Checks ck;
  SaddleProblem p = load_problem(data_dir() + "/demo_problem.toml");
  KKTPoint k = solve_kkt_oracle(p);
  ck.require(k.residual <= 1e-9, "KKT residual " + fmt(k.residual) + " > 1e-9");
  // independent oracle: inactive bound, x3^3 + 2.5 x3 - 1 = 0 by bisection
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * mid * mid + 2.5 * mid - 1.0 < 0 ? lo : hi) = mid;
  }
  const std::vector<double> expected{1.0 - lo, -0.5 * lo, lo};
  for (std::size_t i = 0; i < 3; ++i) ck.require(std::abs(k.x[i] - expected[i]) <= 1e-9, "oracle x* disagrees");
  DemoReport r = run_demo(p);
  ck.require(r.error <= 0.05 * (1.0 + [&] {
                          double s = 0;
                          for (double v : r.x_star) s += v * v;
                          return std::sqrt(s);
                        }()),
             "|x_bar - x*| = " + fmt(r.error) + " exceeds 0.05 (1 + |x*|)");
  ck.require(r.ideal_error <= 1e-3, "ideal flow error " + fmt(r.ideal_error) + " > 1e-3");
  return finish(ck, "|x_bar - x*| " + fmt(r.error) + " (tol " + fmt(r.tolerance) + "), ideal " + fmt(r.ideal_error) +
                        ", KKT residual " + fmt(k.residual));
}

Outcome taylor_rewriting() {
  Checks ck;
  auto m = AgentIndexMap::identity(3);
  CommGraph g = testing::cycle_graph(3);
  RewriteOptions o;
  o.degree = 4;
  o.box = 0.5;
  RewriteResult r = synth_taylor(g, m, 0, exp(z(3)), o);
  ck.require(r.residual.has_value() && *r.residual <= 5e-4, "reported residual above 5e-4");
  for (const auto& tree : r.trees) ck.require(all_leaves_admissible(g, m, tree), "non-admissible leaf");
  // independent resampling of |sum of trees - exp(z3)| on |z3| <= 0.5
  VectorField sum = r.sum_of_trees();
  Rng rng(5);
  double sampled = 0.0;
  for (int s = 0; s < 256; ++s) {
    std::vector<double> p{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    sampled = std::max(sampled, std::abs(sum.evaluate(p)[0] - std::exp(p[2])));
  }
  ck.require(sampled <= 5e-4, "resampled residual " + fmt(sampled) + " > 5e-4");
  testing::ExprGenerator gen(rng, 3);
  int exact = 0;
  for (int t = 0; t < 10; ++t) {
    RewriteOptions po;
    po.degree = 3;
    RewriteResult pr = synth_taylor(g, m, 0, gen.polynomial(3, 4), po);
    exact += pr.residual_exact && pr.residual == 0.0;
  }
  ck.require(exact == 10, "polynomial residual not exactly zero");
  return finish(ck, "exp residual " + fmt(*r.residual) + " (resampled " + fmt(sampled) + "), 10 polynomials exact");
}

Outcome trig_boundedness() {
  Checks ck;
  const double alpha = 0.5;
  TrigParams tp{alpha, 0.0};
  auto m = AgentIndexMap::identity(6);
  PathChain ch = trig_chain(m, {0, 1, 2, 3, 4, 5}, {0, 1, 2, 3, 4, 5}, c(1), z(6), tp);
  const double half = std::numbers::pi / (2 * alpha);
  Domain dom = trig_validity(6, ch, tp);
  Rng rng(13);
  int points = 0;
  for (int s = 0; s < 128; ++s) {
    auto p = dom.sample(rng);
    ++points;
    for (int k = 2; k <= 5; k += 2) {
      const auto& link = ch.links[static_cast<std::size_t>(k - 1)];
      const auto& prev = ch.links[static_cast<std::size_t>(k - 2)];
      ck.require(link.factors.has_value() && prev.factors.has_value(), "trig link without factorization");
      if (!link.factors || !prev.factors) continue;
      const double f1 = evaluate(link.factors->first, p);
      const double df2 = evaluate(differentiate(prev.factors->second, k - 1), p);
      ck.require(std::abs(f1) <= 1.0, "even link |f1| > 1 at k = " + std::to_string(k));
      ck.require(std::abs(df2) >= 1.0, "paired derivative < 1 at k = " + std::to_string(k));
    }
  }
  double smallest = 1e300;
  for (int k = 3; k <= 5; k += 2) {
    const auto& link = ch.links[static_cast<std::size_t>(k - 1)];
    if (!link.factors) continue;
    std::vector<double> p(6, 0.0);
    p[static_cast<std::size_t>(k - 1)] = half * (1.0 - 0.099);
    smallest = std::min(smallest, std::abs(evaluate(link.factors->first, p)));
  }
  ck.require(smallest >= 10.0, "sec link only reaches " + fmt(smallest) + " near the window edge");
  return finish(ck, std::to_string(points) + " window points, sec link " + fmt(smallest) + " at 0.099 from the edge");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Checks ck;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("liesynth_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = LIESYNTH_CLI_PATH;
  const std::string cfg = (dir / "run.toml").string();
  std::ofstream(cfg) << "[demo]\nproblem = \"" << data_dir() << "/demo_problem.toml\"\nT = 10.0\nomega = 400.0\n"
                     << "[rewrite]\ngraph = \"" << data_dir() << "/five_node.graph\"\ntarget = \"" << data_dir()
                     << "/five_node_product.json\"\nstrategy = \"taylor\"\nallow-weak = true\ndegree = 2\nseed = 42\n";
  int bytes = 0;
  for (const std::string sub : {"demo", "rewrite"}) {
    std::string outs[2];
    for (int run = 0; run < 2; ++run) {
      const std::string out = (dir / (sub + std::to_string(run))).string();
      const std::string cmd = cli + " --config " + cfg + " " + sub + " --out " + out + " 2>/dev/null";
      const int st = std::system(cmd.c_str());
      ck.require(WIFEXITED(st) && WEXITSTATUS(st) == 0, sub + " run failed");
      outs[run] = slurp(out);
    }
    ck.require(!outs[0].empty() && outs[0] == outs[1], sub + " outputs differ");
    bytes += static_cast<int>(outs[0].size());
  }
  fs::remove_all(dir);
  return finish(ck, "demo and rewrite twice each, " + std::to_string(bytes) + " identical bytes");
}

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "nested chain identity", 30, chain_identity},
      {2, "simple and trig syntheses", 20, special_case_syntheses},
      {3, "product syntheses", 20, product_syntheses},
      {4, "bracket algebra", 0, bracket_algebra},
      {5, "averaging convergence", 120, averaging_convergence},
      {6, "distributed optimization demo", 180, distributed_demo},
      {7, "Taylor rewriting", 0, taylor_rewriting},
      {8, "trig boundedness", 0, trig_boundedness},
      {9, "CLI determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && c.budget_s > 0 && secs > c.budget_s) o = {false, "runtime " + fmt(secs) + " s over budget"};
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail << " [" << fmt(secs)
              << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
