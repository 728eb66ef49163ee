#include "liesynth/distopt.hpp"

#include "json_util.hpp"
#include "liesynth/error.hpp"
#include "liesynth/sampling.hpp"
#include "liesynth/sexpr.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace liesynth {

namespace {

[[noreturn]] void bad_problem(const std::string& msg) { throw Error(ErrorCode::MalformedProblem, msg); }

// Dyadic values with small denominators stay exact, anything else floats.
Expr coefficient(double d) {
  for (int k = 0; k <= 10; ++k) {
    const double s = std::ldexp(d, k);
    if (std::abs(s) < 1e15 && s == std::floor(s)) {
      return Expr::constant(Number::ratio(static_cast<long long>(s), 1LL << k));
    }
  }
  return Expr::constant(Number(d));
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

int SaddleProblem::dimension() const {
  return agents() + static_cast<int>(equalities.size()) + static_cast<int>(inequalities.size());
}

int SaddleProblem::nu_index(int k) const { return agents() + k; }

int SaddleProblem::lambda_index(int k) const { return agents() + static_cast<int>(equalities.size()) + k; }

AgentIndexMap SaddleProblem::index_map() const {
  std::vector<int> owner;
  for (int i = 0; i < agents(); ++i) owner.push_back(i);
  for (const auto& e : equalities) owner.push_back(e.owner);
  for (const auto& c : inequalities) owner.push_back(c.owner);
  return AgentIndexMap::from_owners(agents(), std::move(owner));
}

void SaddleProblem::validate() const {
  const int n = agents();
  if (n < 1) bad_problem("problem needs at least one agent");
  auto check_vars = [n](const Expr& e, const std::string& what) {
    for (int v : e.free_vars()) {
      if (v >= n) bad_problem(what + " reads z" + std::to_string(v + 1) + ", beyond the " + std::to_string(n) + " decision variables");
    }
  };
  for (const auto& t : objective) check_vars(t, "objective term");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) bad_problem("epsilon must be finite and >= 0");
  if (!(box > 0.0)) bad_problem("box must be positive");
  for (std::size_t k = 0; k < equalities.size(); ++k) {
    const auto& e = equalities[k];
    if (static_cast<int>(e.a.size()) != n) {
      bad_problem("equality row " + std::to_string(k + 1) + " has " + std::to_string(e.a.size()) + " coefficients, expected " + std::to_string(n));
    }
    if (e.owner < 0 || e.owner >= n) bad_problem("equality row " + std::to_string(k + 1) + " has a bad owner");
    for (double v : e.a) {
      if (!std::isfinite(v)) bad_problem("non-finite equality coefficient");
    }
    if (!std::isfinite(e.b)) bad_problem("non-finite equality right-hand side");
  }
  for (std::size_t k = 0; k < inequalities.size(); ++k) {
    if (inequalities[k].owner < 0 || inequalities[k].owner >= n) {
      bad_problem("inequality " + std::to_string(k + 1) + " has a bad owner");
    }
    check_vars(inequalities[k].c, "inequality " + std::to_string(k + 1));
  }
}

Expr SaddleProblem::objective_expr() const {
  std::vector<Expr> terms = objective;
  if (epsilon != 0.0) {
    for (int i = 0; i < agents(); ++i) terms.push_back(coefficient(epsilon) * pow(var(i), 2));
  }
  return simplify(Expr::sum(std::move(terms)));
}

Expr SaddleProblem::lagrangian() const {
  std::vector<Expr> terms{objective_expr()};
  for (std::size_t k = 0; k < equalities.size(); ++k) {
    const auto& e = equalities[k];
    std::vector<Expr> row;
    for (int i = 0; i < agents(); ++i) {
      if (e.a[static_cast<std::size_t>(i)] != 0.0) row.push_back(coefficient(e.a[static_cast<std::size_t>(i)]) * var(i));
    }
    row.push_back(coefficient(-e.b));
    terms.push_back(var(nu_index(static_cast<int>(k))) * Expr::sum(std::move(row)));
  }
  for (std::size_t k = 0; k < inequalities.size(); ++k) {
    terms.push_back(var(lambda_index(static_cast<int>(k))) * inequalities[k].c);
  }
  return Expr::sum(std::move(terms));
}

std::vector<double> SaddleProblem::default_start() const {
  std::vector<double> z(static_cast<std::size_t>(dimension()), 0.0);
  for (std::size_t k = 0; k < inequalities.size(); ++k) z[static_cast<std::size_t>(lambda_index(static_cast<int>(k)))] = 1.0;
  return z;
}

VectorField saddle_rhs(const SaddleProblem& p) {
  p.validate();
  const Expr L = p.lagrangian();
  VectorField out(p.dimension());
  for (int i = 0; i < p.agents(); ++i) out.set(i, -differentiate(L, i));
  for (std::size_t k = 0; k < p.equalities.size(); ++k) {
    const int c = p.nu_index(static_cast<int>(k));
    out.set(c, differentiate(L, c));
  }
  for (std::size_t k = 0; k < p.inequalities.size(); ++k) {
    const int c = p.lambda_index(static_cast<int>(k));
    out.set(c, var(c) * differentiate(L, c));
  }
  return out;
}

std::vector<RhsTerm> saddle_terms(const SaddleProblem& p) {
  VectorField f = saddle_rhs(p);
  AgentIndexMap m = p.index_map();
  std::vector<RhsTerm> out;
  for (const auto& [k, e] : f.components()) {
    for (const auto& t : additive_terms(m, e)) out.push_back({k, t});
  }
  return out;
}

std::string_view to_string(TermTag t) {
  switch (t) {
    case TermTag::Admissible: return "admissible";
    case TermTag::Rewritable: return "rewritable";
    case TermTag::Unrewritable: return "unrewritable";
  }
  return "?";
}

int TermClassification::count(TermTag t) const {
  return static_cast<int>(std::count_if(terms.begin(), terms.end(), [t](const auto& c) { return c.tag == t; }));
}

TermClassification classify_terms(const std::vector<RhsTerm>& terms, const CommGraph& g, const AgentIndexMap& m) {
  TermClassification out;
  for (const auto& t : terms) {
    ClassifiedTerm c{t, TermTag::Admissible, {}, {}};
    if (!is_admissible_term(g, m, t.component, t.term)) {
      const int own = m.agent_of(t.component);
      std::vector<int> foreign;
      for (int v : t.term.free_vars()) {
        if (!is_admissible(g, m, t.component, v)) foreign.push_back(m.agent_of(v));
      }
      std::sort(foreign.begin(), foreign.end());
      foreign.erase(std::unique(foreign.begin(), foreign.end()), foreign.end());
      for (int a : foreign) {
        if (auto p = shortest_path(g, own, a)) {
          c.paths.push_back(*p);
        } else {
          c.unreachable.push_back(a);
        }
      }
      // a constant on an agent without out-edges has nothing to ride on
      c.tag = (foreign.empty() || !c.unreachable.empty()) ? TermTag::Unrewritable : TermTag::Rewritable;
    }
    out.terms.push_back(std::move(c));
  }
  return out;
}

ApproxSystem DistributedSystem::approx_system() const {
  std::vector<BracketTree> trees;
  for (const auto& r : rewrites) trees.insert(trees.end(), r.trees.begin(), r.trees.end());
  return ApproxSystem(dimension, drift, std::move(trees));
}

DistributedSystem assemble_distributed_system(const SaddleProblem& p, const RewriteOptions& options) {
  const AgentIndexMap m = p.index_map();
  DistributedSystem out;
  out.dimension = p.dimension();
  out.drift = VectorField(out.dimension);
  out.classification = classify_terms(saddle_terms(p), p.graph, m);
  for (const auto& c : out.classification.terms) {
    if (c.tag != TermTag::Unrewritable) continue;
    std::string msg = "term e" + std::to_string(c.term.component + 1) + " * " + to_sexpr(c.term.term) + " on agent " +
                      std::to_string(m.agent_of(c.term.component) + 1);
    if (c.unreachable.empty()) {
      msg += " has no out-edge to modulate";
    } else {
      msg += ": no path to agent " + std::to_string(c.unreachable.front() + 1);
    }
    throw Error(ErrorCode::Unrewritable, msg);
  }
  for (const auto& c : out.classification.terms) {
    if (c.tag == TermTag::Admissible) {
      out.drift.add(c.term.component, c.term.term);
    } else {
      out.rewrites.push_back(rewrite(p.graph, m, VectorField::unit(out.dimension, c.term.component, c.term.term), options));
    }
  }
  return out;
}

std::vector<double> KKTPoint::state() const {
  std::vector<double> z = x;
  z.insert(z.end(), nu.begin(), nu.end());
  z.insert(z.end(), lambda.begin(), lambda.end());
  return z;
}

double kkt_residual(const SaddleProblem& p, const KKTPoint& k) {
  const Expr L = p.lagrangian();
  const std::vector<double> z = k.state();
  double r = 0.0;
  for (int i = 0; i < p.agents(); ++i) r = std::max(r, std::abs(evaluate(differentiate(L, i), z)));
  for (std::size_t e = 0; e < p.equalities.size(); ++e) {
    r = std::max(r, std::abs(evaluate(differentiate(L, p.nu_index(static_cast<int>(e))), z)));
  }
  for (std::size_t q = 0; q < p.inequalities.size(); ++q) {
    const double c = evaluate(p.inequalities[q].c, z);
    const double l = k.lambda[q];
    r = std::max({r, c, -l, std::abs(l * c)});
  }
  return r;
}

namespace {

// Newton system for one active set: unknowns are x, nu and the active lambdas.
struct ActiveSystem {
  const SaddleProblem& p;
  std::vector<int> active;
  std::vector<int> unknowns;  // state components solved for
  std::vector<Expr> residual;
  std::vector<std::vector<Expr>> jacobian;

  ActiveSystem(const SaddleProblem& prob, std::vector<int> act) : p(prob), active(std::move(act)) {
    Expr L = p.lagrangian();
    for (std::size_t q = 0; q < p.inequalities.size(); ++q) {
      if (std::find(active.begin(), active.end(), static_cast<int>(q)) == active.end()) {
        L = substitute(L, p.lambda_index(static_cast<int>(q)), Expr::constant(Number(0)));
      }
    }
    for (int i = 0; i < p.agents(); ++i) {
      unknowns.push_back(i);
      residual.push_back(simplify(differentiate(L, i)));
    }
    for (std::size_t e = 0; e < p.equalities.size(); ++e) {
      const int c = p.nu_index(static_cast<int>(e));
      unknowns.push_back(c);
      residual.push_back(simplify(differentiate(L, c)));
    }
    for (int q : active) {
      unknowns.push_back(p.lambda_index(q));
      residual.push_back(p.inequalities[static_cast<std::size_t>(q)].c);
    }
    for (const auto& r : residual) {
      std::vector<Expr> row;
      for (int u : unknowns) row.push_back(differentiate(r, u));
      jacobian.push_back(std::move(row));
    }
  }

  Eigen::VectorXd eval(const std::vector<double>& z) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(residual.size()));
    for (std::size_t i = 0; i < residual.size(); ++i) out[static_cast<Eigen::Index>(i)] = evaluate(residual[i], z);
    return out;
  }

  Eigen::MatrixXd jac(const std::vector<double>& z) const {
    const auto n = static_cast<Eigen::Index>(unknowns.size());
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        out(i, j) = evaluate(jacobian[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], z);
      }
    }
    return out;
  }

  // Damped Newton from z; returns the final residual norm (inf when it fails).
  double solve(std::vector<double>& z, double tol) const {
    double fn;
    try {
      fn = eval(z).norm();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
    for (int it = 0; it < 200 && fn > tol * 1e-3; ++it) {
      Eigen::VectorXd step;
      try {
        step = jac(z).fullPivLu().solve(-eval(z));
      } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
      }
      if (!step.allFinite()) return std::numeric_limits<double>::infinity();
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
        std::vector<double> trial = z;
        for (std::size_t u = 0; u < unknowns.size(); ++u) {
          trial[static_cast<std::size_t>(unknowns[u])] += t * step[static_cast<Eigen::Index>(u)];
        }
        double ft;
        try {
          ft = eval(trial).norm();
        } catch (const Error&) {
          continue;
        }
        if (ft < (1.0 - 1e-4 * t) * fn) {
          z = std::move(trial);
          fn = ft;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    return fn;
  }
};

}  // namespace

KKTPoint solve_kkt_oracle(const SaddleProblem& p, double tol) {
  p.validate();
  if (p.dimension() > 10) throw Error(ErrorCode::InvalidArgument, "KKT oracle handles at most 10 unknowns");
  const int q = static_cast<int>(p.inequalities.size());
  std::vector<unsigned> masks;
  for (unsigned s = 0; s < (1u << q); ++s) masks.push_back(s);
  std::stable_sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) { return __builtin_popcount(a) < __builtin_popcount(b); });

  Rng rng(12345);
  for (unsigned mask : masks) {
    std::vector<int> active;
    for (int k = 0; k < q; ++k) {
      if (mask & (1u << k)) active.push_back(k);
    }
    ActiveSystem sys(p, active);
    for (int start = 0; start < 8; ++start) {
      std::vector<double> z(static_cast<std::size_t>(p.dimension()), 0.0);
      if (start > 0) {
        for (int u : sys.unknowns) z[static_cast<std::size_t>(u)] = rng.uniform(-p.box, p.box);
      }
      if (!(sys.solve(z, tol) <= tol)) continue;
      KKTPoint k;
      k.x.assign(z.begin(), z.begin() + p.agents());
      k.nu.assign(z.begin() + p.agents(), z.begin() + p.agents() + static_cast<long>(p.equalities.size()));
      k.lambda.assign(z.begin() + p.agents() + static_cast<long>(p.equalities.size()), z.end());
      k.active = active;
      try {
        k.residual = kkt_residual(p, k);
      } catch (const Error&) {
        continue;
      }
      if (k.residual <= tol) return k;
      break;  // converged but infeasible: this active set is wrong
    }
  }
  throw Error(ErrorCode::NoKKTPoint, "no active set yields a KKT point within " + format_double(tol));
}

ConvexityReport check_convexity(const SaddleProblem& p, int samples, std::uint64_t seed) {
  const Expr F = p.objective_expr();
  const int n = p.agents();
  std::vector<std::vector<Expr>> hess(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Expr gi = differentiate(F, i);
    for (int j = 0; j < n; ++j) hess[static_cast<std::size_t>(i)].push_back(differentiate(gi, j));
  }
  Rng rng(seed);
  ConvexityReport out;
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    std::vector<double> z(static_cast<std::size_t>(p.dimension()), 0.0);
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = rng.uniform(-p.box, p.box);
    Eigen::MatrixXd H(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) H(i, j) = evaluate(hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], z);
    }
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    out.min_eigenvalue = std::min(out.min_eigenvalue, lo);
    ++out.samples;
  }
  out.convex = out.min_eigenvalue >= -1e-12;
  return out;
}

DemoReport run_demo(const SaddleProblem& p, const DemoOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(options.window > 0.0 && options.window <= 1.0)) throw Error(ErrorCode::InvalidArgument, "window must be in (0, 1]");
  if (options.record_every < 1) throw Error(ErrorCode::InvalidArgument, "record_every must be >= 1");
  KKTPoint star = solve_kkt_oracle(p);
  DistributedSystem ds = assemble_distributed_system(p, options.rewrite);
  ApproxSystem sys = ds.approx_system();
  std::vector<double> z0 = options.start.value_or(p.default_start());
  if (static_cast<int>(z0.size()) != p.dimension()) throw Error(ErrorCode::InvalidArgument, "start state has the wrong dimension");

  SimulationOptions sim = options.sim;
  sim.record_every = 1;
  Trajectory tr = approximate_bracket_trajectory(sys, z0, options.T, options.omega, sim);

  const std::size_t n = static_cast<std::size_t>(p.agents());
  const double from = options.T * (1.0 - options.window);
  std::vector<double> acc(n, 0.0);
  double span = 0.0;
  for (std::size_t k = 1; k < tr.times.size(); ++k) {
    if (tr.times[k] <= from) continue;
    const double a = std::max(tr.times[k - 1], from);
    const double dt = tr.times[k] - a;
    for (std::size_t i = 0; i < n; ++i) acc[i] += 0.5 * (tr.states[k - 1][i] + tr.states[k][i]) * dt;
    span += dt;
  }

  DemoReport r;
  r.x_star = star.x;
  r.x_bar.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.x_bar[i] = span > 0 ? acc[i] / span : tr.final_state()[i];
  r.error = distance(r.x_bar, r.x_star);
  r.tolerance = 0.05 * (1.0 + norm(r.x_star));
  r.omega = options.omega;
  r.T = options.T;
  r.trees = static_cast<int>(sys.trees.size());
  r.kkt_residual = star.residual;

  Trajectory ideal = bracket_trajectory(sys, z0, options.T, options.ideal_step);
  std::vector<double> xT(ideal.final_state().begin(), ideal.final_state().begin() + static_cast<long>(n));
  r.ideal_error = distance(xT, r.x_star);

  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    if (k % static_cast<std::size_t>(options.record_every) == 0 || k + 1 == tr.times.size()) {
      r.trajectory.times.push_back(tr.times[k]);
      r.trajectory.states.push_back(tr.states[k]);
    }
  }
  if (options.timing) {
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return r;
}

std::string to_json(const DemoReport& r) {
  using detail::json;
  auto vec = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(detail::number_json(x));
    return a;
  };
  json out{{"x_star", vec(r.x_star)},
           {"x_bar", vec(r.x_bar)},
           {"error", detail::number_json(r.error)},
           {"omega", detail::number_json(r.omega)},
           {"runtime_s", r.runtime_s ? detail::number_json(*r.runtime_s) : json(nullptr)},
           {"T", detail::number_json(r.T)},
           {"tolerance", detail::number_json(r.tolerance)},
           {"within_tolerance", r.error <= r.tolerance},
           {"ideal_error", detail::number_json(r.ideal_error)},
           {"kkt_residual", detail::number_json(r.kkt_residual)},
           {"trees", r.trees}};
  return out.dump(2) + "\n";
}

}  // namespace liesynth
