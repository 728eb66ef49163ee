#include "liesynth/rewrite.hpp"

#include "liesynth/error.hpp"
#include "liesynth/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace liesynth {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Auto: return "auto";
    case Strategy::Simple: return "simple";
    case Strategy::Trig: return "trig";
    case Strategy::Product: return "product";
    case Strategy::Taylor: return "taylor";
    case Strategy::Estimator: return "estimator";
  }
  return "auto";
}

Strategy strategy_from_string(std::string_view name) {
  for (Strategy s : {Strategy::Auto, Strategy::Simple, Strategy::Trig, Strategy::Product, Strategy::Taylor,
                     Strategy::Estimator}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + std::string(name) + "'");
}

Interval TrigParams::window() const {
  const double half = std::numbers::pi / (2.0 * std::abs(alpha));
  return {d - half, d + half};
}

namespace {

std::string agent_label(int a) { return std::to_string(a + 1); }

Expr one() { return Expr::constant(Number(1)); }

bool reads_only(const AgentIndexMap& m, const Expr& e, int agent) {
  return std::all_of(e.free_vars().begin(), e.free_vars().end(),
                     [&](int v) { return v < m.dimension() && m.agent_of(v) == agent; });
}

std::set<int> agents_of(const AgentIndexMap& m, const Expr& e) {
  std::set<int> out;
  for (int v : e.free_vars()) {
    if (v >= m.dimension()) throw Error(ErrorCode::InvalidArgument, "expression reads a component beyond the state");
    out.insert(m.agent_of(v));
  }
  return out;
}

int representative(const AgentIndexMap& m, const RewriteOptions& o, int agent) {
  if (auto it = o.representatives.find(agent); it != o.representatives.end()) {
    if (m.agent_of(it->second) != agent) {
      throw Error(ErrorCode::InvalidArgument, "representative is not in agent " + agent_label(agent) + "'s block");
    }
    return it->second;
  }
  return m.representative(agent);
}

Path find_path(const CommGraph& g, const RewriteOptions& o, int from, int to) {
  for (const auto& p : o.paths) {
    if (!p.empty() && p.front() == from && p.back() == to) {
      if (!is_simple_path(g, p)) throw Error(ErrorCode::InvalidArgument, "given path is not a simple path of the graph");
      return p;
    }
  }
  auto p = shortest_path(g, from, to);
  if (!p) {
    throw Error(ErrorCode::NoPath, "no path from agent " + agent_label(from) + " to agent " + agent_label(to));
  }
  return *p;
}

std::vector<int> chain_reps(const AgentIndexMap& m, const RewriteOptions& o, const Path& path, int first) {
  std::vector<int> reps{first};
  for (std::size_t k = 1; k < path.size(); ++k) reps.push_back(representative(m, o, path[k]));
  return reps;
}

Expr trig_arg(const TrigParams& t, int component) {
  return Expr::constant(Number(t.alpha)) * (Expr::var(component) - Expr::constant(Number(t.d)));
}

struct Piece {
  BracketTree tree;
  Domain validity;
  std::vector<Path> paths;
};

// e_target own * foreign along one path; neighbours give a bare leaf.
Piece chain_piece(const CommGraph& g, const AgentIndexMap& m, const RewriteOptions& o, int target, const Expr& own,
                  int foreign_agent, const Expr& foreign, bool trig) {
  const int a = m.agent_of(target);
  Path path = find_path(g, o, a, foreign_agent);
  auto reps = chain_reps(m, o, path, target);
  PathChain chain = trig ? trig_chain(m, path, reps, own, foreign, o.trig) : simple_chain(m, path, reps, own, foreign);
  Domain validity = trig ? trig_validity(m.dimension(), chain, o.trig) : Domain(m.dimension());
  return {chain_tree(chain), validity, {path}};
}

Piece product_piece(const CommGraph& g, const AgentIndexMap& m, const RewriteOptions& o, int target, const Expr& eta0,
                    const std::vector<std::pair<int, Expr>>& groups, bool trig) {
  const std::size_t count = groups.size();
  Expr integral = antiderivative(eta0, target);
  std::vector<BracketTree> psi;
  Domain validity(m.dimension());
  std::vector<Path> paths;
  for (std::size_t k = 0; k < count; ++k) {
    Expr own = k == 0 ? integral : (k + 1 == count ? one() : Expr::var(target));
    Piece p = chain_piece(g, m, o, target, own, groups[k].first, groups[k].second, trig);
    psi.push_back(p.tree);
    validity = validity.intersect(p.validity);
    paths.insert(paths.end(), p.paths.begin(), p.paths.end());
  }
  return {BracketTree::left_nested(psi), validity, paths};
}

Piece leaf_piece(const AgentIndexMap& m, int target, const Expr& term) {
  const int a = m.agent_of(target);
  int source = target;
  for (int v : term.free_vars()) {
    if (m.agent_of(v) != a) {
      source = v;
      break;
    }
  }
  return {BracketTree::leaf(SeparableField(target, source, term)), Domain(m.dimension()), {}};
}

// One additive term of component `target`.
Piece term_piece(const CommGraph& g, const AgentIndexMap& m, const RewriteOptions& o, int target, const Expr& term) {
  if (is_admissible_term(g, m, target, term)) return leaf_piece(m, target, term);
  SeparatedTerm st = separate_term(m, target, term);
  if (st.foreign.empty()) {
    throw Error(ErrorCode::Unrewritable,
                "agent " + agent_label(m.agent_of(target)) + " has no out-neighbour, so even its own terms are not admissible");
  }
  const bool trig = o.strategy == Strategy::Trig;
  if (st.foreign.size() == 1) {
    const auto& [agent, f] = *st.foreign.begin();
    return chain_piece(g, m, o, target, st.own, agent, f, trig);
  }
  if (o.strategy == Strategy::Simple || o.strategy == Strategy::Trig) {
    throw Error(ErrorCode::NotSeparable, "term reads " + std::to_string(st.foreign.size()) +
                                             " foreign agents; use the product strategy");
  }
  std::vector<std::pair<int, Expr>> groups(st.foreign.begin(), st.foreign.end());
  return product_piece(g, m, o, target, st.own, groups, false);
}

RewriteResult make_result(Strategy s, const CommGraph& g, const AgentIndexMap& m, VectorField target) {
  RewriteResult r;
  r.strategy = s;
  r.target = std::move(target);
  r.validity = Domain(m.dimension());
  r.graph = g;
  r.map = m;
  return r;
}

void absorb(RewriteResult& r, Piece p) {
  r.trees.push_back(std::move(p.tree));
  r.validity = r.validity.intersect(p.validity);
  r.paths.insert(r.paths.end(), p.paths.begin(), p.paths.end());
}

void check_dims(const CommGraph& g, const AgentIndexMap& m) {
  if (g.node_count() != m.agent_count()) {
    throw Error(ErrorCode::InvalidArgument, "graph and index map disagree on the number of agents");
  }
}

void check_component(const AgentIndexMap& m, int c) {
  if (c < 0 || c >= m.dimension()) throw Error(ErrorCode::InvalidArgument, "component out of range");
}

}  // namespace

// ---------------------------------------------------------------------------
// Chains

void validate_chain(const CommGraph& g, const AgentIndexMap& m, const PathChain& chain) {
  const int r = chain.length();
  if (r < 1 || !is_simple_path(g, chain.agents)) throw Error(ErrorCode::InvalidArgument, "chain path is not simple");
  if (static_cast<int>(chain.reps.size()) != r) throw Error(ErrorCode::InvalidArgument, "one representative per path node");
  for (int k = 0; k < r; ++k) {
    if (m.agent_of(chain.reps[static_cast<std::size_t>(k)]) != chain.agents[static_cast<std::size_t>(k)]) {
      throw Error(ErrorCode::InvalidArgument, "representative outside its agent's block");
    }
  }
  if (static_cast<int>(chain.links.size()) != r - 1) throw Error(ErrorCode::InvalidArgument, "a chain of r nodes has r-1 links");
  for (int k = 0; k + 1 < r; ++k) {
    const auto& l = chain.links[static_cast<std::size_t>(k)];
    if (l.target != chain.reps[static_cast<std::size_t>(k)] || l.source != chain.reps[static_cast<std::size_t>(k + 1)]) {
      throw Error(ErrorCode::InvalidArgument, "link does not follow the path");
    }
  }
}

BracketTree chain_tree(const PathChain& chain) { return BracketTree::right_nested(chain.links); }

VectorField chain_bracket_formula(const PathChain& chain, int dimension) {
  const int r = chain.length();
  if (r < 2) throw Error(ErrorCode::PathTooShort, "chain needs at least two nodes");
  std::vector<Expr> factors{chain.links[static_cast<std::size_t>(r - 2)].f};
  for (int k = 1; k <= r - 2; ++k) {
    factors.push_back(differentiate(chain.links[static_cast<std::size_t>(k - 1)].f, chain.reps[static_cast<std::size_t>(k)]));
  }
  return VectorField::unit(dimension, chain.reps.front(), Expr::product(std::move(factors)));
}

CancellationCheck check_cancellation_constraint(const PathChain& chain, const Domain& domain, Rng& rng, int samples,
                                                double tol) {
  CancellationCheck out;
  out.symbolic = true;
  const int r = chain.length();
  int dim = domain.dimension();
  if (dim == 0) {
    for (int c : chain.reps) dim = std::max(dim, c + 1);
    for (const auto& l : chain.links) {
      for (int v : l.f.free_vars()) dim = std::max(dim, v + 1);
    }
  }
  const Domain dom = domain.dimension() == 0 ? Domain(dim) : domain;
  for (int k = 2; k <= r - 1; ++k) {
    const auto& cur = chain.links[static_cast<std::size_t>(k - 1)];
    const auto& prev = chain.links[static_cast<std::size_t>(k - 2)];
    if (!cur.factors || !prev.factors) {
      out.ok = false;
      out.symbolic = false;
      out.link = k;
      out.value = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
    Expr product = simplify(cur.factors->first * differentiate(prev.factors->second, chain.reps[static_cast<std::size_t>(k - 1)]));
    if (product.is_one()) continue;
    out.symbolic = false;
    for (int s = 0; s < samples; ++s) {
      auto p = dom.sample(rng);
      double v = 0;
      try {
        v = evaluate(product, p);
      } catch (const DomainError&) {
        v = std::numeric_limits<double>::quiet_NaN();
      }
      if (!(std::abs(v - 1.0) <= tol)) {
        out.ok = false;
        out.link = k;
        out.witness = p;
        out.value = v;
        return out;
      }
    }
  }
  return out;
}

PathChain simple_chain(const AgentIndexMap& m, const Path& agents, const std::vector<int>& reps, const Expr& f1,
                       const Expr& f2) {
  (void)m;
  const int r = static_cast<int>(agents.size());
  if (r < 2) throw Error(ErrorCode::PathTooShort, "path must have at least two nodes");
  PathChain c{agents, reps, {}};
  auto rep = [&](int k) { return reps[static_cast<std::size_t>(k)]; };
  if (r == 2) {
    c.links.emplace_back(rep(0), rep(1), f1, f2);
    return c;
  }
  c.links.emplace_back(rep(0), rep(1), f1, Expr::var(rep(1)));
  for (int k = 2; k <= r - 2; ++k) c.links.emplace_back(rep(k - 1), rep(k), one(), Expr::var(rep(k)));
  c.links.emplace_back(rep(r - 2), rep(r - 1), one(), f2);
  return c;
}

PathChain trig_chain(const AgentIndexMap& m, const Path& agents, const std::vector<int>& reps, const Expr& f1,
                     const Expr& f2, const TrigParams& trig) {
  (void)m;
  if (trig.alpha == 0.0 || !std::isfinite(trig.alpha) || !std::isfinite(trig.d)) {
    throw Error(ErrorCode::InvalidArgument, "trig family needs a finite alpha != 0");
  }
  const int r = static_cast<int>(agents.size());
  if (r < 2) throw Error(ErrorCode::PathTooShort, "path must have at least two nodes");
  PathChain c{agents, reps, {}};
  for (int k = 1; k <= r - 1; ++k) {
    const int jk = reps[static_cast<std::size_t>(k - 1)];
    const int jn = reps[static_cast<std::size_t>(k)];
    Expr a;
    if (k == 1) {
      a = f1;
    } else if (k % 2 == 0) {
      a = cos(trig_arg(trig, jk));
    } else {
      a = Expr::constant(Number(1.0 / trig.alpha)) * sec(trig_arg(trig, jk));
    }
    Expr b;
    if (k == r - 1) {
      b = f2;
    } else if (k % 2 == 0) {
      b = sin(trig_arg(trig, jn));
    } else {
      b = antiderivative(sec(trig_arg(trig, jn)), jn);
    }
    c.links.emplace_back(jk, jn, a, b);
  }
  return c;
}

Domain trig_validity(int dimension, const PathChain& chain, const TrigParams& trig) {
  Domain d(dimension);
  for (int k = 1; k + 1 < chain.length(); ++k) d.restrict(chain.reps[static_cast<std::size_t>(k)], trig.window());
  return d;
}

// ---------------------------------------------------------------------------
// Term structure

SeparatedTerm separate_term(const AgentIndexMap& m, int target, const Expr& term) {
  const int a = m.agent_of(target);
  std::vector<Expr> own;
  std::map<int, std::vector<Expr>> foreign;
  for (const auto& f : factors_of(simplify(term))) {
    auto ag = agents_of(m, f);
    if (ag.size() > 1) {
      throw Error(ErrorCode::NotSeparable, "factor mixes the variables of several agents; try the taylor strategy");
    }
    if (ag.empty() || *ag.begin() == a) {
      own.push_back(f);
    } else {
      foreign[*ag.begin()].push_back(f);
    }
  }
  SeparatedTerm out;
  out.own = own.empty() ? one() : simplify(Expr::product(own));
  for (auto& [agent, fs] : foreign) out.foreign[agent] = simplify(Expr::product(fs));
  return out;
}

namespace {

bool mixed(const AgentIndexMap& m, const Expr& e) { return agents_of(m, e).size() > 1; }

// Sum (or positive power of a sum) that mixes agents, expanded into addends.
std::optional<std::vector<Expr>> expandable(const AgentIndexMap& m, const Expr& f) {
  if (!mixed(m, f)) return std::nullopt;
  if (f.kind() == Kind::Sum) return std::vector<Expr>(f.operands().begin(), f.operands().end());
  if (f.kind() == Kind::Power && f.exponent() > 1 && f.operand(0).kind() == Kind::Sum) {
    std::vector<Expr> rest(static_cast<std::size_t>(f.exponent() - 1), f.operand(0));
    std::vector<Expr> out;
    for (const auto& t : f.operand(0).operands()) {
      std::vector<Expr> fs = rest;
      fs.push_back(t);
      out.push_back(Expr::product(std::move(fs)));
    }
    return out;
  }
  return std::nullopt;
}

void collect_terms(const AgentIndexMap& m, const Expr& e, std::vector<Expr>& out, int budget) {
  Expr s = simplify(e);
  if (s.is_zero()) return;
  if (s.kind() == Kind::Sum) {
    for (const auto& t : s.operands()) collect_terms(m, t, out, budget);
    return;
  }
  if (budget > 0) {
    if (auto addends = expandable(m, s)) {
      for (const auto& t : *addends) collect_terms(m, t, out, budget - 1);
      return;
    }
    if (s.kind() == Kind::Product) {
      auto ops = s.operands();
      for (std::size_t k = 0; k < ops.size(); ++k) {
        auto addends = expandable(m, ops[k]);
        if (!addends) continue;
        for (const auto& t : *addends) {
          std::vector<Expr> fs(ops.begin(), ops.end());
          fs[k] = t;
          collect_terms(m, Expr::product(std::move(fs)), out, budget - 1);
        }
        return;
      }
    }
  }
  out.push_back(s);
}

}  // namespace

std::vector<Expr> additive_terms(const AgentIndexMap& m, const Expr& e) {
  std::vector<Expr> raw;
  collect_terms(m, e, raw, 64);
  // merge like terms produced by the distribution
  Expr merged = simplify(Expr::sum(raw));
  std::vector<Expr> out;
  if (merged.is_zero()) return out;
  if (merged.kind() == Kind::Sum) return {merged.operands().begin(), merged.operands().end()};
  return {merged};
}

// ---------------------------------------------------------------------------
// Strategies

VectorField RewriteResult::sum_of_trees() const {
  VectorField out(target.dimension());
  for (const auto& t : trees) out += to_vector_field(t, target.dimension());
  return out;
}

int RewriteResult::max_depth() const {
  int d = 0;
  for (const auto& t : trees) d = std::max(d, t.depth());
  return d;
}

namespace {

RewriteResult chain_result(const CommGraph& g, const AgentIndexMap& m, int target, const Expr& f1, const Expr& f2,
                           const RewriteOptions& options, bool trig) {
  check_dims(g, m);
  check_component(m, target);
  const int a = m.agent_of(target);
  if (!reads_only(m, f1, a)) throw Error(ErrorCode::NotSeparable, "f1 must only read the target agent's block");
  auto ag = agents_of(m, f2);
  if (ag.size() > 1) throw Error(ErrorCode::NotSeparable, "f2 must only read a single agent's block");
  RewriteResult r = make_result(trig ? Strategy::Trig : Strategy::Simple, g, m,
                                VectorField::unit(m.dimension(), target, f1 * f2));
  if (ag.empty() || *ag.begin() == a) {
    if (ag.empty() && is_admissible(g, m, target, target)) {
      absorb(r, leaf_piece(m, target, simplify(f1 * f2)));
      return r;
    }
    throw Error(ErrorCode::PathTooShort, "f2 lives on the target's own agent; there is no path to rewrite along");
  }
  absorb(r, chain_piece(g, m, options, target, f1, *ag.begin(), f2, trig));
  return r;
}

}  // namespace

RewriteResult synth_simple(const CommGraph& g, const AgentIndexMap& m, int target, const Expr& f1, const Expr& f2,
                           const RewriteOptions& options) {
  return chain_result(g, m, target, f1, f2, options, false);
}

RewriteResult synth_trig(const CommGraph& g, const AgentIndexMap& m, int target, const Expr& f1, const Expr& f2,
                         const TrigParams& trig, const RewriteOptions& options) {
  RewriteOptions o = options;
  o.trig = trig;
  return chain_result(g, m, target, f1, f2, o, true);
}

RewriteResult synth_product(const CommGraph& g, const AgentIndexMap& m, int target, const Expr& eta0,
                            const std::vector<ProductFactor>& factors, const RewriteOptions& options) {
  check_dims(g, m);
  check_component(m, target);
  if (factors.size() < 2) throw Error(ErrorCode::InvalidArgument, "the product bracket needs at least two factors");
  const int a = m.agent_of(target);
  if (!reads_only(m, eta0, a)) throw Error(ErrorCode::NotSeparable, "eta0 must only read the target agent's block");
  std::vector<std::pair<int, Expr>> groups;
  std::vector<Expr> all{eta0};
  for (const auto& f : factors) {
    check_component(m, f.component);
    const int b = m.agent_of(f.component);
    if (b == a) {
      throw Error(ErrorCode::FactorOnOwnNode, "factor on component " + std::to_string(f.component + 1) +
                                                  " lives on the target's own agent");
    }
    if (!reads_only(m, f.eta, b)) throw Error(ErrorCode::NotSeparable, "factor reads outside its component's block");
    groups.emplace_back(b, f.eta);
    all.push_back(f.eta);
  }
  RewriteResult r = make_result(Strategy::Product, g, m, VectorField::unit(m.dimension(), target, Expr::product(all)));
  RewriteOptions o = options;
  for (const auto& f : factors) {
    // the factor's own component is the chain's last representative
    o.representatives.try_emplace(m.agent_of(f.component), f.component);
  }
  absorb(r, product_piece(g, m, o, target, eta0, groups, options.strategy == Strategy::Trig));
  return r;
}

RewriteResult synth_taylor(const CommGraph& g, const AgentIndexMap& m, int target, const Expr& phi,
                           const RewriteOptions& options) {
  check_dims(g, m);
  check_component(m, target);
  if (options.require_strong_connectivity && !is_strongly_connected(g)) {
    throw Error(ErrorCode::NotStronglyConnected, "the Taylor strategy needs a strongly connected graph");
  }
  const int n = m.dimension();
  std::vector<double> center = options.center.empty() ? std::vector<double>(static_cast<std::size_t>(n), 0.0) : options.center;
  if (static_cast<int>(center.size()) != n) throw Error(ErrorCode::InvalidArgument, "center has the wrong dimension");
  auto monos = taylor_monomials(phi, center, options.degree);

  RewriteOptions o = options;
  o.strategy = Strategy::Product;
  RewriteResult r = make_result(Strategy::Taylor, g, m, VectorField::unit(n, target, monomial_sum(monos, center)));
  r.original = VectorField::unit(n, target, phi);
  for (const auto& mono : monos) {
    Expr term = simplify(mono.to_expr(center));
    absorb(r, term_piece(g, m, o, target, term));
  }

  // residual |phi - truncation|: exact for polynomials with exact data
  bool exact_data = std::all_of(monos.begin(), monos.end(), [](const Monomial& mm) { return mm.coefficient.is_exact(); });
  auto phi_poly = to_polynomial(simplify(phi));
  if (exact_data && phi_poly) {
    std::vector<Expr> terms;
    for (const auto& mono : monos) {
      std::vector<Expr> fs{Expr::constant(mono.coefficient)};
      for (const auto& [k, e] : mono.powers) {
        Expr shifted = Expr::var(k) - Expr::constant(Number(exact_rational(center[static_cast<std::size_t>(k)])));
        fs.push_back(Expr::power(shifted, e));
      }
      terms.push_back(Expr::product(std::move(fs)));
    }
    auto trunc = to_polynomial(simplify(Expr::sum(std::move(terms))));
    if (trunc) {
      Polynomial diff = *phi_poly;
      for (const auto& [mi, c] : *trunc) diff[mi] -= c;
      std::erase_if(diff, [](const auto& kv) { return kv.second == 0; });
      if (diff.empty()) {
        r.residual = 0.0;
        r.residual_exact = true;
        return r;
      }
    }
  }
  Rng rng(options.seed);
  Expr trunc_expr = r.target.component(target);
  double worst = 0.0;
  for (int s = 0; s < options.residual_samples; ++s) {
    std::vector<double> p(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      p[static_cast<std::size_t>(k)] = rng.uniform(center[static_cast<std::size_t>(k)] - options.box,
                                                   center[static_cast<std::size_t>(k)] + options.box);
    }
    worst = std::max(worst, std::abs(evaluate(phi, p) - evaluate(trunc_expr, p)));
  }
  r.residual = worst;
  return r;
}

RewriteResult rewrite(const CommGraph& g, const AgentIndexMap& m, const VectorField& target,
                      const RewriteOptions& options) {
  check_dims(g, m);
  if (target.dimension() != m.dimension()) throw Error(ErrorCode::InvalidArgument, "target dimension does not match the index map");
  if (options.strategy == Strategy::Estimator) {
    throw Error(ErrorCode::InvalidArgument, "the estimator strategy produces an augmented system; call synth_estimator");
  }
  if (options.strategy == Strategy::Taylor) {
    if (target.components().size() != 1) throw Error(ErrorCode::InvalidArgument, "the Taylor strategy takes a single-component target");
    const auto& [i, phi] = *target.components().begin();
    return synth_taylor(g, m, i, phi, options);
  }
  RewriteResult r = make_result(options.strategy, g, m, target);
  for (const auto& [i, e] : target.components()) {
    for (const auto& term : additive_terms(m, e)) absorb(r, term_piece(g, m, options, i, term));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Estimator augmentation

VectorField AugmentedSystem::ideal_field() const {
  VectorField out = drift;
  for (const auto& inj : injections) out += inj.target;
  return out;
}

AugmentedSystem synth_estimator(const CommGraph& g, const AgentIndexMap& m, const VectorField& target, double mu,
                                const RewriteOptions& options) {
  check_dims(g, m);
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(ErrorCode::InvalidArgument, "estimator gain must be positive");
  if (target.dimension() != m.dimension()) throw Error(ErrorCode::InvalidArgument, "target dimension does not match the index map");
  AugmentedSystem out;
  out.mu = mu;
  out.caveat = "estimator augmentation alters the saddle-point dynamics; the augmented system needs its own stability validation";

  // (agent, foreign component) pairs that need an estimate
  std::vector<std::pair<int, int>> needed;
  for (const auto& [i, e] : target.components()) {
    for (int v : e.free_vars()) {
      if (!is_admissible(g, m, i, v)) {
        std::pair<int, int> key{m.agent_of(i), v};
        if (std::find(needed.begin(), needed.end(), key) == needed.end()) needed.push_back(key);
      }
    }
  }
  std::sort(needed.begin(), needed.end());
  if (needed.empty()) {
    out.dimension = m.dimension();
    out.map = m;
    out.drift = target;
    out.passthrough = true;
    return out;
  }

  AgentIndexMap aug = m;
  const int n0 = m.dimension();
  for (const auto& [agent, v] : needed) aug = aug.with_extra_components(agent, 1);
  out.map = aug;
  out.dimension = aug.dimension();
  auto xi_of = [&](int agent, int v) {
    auto it = std::find(needed.begin(), needed.end(), std::pair<int, int>{agent, v});
    return n0 + static_cast<int>(it - needed.begin());
  };
  for (std::size_t k = 0; k < needed.size(); ++k) out.estimates.emplace_back(n0 + static_cast<int>(k), needed[k].second);

  out.drift = VectorField(out.dimension);
  for (const auto& [i, e] : target.components()) {
    Expr local = e;
    for (int v : e.free_vars()) {
      if (!is_admissible(g, m, i, v)) local = substitute(local, v, Expr::var(xi_of(m.agent_of(i), v)));
    }
    out.drift.add(i, local);
  }
  const Expr gain = Expr::constant(Number(mu));
  for (const auto& [xi, v] : out.estimates) {
    out.drift.add(xi, -(gain * Expr::var(xi)));
    RewriteOptions o = options;
    o.strategy = Strategy::Simple;
    RewriteResult inj = synth_simple(g, aug, xi, gain, Expr::var(v), o);
    inj.strategy = Strategy::Estimator;
    out.injections.push_back(std::move(inj));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification

VerificationReport verify(const RewriteResult& result, int samples, std::uint64_t seed, double tol) {
  VerificationReport rep;
  rep.samples = samples;
  const int n = result.target.dimension();
  if (result.graph.node_count() == result.map.agent_count() && result.map.dimension() == n) {
    for (const auto& t : result.trees) {
      if (!all_leaves_admissible(result.graph, result.map, t)) rep.leaves_admissible = false;
    }
  } else {
    rep.leaves_admissible = false;
    rep.message = "graph and index map do not match the target";
  }
  VectorField lhs = result.sum_of_trees();
  const Domain dom = result.validity.dimension() == n ? result.validity : Domain(n);
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    auto p = dom.sample(rng);
    std::vector<double> a;
    std::vector<double> b;
    try {
      a = lhs.evaluate(p);
      b = result.target.evaluate(p);
    } catch (const DomainError& e) {
      rep.passed = false;
      rep.worst_point = p;
      rep.message = std::string("domain error while sampling: ") + e.what();
      return rep;
    }
    for (int c = 0; c < n; ++c) {
      const double ref = b[static_cast<std::size_t>(c)];
      const double err = std::abs(a[static_cast<std::size_t>(c)] - ref) / std::max(1.0, std::abs(ref));
      if (std::isnan(err) || err > rep.max_error || rep.worst_component < 0) {
        rep.max_error = std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
        rep.worst_component = c;
        rep.worst_point = p;
      }
    }
  }
  rep.passed = rep.leaves_admissible && rep.max_error <= tol;
  if (rep.message.empty()) {
    rep.message = rep.passed ? "ok" : (!rep.leaves_admissible ? "non-admissible leaf" : "sum of trees differs from target");
  }
  return rep;
}

}  // namespace liesynth
