#pragma once

#include "liesynth/approx.hpp"
#include "liesynth/graph.hpp"
#include "liesynth/rewrite.hpp"
#include "liesynth/vector_field.hpp"

#include <optional>
#include <string>
#include <vector>

namespace liesynth {

/// a . x = b, multiplier held by `owner`.
struct EqualityRow {
  std::vector<double> a;
  double b = 0.0;
  int owner = 0;
};

/// c(x) <= 0, multiplier held by `owner`.
struct InequalityRow {
  Expr c;
  int owner = 0;
};

/// Agent i owns x_i. State z = [x; nu; lambda] with nu_k = z_{n+k} and
/// lambda_k = z_{n+p+k}; expressions read x_i as var(i).
struct SaddleProblem {
  CommGraph graph;
  std::vector<Expr> objective;  // F = sum of terms
  double epsilon = 0.0;         // F + epsilon |x|^2
  std::vector<EqualityRow> equalities;
  std::vector<InequalityRow> inequalities;
  double box = 1.0;  // convexity samples from [-box, box]^n

  int agents() const { return graph.node_count(); }
  int dimension() const;
  int nu_index(int k) const;
  int lambda_index(int k) const;
  AgentIndexMap index_map() const;

  /// Throws Error(MalformedProblem) on bad rows, owners or variables.
  void validate() const;

  Expr objective_expr() const;  // including the epsilon term
  Expr lagrangian() const;      // F + nu^T (Ax - b) + lambda^T c

  /// Initial state x = 0, nu = 0, lambda = 1.
  std::vector<double> default_start() const;
};

struct RhsTerm {
  int component = 0;
  Expr term;
};

/// x' = -grad_x L, nu' = grad_nu L, lambda' = diag(lambda) grad_lambda L.
VectorField saddle_rhs(const SaddleProblem& p);
/// The same field split into single-component additive terms.
std::vector<RhsTerm> saddle_terms(const SaddleProblem& p);

enum class TermTag { Admissible, Rewritable, Unrewritable };
std::string_view to_string(TermTag t);

struct ClassifiedTerm {
  RhsTerm term;
  TermTag tag = TermTag::Admissible;
  std::vector<Path> paths;      // one per foreign agent (rewritable)
  std::vector<int> unreachable;  // foreign agents without a path
};

struct TermClassification {
  std::vector<ClassifiedTerm> terms;

  int count(TermTag t) const;
};

TermClassification classify_terms(const std::vector<RhsTerm>& terms, const CommGraph& g, const AgentIndexMap& m);

struct DistributedSystem {
  int dimension = 0;
  VectorField drift;                  // admissible terms
  std::vector<RewriteResult> rewrites;  // one per rewritten term
  TermClassification classification;

  ApproxSystem approx_system() const;
};

/// Errors: Unrewritable (naming the term and the missing path), NotSeparable.
DistributedSystem assemble_distributed_system(const SaddleProblem& p, const RewriteOptions& options = {});

struct KKTPoint {
  std::vector<double> x;
  std::vector<double> nu;
  std::vector<double> lambda;
  std::vector<int> active;  // active inequality rows
  double residual = 0.0;

  std::vector<double> state() const;  // [x; nu; lambda]
};

/// max of |grad_x L|, |Ax - b|, max(c, 0), max(-lambda, 0), |lambda c|.
double kkt_residual(const SaddleProblem& p, const KKTPoint& k);

/// Active-set enumeration with damped Newton per subset. Needs N <= 10.
/// Errors: NoKKTPoint, InvalidArgument (too large).
KKTPoint solve_kkt_oracle(const SaddleProblem& p, double tol = 1e-9);

struct ConvexityReport {
  bool convex = true;
  double min_eigenvalue = 0.0;
  int samples = 0;
};

/// Hessian of F (with epsilon) at random points of the box; advisory.
ConvexityReport check_convexity(const SaddleProblem& p, int samples = 16, std::uint64_t seed = 0);

struct DemoOptions {
  double omega = 400.0;
  double T = 40.0;
  double window = 0.1;  // trailing fraction of T averaged into x_bar
  double ideal_step = 1e-2;
  int record_every = 100;  // thinning of the reported trajectory
  bool timing = false;     // report wall-clock runtime
  SimulationOptions sim;
  RewriteOptions rewrite;
  std::optional<std::vector<double>> start;
};

struct DemoReport {
  std::vector<double> x_star;
  std::vector<double> x_bar;
  double error = 0.0;        // |x_bar - x_star|
  double ideal_error = 0.0;  // |x_ideal(T) - x_star|
  double tolerance = 0.0;    // 0.05 (1 + |x_star|)
  double omega = 0.0;
  double T = 0.0;
  int trees = 0;
  double kkt_residual = 0.0;
  std::optional<double> runtime_s;
  Trajectory trajectory;  // approximating system, thinned by record_every
};

/// Errors: Divergence, Unrewritable, NoKKTPoint.
DemoReport run_demo(const SaddleProblem& p, const DemoOptions& options = {});

/// JSON {x_star, x_bar, error, omega, runtime_s, ...}; runtime_s is null
/// unless it was measured.
std::string to_json(const DemoReport& r);

/// TOML problem file: [graph] n, edges; [agents] count; [objective] terms,
/// epsilon, box; [equality] rows; [inequality] constraints.
/// Errors: ParseError (syntax), MalformedProblem (content).
SaddleProblem parse_problem_toml(std::string_view text);
SaddleProblem load_problem(const std::string& path);

}  // namespace liesynth
