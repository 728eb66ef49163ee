#pragma once

#include "liesynth/bracket_tree.hpp"
#include "liesynth/graph.hpp"
#include "liesynth/sampling.hpp"
#include "liesynth/vector_field.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace liesynth {

enum class Strategy { Auto, Simple, Trig, Product, Taylor, Estimator };

std::string_view to_string(Strategy s);
/// Throws Error(InvalidArgument) for unknown names.
Strategy strategy_from_string(std::string_view name);

/// cos/sec link family parameters; windows are (d - pi/(2|alpha|), d + pi/(2|alpha|)).
struct TrigParams {
  double alpha = 0.5;
  double d = 0.0;

  Interval window() const;
};

/// Chain of separable links along a simple path of agents.
/// links[k-1] is h_{j_{k+1}, j_k} = e_{j_k} f_{j_k}, k = 1..r-1.
struct PathChain {
  Path agents;
  std::vector<int> reps;
  std::vector<SeparableField> links;

  int length() const { return static_cast<int>(agents.size()); }
};

/// Throws Error(InvalidArgument) if the path is not simple, a representative
/// lies outside its agent's block, or the links do not follow the path.
void validate_chain(const CommGraph& g, const AgentIndexMap& m, const PathChain& chain);

/// [h_{j_r,j_{r-1}}, [ ... [h_{j_3,j_2}, h_{j_2,j_1}] ... ]]
BracketTree chain_tree(const PathChain& chain);

/// Closed form e_{j_1} f_{j_{r-1}} prod_{k=1}^{r-2} d f_{j_k} / d z_{j_{k+1}}.
VectorField chain_bracket_formula(const PathChain& chain, int dimension);

struct CancellationCheck {
  bool ok = true;
  bool symbolic = false;        // every product simplified to 1
  int link = -1;                // 1-based k of the first violation
  std::vector<double> witness;  // sample point of the violation
  double value = 1.0;           // offending product value
};

/// f^(1)_{j_k} * d f^(2)_{j_{k-1}} / d z_{j_k} == 1 for k = 2..r-1, first
/// symbolically and, failing that, at `samples` points of the domain.
/// Links without a factorization are a violation.
CancellationCheck check_cancellation_constraint(const PathChain& chain, const Domain& domain, Rng& rng,
                                                int samples = 64, double tol = 1e-10);

/// Chain for e_{reps[0]} f1(z_I(reps[0])) f2(z_I(reps[r-1])) with the simple
/// choice: f_1 = f1 * z_{j_2}, interior f_k = z_{j_{k+1}}, last f = f2.
PathChain simple_chain(const AgentIndexMap& m, const Path& agents, const std::vector<int>& reps, const Expr& f1,
                       const Expr& f2);

/// Same target with the cos/sec family on the interior links.
PathChain trig_chain(const AgentIndexMap& m, const Path& agents, const std::vector<int>& reps, const Expr& f1,
                     const Expr& f2, const TrigParams& trig);

/// Interior components of a trig chain restricted to the window.
Domain trig_validity(int dimension, const PathChain& chain, const TrigParams& trig);

struct RewriteOptions {
  Strategy strategy = Strategy::Auto;
  TrigParams trig;
  /// Explicit paths, picked by (first agent, last agent). Missing pairs use
  /// the shortest path (ties: lexicographically smallest).
  std::vector<Path> paths;
  /// Representative component per agent; default is the smallest in the block.
  std::map<int, int> representatives;

  // Taylor strategy
  std::vector<double> center;  // empty: origin
  int degree = 4;
  double box = 0.5;            // residual samples from center +- box
  int residual_samples = 16;
  bool require_strong_connectivity = true;
  std::uint64_t seed = 0;
};

struct RewriteResult {
  Strategy strategy = Strategy::Auto;
  VectorField target;  // what the trees sum to
  std::vector<BracketTree> trees;
  Domain validity;
  std::vector<Path> paths;
  std::optional<VectorField> original;  // Taylor: the untruncated field
  std::optional<double> residual;
  bool residual_exact = false;
  CommGraph graph;
  AgentIndexMap map;

  VectorField sum_of_trees() const;
  int max_depth() const;
};

/// e_target f1 f2 where f1 reads the target's block and f2 a single other
/// agent's block. Errors: PathTooShort (f2 on the target's own agent), NoPath.
RewriteResult synth_simple(const CommGraph& g, const AgentIndexMap& m, int target, const Expr& f1, const Expr& f2,
                           const RewriteOptions& options = {});

RewriteResult synth_trig(const CommGraph& g, const AgentIndexMap& m, int target, const Expr& f1, const Expr& f2,
                         const TrigParams& trig, const RewriteOptions& options = {});

/// eta (read only from the block of `component`).
struct ProductFactor {
  int component;
  Expr eta;
};

/// e_i eta0(z_I(i)) prod eta_k via the left-nested product bracket, each psi_k
/// expanded into an admissible chain. eta0 must have a closed-form antiderivative
/// in z_i. Errors: FactorOnOwnNode, NotClosedForm, NoPath, InvalidArgument (m < 2).
RewriteResult synth_product(const CommGraph& g, const AgentIndexMap& m, int target, const Expr& eta0,
                            const std::vector<ProductFactor>& factors, const RewriteOptions& options = {});

/// Degree-N Taylor truncation of e_i phi, every monomial rewritten.
/// Errors: NotStronglyConnected (unless disabled), DomainError, NoPath.
RewriteResult synth_taylor(const CommGraph& g, const AgentIndexMap& m, int target, const Expr& phi,
                           const RewriteOptions& options = {});

/// Term-by-term rewrite of a whole field: admissible terms become single
/// leaves, one foreign agent uses a chain, several use the product bracket.
/// Errors: Unrewritable, NoPath, NotSeparable (Simple strategy on a product).
RewriteResult rewrite(const CommGraph& g, const AgentIndexMap& m, const VectorField& target,
                      const RewriteOptions& options = {});

/// Factor split of one term: the part on the target's agent and one factor
/// per foreign agent. Throws NotSeparable if a factor mixes agents.
struct SeparatedTerm {
  Expr own;
  std::map<int, Expr> foreign;  // agent -> factor
};
SeparatedTerm separate_term(const AgentIndexMap& m, int target, const Expr& term);

/// Summands of e with products of sums distributed where a sum mixes agents.
std::vector<Expr> additive_terms(const AgentIndexMap& m, const Expr& e);

/// Augment the target's agent with first-order estimates xi_j of every foreign
/// variable it cannot read: xi_j' = -mu xi_j + mu z_j. The injection mu z_j is
/// rewritten with the simple choice; the local field reads xi_j instead of z_j.
/// This alters the nominal dynamics and needs its own stability check.
struct AugmentedSystem {
  int dimension = 0;
  AgentIndexMap map;
  double mu = 50.0;
  std::vector<std::pair<int, int>> estimates;  // (xi component, estimated component)
  VectorField drift;                           // local field plus -mu xi
  std::vector<RewriteResult> injections;       // mu z_j into xi_j
  bool passthrough = false;                    // nothing to estimate
  std::string caveat;

  /// drift + every injection, as the ideal augmented field.
  VectorField ideal_field() const;
};

AugmentedSystem synth_estimator(const CommGraph& g, const AgentIndexMap& m, const VectorField& target,
                                double mu = 50.0, const RewriteOptions& options = {});

struct VerificationReport {
  bool passed = true;
  bool leaves_admissible = true;
  int samples = 0;
  double max_error = 0.0;  // relative, scaled by max(1, |target|)
  int worst_component = -1;
  std::vector<double> worst_point;
  std::string message;
};

/// Sum of trees vs target at random points of the validity domain, plus the
/// structural admissibility check of every leaf.
VerificationReport verify(const RewriteResult& result, int samples, std::uint64_t seed, double tol = 1e-6);

/// JSON: {"strategy", "dim", "target", "validity", "tree" | "trees", ...}.
std::string to_json(const RewriteResult& r);
RewriteResult rewrite_result_from_json(std::string_view text);
std::string to_json(const AugmentedSystem& a);
std::string to_json(const VerificationReport& v);

}  // namespace liesynth
