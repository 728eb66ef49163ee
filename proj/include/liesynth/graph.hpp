#pragma once

#include "liesynth/expr.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace liesynth {

using IntMatrix = Eigen::MatrixXi;
using Path = std::vector<int>;

/// Time-invariant unweighted digraph on nodes 0..n-1. An edge (i, j) means
/// agent i receives information from agent j. Self-loops are rejected;
/// duplicate edges collapse.
class CommGraph {
 public:
  CommGraph() = default;
  CommGraph(int node_count, std::vector<std::pair<int, int>> edges);

  int node_count() const { return node_count_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  bool has_edge(int from, int to) const;
  const std::vector<int>& out_neighbors(int node) const { return out_.at(static_cast<std::size_t>(node)); }
  const std::vector<int>& in_neighbors(int node) const { return in_.at(static_cast<std::size_t>(node)); }

  CommGraph with_edge(int from, int to) const;

  /// Text form: a `n=<int>` header, then one `i j` pair per line (1-based).
  /// Blank lines and `#` comments are ignored. Throws Error(ParseError).
  static CommGraph parse_edge_list(std::string_view text);
  std::string to_edge_list() const;

 private:
  int node_count_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

IntMatrix adjacency(const CommGraph& g);
IntMatrix out_degree(const CommGraph& g);
/// L = D - A; every row sums to zero.
IntMatrix laplacian(const CommGraph& g);

/// Every directed simple path from `from` to `to` with at most max_len nodes
/// (default n), in lexicographic order. from == to yields the single path (from).
std::vector<Path> simple_paths(const CommGraph& g, int from, int to, std::optional<int> max_len = std::nullopt);

/// Fewest nodes; ties broken by the lexicographically smallest node sequence.
std::optional<Path> shortest_path(const CommGraph& g, int from, int to);

bool is_simple_path(const CommGraph& g, std::span<const int> path);
bool is_strongly_connected(const CommGraph& g);

/// Assignment of the stacked state components to agents. Every agent's block
/// is non-empty when built from counts (it contains the agent's own x_i).
class AgentIndexMap {
 public:
  AgentIndexMap() = default;

  /// One component per agent, I(j) = {j}.
  static AgentIndexMap identity(int agent_count);

  /// Complete state z = [x; nu; lambda]: agent i owns x_i, then its eq_counts[i]
  /// equality multipliers and its ineq_counts[i] inequality multipliers, with
  /// multipliers numbered agent by agent.
  static AgentIndexMap from_counts(std::span<const int> eq_counts, std::span<const int> ineq_counts);

  /// owner[k] is the agent of component k.
  static AgentIndexMap from_owners(int agent_count, std::vector<int> owner);

  int agent_count() const { return static_cast<int>(blocks_.size()); }
  int dimension() const { return static_cast<int>(owner_.size()); }
  int agent_of(int component) const;
  /// Components of one agent (sorted).
  const std::vector<int>& block(int agent) const;
  /// Components living on the same agent as `component`.
  const std::vector<int>& index_set(int component) const { return block(agent_of(component)); }
  /// Smallest component of the agent's block.
  int representative(int agent) const { return block(agent).front(); }

  /// Same map plus `count` new trailing components owned by `agent`.
  AgentIndexMap with_extra_components(int agent, int count) const;

  const std::vector<int>& owners() const { return owner_; }

 private:
  void rebuild_blocks(int agent_count);

  std::vector<int> owner_;
  std::vector<std::vector<int>> blocks_;
};

/// Whether component `target` may depend on component `source`: the owning
/// agents k = agent(target), l = agent(source) satisfy L[k][l] != 0. For the
/// same agent that is the diagonal (out-degree > 0). The field
/// h_{i,j} = e_j f_j(z_I(j), z_I(i)) is admissible iff is_admissible(g, m, j, i).
bool is_admissible(const CommGraph& g, const AgentIndexMap& m, int target, int source);

/// e_target * f is admissible: every free variable of f passes is_admissible.
bool is_admissible_term(const CommGraph& g, const AgentIndexMap& m, int target, const Expr& f);

}  // namespace liesynth
