#pragma once

#include "liesynth/graph.hpp"
#include "liesynth/vector_field.hpp"

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace liesynth {

/// How a tree was built. Only informational: evaluation follows the shape.
enum class Nesting { Right, Left, Custom };

/// Binary tree of separable fields (leaves) and Lie brackets (inner nodes).
class BracketTree {
 public:
  static BracketTree leaf(SeparableField field);
  static BracketTree bracket(BracketTree left, BracketTree right, Nesting nesting = Nesting::Custom);

  /// links[k] = h_{j_{k+2}, j_{k+1}} along a path j_1..j_r, r = links.size() + 1.
  /// Returns [links[r-2], [ ... [links[1], links[0]] ... ]]; one link is a bare leaf.
  static BracketTree right_nested(const std::vector<SeparableField>& links);

  /// [[ ... [[psi_m, psi_{m-1}], psi_{m-2}], ... ], psi_1] with psi[0] = psi_1.
  static BracketTree left_nested(const std::vector<BracketTree>& psi);

  bool is_leaf() const;
  const SeparableField& field() const;  // leaf only
  const BracketTree& left() const;      // bracket only
  const BracketTree& right() const;     // bracket only
  Nesting nesting() const;

  /// Bracket depth: a leaf is 0, [leaf, leaf] is 1.
  int depth() const;
  std::vector<SeparableField> leaves() const;  // left to right

 private:
  struct Node;
  explicit BracketTree(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Symbolic field obtained by applying lie_bracket bottom-up.
VectorField to_vector_field(const BracketTree& t, int dimension);
std::vector<double> evaluate_tree(const BracketTree& t, int dimension, std::span<const double> point);

/// The (target, source) pair and every variable f reads pass is_admissible.
bool is_admissible_leaf(const CommGraph& g, const AgentIndexMap& m, const SeparableField& leaf);
bool all_leaves_admissible(const CommGraph& g, const AgentIndexMap& m, const BracketTree& t);

/// {"leaf": {"j": 1, "i": 2, "f": "<s-expr>"}} or {"bracket": {"left": ..., "right": ...}}
std::string to_json(const BracketTree& t);
BracketTree bracket_tree_from_json(std::string_view text);

}  // namespace liesynth
