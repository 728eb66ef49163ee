#include "liesynth/bracket_tree.hpp"

#include "json_util.hpp"
#include "liesynth/error.hpp"
#include "liesynth/sexpr.hpp"

#include <algorithm>
#include <variant>

namespace liesynth {

struct BracketTree::Node {
  struct Pair {
    BracketTree left;
    BracketTree right;
  };
  std::variant<SeparableField, Pair> content;
  Nesting nesting = Nesting::Custom;
  int depth = 0;
};

BracketTree BracketTree::leaf(SeparableField field) {
  auto n = std::make_shared<Node>();
  n->content = std::move(field);
  return BracketTree(std::move(n));
}

BracketTree BracketTree::bracket(BracketTree left, BracketTree right, Nesting nesting) {
  auto n = std::make_shared<Node>();
  n->depth = 1 + std::max(left.depth(), right.depth());
  n->content = Node::Pair{std::move(left), std::move(right)};
  n->nesting = nesting;
  return BracketTree(std::move(n));
}

BracketTree BracketTree::right_nested(const std::vector<SeparableField>& links) {
  if (links.empty()) throw Error(ErrorCode::PathTooShort, "a chain needs at least one link");
  BracketTree t = leaf(links.front());
  for (std::size_t k = 1; k < links.size(); ++k) t = bracket(leaf(links[k]), std::move(t), Nesting::Right);
  return t;
}

BracketTree BracketTree::left_nested(const std::vector<BracketTree>& psi) {
  if (psi.empty()) throw Error(ErrorCode::InvalidArgument, "empty product");
  BracketTree t = psi.back();
  for (std::size_t k = psi.size() - 1; k-- > 0;) t = bracket(std::move(t), psi[k], Nesting::Left);
  return t;
}

bool BracketTree::is_leaf() const { return std::holds_alternative<SeparableField>(node_->content); }

const SeparableField& BracketTree::field() const {
  if (!is_leaf()) throw Error(ErrorCode::InvalidArgument, "not a leaf");
  return std::get<SeparableField>(node_->content);
}

const BracketTree& BracketTree::left() const {
  if (is_leaf()) throw Error(ErrorCode::InvalidArgument, "not a bracket");
  return std::get<Node::Pair>(node_->content).left;
}

const BracketTree& BracketTree::right() const {
  if (is_leaf()) throw Error(ErrorCode::InvalidArgument, "not a bracket");
  return std::get<Node::Pair>(node_->content).right;
}

Nesting BracketTree::nesting() const { return node_->nesting; }

int BracketTree::depth() const { return node_->depth; }

std::vector<SeparableField> BracketTree::leaves() const {
  std::vector<SeparableField> out;
  std::vector<const BracketTree*> stack{this};
  while (!stack.empty()) {
    const BracketTree* t = stack.back();
    stack.pop_back();
    if (t->is_leaf()) {
      out.push_back(t->field());
    } else {
      stack.push_back(&t->right());
      stack.push_back(&t->left());
    }
  }
  return out;
}

VectorField to_vector_field(const BracketTree& t, int dimension) {
  if (t.is_leaf()) return t.field().to_vector_field(dimension);
  return lie_bracket(to_vector_field(t.left(), dimension), to_vector_field(t.right(), dimension));
}

std::vector<double> evaluate_tree(const BracketTree& t, int dimension, std::span<const double> point) {
  return to_vector_field(t, dimension).evaluate(point);
}

bool is_admissible_leaf(const CommGraph& g, const AgentIndexMap& m, const SeparableField& leaf) {
  if (leaf.target >= m.dimension() || leaf.source >= m.dimension()) return false;
  return is_admissible(g, m, leaf.target, leaf.source) && is_admissible_term(g, m, leaf.target, leaf.f);
}

bool all_leaves_admissible(const CommGraph& g, const AgentIndexMap& m, const BracketTree& t) {
  const auto ls = t.leaves();
  return std::all_of(ls.begin(), ls.end(), [&](const SeparableField& f) { return is_admissible_leaf(g, m, f); });
}

std::string to_json(const BracketTree& t) { return detail::tree_to_json(t).dump(); }

BracketTree bracket_tree_from_json(std::string_view text) { return detail::tree_from_json(detail::parse_json(text)); }

namespace detail {

json tree_to_json(const BracketTree& t) {
  if (t.is_leaf()) {
    const auto& f = t.field();
    json leaf{{"j", f.target + 1}, {"i", f.source + 1}, {"f", to_sexpr(f.f)}};
    if (f.factors) {
      leaf["f1"] = to_sexpr(f.factors->first);
      leaf["f2"] = to_sexpr(f.factors->second);
    }
    return json{{"leaf", leaf}};
  }
  return json{{"bracket", json{{"left", tree_to_json(t.left())}, {"right", tree_to_json(t.right())}}}};
}

BracketTree tree_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1) malformed("tree node must be {\"leaf\": ...} or {\"bracket\": ...}");
  if (j.contains("leaf")) {
    const auto& l = j["leaf"];
    if (!l.is_object() || !l.contains("j") || !l.contains("i") || !l.contains("f")) malformed("leaf needs j, i, f");
    if (!l["j"].is_number_integer() || !l["i"].is_number_integer() || !l["f"].is_string()) malformed("bad leaf fields");
    const int target = l["j"].get<int>() - 1;
    const int source = l["i"].get<int>() - 1;
    if (target < 0 || source < 0) malformed("leaf indices are 1-based");
    SeparableField f(target, source, parse_sexpr(l["f"].get<std::string>()));
    if (l.contains("f1") && l.contains("f2")) {
      if (!l["f1"].is_string() || !l["f2"].is_string()) malformed("bad leaf factors");
      f.factors = std::make_pair(parse_sexpr(l["f1"].get<std::string>()), parse_sexpr(l["f2"].get<std::string>()));
    }
    return BracketTree::leaf(std::move(f));
  }
  if (j.contains("bracket")) {
    const auto& b = j["bracket"];
    if (!b.is_object() || !b.contains("left") || !b.contains("right")) malformed("bracket needs left and right");
    return BracketTree::bracket(tree_from_json(b["left"]), tree_from_json(b["right"]));
  }
  malformed("tree node must be {\"leaf\": ...} or {\"bracket\": ...}");
}

}  // namespace detail

}  // namespace liesynth
