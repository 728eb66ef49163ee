#include "liesynth/graph.hpp"

#include "liesynth/error.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace liesynth {

CommGraph::CommGraph(int node_count, std::vector<std::pair<int, int>> edges) : node_count_(node_count) {
  if (node_count < 0) throw Error(ErrorCode::InvalidArgument, "negative node count");
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= node_count || j >= node_count) {
      throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
    }
    if (i == j) throw Error(ErrorCode::InvalidArgument, "self-loops are not allowed");
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  out_.assign(static_cast<std::size_t>(node_count), {});
  in_.assign(static_cast<std::size_t>(node_count), {});
  for (const auto& [i, j] : edges_) {
    out_[static_cast<std::size_t>(i)].push_back(j);
    in_[static_cast<std::size_t>(j)].push_back(i);
  }
  for (auto& v : in_) std::sort(v.begin(), v.end());
}

bool CommGraph::has_edge(int from, int to) const {
  if (from < 0 || from >= node_count_) return false;
  const auto& nb = out_[static_cast<std::size_t>(from)];
  return std::binary_search(nb.begin(), nb.end(), to);
}

CommGraph CommGraph::with_edge(int from, int to) const {
  auto e = edges_;
  e.emplace_back(from, to);
  return CommGraph(node_count_, std::move(e));
}

CommGraph CommGraph::parse_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int n = -1;
  int line_no = 0;
  std::vector<std::pair<int, int>> edges;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ParseError, "graph line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (n < 0) {
      if (first.rfind("n=", 0) != 0) fail("expected n=<int> header");
      try {
        std::size_t used = 0;
        n = std::stoi(first.substr(2), &used);
        if (used != first.size() - 2 || n < 0) fail("bad node count");
      } catch (const std::logic_error&) {
        fail("bad node count");
      }
      std::string rest;
      if (ls >> rest) fail("unexpected text after header");
      continue;
    }
    int i = 0;
    int j = 0;
    try {
      std::size_t used = 0;
      i = std::stoi(first, &used);
      if (used != first.size()) fail("bad node id");
    } catch (const std::logic_error&) {
      fail("bad node id");
    }
    std::string rest;
    if (!(ls >> j)) fail("expected two node ids");
    if (ls >> rest) fail("unexpected text after edge");
    if (i < 1 || j < 1 || i > n || j > n) fail("node id out of range");
    if (i == j) fail("self-loop");
    edges.emplace_back(i - 1, j - 1);
  }
  if (n < 0) throw Error(ErrorCode::ParseError, "graph: missing n=<int> header");
  return CommGraph(n, std::move(edges));
}

std::string CommGraph::to_edge_list() const {
  std::ostringstream os;
  os << "n=" << node_count_ << "\n";
  for (const auto& [i, j] : edges_) os << i + 1 << " " << j + 1 << "\n";
  return os.str();
}

IntMatrix adjacency(const CommGraph& g) {
  IntMatrix a = IntMatrix::Zero(g.node_count(), g.node_count());
  for (const auto& [i, j] : g.edges()) a(i, j) = 1;
  return a;
}

IntMatrix out_degree(const CommGraph& g) {
  IntMatrix d = IntMatrix::Zero(g.node_count(), g.node_count());
  for (int i = 0; i < g.node_count(); ++i) d(i, i) = static_cast<int>(g.out_neighbors(i).size());
  return d;
}

IntMatrix laplacian(const CommGraph& g) { return out_degree(g) - adjacency(g); }

namespace {

void check_node(const CommGraph& g, int v) {
  if (v < 0 || v >= g.node_count()) throw Error(ErrorCode::InvalidArgument, "node out of range");
}

void dfs(const CommGraph& g, int to, int max_len, Path& current, std::vector<char>& on_path,
         std::vector<Path>& out) {
  int v = current.back();
  if (v == to) {
    out.push_back(current);
    return;
  }
  if (static_cast<int>(current.size()) >= max_len) return;
  for (int w : g.out_neighbors(v)) {
    if (on_path[static_cast<std::size_t>(w)]) continue;
    on_path[static_cast<std::size_t>(w)] = 1;
    current.push_back(w);
    dfs(g, to, max_len, current, on_path, out);
    current.pop_back();
    on_path[static_cast<std::size_t>(w)] = 0;
  }
}

std::vector<int> reach(const CommGraph& g, int start, bool forward) {
  std::vector<int> seen(static_cast<std::size_t>(g.node_count()), 0);
  std::deque<int> queue{start};
  seen[static_cast<std::size_t>(start)] = 1;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int w : forward ? g.out_neighbors(v) : g.in_neighbors(v)) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        queue.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

std::vector<Path> simple_paths(const CommGraph& g, int from, int to, std::optional<int> max_len) {
  check_node(g, from);
  check_node(g, to);
  std::vector<Path> out;
  Path current{from};
  std::vector<char> on_path(static_cast<std::size_t>(g.node_count()), 0);
  on_path[static_cast<std::size_t>(from)] = 1;
  dfs(g, to, max_len.value_or(g.node_count()), current, on_path, out);
  return out;
}

std::optional<Path> shortest_path(const CommGraph& g, int from, int to) {
  check_node(g, from);
  check_node(g, to);
  // Distances to `to` along reversed edges, then a greedy walk that always
  // takes the smallest neighbour one step closer.
  const auto n = static_cast<std::size_t>(g.node_count());
  std::vector<int> dist(n, -1);
  std::deque<int> queue{to};
  dist[static_cast<std::size_t>(to)] = 0;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int u : g.in_neighbors(v)) {
      if (dist[static_cast<std::size_t>(u)] < 0) {
        dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
        queue.push_back(u);
      }
    }
  }
  if (dist[static_cast<std::size_t>(from)] < 0) return std::nullopt;
  Path path{from};
  int v = from;
  while (v != to) {
    for (int w : g.out_neighbors(v)) {  // sorted ascending
      if (dist[static_cast<std::size_t>(w)] == dist[static_cast<std::size_t>(v)] - 1) {
        v = w;
        break;
      }
    }
    path.push_back(v);
  }
  return path;
}

bool is_simple_path(const CommGraph& g, std::span<const int> path) {
  if (path.empty()) return false;
  std::vector<char> seen(static_cast<std::size_t>(g.node_count()), 0);
  for (std::size_t k = 0; k < path.size(); ++k) {
    int v = path[k];
    if (v < 0 || v >= g.node_count() || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
    if (k > 0 && !g.has_edge(path[k - 1], v)) return false;
  }
  return true;
}

bool is_strongly_connected(const CommGraph& g) {
  if (g.node_count() <= 1) return true;
  auto f = reach(g, 0, true);
  auto b = reach(g, 0, false);
  return std::all_of(f.begin(), f.end(), [](int x) { return x != 0; }) &&
         std::all_of(b.begin(), b.end(), [](int x) { return x != 0; });
}

// ---------------------------------------------------------------------------

AgentIndexMap AgentIndexMap::identity(int agent_count) {
  std::vector<int> owner(static_cast<std::size_t>(agent_count));
  for (int i = 0; i < agent_count; ++i) owner[static_cast<std::size_t>(i)] = i;
  return from_owners(agent_count, std::move(owner));
}

AgentIndexMap AgentIndexMap::from_counts(std::span<const int> eq_counts, std::span<const int> ineq_counts) {
  if (eq_counts.size() != ineq_counts.size()) {
    throw Error(ErrorCode::InvalidArgument, "equality and inequality count vectors differ in length");
  }
  const int n = static_cast<int>(eq_counts.size());
  std::vector<int> owner;
  for (int i = 0; i < n; ++i) owner.push_back(i);
  for (int i = 0; i < n; ++i) {
    if (eq_counts[static_cast<std::size_t>(i)] < 0) throw Error(ErrorCode::InvalidArgument, "negative count");
    owner.insert(owner.end(), static_cast<std::size_t>(eq_counts[static_cast<std::size_t>(i)]), i);
  }
  for (int i = 0; i < n; ++i) {
    if (ineq_counts[static_cast<std::size_t>(i)] < 0) throw Error(ErrorCode::InvalidArgument, "negative count");
    owner.insert(owner.end(), static_cast<std::size_t>(ineq_counts[static_cast<std::size_t>(i)]), i);
  }
  return from_owners(n, std::move(owner));
}

AgentIndexMap AgentIndexMap::from_owners(int agent_count, std::vector<int> owner) {
  for (int a : owner) {
    if (a < 0 || a >= agent_count) throw Error(ErrorCode::InvalidArgument, "component owner out of range");
  }
  AgentIndexMap m;
  m.owner_ = std::move(owner);
  m.rebuild_blocks(agent_count);
  for (const auto& b : m.blocks_) {
    if (b.empty()) throw Error(ErrorCode::InvalidArgument, "every agent must own at least one component");
  }
  return m;
}

void AgentIndexMap::rebuild_blocks(int agent_count) {
  blocks_.assign(static_cast<std::size_t>(agent_count), {});
  for (int k = 0; k < dimension(); ++k) blocks_[static_cast<std::size_t>(owner_[static_cast<std::size_t>(k)])].push_back(k);
}

int AgentIndexMap::agent_of(int component) const {
  if (component < 0 || component >= dimension()) throw Error(ErrorCode::InvalidArgument, "component out of range");
  return owner_[static_cast<std::size_t>(component)];
}

const std::vector<int>& AgentIndexMap::block(int agent) const {
  if (agent < 0 || agent >= agent_count()) throw Error(ErrorCode::InvalidArgument, "agent out of range");
  return blocks_[static_cast<std::size_t>(agent)];
}

AgentIndexMap AgentIndexMap::with_extra_components(int agent, int count) const {
  std::vector<int> owner = owner_;
  owner.insert(owner.end(), static_cast<std::size_t>(count), agent);
  return from_owners(agent_count(), std::move(owner));
}

bool is_admissible(const CommGraph& g, const AgentIndexMap& m, int target, int source) {
  if (g.node_count() != m.agent_count()) {
    throw Error(ErrorCode::InvalidArgument, "graph and index map disagree on the number of agents");
  }
  const int k = m.agent_of(target);
  const int l = m.agent_of(source);
  if (k == l) return !g.out_neighbors(k).empty();
  return g.has_edge(k, l);
}

bool is_admissible_term(const CommGraph& g, const AgentIndexMap& m, int target, const Expr& f) {
  for (int v : f.free_vars()) {
    if (v >= m.dimension() || !is_admissible(g, m, target, v)) return false;
  }
  // A constant term only needs the agent's own information.
  if (f.free_vars().empty()) return is_admissible(g, m, target, target);
  return true;
}

}  // namespace liesynth
