#include "doctest.h"

#include "liesynth/error.hpp"
#include "liesynth/graph.hpp"
#include "liesynth/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <set>

using namespace liesynth;

namespace {

// Nodes 1..5 in text, 0..4 here. Edges 1->2, 2->3, 1->4, 4->5.
CommGraph example_graph() { return CommGraph(5, {{0, 1}, {1, 2}, {0, 3}, {3, 4}}); }

CommGraph random_graph(Rng& rng, int n, double density) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && rng.unit() < density) edges.emplace_back(i, j);
    }
  }
  return CommGraph(n, edges);
}

// Independent enumeration: every ordered selection of distinct intermediate
// nodes, kept when each consecutive pair is an edge.
std::set<Path> brute_force_paths(const CommGraph& g, int from, int to) {
  std::set<Path> out;
  if (from == to) {
    out.insert(Path{from});
    return out;
  }
  std::vector<int> rest;
  for (int v = 0; v < g.node_count(); ++v) {
    if (v != from && v != to) rest.push_back(v);
  }
  const int r = static_cast<int>(rest.size());
  for (int mask = 0; mask < (1 << r); ++mask) {
    std::vector<int> mid;
    for (int b = 0; b < r; ++b) {
      if (mask & (1 << b)) mid.push_back(rest[static_cast<std::size_t>(b)]);
    }
    std::sort(mid.begin(), mid.end());
    do {
      Path p{from};
      p.insert(p.end(), mid.begin(), mid.end());
      p.push_back(to);
      bool ok = true;
      for (std::size_t k = 1; k < p.size() && ok; ++k) ok = g.has_edge(p[k - 1], p[k]);
      if (ok) out.insert(p);
    } while (std::next_permutation(mid.begin(), mid.end()));
  }
  return out;
}

}  // namespace

TEST_CASE("laplacian: empty graph is zero") {
  CommGraph g(3, {});
  CHECK(laplacian(g) == IntMatrix::Zero(3, 3));
}

TEST_CASE("laplacian: example graph row 1") {
  IntMatrix l = laplacian(example_graph());
  Eigen::RowVectorXi row(5);
  row << 2, -1, 0, -1, 0;
  CHECK(l.row(0) == row);
  CHECK(l(1, 1) == 1);
  CHECK(l(1, 2) == -1);
  CHECK(l.row(2).isZero());
  CHECK(l.row(4).isZero());
}

TEST_CASE("laplacian: single edge") {
  IntMatrix l = laplacian(CommGraph(2, {{0, 1}}));
  IntMatrix expected(2, 2);
  expected << 1, -1, 0, 0;
  CHECK(l == expected);
}

TEST_CASE("property: laplacian structure on random graphs") {
  Rng rng(19);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(rng.below(7));
    CommGraph g = random_graph(rng, n, 0.35);
    IntMatrix a = adjacency(g);
    IntMatrix l = laplacian(g);
    for (int i = 0; i < n; ++i) {
      CHECK(l.row(i).sum() == 0);
      CHECK(a(i, i) == 0);
      for (int j = 0; j < n; ++j) {
        CHECK((a(i, j) == 0 || a(i, j) == 1));
        if (i != j) CHECK((l(i, j) != 0) == g.has_edge(i, j));
      }
    }
  }
}

TEST_CASE("simple_paths: example graph") {
  CommGraph g = example_graph();
  CHECK(simple_paths(g, 0, 2) == std::vector<Path>{{0, 1, 2}});
  CHECK(simple_paths(g, 2, 0).empty());
  for (int i = 0; i < 5; ++i) CHECK(simple_paths(g, i, i) == std::vector<Path>{{i}});
  CHECK(simple_paths(g, 0, 2, 2).empty());
}

TEST_CASE("property: simple_paths matches brute-force enumeration") {
  Rng rng(4);
  int total = 0;
  for (int t = 0; t < 60; ++t) {
    const int n = 2 + static_cast<int>(rng.below(5));  // 2..6
    CommGraph g = random_graph(rng, n, 0.45);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        auto paths = simple_paths(g, a, b);
        auto oracle = brute_force_paths(g, a, b);
        CHECK(paths.size() == oracle.size());
        CHECK(std::set<Path>(paths.begin(), paths.end()) == oracle);
        for (const auto& p : paths) CHECK(is_simple_path(g, p));
        total += static_cast<int>(paths.size());
      }
    }
  }
  CHECK(total > 100);
}

TEST_CASE("shortest_path: fewest nodes, lexicographic ties") {
  // Two routes 0->1->3 and 0->2->3; the smaller wins.
  CommGraph g(4, {{0, 2}, {0, 1}, {1, 3}, {2, 3}, {0, 3}});
  CHECK(*shortest_path(g, 0, 3) == Path{0, 3});
  CommGraph h(4, {{0, 2}, {0, 1}, {1, 3}, {2, 3}});
  CHECK(*shortest_path(h, 0, 3) == Path{0, 1, 3});
  CHECK(!shortest_path(example_graph(), 2, 0).has_value());
  CHECK(*shortest_path(example_graph(), 0, 4) == Path{0, 3, 4});
}

TEST_CASE("property: shortest_path is the minimum of the enumeration") {
  Rng rng(31);
  for (int t = 0; t < 60; ++t) {
    const int n = 2 + static_cast<int>(rng.below(5));
    CommGraph g = random_graph(rng, n, 0.4);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        auto all = brute_force_paths(g, a, b);
        auto sp = shortest_path(g, a, b);
        REQUIRE(sp.has_value() == !all.empty());
        if (!sp) continue;
        Path best = *std::min_element(all.begin(), all.end(), [](const Path& x, const Path& y) {
          return x.size() != y.size() ? x.size() < y.size() : x < y;
        });
        CHECK(*sp == best);
      }
    }
  }
}

TEST_CASE("is_admissible: example graph") {
  CommGraph g = example_graph();
  auto m = AgentIndexMap::identity(5);
  CHECK(is_admissible(g, m, 0, 1));
  CHECK_FALSE(is_admissible(g, m, 0, 2));
  CHECK(is_admissible(g, m, 0, 0));
  CHECK_FALSE(is_admissible(g, m, 2, 2));  // node 3 has no out-edge
  CHECK_FALSE(is_admissible(g, m, 1, 0));
}

TEST_CASE("is_admissible: multiplier components follow their agent") {
  CommGraph g(2, {{0, 1}});
  std::vector<int> p{1, 0};
  std::vector<int> q{0, 1};
  auto m = AgentIndexMap::from_counts(p, q);
  // z = [x1, x2, nu_1 (agent 1), lambda_1 (agent 2)]
  CHECK(m.dimension() == 4);
  CHECK(m.block(0) == std::vector<int>{0, 2});
  CHECK(m.block(1) == std::vector<int>{1, 3});
  CHECK(is_admissible(g, m, 2, 3));
  CHECK(is_admissible(g, m, 2, 0));
  CHECK_FALSE(is_admissible(g, m, 3, 2));
  CHECK(is_admissible_term(g, m, 0, var(3) * var(2)));
  CHECK_FALSE(is_admissible_term(g, m, 1, var(2)));
}

TEST_CASE("property: admissibility is monotone under edge addition") {
  Rng rng(12);
  for (int t = 0; t < 80; ++t) {
    const int n = 2 + static_cast<int>(rng.below(5));
    CommGraph g = random_graph(rng, n, 0.3);
    auto m = AgentIndexMap::identity(n);
    int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    if (b >= a) ++b;
    CommGraph g2 = g.with_edge(a, b);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (is_admissible(g, m, i, j)) CHECK(is_admissible(g2, m, i, j));
      }
    }
  }
}

TEST_CASE("index map: blocks partition the complete state") {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + static_cast<int>(rng.below(5));
    std::vector<int> p(static_cast<std::size_t>(n));
    std::vector<int> q(static_cast<std::size_t>(n));
    for (auto& v : p) v = static_cast<int>(rng.below(3));
    for (auto& v : q) v = static_cast<int>(rng.below(3));
    auto m = AgentIndexMap::from_counts(p, q);
    const int total = n + std::accumulate(p.begin(), p.end(), 0) + std::accumulate(q.begin(), q.end(), 0);
    CHECK(m.dimension() == total);
    std::vector<int> seen(static_cast<std::size_t>(total), 0);
    for (int i = 0; i < n; ++i) {
      CHECK(m.block(i).front() == i);
      CHECK(static_cast<int>(m.block(i).size()) == 1 + p[static_cast<std::size_t>(i)] + q[static_cast<std::size_t>(i)]);
      for (int k : m.block(i)) {
        ++seen[static_cast<std::size_t>(k)];
        CHECK(m.index_set(k) == m.block(i));
      }
    }
    for (int s : seen) CHECK(s == 1);
  }
}

TEST_CASE("is_strongly_connected") {
  CHECK_FALSE(is_strongly_connected(example_graph()));
  CHECK(is_strongly_connected(CommGraph(3, {{0, 1}, {1, 2}, {2, 0}})));
  CHECK(is_strongly_connected(CommGraph(1, {})));
  CHECK_FALSE(is_strongly_connected(CommGraph(2, {})));
}

TEST_CASE("edge list: parse and print") {
  CommGraph g = CommGraph::parse_edge_list("# example\nn=5\n1 2\n2 3  # chain\n\n1 4\n4 5\n");
  CHECK(g.edges() == example_graph().edges());
  CHECK(CommGraph::parse_edge_list(g.to_edge_list()).edges() == g.edges());
  for (const char* bad : {"", "1 2\n", "n=2\n1 1\n", "n=2\n1 3\n", "n=x\n", "n=2\n1\n", "n=2\n1 2 3\n"}) {
    try {
      (void)CommGraph::parse_edge_list(bad);
      FAIL("expected ParseError for " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  }
  CHECK_THROWS_AS(CommGraph(2, {{1, 1}}), Error);
}
