#include "json_util.hpp"
#include "liesynth/rewrite.hpp"

#include <cmath>

namespace liesynth {

namespace detail {

json domain_to_json(const Domain& d) {
  json out = json::array();
  for (int k = 0; k < d.dimension(); ++k) {
    const auto& iv = d.interval(k);
    if (!iv.bounded() && std::isinf(iv.lo) && std::isinf(iv.hi)) continue;
    out.push_back(json{{"component", k + 1}, {"lo", number_json(iv.lo)}, {"hi", number_json(iv.hi)}});
  }
  return out;
}

Domain domain_from_json(const json& j, int dimension) {
  Domain d(dimension);
  if (j.is_null()) return d;
  if (!j.is_array()) malformed("\"validity\" must be a list");
  for (const auto& w : j) {
    if (!w.is_object() || !w.contains("component") || !w["component"].is_number_integer()) malformed("bad validity entry");
    const int c = w["component"].get<int>();
    if (c < 1 || c > dimension) malformed("validity component out of range");
    d.restrict(c - 1, Interval{number_from_json(w.at("lo")), number_from_json(w.at("hi"))});
  }
  return d;
}

}  // namespace detail

namespace {

using detail::json;

json graph_json(const CommGraph& g) {
  json edges = json::array();
  for (const auto& [i, j] : g.edges()) edges.push_back(json::array({i + 1, j + 1}));
  return json{{"n", g.node_count()}, {"edges", edges}};
}

CommGraph graph_from(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer()) detail::malformed("graph needs an integer n");
  const int n = j["n"].get<int>();
  std::vector<std::pair<int, int>> edges;
  if (j.contains("edges")) {
    for (const auto& e : j["edges"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
        detail::malformed("edges are [i, j] pairs");
      }
      const int a = e[0].get<int>();
      const int b = e[1].get<int>();
      if (a < 1 || b < 1 || a > n || b > n || a == b) detail::malformed("bad edge");
      edges.emplace_back(a - 1, b - 1);
    }
  }
  return CommGraph(n, std::move(edges));
}

json owners_json(const AgentIndexMap& m) {
  json out = json::array();
  for (int a : m.owners()) out.push_back(a + 1);
  return out;
}

AgentIndexMap owners_from(const json& j, int agents) {
  if (!j.is_array()) detail::malformed("\"owners\" must be a list");
  std::vector<int> owner;
  for (const auto& a : j) {
    if (!a.is_number_integer() || a.get<int>() < 1 || a.get<int>() > agents) detail::malformed("bad owner");
    owner.push_back(a.get<int>() - 1);
  }
  return AgentIndexMap::from_owners(agents, std::move(owner));
}

json result_json(const RewriteResult& r) {
  json out{{"strategy", std::string(to_string(r.strategy))}, {"dim", r.target.dimension()}};
  out["target"] = detail::field_to_json(r.target);
  out["validity"] = detail::domain_to_json(r.validity);
  if (r.trees.size() == 1) {
    out["tree"] = detail::tree_to_json(r.trees.front());
  } else {
    json ts = json::array();
    for (const auto& t : r.trees) ts.push_back(detail::tree_to_json(t));
    out["trees"] = ts;
  }
  json paths = json::array();
  for (const auto& p : r.paths) {
    json q = json::array();
    for (int v : p) q.push_back(v + 1);
    paths.push_back(q);
  }
  out["paths"] = paths;
  out["depth"] = r.max_depth();
  if (r.original) out["original"] = detail::field_to_json(*r.original);
  out["residual"] = r.residual ? detail::number_json(*r.residual) : json(nullptr);
  out["residual_exact"] = r.residual_exact;
  out["graph"] = graph_json(r.graph);
  out["owners"] = owners_json(r.map);
  return out;
}

}  // namespace

std::string to_json(const RewriteResult& r) { return result_json(r).dump(2) + "\n"; }

RewriteResult rewrite_result_from_json(std::string_view text) {
  json j = detail::parse_json(text);
  if (!j.is_object()) detail::malformed("rewrite result must be an object");
  RewriteResult r;
  if (!j.contains("target")) detail::malformed("rewrite result needs \"target\"");
  r.target = detail::field_from_json(j["target"]);
  const int n = r.target.dimension();
  try {
    r.strategy = strategy_from_string(j.value("strategy", std::string("auto")));
  } catch (const Error& e) {
    detail::malformed(e.what());
  }
  r.validity = detail::domain_from_json(j.contains("validity") ? j["validity"] : json(nullptr), n);
  if (j.contains("tree")) {
    r.trees.push_back(detail::tree_from_json(j["tree"]));
  } else if (j.contains("trees")) {
    if (!j["trees"].is_array()) detail::malformed("\"trees\" must be a list");
    for (const auto& t : j["trees"]) r.trees.push_back(detail::tree_from_json(t));
  }
  for (const auto& t : r.trees) {
    for (const auto& l : t.leaves()) {
      if (l.target >= n || l.source >= n) detail::malformed("leaf index beyond dim");
      for (int v : l.f.free_vars()) {
        if (v >= n) detail::malformed("leaf reads a variable beyond dim");
      }
    }
  }
  if (j.contains("paths") && j["paths"].is_array()) {
    for (const auto& p : j["paths"]) {
      Path q;
      for (const auto& v : p) q.push_back(v.get<int>() - 1);
      r.paths.push_back(q);
    }
  }
  if (j.contains("original") && !j["original"].is_null()) r.original = detail::field_from_json(j["original"]);
  if (j.contains("residual") && !j["residual"].is_null()) r.residual = detail::number_from_json(j["residual"]);
  r.residual_exact = j.value("residual_exact", false);
  if (j.contains("graph")) {
    r.graph = graph_from(j["graph"]);
    r.map = j.contains("owners") ? owners_from(j["owners"], r.graph.node_count()) : AgentIndexMap::identity(r.graph.node_count());
  }
  return r;
}

std::string to_json(const AugmentedSystem& a) {
  json out{{"strategy", "estimator"}, {"dim", a.dimension}, {"mu", a.mu}, {"passthrough", a.passthrough}};
  json est = json::array();
  for (const auto& [xi, v] : a.estimates) est.push_back(json{{"xi", xi + 1}, {"estimates", v + 1}});
  out["estimates"] = est;
  out["drift"] = detail::field_to_json(a.drift);
  json inj = json::array();
  for (const auto& r : a.injections) inj.push_back(result_json(r));
  out["injections"] = inj;
  out["owners"] = owners_json(a.map);
  out["caveat"] = a.caveat;
  return out.dump(2) + "\n";
}

std::string to_json(const VerificationReport& v) {
  json point = json::array();
  for (double x : v.worst_point) point.push_back(detail::number_json(x));
  json out{{"passed", v.passed},
           {"leaves_admissible", v.leaves_admissible},
           {"samples", v.samples},
           {"max_error", detail::number_json(v.max_error)},
           {"worst_component", v.worst_component < 0 ? json(nullptr) : json(v.worst_component + 1)},
           {"worst_point", point},
           {"message", v.message}};
  return out.dump(2) + "\n";
}

}  // namespace liesynth
