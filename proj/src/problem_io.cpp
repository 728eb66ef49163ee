#include "liesynth/distopt.hpp"
#include "liesynth/error.hpp"
#include "liesynth/sexpr.hpp"

#include "tomlplusplus/toml.hpp"

#include <fstream>
#include <sstream>

namespace liesynth {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::MalformedProblem, msg); }

double get_number(const toml::node& n, const std::string& what) {
  if (auto i = n.value_exact<int64_t>()) return static_cast<double>(*i);
  if (auto d = n.value_exact<double>()) return *d;
  bad(what + " must be a number");
}

int get_int(const toml::node& n, const std::string& what) {
  auto i = n.value_exact<int64_t>();
  if (!i) bad(what + " must be an integer");
  return static_cast<int>(*i);
}

int get_agent(const toml::node& n, int agents, const std::string& what) {
  const int a = get_int(n, what);
  if (a < 1 || a > agents) bad(what + " must be an agent in 1.." + std::to_string(agents));
  return a - 1;
}

Expr get_expr(const toml::node& n, const std::string& what) {
  auto s = n.value_exact<std::string>();
  if (!s) bad(what + " must be an s-expression string");
  return parse_sexpr(*s);
}

const toml::array& get_array(const toml::node& n, const std::string& what) {
  const auto* a = n.as_array();
  if (!a) bad(what + " must be an array");
  return *a;
}

}  // namespace

SaddleProblem parse_problem_toml(std::string_view text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "line " << e.source().begin.line << ": " << e.description();
    throw Error(ErrorCode::ParseError, msg.str());
  }

  SaddleProblem p;
  const auto* graph = root["graph"].as_table();
  if (!graph) bad("missing [graph] section");
  if (!graph->contains("n")) bad("[graph] needs n");
  const int n = get_int(*graph->get("n"), "graph.n");
  if (n < 1) bad("graph.n must be positive");
  std::vector<std::pair<int, int>> edges;
  if (const auto* e = graph->get("edges")) {
    for (const auto& pair : get_array(*e, "graph.edges")) {
      const auto& ij = get_array(pair, "graph edge");
      if (ij.size() != 2) bad("graph edges are [i, j] pairs");
      const int i = get_agent(*ij.get(0), n, "edge endpoint");
      const int j = get_agent(*ij.get(1), n, "edge endpoint");
      if (i == j) bad("self-loop on agent " + std::to_string(i + 1));
      edges.emplace_back(i, j);
    }
  }
  p.graph = CommGraph(n, std::move(edges));

  if (const auto* agents = root["agents"].as_table()) {
    if (const auto* c = agents->get("count")) {
      if (get_int(*c, "agents.count") != n) bad("agents.count must equal graph.n (one decision variable per agent)");
    }
  }

  const auto* obj = root["objective"].as_table();
  if (!obj) bad("missing [objective] section");
  if (const auto* terms = obj->get("terms")) {
    int k = 0;
    for (const auto& t : get_array(*terms, "objective.terms")) p.objective.push_back(get_expr(t, "objective term " + std::to_string(++k)));
  }
  if (const auto* e = obj->get("epsilon")) p.epsilon = get_number(*e, "objective.epsilon");
  if (const auto* b = obj->get("box")) p.box = get_number(*b, "objective.box");

  if (const auto* eq = root["equality"].as_table()) {
    if (const auto* rows = eq->get("rows")) {
      int k = 0;
      for (const auto& r : get_array(*rows, "equality.rows")) {
        const std::string what = "equality row " + std::to_string(++k);
        const auto* t = r.as_table();
        if (!t || !t->contains("a") || !t->contains("b") || !t->contains("owner")) bad(what + " needs a, b and owner");
        EqualityRow row;
        for (const auto& v : get_array(*t->get("a"), what + " a")) row.a.push_back(get_number(v, what + " coefficient"));
        row.b = get_number(*t->get("b"), what + " b");
        row.owner = get_agent(*t->get("owner"), n, what + " owner");
        p.equalities.push_back(std::move(row));
      }
    }
  }

  if (const auto* in = root["inequality"].as_table()) {
    if (const auto* cs = in->get("constraints")) {
      int k = 0;
      for (const auto& r : get_array(*cs, "inequality.constraints")) {
        const std::string what = "inequality " + std::to_string(++k);
        const auto* t = r.as_table();
        if (!t || !t->contains("c") || !t->contains("owner")) bad(what + " needs c and owner");
        p.inequalities.push_back({get_expr(*t->get("c"), what), get_agent(*t->get("owner"), n, what + " owner")});
      }
    }
  }

  p.validate();
  return p;
}

SaddleProblem load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem_toml(ss.str());
}

}  // namespace liesynth
