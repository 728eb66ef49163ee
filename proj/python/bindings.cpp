// JSON-in/JSON-out bindings; the Python package wraps them with dicts.

#include "liesynth/approx.hpp"
#include "liesynth/distopt.hpp"
#include "liesynth/error.hpp"
#include "liesynth/graph.hpp"
#include "liesynth/rewrite.hpp"
#include "liesynth/vector_field.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace py = pybind11;
using namespace liesynth;

namespace {

AgentIndexMap owners_map(const CommGraph& g, const std::optional<std::vector<int>>& owners) {
  if (!owners) return AgentIndexMap::identity(g.node_count());
  std::vector<int> zero_based;
  for (int a : *owners) zero_based.push_back(a - 1);
  return AgentIndexMap::from_owners(g.node_count(), std::move(zero_based));
}

std::string rewrite_json(const std::string& graph, const std::string& target, const std::string& strategy,
                         double alpha, double d, int degree, double box, bool allow_weak, double mu,
                         std::uint64_t seed, const std::optional<std::vector<int>>& owners) {
  CommGraph g = CommGraph::parse_edge_list(graph);
  AgentIndexMap m = owners_map(g, owners);
  VectorField f = vector_field_from_json(target);
  RewriteOptions o;
  o.strategy = strategy_from_string(strategy);
  o.trig = TrigParams{alpha, d};
  o.degree = degree;
  o.box = box;
  o.require_strong_connectivity = !allow_weak;
  o.seed = seed;
  if (o.strategy == Strategy::Estimator) return to_json(synth_estimator(g, m, f, mu, o));
  return to_json(rewrite(g, m, f, o));
}

std::pair<std::vector<double>, std::vector<std::vector<double>>> unpack(const Trajectory& t) {
  return {t.times, t.states};
}

SimulationOptions sim_options(double rho, int steps_per_period, std::optional<double> h, int record_every) {
  SimulationOptions o;
  o.rho = rho;
  o.steps_per_period = steps_per_period;
  o.h = h;
  o.record_every = record_every;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lie-bracket synthesis core";

  static py::exception<Error> error_type(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string code(to_string(e.code()));
      py::object err = py::reinterpret_borrow<py::object>(error_type.ptr())(code + ": " + e.what());
      err.attr("code") = code;
      PyErr_SetObject(error_type.ptr(), err.ptr());
    }
  });

  m.def("lie_bracket", [](const std::string& f, const std::string& g) {
    return to_json(lie_bracket(vector_field_from_json(f), vector_field_from_json(g)));
  });
  m.def("lie_bracket_numeric", [](const std::string& f, const std::string& g, const std::vector<double>& z) {
    return lie_bracket_numeric(vector_field_from_json(f), vector_field_from_json(g), z);
  });

  m.def("rewrite", &rewrite_json, py::arg("graph"), py::arg("target"), py::arg("strategy") = "auto",
        py::arg("alpha") = 0.5, py::arg("d") = 0.0, py::arg("degree") = 4, py::arg("box") = 0.5,
        py::arg("allow_weak") = false, py::arg("mu") = 50.0, py::arg("seed") = 0, py::arg("owners") = py::none());

  m.def(
      "verify",
      [](const std::string& result, int samples, std::uint64_t seed, double tol) {
        return to_json(verify(rewrite_result_from_json(result), samples, seed, tol));
      },
      py::arg("result"), py::arg("samples") = 64, py::arg("seed") = 0, py::arg("tol") = 1e-6);

  m.def(
      "simulate",
      [](const std::string& result, const std::vector<double>& z0, double T, double omega, bool ideal, double rho,
         int steps_per_period, std::optional<double> h, int record_every) {
        RewriteResult r = rewrite_result_from_json(result);
        SimulationOptions o = sim_options(rho, steps_per_period, h, record_every);
        py::gil_scoped_release release;
        if (ideal) {
          ApproxSystem sys = ApproxSystem::from_result(r);
          OscSchedule s = OscSchedule::build(sys, omega, rho);
          return unpack(bracket_trajectory(sys, z0, T, integration_step(s, T, o), record_every));
        }
        return unpack(approximate_bracket_trajectory(r, z0, T, omega, o));
      },
      py::arg("result"), py::arg("z0"), py::arg("T"), py::arg("omega") = 200.0, py::arg("ideal") = false,
      py::arg("rho") = 100.0, py::arg("steps_per_period") = 64, py::arg("h") = py::none(),
      py::arg("record_every") = 1);

  m.def(
      "sweep",
      [](const std::string& result, const std::vector<double>& z0, double T, const std::vector<double>& omegas,
         int jobs) {
        ApproxSystem sys = ApproxSystem::from_result(rewrite_result_from_json(result));
        py::gil_scoped_release release;
        std::vector<std::pair<double, double>> out;
        for (const auto& p : convergence_sweep(sys, z0, T, omegas, {}, jobs)) out.emplace_back(p.omega, p.sup_error);
        return out;
      },
      py::arg("result"), py::arg("z0"), py::arg("T"), py::arg("omegas"), py::arg("jobs") = 1);

  m.def(
      "solve_kkt",
      [](const std::string& problem) {
        KKTPoint k = solve_kkt_oracle(parse_problem_toml(problem));
        py::dict d;
        d["x"] = k.x;
        d["nu"] = k.nu;
        d["lambda"] = k.lambda;
        d["active"] = k.active;
        d["residual"] = k.residual;
        return d;
      },
      py::arg("problem"));

  m.def(
      "run_demo",
      [](const std::string& problem, double omega, double T) {
        SaddleProblem p = parse_problem_toml(problem);
        DemoOptions o;
        o.omega = omega;
        o.T = T;
        py::gil_scoped_release release;
        return to_json(run_demo(p, o));
      },
      py::arg("problem"), py::arg("omega") = 400.0, py::arg("T") = 40.0);
}
