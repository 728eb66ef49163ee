// liesynth command-line driver: rewrite, verify, simulate, sweep, demo.

#include "liesynth/approx.hpp"
#include "liesynth/distopt.hpp"
#include "liesynth/error.hpp"
#include "liesynth/graph.hpp"
#include "liesynth/number.hpp"
#include "liesynth/rewrite.hpp"
#include "liesynth/vector_field.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace liesynth;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::NoPath:
    case ErrorCode::Unrewritable:
    case ErrorCode::NotStronglyConnected: return 2;
    case ErrorCode::ParseError: return 3;
    default: return 1;
  }
}

int fail(ErrorCode c, const std::string& msg) {
  std::string line = msg;
  for (char& ch : line) {
    if (ch == '\n') ch = ' ';
  }
  std::cerr << "ERROR " << to_string(c) << ": " << line << "\n";
  return exit_code(c);
}

std::vector<int> parse_index_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v - 1);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, what + ": expected comma-separated 1-based indices, got '" + text + "'");
    }
  }
  return out;
}

AgentIndexMap make_map(const CommGraph& g, const std::string& owners) {
  if (owners.empty()) return AgentIndexMap::identity(g.node_count());
  auto owner = parse_index_list(owners, "--owners");
  for (int a : owner) {
    if (a >= g.node_count()) throw Error(ErrorCode::InvalidArgument, "--owners names an agent beyond the graph");
  }
  return AgentIndexMap::from_owners(g.node_count(), std::move(owner));
}

std::vector<double> start_state(const std::vector<double>& z0, int dimension) {
  if (z0.empty()) return std::vector<double>(static_cast<std::size_t>(dimension), 0.0);
  if (static_cast<int>(z0.size()) != dimension) {
    throw Error(ErrorCode::InvalidArgument, "--z0 has " + std::to_string(z0.size()) + " entries, state has " +
                                                std::to_string(dimension));
  }
  return z0;
}

struct RewriteArgs {
  std::string graph, target, out, owners, strategy = "auto";
  std::vector<std::string> paths;
  double alpha = 0.5, d = 0.0, mu = 50.0, box = 0.5;
  int degree = 4;
  std::vector<double> center;
  bool weak = false;
  std::uint64_t seed = 0;
};

int cmd_rewrite(const RewriteArgs& a) {
  CommGraph g = CommGraph::parse_edge_list(read_file(a.graph));
  AgentIndexMap m = make_map(g, a.owners);
  VectorField target = vector_field_from_json(read_file(a.target));
  RewriteOptions o;
  o.strategy = strategy_from_string(a.strategy);
  o.trig = TrigParams{a.alpha, a.d};
  for (const auto& p : a.paths) o.paths.push_back(parse_index_list(p, "--path"));
  o.degree = a.degree;
  o.box = a.box;
  o.center = a.center;
  o.require_strong_connectivity = !a.weak;
  o.seed = a.seed;
  if (o.strategy == Strategy::Estimator) {
    emit(a.out, to_json(synth_estimator(g, m, target, a.mu, o)));
  } else {
    emit(a.out, to_json(rewrite(g, m, target, o)));
  }
  return 0;
}

struct VerifyArgs {
  std::string tree, out;
  int samples = 64;
  std::uint64_t seed = 0;
  double tol = 1e-6;
};

int cmd_verify(const VerifyArgs& a) {
  RewriteResult r = rewrite_result_from_json(read_file(a.tree));
  VerificationReport rep = verify(r, a.samples, a.seed, a.tol);
  emit(a.out, to_json(rep));
  if (!rep.passed) {
    std::ostringstream msg;
    msg << rep.message;
    if (rep.worst_component >= 0) {
      msg << "; max error " << format_double(rep.max_error) << " in component " << rep.worst_component + 1 << " at z = (";
      for (std::size_t i = 0; i < rep.worst_point.size(); ++i) msg << (i ? ", " : "") << format_double(rep.worst_point[i]);
      msg << ")";
    }
    return fail(ErrorCode::VerificationFailed, msg.str());
  }
  return 0;
}

struct SimArgs {
  std::string tree, out;
  double omega = 200.0, T = 2.0, rho = 100.0;
  std::optional<double> dt;
  int steps_per_period = 64, record_every = 1;
  std::vector<double> z0;
  bool ideal = false;
};

SimulationOptions sim_options(const SimArgs& a) {
  SimulationOptions o;
  o.rho = a.rho;
  o.steps_per_period = a.steps_per_period;
  o.h = a.dt;
  o.record_every = a.record_every;
  return o;
}

int cmd_simulate(const SimArgs& a) {
  RewriteResult r = rewrite_result_from_json(read_file(a.tree));
  const int n = r.target.dimension();
  std::vector<double> z0 = start_state(a.z0, n);
  Trajectory tr;
  if (a.ideal) {
    ApproxSystem sys = ApproxSystem::from_result(r);
    OscSchedule s = OscSchedule::build(sys, a.omega, a.rho);
    tr = bracket_trajectory(sys, z0, a.T, integration_step(s, a.T, sim_options(a)), a.record_every);
  } else {
    tr = approximate_bracket_trajectory(r, z0, a.T, a.omega, sim_options(a));
  }
  emit(a.out, tr.to_csv());
  return 0;
}

struct SweepArgs {
  SimArgs sim;
  std::vector<double> omegas{50.0, 200.0, 800.0};
  int jobs = 1;
};

int cmd_sweep(const SweepArgs& a) {
  RewriteResult r = rewrite_result_from_json(read_file(a.sim.tree));
  ApproxSystem sys = ApproxSystem::from_result(r);
  auto pts = convergence_sweep(sys, start_state(a.sim.z0, sys.dimension), a.sim.T, a.omegas, sim_options(a.sim), a.jobs);
  emit(a.sim.out, sweep_csv(pts));
  return 0;
}

struct DemoArgs {
  std::string problem, out, trajectory;
  double omega = 400.0, T = 40.0, window = 0.1;
  std::optional<double> dt;
  int steps_per_period = 64, record_every = 100;
  bool timing = false;
};

int cmd_demo(const DemoArgs& a) {
  SaddleProblem p = load_problem(a.problem);
  DemoOptions o;
  o.omega = a.omega;
  o.T = a.T;
  o.window = a.window;
  o.sim.h = a.dt;
  o.sim.steps_per_period = a.steps_per_period;
  o.record_every = a.record_every;
  o.timing = a.timing;
  DemoReport r = run_demo(p, o);
  emit(a.out, to_json(r));
  if (!a.trajectory.empty()) emit(a.trajectory, r.trajectory.to_csv());
  return 0;
}

void add_sim_flags(CLI::App* c, SimArgs& a) {
  c->add_option("--tree", a.tree, "Rewrite result JSON")->required()->check(CLI::ExistingFile);
  c->add_option("--T", a.T, "Horizon")->capture_default_str();
  c->add_option("--dt", a.dt, "Explicit RK4 step (at most 1/20 of the fastest period)");
  c->add_option("--steps-per-period", a.steps_per_period, "Steps per fastest period when --dt is absent")
      ->capture_default_str();
  c->add_option("--rho", a.rho, "Frequency ratio between bracket levels")->capture_default_str();
  c->add_option("--z0", a.z0, "Initial state (default zeros)")->delimiter(',');
  c->add_option("--out", a.out, "Output CSV (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nested Lie-bracket synthesis, verification and oscillatory-input simulation"};
  app.set_config("--config", "", "TOML run config; command-line flags take precedence");
  app.require_subcommand(1);

  RewriteArgs rw;
  auto* c_rw = app.add_subcommand("rewrite", "Rewrite a target field into admissible Lie brackets");
  c_rw->add_option("--graph", rw.graph, "Edge-list graph file")->required()->check(CLI::ExistingFile);
  c_rw->add_option("--target", rw.target, "Target vector field JSON")->required()->check(CLI::ExistingFile);
  c_rw->add_option("--strategy", rw.strategy, "auto|simple|trig|product|taylor|estimator")->capture_default_str();
  c_rw->add_option("--alpha", rw.alpha, "Trig family alpha")->capture_default_str();
  c_rw->add_option("--d", rw.d, "Trig family center d")->capture_default_str();
  c_rw->add_option("--degree", rw.degree, "Taylor degree")->capture_default_str();
  c_rw->add_option("--box", rw.box, "Taylor residual box half-width")->capture_default_str();
  c_rw->add_option("--center", rw.center, "Taylor expansion point (default origin)")->delimiter(',');
  c_rw->add_flag("--allow-weak", rw.weak, "Taylor: skip the strong-connectivity requirement");
  c_rw->add_option("--mu", rw.mu, "Estimator gain")->capture_default_str();
  c_rw->add_option("--path", rw.paths, "Explicit agent path, e.g. 1,2,3 (repeatable)");
  c_rw->add_option("--owners", rw.owners, "Owning agent of each state component, e.g. 1,2,1");
  c_rw->add_option("--seed", rw.seed, "Seed for residual samples")->capture_default_str();
  c_rw->add_option("--out", rw.out, "Output JSON (default stdout)");

  VerifyArgs vf;
  auto* c_vf = app.add_subcommand("verify", "Check a rewrite result symbolically and at random points");
  c_vf->add_option("--tree", vf.tree, "Rewrite result JSON")->required()->check(CLI::ExistingFile);
  c_vf->add_option("--samples", vf.samples, "Sample points")->capture_default_str();
  c_vf->add_option("--seed", vf.seed, "Sample seed")->capture_default_str();
  c_vf->add_option("--tol", vf.tol, "Relative tolerance")->capture_default_str();
  c_vf->add_option("--out", vf.out, "Output JSON (default stdout)");

  SimArgs sm;
  auto* c_sm = app.add_subcommand("simulate", "Integrate the approximating (or ideal) system");
  add_sim_flags(c_sm, sm);
  c_sm->add_option("--omega", sm.omega, "Base frequency")->capture_default_str();
  c_sm->add_option("--record-every", sm.record_every, "Keep every k-th step")->capture_default_str();
  c_sm->add_flag("--ideal", sm.ideal, "Integrate the bracket system instead");

  SweepArgs sw;
  auto* c_sw = app.add_subcommand("sweep", "Sup-norm error against the bracket system over several frequencies");
  add_sim_flags(c_sw, sw.sim);
  c_sw->add_option("--omega", sw.omegas, "Increasing frequencies")->delimiter(',')->capture_default_str();
  c_sw->add_option("--jobs", sw.jobs, "Parallel integrations")->capture_default_str();

  DemoArgs dm;
  auto* c_dm = app.add_subcommand("demo", "Distributed saddle-point demo on a problem file");
  c_dm->add_option("--problem", dm.problem, "Problem TOML")->required()->check(CLI::ExistingFile);
  c_dm->add_option("--omega", dm.omega, "Base frequency")->capture_default_str();
  c_dm->add_option("--T", dm.T, "Horizon")->capture_default_str();
  c_dm->add_option("--dt", dm.dt, "Explicit RK4 step");
  c_dm->add_option("--steps-per-period", dm.steps_per_period, "Steps per fastest period")->capture_default_str();
  c_dm->add_option("--window", dm.window, "Trailing fraction of T averaged into x_bar")->capture_default_str();
  c_dm->add_option("--record-every", dm.record_every, "Trajectory thinning")->capture_default_str();
  c_dm->add_flag("--timing", dm.timing, "Report wall-clock runtime (breaks byte-identical output)");
  c_dm->add_option("--out", dm.out, "Report JSON (default stdout)");
  c_dm->add_option("--trajectory", dm.trajectory, "Trajectory CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorCode::InvalidArgument, e.what());
  }

  try {
    if (*c_rw) return cmd_rewrite(rw);
    if (*c_vf) return cmd_verify(vf);
    if (*c_sm) return cmd_simulate(sm);
    if (*c_sw) return cmd_sweep(sw);
    if (*c_dm) return cmd_demo(dm);
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(ErrorCode::InvalidArgument, e.what());
  }
  return 1;
}
