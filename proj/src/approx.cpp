#include "liesynth/approx.hpp"

#include "liesynth/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

namespace liesynth {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void check_state(std::span<const double> z, double t) {
  for (double v : z) {
    if (!std::isfinite(v) || std::abs(v) > divergence_bound) throw DivergenceError(t);
  }
}

long step_count(double T, double h) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw Error(ErrorCode::InvalidArgument, "horizon must be finite and >= 0");
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  if (T == 0.0) return 0;
  return std::max(1L, static_cast<long>(std::ceil(T / h - 1e-9)));
}

// Classical RK4 with preallocated stage buffers.
class Stepper {
 public:
  Stepper(const TimeField& f, std::size_t n) : f_(f), k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}

  void step(double t, double h, std::vector<double>& z) {
    const std::size_t n = z.size();
    f_(t, z, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = z[i] + 0.5 * h * k1_[i];
    f_(t + 0.5 * h, tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = z[i] + 0.5 * h * k2_[i];
    f_(t + 0.5 * h, tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = z[i] + h * k3_[i];
    f_(t + h, tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i) z[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

 private:
  const TimeField& f_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

struct FlatTerm {
  std::size_t component;
  Expr f;
};

std::vector<FlatTerm> flatten(const VectorField& v) {
  std::vector<FlatTerm> out;
  for (const auto& [k, e] : v.components()) out.push_back({static_cast<std::size_t>(k), e});
  return out;
}

TimeField autonomous(const VectorField& v) {
  auto terms = flatten(v);
  return [terms](double, std::span<const double> z, std::span<double> dz) {
    std::fill(dz.begin(), dz.end(), 0.0);
    for (const auto& t : terms) dz[t.component] += evaluate(t.f, z);
  };
}

void check_start(int dimension, const std::vector<double>& z0) {
  if (static_cast<int>(z0.size()) != dimension) {
    throw Error(ErrorCode::InvalidArgument, "initial state has dimension " + std::to_string(z0.size()) +
                                                ", system has " + std::to_string(dimension));
  }
}

void check_omega(double omega) {
  if (!(omega >= 10.0) || !std::isfinite(omega)) throw Error(ErrorCode::InvalidArgument, "omega must be >= 10");
}

}  // namespace

int Trajectory::dimension() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }

const std::vector<double>& Trajectory::final_state() const {
  if (states.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  return states.back();
}

std::string format_csv(double x) {
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string Trajectory::to_csv() const {
  std::ostringstream out;
  out << "t";
  for (int i = 1; i <= dimension(); ++i) out << ",z" << i;
  out << "\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    out << format_csv(times[k]);
    for (double v : states[k]) out << "," << format_csv(v);
    out << "\n";
  }
  return out.str();
}

Trajectory integrate(const TimeField& f, std::vector<double> z0, double T, double h, int record_every) {
  const long n = step_count(T, h);
  if (record_every < 1) throw Error(ErrorCode::InvalidArgument, "record_every must be >= 1");
  const double dt = n > 0 ? T / static_cast<double>(n) : 0.0;
  check_state(z0, 0.0);
  Trajectory out;
  out.times.push_back(0.0);
  out.states.push_back(z0);
  Stepper stepper(f, z0.size());
  for (long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    stepper.step(t, dt, z0);
    const double t1 = static_cast<double>(k + 1) * dt;
    check_state(z0, t1);
    if ((k + 1) % record_every == 0 || k + 1 == n) {
      out.times.push_back(t1);
      out.states.push_back(z0);
    }
  }
  return out;
}

Trajectory integrate(const VectorField& f, std::vector<double> z0, double T, double h, int record_every) {
  check_start(f.dimension(), z0);
  return integrate(autonomous(f), std::move(z0), T, h, record_every);
}

ApproxSystem::ApproxSystem(int dim, VectorField d, std::vector<BracketTree> t)
    : dimension(dim), drift(std::move(d)), trees(std::move(t)) {
  if (drift.dimension() == 0) drift = VectorField(dimension);
  if (drift.dimension() != dimension) throw Error(ErrorCode::InvalidArgument, "drift dimension mismatch");
  for (const auto& tree : trees) {
    for (const auto& l : tree.leaves()) {
      if (l.target >= dimension || l.source >= dimension) throw Error(ErrorCode::InvalidArgument, "leaf outside the state");
    }
  }
}

ApproxSystem ApproxSystem::from_tree(const BracketTree& tree, int dim) { return ApproxSystem(dim, VectorField(dim), {tree}); }

ApproxSystem ApproxSystem::from_result(const RewriteResult& r) {
  const int dim = r.target.dimension();
  return ApproxSystem(dim, VectorField(dim), r.trees);
}

ApproxSystem ApproxSystem::from_augmented(const AugmentedSystem& a) {
  std::vector<BracketTree> trees;
  for (const auto& inj : a.injections) trees.insert(trees.end(), inj.trees.begin(), inj.trees.end());
  return ApproxSystem(a.dimension, a.drift, std::move(trees));
}

VectorField ApproxSystem::bracket_field() const {
  VectorField out = drift;
  for (const auto& t : trees) out += to_vector_field(t, dimension);
  return out;
}

int ApproxSystem::max_depth() const {
  int d = 0;
  for (const auto& t : trees) d = std::max(d, t.depth());
  return d;
}

double OscInput::period_integral() const {
  const double period = two_pi / frequency;
  const double a = amplitude / frequency;
  return sine ? a * (1.0 - std::cos(frequency * period)) : a * std::sin(frequency * period);
}

OscSchedule OscSchedule::build(const ApproxSystem& system, double omega, double rho) {
  check_omega(omega);
  if (!(rho >= 10.0)) throw Error(ErrorCode::InvalidArgument, "frequency separation rho must be >= 10");
  OscSchedule s;
  s.omega = omega;
  s.rho = rho;
  s.dimension = system.dimension;
  for (const auto& [k, e] : system.drift.components()) s.terms.push_back({k, e, -1});

  int level1 = 0;
  int level2 = 0;
  auto add_pair = [&s](double frequency, int outer, int level) {
    const double amp = std::sqrt(2.0 * frequency);
    s.inputs.push_back({amp, frequency, false, outer, level});
    s.inputs.push_back({amp, frequency, true, -1, level});
    return static_cast<int>(s.inputs.size()) - 2;
  };
  auto add_leaf = [&s](const BracketTree& leaf, int input) {
    const auto& f = leaf.field();
    s.terms.push_back({f.target, f.f, input});
  };
  auto realize = [&](const BracketTree& child, int slow) {
    if (child.is_leaf()) {
      add_leaf(child, slow);
      return;
    }
    ++level2;
    const int p = add_pair(static_cast<double>(level2) * omega * rho, slow, 2);
    add_leaf(child.left(), p);
    add_leaf(child.right(), p + 1);
  };

  for (const auto& tree : system.trees) {
    const int depth = tree.depth();
    if (depth == 0) {
      add_leaf(tree, -1);
    } else if (depth == 1) {
      ++level1;
      const int p = add_pair(static_cast<double>(level1) * omega, -1, 1);
      add_leaf(tree.left(), p);
      add_leaf(tree.right(), p + 1);
    } else if (depth == 2) {
      ++level1;
      const int p = add_pair(static_cast<double>(level1) * omega, -1, 1);
      realize(tree.left(), p);
      realize(tree.right(), p + 1);
    } else {
      throw Error(ErrorCode::UnsupportedDepth,
                  "bracket depth " + std::to_string(depth) + " exceeds the supported depth 2");
    }
  }
  return s;
}

double OscSchedule::input(int k, double t) const {
  double u = 1.0;
  while (k >= 0) {
    const auto& in = inputs.at(static_cast<std::size_t>(k));
    u *= in.amplitude * (in.sine ? std::sin(in.frequency * t) : std::cos(in.frequency * t));
    k = in.outer;
  }
  return u;
}

double OscSchedule::max_frequency() const {
  double f = 0.0;
  for (const auto& in : inputs) f = std::max(f, in.frequency);
  return f;
}

int OscSchedule::pair_count(int level) const {
  int n = 0;
  for (std::size_t k = 0; k < inputs.size(); k += 2) {
    if (inputs[k].level == level) ++n;
  }
  return n;
}

TimeField OscSchedule::field() const {
  struct Eval {
    OscSchedule s;
    mutable std::vector<double> u;
    void operator()(double t, std::span<const double> z, std::span<double> dz) const {
      // inputs are listed slow before fast, so outer values are ready
      for (std::size_t k = 0; k < s.inputs.size(); ++k) {
        const auto& in = s.inputs[k];
        double v = in.amplitude * (in.sine ? std::sin(in.frequency * t) : std::cos(in.frequency * t));
        if (in.outer >= 0) v *= u[static_cast<std::size_t>(in.outer)];
        u[k] = v;
      }
      std::fill(dz.begin(), dz.end(), 0.0);
      for (const auto& term : s.terms) {
        const double w = term.input < 0 ? 1.0 : u[static_cast<std::size_t>(term.input)];
        dz[static_cast<std::size_t>(term.component)] += w * evaluate(term.f, z);
      }
    }
  };
  return Eval{*this, std::vector<double>(inputs.size())};
}

double integration_step(const OscSchedule& schedule, double T, const SimulationOptions& options) {
  if (options.steps_per_period < 20) throw Error(ErrorCode::InvalidArgument, "steps_per_period must be >= 20");
  const double fmax = schedule.max_frequency();
  double h;
  if (fmax > 0.0) {
    const double period = two_pi / fmax;
    if (options.h) {
      if (*options.h > period / 20.0 * (1.0 + 1e-12)) {
        throw Error(ErrorCode::InvalidArgument, "step exceeds 1/20 of the fastest input period (" +
                                                    format_csv(period / 20.0) + ")");
      }
      h = *options.h;
    } else {
      h = period / options.steps_per_period;
    }
  } else {
    h = options.h.value_or(1e-3);
  }
  if (T <= 0.0) return h;
  return T / static_cast<double>(step_count(T, h));
}

Trajectory approximate_bracket_trajectory(const ApproxSystem& system, std::vector<double> z0, double T, double omega,
                                          const SimulationOptions& options) {
  check_start(system.dimension, z0);
  OscSchedule s = OscSchedule::build(system, omega, options.rho);
  const double h = integration_step(s, T, options);
  return integrate(s.field(), std::move(z0), T, h, options.record_every);
}

Trajectory approximate_bracket_trajectory(const RewriteResult& result, std::vector<double> z0, double T,
                                          double omega, const SimulationOptions& options) {
  for (const auto& t : result.trees) {
    if (!all_leaves_admissible(result.graph, result.map, t)) {
      throw Error(ErrorCode::InvalidArgument, "tree has a non-admissible leaf for its graph");
    }
  }
  return approximate_bracket_trajectory(ApproxSystem::from_result(result), std::move(z0), T, omega, options);
}

Trajectory bracket_trajectory(const ApproxSystem& system, std::vector<double> z0, double T, double h,
                              int record_every) {
  return integrate(system.bracket_field(), std::move(z0), T, h, record_every);
}

namespace {

SweepPoint sweep_one(const ApproxSystem& system, const TimeField& ideal, const std::vector<double>& z0, double T,
                     double omega, const SimulationOptions& options) {
  OscSchedule s = OscSchedule::build(system, omega, options.rho);
  const double h = integration_step(s, T, options);
  const long n = step_count(T, h);
  TimeField approx = s.field();
  Stepper sa(approx, z0.size());
  Stepper sb(ideal, z0.size());
  std::vector<double> za = z0;
  std::vector<double> zb = z0;
  SweepPoint out{omega, 0.0, 0.0};
  for (long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * h;
    sa.step(t, h, za);
    sb.step(t, h, zb);
    const double t1 = static_cast<double>(k + 1) * h;
    check_state(za, t1);
    check_state(zb, t1);
    for (std::size_t i = 0; i < za.size(); ++i) {
      out.sup_error = std::max(out.sup_error, std::abs(za[i] - zb[i]));
      out.overshoot = std::max(out.overshoot, std::abs(za[i] - z0[i]));
    }
  }
  return out;
}

}  // namespace

std::vector<SweepPoint> convergence_sweep(const ApproxSystem& system, const std::vector<double>& z0, double T,
                                          const std::vector<double>& omegas, const SimulationOptions& options,
                                          int jobs) {
  check_start(system.dimension, z0);
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    check_omega(omegas[k]);
    if (k > 0 && !(omegas[k] > omegas[k - 1])) throw Error(ErrorCode::InvalidArgument, "omegas must be increasing");
  }
  if (jobs < 1) throw Error(ErrorCode::InvalidArgument, "jobs must be >= 1");
  // fail fast on depth before spawning anything
  if (system.max_depth() > 2) (void)OscSchedule::build(system, omegas.empty() ? 10.0 : omegas.front(), options.rho);

  const TimeField ideal = autonomous(system.bracket_field());
  std::vector<SweepPoint> out(omegas.size());
  std::vector<std::exception_ptr> errors(omegas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < omegas.size(); k = next++) {
      try {
        out[k] = sweep_one(system, ideal, z0, T, omegas[k], options);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(jobs, static_cast<int>(omegas.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = "omega,sup_error\n";
  for (const auto& p : points) out += format_csv(p.omega) + "," + format_csv(p.sup_error) + "\n";
  return out;
}

}  // namespace liesynth
