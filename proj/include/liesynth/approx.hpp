#pragma once

#include "liesynth/bracket_tree.hpp"
#include "liesynth/rewrite.hpp"
#include "liesynth/vector_field.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace liesynth {

/// dz = f(t, z)
using TimeField = std::function<void(double t, std::span<const double> z, std::span<double> dz)>;

/// Uniform grid, states[k] at times[k].
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;

  int dimension() const;
  const std::vector<double>& final_state() const;
  /// Header `t,z1,...,zN`.
  std::string to_csv() const;
};

/// Components above this magnitude abort the integration.
inline constexpr double divergence_bound = 1e8;

/// Fixed-step classical RK4 over n = ceil(T / h) equal steps. Every
/// `record_every`-th step is stored, the last one always.
/// Errors: Divergence, DomainError (propagated from the field).
Trajectory integrate(const TimeField& f, std::vector<double> z0, double T, double h, int record_every = 1);
Trajectory integrate(const VectorField& f, std::vector<double> z0, double T, double h, int record_every = 1);

/// Drift passed through unmodulated plus trees approximated by oscillatory
/// inputs. Leaf trees join the drift.
struct ApproxSystem {
  int dimension = 0;
  VectorField drift;
  std::vector<BracketTree> trees;

  ApproxSystem() = default;
  ApproxSystem(int dimension, VectorField drift, std::vector<BracketTree> trees);

  static ApproxSystem from_tree(const BracketTree& tree, int dimension);
  static ApproxSystem from_result(const RewriteResult& r);
  static ApproxSystem from_augmented(const AugmentedSystem& a);

  /// drift + sum of the symbolic brackets.
  VectorField bracket_field() const;
  int max_depth() const;
};

/// u(t) = amplitude * (sin | cos)(frequency t) * [u_outer(t)]
struct OscInput {
  double amplitude = 0.0;
  double frequency = 0.0;
  bool sine = false;
  int outer = -1;  // index of a slower input scaling this one, or -1
  int level = 1;

  /// Integral of the bare oscillation over one period, in closed form.
  double period_integral() const;
};

/// One leaf field e_component f driven by inputs[input] (-1: drift).
struct ScheduledTerm {
  int component = 0;
  Expr f;
  int input = -1;
};

/// Pair k at level l runs at k * omega * rho^(l-1) with amplitude
/// sqrt(2 * frequency). In [h_a, h_b], h_a gets the cosine and h_b the sine.
/// Inner brackets of a depth-2 tree are realized at level 2 with the outer
/// input as their slow amplitude.
struct OscSchedule {
  double omega = 0.0;
  double rho = 100.0;
  int dimension = 0;
  std::vector<OscInput> inputs;
  std::vector<ScheduledTerm> terms;

  /// Errors: UnsupportedDepth (depth > 2), InvalidArgument (omega < 10, rho < 10).
  static OscSchedule build(const ApproxSystem& system, double omega, double rho = 100.0);

  double input(int k, double t) const;
  double max_frequency() const;
  int pair_count(int level) const;

  /// The approximating right-hand side.
  TimeField field() const;
};

struct SimulationOptions {
  double rho = 100.0;
  int steps_per_period = 64;  // of the fastest input; at least 20
  std::optional<double> h;    // explicit step, must not exceed period / 20
  int record_every = 1;
};

/// Step used for a schedule: explicit h (checked) or period / steps_per_period,
/// shrunk so that T is a whole number of steps.
double integration_step(const OscSchedule& schedule, double T, const SimulationOptions& options);

/// Errors: UnsupportedDepth, InvalidArgument, Divergence, DomainError.
Trajectory approximate_bracket_trajectory(const ApproxSystem& system, std::vector<double> z0, double T, double omega,
                                          const SimulationOptions& options = {});
/// Also checks every leaf against the result's graph (InvalidArgument otherwise).
Trajectory approximate_bracket_trajectory(const RewriteResult& result, std::vector<double> z0, double T,
                                          double omega, const SimulationOptions& options = {});

/// The ideal system z' = drift + sum of brackets.
Trajectory bracket_trajectory(const ApproxSystem& system, std::vector<double> z0, double T, double h,
                              int record_every = 1);

struct SweepPoint {
  double omega = 0.0;
  double sup_error = 0.0;  // max over the grid of the max-norm deviation
  double overshoot = 0.0;  // max over the grid of |z_approx - z0|_inf
};

/// Both systems integrated in lockstep on the approximating step. Omegas must
/// be increasing and at least 10; up to `jobs` run concurrently, output keeps
/// input order.
std::vector<SweepPoint> convergence_sweep(const ApproxSystem& system, const std::vector<double>& z0, double T,
                                          const std::vector<double>& omegas, const SimulationOptions& options = {},
                                          int jobs = 1);

/// Header `omega,sup_error`.
std::string sweep_csv(const std::vector<SweepPoint>& points);

/// Fixed formatting shared by every CSV writer.
std::string format_csv(double x);

}  // namespace liesynth
