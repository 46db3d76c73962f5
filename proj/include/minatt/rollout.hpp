#pragma once

#include <iosfwd>
#include <vector>

#include "minatt/dynamics.hpp"
#include "minatt/schedules.hpp"

namespace minatt {

// How K and v are evaluated between grid nodes during integration.
enum class ControlHold {
  kLinear,      // linear interpolation between the bracketing nodes
  kZeroOrder,   // node values held over [t_i, t_{i+1})
};

struct RolloutOptions {
  int substeps = 4;                 // RK4 steps per grid interval
  double divergence_bound = 1e6;    // per-component magnitude limit
  ControlHold hold = ControlHold::kLinear;
};

struct Trajectory {
  TimeGrid grid;
  std::vector<Vec> states;          // x(t_i)
  std::vector<Vec> controls;        // u(t_i) = K(t_i) x(t_i) + v(t_i)
  std::vector<Mat> sensitivities;   // Phi(T, t_i); empty until propagated
  std::vector<Mat> steps;           // Phi(t_{i+1}, t_i), i = 0..N-1

  bool has_sensitivities() const { return !sensitivities.empty(); }
};

// One classical fourth-order Runge-Kutta step of x' = rhs(t, x).
template <typename State, typename Rhs>
State rk4_step(const Rhs& rhs, double t, const State& x, double h) {
  const State k1 = rhs(t, x);
  const State k2 = rhs(t + 0.5 * h, State(x + (0.5 * h) * k1));
  const State k3 = rhs(t + 0.5 * h, State(x + (0.5 * h) * k2));
  const State k4 = rhs(t + h, State(x + h * k3));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Advances the closed-loop state from node `interval` to node `interval + 1`.
Vec advance_interval(const System& system, const ControlLaw& law, const Vec& x,
                     int interval, const RolloutOptions& options);

// Throws DivergenceError if the state is non-finite or leaves the bound.
void check_bounded(const Vec& x, double bound, double t);

Trajectory integrate_closed_loop(const System& system, const ControlLaw& law,
                                 const Vec& x0,
                                 const RolloutOptions& options = {});

// Fills traj.steps and traj.sensitivities by integrating
// dPhi/dt = (A + B K) Phi alongside the state over every interval.
Trajectory propagate_sensitivity(const System& system, const ControlLaw& law,
                                 Trajectory traj,
                                 const RolloutOptions& options = {});

// Columns t, x_*, u_*.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace minatt
