#include "minatt/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "minatt/csv.hpp"

namespace minatt {

namespace {

// K and v in effect at time t inside interval `interval`.
void gains_at(const ControlLaw& law, int interval, double t, ControlHold hold,
              Mat& K, Vec& v) {
  if (hold == ControlHold::kZeroOrder) {
    K = law.K[interval];
    v = law.v[interval];
    return;
  }
  const double a = std::clamp((t - law.grid.t(interval)) / law.grid.dt(), 0.0, 1.0);
  K = (1.0 - a) * law.K[interval] + a * law.K[interval + 1];
  v = (1.0 - a) * law.v[interval] + a * law.v[interval + 1];
}

}  // namespace

Vec advance_interval(const System& system, const ControlLaw& law, const Vec& x,
                     int interval, const RolloutOptions& options) {
  const double h = law.grid.dt() / options.substeps;
  const double t0 = law.grid.t(interval);
  Mat K;
  Vec v;
  auto rhs = [&](double t, const Vec& s) -> Vec {
    gains_at(law, interval, t, options.hold, K, v);
    return system.f(s, K * s + v);
  };
  Vec s = x;
  for (int k = 0; k < options.substeps; ++k) {
    s = rk4_step(rhs, t0 + k * h, s, h);
    if (!s.allFinite()) {
      std::ostringstream msg;
      msg << "closed-loop rollout diverged at t = " << t0 + (k + 1) * h
          << " (non-finite state)";
      throw DivergenceError(msg.str());
    }
  }
  return s;
}

void check_bounded(const Vec& x, double bound, double t) {
  for (int j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x(j)) || std::abs(x(j)) > bound) {
      std::ostringstream msg;
      msg << "closed-loop rollout diverged at t = " << t << " (|x_" << j
          << "| = " << std::abs(x(j)) << " > " << bound << ")";
      throw DivergenceError(msg.str());
    }
  }
}

Trajectory integrate_closed_loop(const System& system, const ControlLaw& law,
                                 const Vec& x0, const RolloutOptions& options) {
  if (options.substeps < 1) throw Error("rollout needs at least one substep");
  if (x0.size() != system.state_dim() || law.state_dim() != system.state_dim() ||
      law.control_dim() != system.control_dim()) {
    throw Error("rollout: law, system and initial state disagree on shape");
  }
  const TimeGrid& grid = law.grid;
  Trajectory traj;
  traj.grid = grid;
  traj.states.reserve(grid.nodes());
  traj.controls.reserve(grid.nodes());
  Vec x = x0;
  check_bounded(x, options.divergence_bound, 0.0);
  for (int i = 0; i < grid.nodes(); ++i) {
    traj.states.push_back(x);
    traj.controls.push_back(law.K[i] * x + law.v[i]);
    if (i == grid.N) break;
    x = advance_interval(system, law, x, i, options);
    check_bounded(x, options.divergence_bound, grid.t(i + 1));
  }
  return traj;
}

Trajectory propagate_sensitivity(const System& system, const ControlLaw& law,
                                 Trajectory traj,
                                 const RolloutOptions& options) {
  const TimeGrid& grid = law.grid;
  const int n = system.state_dim();
  if (static_cast<int>(traj.states.size()) != grid.nodes()) {
    throw Error("propagate_sensitivity: trajectory has no states");
  }
  // Augmented state [x, vec(Phi)] integrated with the same RK4 substeps as
  // the rollout, so the step transition is consistent with the state path.
  int interval = 0;
  Mat K;
  Vec v;
  auto rhs = [&](double t, const Vec& s) -> Vec {
    const Vec x = s.head(n);
    gains_at(law, interval, t, options.hold, K, v);
    const Vec u = K * x + v;
    Mat A, B;
    system.jacobians(x, u, A, B);
    const Mat closed = A + B * K;
    Vec out(n + n * n);
    out.head(n) = system.f(x, u);
    Eigen::Map<const Mat> phi(s.data() + n, n, n);
    Eigen::Map<Mat>(out.data() + n, n, n) = closed * phi;
    return out;
  };

  const double h = grid.dt() / options.substeps;
  traj.steps.assign(grid.N, Mat());
  for (int i = 0; i < grid.N; ++i) {
    interval = i;
    Vec s(n + n * n);
    s.head(n) = traj.states[i];
    Eigen::Map<Mat>(s.data() + n, n, n) = Mat::Identity(n, n);
    const double t0 = grid.t(i);
    for (int k = 0; k < options.substeps; ++k) s = rk4_step(rhs, t0 + k * h, s, h);
    check_bounded(s, options.divergence_bound, grid.t(i + 1));
    traj.steps[i] = Eigen::Map<const Mat>(s.data() + n, n, n);
  }
  traj.sensitivities.assign(grid.nodes(), Mat());
  traj.sensitivities[grid.N] = Mat::Identity(n, n);
  for (int i = grid.N - 1; i >= 0; --i) {
    traj.sensitivities[i] = traj.sensitivities[i + 1] * traj.steps[i];
    check_bounded(Eigen::Map<const Vec>(traj.sensitivities[i].data(), n * n),
                  options.divergence_bound, grid.t(i));
  }
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const int n = static_cast<int>(traj.states.front().size());
  const int m = static_cast<int>(traj.controls.front().size());
  std::vector<std::string> header{"t"};
  for (int j = 0; j < n; ++j) header.push_back("x_" + std::to_string(j));
  for (int j = 0; j < m; ++j) header.push_back("u_" + std::to_string(j));
  csv::write_row(os, header);
  std::vector<double> row;
  for (int i = 0; i < traj.grid.nodes(); ++i) {
    row.assign(1, traj.grid.t(i));
    for (int j = 0; j < n; ++j) row.push_back(traj.states[i](j));
    for (int j = 0; j < m; ++j) row.push_back(traj.controls[i](j));
    csv::write_row(os, row);
  }
}

}  // namespace minatt
