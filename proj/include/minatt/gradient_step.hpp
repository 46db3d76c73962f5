#pragma once

#include <iosfwd>
#include <vector>

#include "minatt/adjoint.hpp"
#include "minatt/density.hpp"
#include "minatt/rollout.hpp"
#include "minatt/schedules.hpp"

namespace minatt {

struct UpdateDirection {
  TimeGrid grid;
  std::vector<Mat> dK;
  std::vector<Vec> dv;
};

// rho(x(t_i), t_i) along the trajectory. Lookups landing in an empty cell
// fall back to the mean density of the occupied neighbouring cells (3^n - 1
// stencil); `fallbacks` counts how often that happened.
std::vector<double> density_along(const DensityField& field,
                                  const Trajectory& traj, int* fallbacks = nullptr);

// Per node, with A, B, f evaluated at (x_i, u_i):
//   dv = -rho B^T grad + v'' + 2 K' f + K (A f + B K f + B v')
//   dK = K'' + K B K'
UpdateDirection compute_direction(const System& system, const ControlLaw& law,
                                  const Trajectory& traj,
                                  const std::vector<double>& rho,
                                  const AdjointSchedule& adj);

// K - eps dK, v - eps dv at every node.
ControlLaw apply(const ControlLaw& law, const UpdateDirection& dir, double eps);

double direction_norm(const UpdateDirection& dir);

struct Ellipticity {
  double c1 = 0.0;
  double c2 = 0.0;
  bool degenerate = false;   // every probe had K dx = 0

  // Sufficient step bound 2 c2^2 / c1^2 (infinite when c1 = 0).
  double step_bound() const;
};

// sup / inf over nodes and the n scaled unit probes of
// |(K' + K A) dx| / |K dx|.
Ellipticity ellipticity_constants(const System& system, const ControlLaw& law,
                                  const Trajectory& traj, const Vec& probe_scale);

// Columns t, norm_dK, norm_dv.
void write_direction_csv(std::ostream& os, const UpdateDirection& dir);

}  // namespace minatt
