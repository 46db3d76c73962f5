#include "minatt/gradient_step.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "minatt/csv.hpp"

namespace minatt {

std::vector<double> density_along(const DensityField& field,
                                  const Trajectory& traj, int* fallbacks) {
  const PhaseBox& box = field.box;
  const int n = box.dim();
  std::vector<double> rho(traj.grid.nodes(), 0.0);
  int fell_back = 0;
  for (int i = 0; i < traj.grid.nodes(); ++i) {
    const auto cell = box.cell_of(traj.states[i]);
    if (!cell) continue;
    if (field.occupied_count(i, *cell) > 0) {
      rho[i] = field.fraction(i, *cell) / box.cell_volume();
      continue;
    }
    ++fell_back;
    const std::vector<int> center = box.unpack(*cell);
    std::vector<int> offset(n, -1);
    std::vector<int> index(n);
    double sum = 0.0;
    int occupied = 0;
    while (true) {
      bool valid = false;
      bool in_range = true;
      for (int d = 0; d < n; ++d) {
        index[d] = center[d] + offset[d];
        if (offset[d] != 0) valid = true;
        if (index[d] < 0 || index[d] >= box.intervals()[d]) in_range = false;
      }
      if (valid && in_range) {
        const CellKey key = box.pack(index);
        if (field.occupied_count(i, key) > 0) {
          sum += field.fraction(i, key);
          ++occupied;
        }
      }
      int d = 0;
      while (d < n && ++offset[d] > 1) offset[d++] = -1;
      if (d == n) break;
    }
    if (occupied > 0) rho[i] = sum / occupied / box.cell_volume();
  }
  if (fallbacks) *fallbacks = fell_back;
  return rho;
}

UpdateDirection compute_direction(const System& system, const ControlLaw& law,
                                  const Trajectory& traj,
                                  const std::vector<double>& rho,
                                  const AdjointSchedule& adj) {
  const TimeGrid& grid = law.grid;
  const ScheduleDerivatives d = time_derivatives(law);
  UpdateDirection dir;
  dir.grid = grid;
  dir.dK.resize(grid.nodes());
  dir.dv.resize(grid.nodes());
  Mat A, B;
  for (int i = 0; i < grid.nodes(); ++i) {
    const Vec& x = traj.states[i];
    const Vec& u = traj.controls[i];
    system.jacobians(x, u, A, B);
    const Vec f = system.f(x, u);
    const Mat& K = law.K[i];
    dir.dv[i] = -rho[i] * B.transpose() * adj.grad[i] + d.ddv[i] +
                2.0 * d.dK[i] * f + K * (A * f + B * (K * f) + B * d.dv[i]);
    dir.dK[i] = d.ddK[i] + K * B * d.dK[i];
  }
  return dir;
}

ControlLaw apply(const ControlLaw& law, const UpdateDirection& dir, double eps) {
  ControlLaw out = law;
  for (int i = 0; i < law.grid.nodes(); ++i) {
    out.K[i] -= eps * dir.dK[i];
    out.v[i] -= eps * dir.dv[i];
  }
  return out;
}

double direction_norm(const UpdateDirection& dir) {
  double sum = 0.0;
  for (std::size_t i = 0; i < dir.dK.size(); ++i) {
    sum += dir.dK[i].squaredNorm() + dir.dv[i].squaredNorm();
  }
  return std::sqrt(sum);
}

double Ellipticity::step_bound() const {
  if (c1 == 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * c2 * c2 / (c1 * c1);
}

Ellipticity ellipticity_constants(const System& system, const ControlLaw& law,
                                  const Trajectory& traj,
                                  const Vec& probe_scale) {
  const int n = law.state_dim();
  const ScheduleDerivatives d = time_derivatives(law);
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  bool any = false;
  Mat A, B;
  for (int i = 0; i < law.grid.nodes(); ++i) {
    system.jacobians(traj.states[i], traj.controls[i], A, B);
    const Mat rate = d.dK[i] + law.K[i] * A;
    const double gain_scale = law.K[i].norm();
    for (int j = 0; j < n; ++j) {
      const double s = probe_scale(j);
      const Vec h = law.K[i].col(j) * s;
      const double den = h.norm();
      if (den <= 1e-14 * gain_scale * std::abs(s) || den == 0.0) continue;
      const double ratio = (rate.col(j) * s).norm() / den;
      hi = std::max(hi, ratio);
      lo = std::min(lo, ratio);
      any = true;
    }
  }
  Ellipticity e;
  if (!any) {
    e.degenerate = true;
    return e;
  }
  e.c1 = hi;
  e.c2 = lo;
  return e;
}

void write_direction_csv(std::ostream& os, const UpdateDirection& dir) {
  csv::write_row(os, std::vector<std::string>{"t", "norm_dK", "norm_dv"});
  for (int i = 0; i < dir.grid.nodes(); ++i) {
    csv::write_row(os, std::vector<double>{dir.grid.t(i), dir.dK[i].norm(),
                                           dir.dv[i].norm()});
  }
}

}  // namespace minatt
