#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "minatt/types.hpp"

namespace minatt {

// Uniform grid t_i = i * T / N, i = 0..N.
struct TimeGrid {
  double T = 0.5;
  int N = 40;

  TimeGrid() = default;
  TimeGrid(double horizon, int intervals);

  int nodes() const { return N + 1; }
  double dt() const { return T / N; }
  double t(int i) const { return i * T / N; }
  bool operator==(const TimeGrid&) const = default;
};

// u(x, t) = K(t) x + v(t), K and v sampled at the grid nodes.
struct ControlLaw {
  TimeGrid grid;
  std::vector<Mat> K;
  std::vector<Vec> v;

  ControlLaw() = default;
  ControlLaw(TimeGrid grid, std::vector<Mat> K, std::vector<Vec> v);
  static ControlLaw zeros(TimeGrid grid, int m, int n);

  int control_dim() const { return static_cast<int>(v.front().size()); }
  int state_dim() const { return static_cast<int>(K.front().cols()); }

  // Linear interpolation between nodes; t must lie in [0, T].
  Mat gain_at(double t) const;
  Vec feedforward_at(double t) const;
};

// K(t) x + v(t). Throws OutOfHorizonError for t outside [0, T].
Vec eval_control(const ControlLaw& law, const Vec& x, double t);

// Node-wise time derivatives: centered second-order stencil at interior
// nodes, first-order one-sided at the endpoints; second derivatives apply the
// same stencil to the first-derivative sequence.
struct ScheduleDerivatives {
  std::vector<Mat> dK;
  std::vector<Mat> ddK;
  std::vector<Vec> dv;
  std::vector<Vec> ddv;
};

template <typename T>
std::vector<T> differentiate(const std::vector<T>& values, double dt) {
  const std::size_t n = values.size();
  std::vector<T> out(n);
  if (n < 3) throw Error("differentiate: need at least three nodes");
  out[0] = (values[1] - values[0]) / dt;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i] = (values[i + 1] - values[i - 1]) / (2.0 * dt);
  }
  out[n - 1] = (values[n - 1] - values[n - 2]) / dt;
  return out;
}

ScheduleDerivatives time_derivatives(const ControlLaw& law);

// CSV with columns t, K_r_c (row-major), v_r. Header row required on read.
void write_law_csv(std::ostream& os, const ControlLaw& law);
ControlLaw read_law_csv(std::istream& is, int state_dim, int control_dim);

}  // namespace minatt
