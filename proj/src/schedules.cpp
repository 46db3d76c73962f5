#include "minatt/schedules.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "minatt/csv.hpp"

namespace minatt {

TimeGrid::TimeGrid(double horizon, int intervals) : T(horizon), N(intervals) {
  if (!(T > 0.0) || N < 2) {
    throw ConfigError("time grid needs T > 0 and at least 2 intervals");
  }
}

ControlLaw::ControlLaw(TimeGrid g, std::vector<Mat> gains, std::vector<Vec> ff)
    : grid(g), K(std::move(gains)), v(std::move(ff)) {
  if (static_cast<int>(K.size()) != grid.nodes() ||
      static_cast<int>(v.size()) != grid.nodes()) {
    throw Error("ControlLaw: schedule length does not match the grid");
  }
}

ControlLaw ControlLaw::zeros(TimeGrid grid, int m, int n) {
  return ControlLaw(grid, std::vector<Mat>(grid.nodes(), Mat::Zero(m, n)),
                    std::vector<Vec>(grid.nodes(), Vec::Zero(m)));
}

namespace {

// Interval index and fraction for t in [0, T].
std::pair<int, double> locate(const TimeGrid& grid, double t) {
  if (!(t >= 0.0 && t <= grid.T)) {
    std::ostringstream msg;
    msg << "time " << t << " outside the horizon [0, " << grid.T << "]";
    throw OutOfHorizonError(msg.str());
  }
  const double s = t / grid.dt();
  int i = static_cast<int>(std::floor(s));
  if (i >= grid.N) i = grid.N - 1;
  return {i, s - i};
}

}  // namespace

Mat ControlLaw::gain_at(double t) const {
  const auto [i, a] = locate(grid, t);
  return (1.0 - a) * K[i] + a * K[i + 1];
}

Vec ControlLaw::feedforward_at(double t) const {
  const auto [i, a] = locate(grid, t);
  return (1.0 - a) * v[i] + a * v[i + 1];
}

Vec eval_control(const ControlLaw& law, const Vec& x, double t) {
  const auto [i, a] = locate(law.grid, t);
  return (1.0 - a) * (law.K[i] * x + law.v[i]) +
         a * (law.K[i + 1] * x + law.v[i + 1]);
}

ScheduleDerivatives time_derivatives(const ControlLaw& law) {
  const double dt = law.grid.dt();
  ScheduleDerivatives d;
  d.dK = differentiate(law.K, dt);
  d.ddK = differentiate(d.dK, dt);
  d.dv = differentiate(law.v, dt);
  d.ddv = differentiate(d.dv, dt);
  return d;
}

void write_law_csv(std::ostream& os, const ControlLaw& law) {
  const int m = law.control_dim();
  const int n = law.state_dim();
  std::vector<std::string> header{"t"};
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c)
      header.push_back("K_" + std::to_string(r) + "_" + std::to_string(c));
  for (int r = 0; r < m; ++r) header.push_back("v_" + std::to_string(r));
  csv::write_row(os, header);
  std::vector<double> row;
  for (int i = 0; i < law.grid.nodes(); ++i) {
    row.clear();
    row.push_back(law.grid.t(i));
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) row.push_back(law.K[i](r, c));
    for (int r = 0; r < m; ++r) row.push_back(law.v[i](r));
    csv::write_row(os, row);
  }
}

ControlLaw read_law_csv(std::istream& is, int state_dim, int control_dim) {
  const auto rows = csv::read_numeric(is);
  const std::size_t width = 1 + control_dim * state_dim + control_dim;
  if (rows.size() < 3) throw Error("law CSV: need at least three rows");
  std::vector<Mat> K;
  std::vector<Vec> v;
  std::vector<double> times;
  for (const auto& row : rows) {
    if (row.size() != width) throw Error("law CSV: unexpected column count");
    times.push_back(row[0]);
    Mat k(control_dim, state_dim);
    std::size_t col = 1;
    for (int r = 0; r < control_dim; ++r)
      for (int c = 0; c < state_dim; ++c) k(r, c) = row[col++];
    Vec ff(control_dim);
    for (int r = 0; r < control_dim; ++r) ff(r) = row[col++];
    K.push_back(std::move(k));
    v.push_back(std::move(ff));
  }
  const int intervals = static_cast<int>(rows.size()) - 1;
  return ControlLaw(TimeGrid(times.back(), intervals), std::move(K),
                    std::move(v));
}

}  // namespace minatt
