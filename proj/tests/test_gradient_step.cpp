#include <cmath>

#include "doctest.h"
#include "minatt/config.hpp"
#include "minatt/gradient_step.hpp"
#include "minatt/optimizer.hpp"

using namespace minatt;

namespace {

// x' = A x + B u with a state-independent adjoint gradient g at every node.
struct LinearCase {
  Mat A = (Mat(2, 2) << 0.0, 1.0, -1.0, -0.2).finished();
  Mat B = (Mat(2, 1) << 0.0, 1.0).finished();
  LinearSystem sys{A, B};
  TimeGrid grid{0.5, 20};

  Trajectory rollout(const ControlLaw& law, const Vec& x0) const {
    return integrate_closed_loop(sys, law, x0);
  }
  AdjointSchedule adjoint(const Vec& g) const {
    AdjointSchedule adj;
    adj.grid = grid;
    adj.lambda.assign(grid.nodes(), 0.0);
    adj.grad.assign(grid.nodes(), g);
    return adj;
  }
};

}  // namespace

TEST_CASE("direction: trivial cases") {
  const LinearCase c;
  ControlLaw law = ControlLaw::zeros(c.grid, 1, 2);
  for (Vec& v : law.v) v << 0.7;
  const Trajectory traj = c.rollout(law, (Vec(2) << 0.1, 0.0).finished());
  const std::vector<double> rho(c.grid.nodes(), 2.5);

  SUBCASE("K = 0, constant v, zero adjoint gradient") {
    const UpdateDirection dir = compute_direction(c.sys, law, traj, rho, c.adjoint(Vec::Zero(2)));
    CHECK(direction_norm(dir) == 0.0);
  }
  SUBCASE("K = 0, constant v, non-zero adjoint gradient") {
    const Vec g = (Vec(2) << 3.0, -4.0).finished();
    const UpdateDirection dir = compute_direction(c.sys, law, traj, rho, c.adjoint(g));
    for (int i = 0; i < c.grid.nodes(); ++i) {
      CHECK(dir.dK[i].norm() == 0.0);
      CHECK(dir.dv[i](0) == doctest::Approx(-2.5 * (c.B.transpose() * g)(0)));
    }
  }
  SUBCASE("constant K and v at an equilibrium") {
    ControlLaw hold = ControlLaw::zeros(c.grid, 1, 2);
    for (Mat& K : hold.K) K << -1.5, -0.5;
    const Trajectory rest = c.rollout(hold, Vec::Zero(2));
    const Vec g = (Vec(2) << 1.0, 2.0).finished();
    const UpdateDirection dir = compute_direction(c.sys, hold, rest, rho, c.adjoint(g));
    for (int i = 0; i < c.grid.nodes(); ++i) {
      CHECK(dir.dK[i].norm() == 0.0);
      CHECK(dir.dv[i](0) == doctest::Approx(-2.5 * 2.0));
    }
  }
}

TEST_CASE("direction: dK does not depend on v for a fixed trajectory") {
  const LinearCase c;
  ControlLaw a = ControlLaw::zeros(c.grid, 1, 2);
  for (int i = 0; i < c.grid.nodes(); ++i) {
    const double t = c.grid.t(i);
    a.K[i] << -1.0 - t * t, 0.3 * std::sin(5 * t);
    a.v[i] << std::cos(3 * t);
  }
  ControlLaw b = a;
  for (int i = 0; i < c.grid.nodes(); ++i) b.v[i] << 4.0 * c.grid.t(i) * c.grid.t(i);
  const Trajectory traj = c.rollout(a, (Vec(2) << 0.2, -0.1).finished());
  const std::vector<double> rho(c.grid.nodes(), 1.0);
  const auto da = compute_direction(c.sys, a, traj, rho, c.adjoint(Vec::Ones(2)));
  const auto db = compute_direction(c.sys, b, traj, rho, c.adjoint(Vec::Ones(2)));
  for (int i = 0; i < c.grid.nodes(); ++i) CHECK(da.dK[i] == db.dK[i]);
}

TEST_CASE("apply") {
  const TimeGrid g(0.5, 6);
  ControlLaw law = ControlLaw::zeros(g, 2, 3);
  UpdateDirection dir{g, {}, {}};
  for (int i = 0; i < g.nodes(); ++i) {
    law.K[i] = Mat::Random(2, 3);
    law.v[i] = Vec::Random(2);
    dir.dK.push_back(Mat::Random(2, 3));
    dir.dv.push_back(Vec::Random(2));
  }
  const ControlLaw same = apply(law, dir, 0.0);
  UpdateDirection zero = dir;
  for (Mat& m : zero.dK) m.setZero();
  for (Vec& v : zero.dv) v.setZero();
  const ControlLaw unchanged = apply(law, zero, 0.3);
  const ControlLaw once = apply(law, dir, 0.25);
  const ControlLaw twice = apply(apply(law, dir, 0.125), dir, 0.125);
  for (int i = 0; i < g.nodes(); ++i) {
    CHECK(same.K[i] == law.K[i]);
    CHECK(unchanged.v[i] == law.v[i]);
    CHECK((once.K[i] - twice.K[i]).norm() < 1e-14);
    CHECK((once.v[i] - twice.v[i]).norm() < 1e-14);
    CHECK((once.K[i] - (law.K[i] - 0.25 * dir.dK[i])).norm() < 1e-15);
  }
}

TEST_CASE("ellipticity constants") {
  const TimeGrid g(0.5, 400);
  const LinearSystem free(Mat::Zero(1, 1), Mat::Identity(1, 1));
  ControlLaw law = ControlLaw::zeros(g, 1, 1);
  const Trajectory traj = integrate_closed_loop(free, law, Vec::Ones(1));
  SUBCASE("K = 0 is degenerate") {
    CHECK(ellipticity_constants(free, law, traj, Vec::Ones(1)).degenerate);
  }
  SUBCASE("constant K with A = 0 gives zero") {
    for (Mat& K : law.K) K << 2.0;
    const Ellipticity e = ellipticity_constants(free, law, traj, Vec::Ones(1));
    CHECK(e.c1 == 0.0);
    CHECK(e.c2 == 0.0);
  }
  SUBCASE("K = e^t gives ratio one") {
    for (int i = 0; i < g.nodes(); ++i) law.K[i] << std::exp(g.t(i));
    const Ellipticity e = ellipticity_constants(free, law, traj, Vec::Ones(1));
    CHECK(e.c1 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(e.c2 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(e.c1 >= e.c2);
    CHECK(e.step_bound() == doctest::Approx(2.0 * e.c2 * e.c2 / (e.c1 * e.c1)));
  }
}

TEST_CASE("density lookups along a trajectory fall back to occupied neighbours") {
  const PhaseBox box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0), {20, 20});
  DensityField field;
  field.grid = TimeGrid(0.5, 2);
  field.box = box;
  field.trackmax = 10;
  field.counts.assign(3, {});
  field.exited.assign(3, 0);
  field.counts[1][box.pack({10, 10})] = 4;
  field.counts[1][box.pack({11, 10})] = 6;
  Trajectory traj;
  traj.grid = field.grid;
  const Vec in = box.cell_center(box.pack({10, 10}));
  const Vec empty = box.cell_center(box.pack({10, 11}));
  traj.states = {in, empty, Vec::Constant(2, 5.0)};
  int fallbacks = 0;
  const std::vector<double> rho = density_along(field, traj, &fallbacks);
  CHECK(rho[0] == 0.0);
  CHECK(rho[1] == doctest::Approx(0.5 / box.cell_volume()));
  CHECK(rho[2] == 0.0);
  CHECK(fallbacks >= 1);
}
