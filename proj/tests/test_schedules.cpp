#include <sstream>

#include "doctest.h"
#include "minatt/schedules.hpp"

using namespace minatt;

namespace {
ControlLaw scalar_law(const TimeGrid& grid, double (*k)(double), double (*v)(double)) {
  ControlLaw law = ControlLaw::zeros(grid, 1, 1);
  for (int i = 0; i < grid.nodes(); ++i) {
    law.K[i](0, 0) = k(grid.t(i));
    law.v[i](0) = v(grid.t(i));
  }
  return law;
}
}  // namespace

TEST_CASE("time grid") {
  const TimeGrid g(0.5, 40);
  CHECK(g.nodes() == 41);
  CHECK(g.dt() == doctest::Approx(0.0125));
  CHECK(g.t(40) == 0.5);
  CHECK_THROWS_AS(TimeGrid(0.5, 1), ConfigError);
  CHECK_THROWS_AS(TimeGrid(0.0, 10), ConfigError);
}

TEST_CASE("eval_control") {
  const TimeGrid g(1.0, 4);
  ControlLaw law = ControlLaw::zeros(g, 2, 3);
  for (int i = 0; i < g.nodes(); ++i) {
    law.K[i] = Mat::Constant(2, 3, i);
    law.v[i] = Vec::Constant(2, 10.0 * i);
  }
  const Vec x = (Vec(3) << 1.0, -2.0, 0.5).finished();
  SUBCASE("x = 0 gives v(t)") {
    CHECK((eval_control(law, Vec::Zero(3), 0.5) - Vec::Constant(2, 20.0)).norm() == 0.0);
  }
  SUBCASE("midpoint averages neighbouring gains") {
    const Vec u = eval_control(law, x, 0.375);
    const Vec expected = Mat::Constant(2, 3, 1.5) * x + Vec::Constant(2, 15.0);
    CHECK((u - expected).norm() < 1e-14);
  }
  SUBCASE("zero gain gives the feedforward for any x") {
    ControlLaw open = law;
    for (Mat& K : open.K) K.setZero();
    CHECK((eval_control(open, x, 0.6) - open.feedforward_at(0.6)).norm() == 0.0);
  }
  SUBCASE("affine in x") {
    const Vec y = (Vec(3) << 0.3, 0.1, -4.0).finished();
    const double t = 0.8;
    const Vec lhs = eval_control(law, 2.0 * x - y, t);
    const Vec rhs = 2.0 * eval_control(law, x, t) - eval_control(law, y, t);
    CHECK((lhs - rhs).norm() < 1e-12);
  }
  CHECK_THROWS_AS(eval_control(law, x, -0.01), OutOfHorizonError);
  CHECK_THROWS_AS(eval_control(law, x, 1.01), OutOfHorizonError);
}

TEST_CASE("time derivatives") {
  const TimeGrid g(0.5, 40);
  SUBCASE("constant schedules") {
    const auto d = time_derivatives(scalar_law(g, [](double) { return 3.0; },
                                               [](double) { return -1.0; }));
    for (int i = 0; i < g.nodes(); ++i) {
      CHECK(d.dK[i].norm() == 0.0);
      CHECK(d.ddK[i].norm() == 0.0);
      CHECK(d.dv[i].norm() == 0.0);
      CHECK(d.ddv[i].norm() == 0.0);
    }
  }
  SUBCASE("linear v is differentiated exactly") {
    const auto d = time_derivatives(scalar_law(g, [](double) { return 0.0; },
                                               [](double t) { return 2.5 * t; }));
    for (int i = 0; i < g.nodes(); ++i) CHECK(d.dv[i](0) == doctest::Approx(2.5).epsilon(1e-12));
    for (int i = 1; i < g.N; ++i) CHECK(std::abs(d.ddv[i](0)) < 1e-9);
  }
  SUBCASE("v = t^2 has interior second derivative 2") {
    const auto d = time_derivatives(scalar_law(g, [](double) { return 0.0; },
                                               [](double t) { return t * t; }));
    // Stencil-of-stencil is exact on quadratics two nodes away from the ends.
    for (int i = 2; i <= g.N - 2; ++i) CHECK(d.ddv[i](0) == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("linearity") {
    const ControlLaw a = scalar_law(g, [](double t) { return std::sin(t); },
                                    [](double t) { return t * t * t; });
    const ControlLaw b = scalar_law(g, [](double t) { return std::exp(t); },
                                    [](double t) { return std::cos(3 * t); });
    ControlLaw c = a;
    for (int i = 0; i < g.nodes(); ++i) {
      c.K[i] = 2.0 * a.K[i] - 3.0 * b.K[i];
      c.v[i] = 2.0 * a.v[i] - 3.0 * b.v[i];
    }
    const auto da = time_derivatives(a), db = time_derivatives(b), dc = time_derivatives(c);
    for (int i = 0; i < g.nodes(); ++i) {
      CHECK((dc.ddK[i] - (2.0 * da.ddK[i] - 3.0 * db.ddK[i])).norm() < 1e-8);
      CHECK((dc.dv[i] - (2.0 * da.dv[i] - 3.0 * db.dv[i])).norm() < 1e-9);
    }
  }
}

TEST_CASE("law CSV round trip") {
  const TimeGrid g(0.5, 5);
  ControlLaw law = ControlLaw::zeros(g, 2, 4);
  for (int i = 0; i < g.nodes(); ++i) {
    law.K[i] = Mat::Random(2, 4);
    law.v[i] = Vec::Random(2);
  }
  std::stringstream ss;
  write_law_csv(ss, law);
  const ControlLaw back = read_law_csv(ss, 4, 2);
  REQUIRE(back.K.size() == law.K.size());
  for (int i = 0; i < g.nodes(); ++i) {
    CHECK(back.K[i] == law.K[i]);
    CHECK(back.v[i] == law.v[i]);
  }
}
