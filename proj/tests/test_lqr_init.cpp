#include <cmath>

#include "doctest.h"
#include "minatt/checks.hpp"
#include "minatt/config.hpp"
#include "minatt/lqr_init.hpp"
#include "minatt/optimizer.hpp"

using namespace minatt;

namespace {
std::vector<Mat> repeat(const Mat& m, int n) { return std::vector<Mat>(n, m); }
}  // namespace

TEST_CASE("riccati: scalar closed form at 10 substeps") {
  for (double p : {0.5, 2.0, 40.0}) {
    const TimeGrid g(1.0, 10);
    const auto sol = solve_riccati_backward(repeat(Mat::Zero(1, 1), 11), repeat(Mat::Identity(1, 1), 11),
                                            Mat::Identity(1, 1), Mat::Constant(1, 1, p), g, {10, 1e12});
    for (int i = 0; i < g.nodes(); ++i) {
      CHECK(std::abs(sol.P[i](0, 0) - p / (1.0 + p * (g.T - g.t(i)))) < 1e-6);
    }
  }
}

TEST_CASE("riccati: trivial fixed points") {
  const TimeGrid g(0.5, 8);
  const Mat A = (Mat(2, 2) << 0.3, 1.0, -2.0, 0.1).finished();
  const Mat B = (Mat(2, 1) << 0.0, 1.0).finished();
  SUBCASE("P_f = 0 stays zero") {
    const auto sol = solve_riccati_backward(repeat(A, 9), repeat(B, 9), Mat::Identity(1, 1),
                                            Mat::Zero(2, 2), g);
    for (const Mat& P : sol.P) CHECK(P.norm() == 0.0);
  }
  SUBCASE("A = 0, B = 0 keeps P_f") {
    const Mat Pf = (Mat(2, 2) << 3.0, 0.5, 0.5, 1.0).finished();
    const auto sol = solve_riccati_backward(repeat(Mat::Zero(2, 2), 9), repeat(Mat::Zero(2, 1), 9),
                                            Mat::Identity(1, 1), Pf, g);
    for (const Mat& P : sol.P) CHECK((P - Pf).norm() < 1e-12);
  }
  SUBCASE("P(T) = P_f and symmetry") {
    const Mat Pf = (Mat(2, 2) << 10.0, 0.0, 0.0, 0.0).finished();
    const auto sol = solve_riccati_backward(repeat(A, 9), repeat(B, 9), Mat::Identity(1, 1), Pf, g);
    CHECK((sol.P.back() - Pf).norm() == 0.0);
    for (const Mat& P : sol.P) CHECK((P - P.transpose()).norm() <= 1e-10);
  }
}

TEST_CASE("riccati: input validation and blow-up") {
  const TimeGrid g(1.0, 10);
  CHECK_THROWS_AS(solve_riccati_backward(repeat(Mat::Zero(1, 1), 11), repeat(Mat::Identity(1, 1), 11),
                                         Mat::Constant(1, 1, -1.0), Mat::Identity(1, 1), g),
                  Error);
  CHECK_THROWS_AS(solve_riccati_backward(repeat(Mat::Zero(1, 1), 11), repeat(Mat::Identity(1, 1), 11),
                                         Mat::Identity(1, 1), Mat::Constant(1, 1, -1.0), g),
                  Error);
  // Unstable, uncontrolled: P grows like exp(2 a (T - t)).
  CHECK_THROWS_AS(solve_riccati_backward(repeat(Mat::Constant(1, 1, 30.0), 11), repeat(Mat::Zero(1, 1), 11),
                                         Mat::Identity(1, 1), Mat::Identity(1, 1), g, {16, 1e6}),
                  RiccatiBlowUpError);
  const Mat A = Mat::Identity(2, 2) * 30.0;
  const Mat Pf = (Mat(2, 2) << 1.0, 0.0, 0.0, 0.0).finished();
  CHECK_THROWS_AS(solve_riccati_backward(repeat(A, 11), repeat(Mat::Zero(2, 1), 11),
                                         Mat::Identity(1, 1), Pf, g, {16, 1e6}),
                  RiccatiBlowUpError);
}

TEST_CASE("riccati: 4-D experiment solve stays symmetric") {
  const SuiteResult r = check_riccati_symmetry();
  CHECK(r.measured <= 1e-10);
}

TEST_CASE("initial law") {
  const TimeGrid g(0.5, 4);
  Reference ref;
  ref.grid = g;
  for (int i = 0; i < g.nodes(); ++i) {
    ref.x_star.push_back(Vec::Constant(2, 0.1 * i));
    ref.u_star.push_back(Vec::Constant(1, -0.3 * i));
  }
  const Mat R = Mat::Constant(1, 1, 2.0);
  const std::vector<Mat> B = repeat((Mat(2, 1) << 0.0, 1.5).finished(), 5);
  SUBCASE("P = 0 gives K = 0, v = u*") {
    RiccatiSolution zero{g, repeat(Mat::Zero(2, 2), 5)};
    const ControlLaw law = initial_law(ref, zero, R, B);
    for (int i = 0; i < g.nodes(); ++i) {
      CHECK(law.K[i].norm() == 0.0);
      CHECK(law.v[i] == ref.u_star[i]);
    }
  }
  SUBCASE("on-reference consistency") {
    RiccatiSolution sol{g, {}};
    for (int i = 0; i < g.nodes(); ++i) sol.P.push_back((Mat(2, 2) << 3.0 + i, 1.0, 1.0, 2.0).finished());
    const ControlLaw law = initial_law(ref, sol, R, B);
    for (int i = 0; i < g.nodes(); ++i) {
      CHECK((law.K[i] * ref.x_star[i] + law.v[i] - ref.u_star[i]).norm() < 1e-14);
    }
    Reference origin = ref;
    for (Vec& x : origin.x_star) x.setZero();
    const ControlLaw at_origin = initial_law(origin, sol, R, B);
    for (int i = 0; i < g.nodes(); ++i) CHECK(at_origin.v[i] == origin.u_star[i]);
  }
}

TEST_CASE("reference generation") {
  const SolverConfig c = preset("experiment1");
  const ArmSystem arm(c.arm);
  const Mat P_f = c.terminal_weight.asDiagonal();
  const Mat R = c.control_weight.asDiagonal();
  ReferenceOptions opt;
  opt.rollout = c.rollout();

  SUBCASE("equilibrium pose") {
    ArmParams grav = c.arm;
    grav.g = 9.81;
    const ArmSystem heavy(grav);
    const Vec x0 = (Vec(4) << 0.3, 0.8, 0.0, 0.0).finished();
    const Vec target = heavy.output(x0);
    const Reference ref = make_reference(heavy, x0, target, c.grid(), P_f, R, opt);
    const Vec u_eq = bias(grav, x0.head<2>(), x0.tail<2>());
    for (int i = 0; i < c.grid().nodes(); ++i) {
      CHECK((ref.u_star[i] - u_eq).norm() < 1e-8);
      CHECK((ref.x_star[i] - x0).norm() < 1e-8);
    }
  }
  SUBCASE("unreachable target") {
    const Vec far = (Vec(4) << 0.5, 0.5, 0.0, 0.0).finished();
    CHECK_THROWS_AS(make_reference(arm, c.x_init, far, c.grid(), P_f, R, opt), UnreachableTargetError);
  }
  SUBCASE("experiment presets: pinned reference miss") {
    // Regression values recorded from the first run of the desk defaults.
    const std::pair<const char*, double> pinned[] = {{"experiment1", 1.0342579358473227},
                                                     {"experiment2", 1.4376968639347196}};
    for (const auto& [name, miss] : pinned) {
      const SolverConfig cfg = preset(name);
      Reference ref;
      initialize(arm, cfg, &ref);
      CHECK(ref.x_star.size() == 41u);
      const double got = (arm.output(ref.x_star.back()) - cfg.target).norm();
      CHECK(std::isfinite(got));
      CHECK(got == doctest::Approx(miss).epsilon(1e-9));
    }
  }
}
