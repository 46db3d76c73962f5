#include <cmath>
#include <numeric>

#include "doctest.h"
#include "minatt/checks.hpp"
#include "minatt/config.hpp"
#include "minatt/density.hpp"
#include "minatt/optimizer.hpp"

using namespace minatt;

namespace {

PhaseBox line_box(int intervals = 100) {
  return PhaseBox(Vec::Constant(1, -2.0), Vec::Constant(1, 2.0), {intervals});
}

// Exact mass of the 1-D cosine kernel on [a, b] (offsets from the center).
double kernel_mass(double a, double b, double w) {
  a = std::clamp(a, -w, w);
  b = std::clamp(b, -w, w);
  return std::max(0.0, (b - a) / (2 * w) +
                           (std::sin(M_PI * b / w) - std::sin(M_PI * a / w)) / (2 * M_PI));
}

DensityField run(const System& sys, const ControlLaw& law, const InitialDensity& rho0,
                 const PhaseBox& box, int trackmax, std::uint64_t seed, int workers = 1) {
  DensityOptions opt;
  opt.trackmax = trackmax;
  opt.seed = seed;
  opt.workers = workers;
  return estimate_density(sys, law, rho0, box, opt);
}

const LinearSystem kStill(Mat::Zero(1, 1), Mat::Zero(1, 1));
const LinearSystem kDecay(Mat::Constant(1, 1, -1.0), Mat::Zero(1, 1));

}  // namespace

TEST_CASE("phase box") {
  const PhaseBox box((Vec(2) << -5, -300).finished(), (Vec(2) << 5, 300).finished(), {64, 32});
  CHECK(box.volume() == doctest::Approx(6000.0));
  CHECK(box.cell_volume() == doctest::Approx(6000.0 / (64 * 32)));
  CHECK(!box.cell_of((Vec(2) << 5.1, 0).finished()).has_value());
  CHECK(box.contains((Vec(2) << 5.0, -300.0).finished()));
  for (CellKey key : {CellKey{0}, CellKey{63}, CellKey{64}, CellKey{2047}}) {
    CHECK(box.pack(box.unpack(key)) == key);
    CHECK(*box.cell_of(box.cell_center(key)) == key);
  }
  CHECK_THROWS_AS(PhaseBox(Vec::Constant(1, 1.0), Vec::Constant(1, 0.0), {4}), ConfigError);
}

TEST_CASE("smoothed delta") {
  const PhaseBox box = line_box();
  const SmoothedDelta k(Vec::Constant(1, 0.3), box, 8);
  const double w = 8 * 0.04;
  CHECK(k(Vec::Constant(1, 0.3 + w)) == 0.0);
  CHECK(k(Vec::Constant(1, 0.3)) == doctest::Approx(1.0 / w));
  CHECK(k.peak() == doctest::Approx(1.0 / w));
  CHECK_THROWS_AS(SmoothedDelta(Vec::Constant(1, 1.8), box, 8), SupportOverflowError);

  SUBCASE("experiment-1 kernel integrates to one on the cell grid") {
    const SolverConfig c = preset("experiment1");
    const Problem problem(ArmSystem(c.arm), c);
    const BinnedDensity b = problem.rho0().binned(problem.box());
    double sum = 0.0;
    for (const auto& [key, value] : b) sum += value;
    CHECK(std::abs(sum * problem.box().cell_volume() - 1.0) <= 1e-12);
  }
}

TEST_CASE("density estimate: frozen dynamics") {
  const PhaseBox box = line_box();
  const TimeGrid g(0.5, 10);
  const InitialDensity rho0(Vec::Constant(1, 0.0), box, 8);
  const ControlLaw law = ControlLaw::zeros(g, 1, 1);
  const int n = 20000;
  const DensityField field = run(kStill, law, rho0, box, n, 3);
  for (int i = 0; i < g.nodes(); ++i) {
    CHECK(field.counts[i] == field.counts[0]);
    CHECK(field.mass(i) == doctest::Approx(1.0).epsilon(1e-15));
  }
  // Every cell fraction within 5 binomial standard deviations of the exact
  // kernel mass of that cell.
  const double w = 8 * box.cell_width()(0);
  for (int c = 0; c < 100; ++c) {
    const double a = box.lower()(0) + c * box.cell_width()(0);
    const double p = kernel_mass(a, a + box.cell_width()(0), w);
    const double got = field.fraction(g.N, box.pack({c}));
    CHECK(std::abs(got - p) <= 5.0 * std::sqrt(p * (1 - p) / n) + 1e-15);
  }
  SUBCASE("density_at") {
    CHECK(density_at(field, Vec::Constant(1, 3.0), 0) == 0.0);
    const double peak_cell = kernel_mass(-box.cell_width()(0), 0.0, w) / box.cell_width()(0);
    CHECK(density_at(field, Vec::Constant(1, -1e-9), 5) ==
          doctest::Approx(peak_cell).epsilon(0.05));
    double sum = 0.0;
    for (const auto& [key, count] : field.counts[4]) sum += density_at(field, box.cell_center(key), 4);
    CHECK(sum * box.cell_volume() == doctest::Approx(field.mass(4)).epsilon(1e-12));
  }
}

TEST_CASE("density estimate: conservation with exits") {
  const SuiteResult r = check_density_conservation();
  CHECK(r.passed);
  // x' = +3x pushes mass out of a tight box.
  const LinearSystem grow(Mat::Constant(1, 1, 3.0), Mat::Zero(1, 1));
  const PhaseBox box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0), {64});
  const InitialDensity rho0(Vec::Constant(1, 0.5), box, 8);
  const DensityField field = run(grow, ControlLaw::zeros(TimeGrid(0.5, 10), 1, 1), rho0, box, 3000, 9);
  CHECK(field.exited_fraction(10) > 0.5);
  for (int i = 0; i <= 10; ++i) {
    CHECK(std::abs(field.mass(i) + field.exited_fraction(i) - 1.0) <= 1e-12);
    if (i > 0) CHECK(field.exited[i] >= field.exited[i - 1]);
  }
  CHECK(field.terminal_states.size() == static_cast<std::size_t>(3000 - field.exited[10]));
}

TEST_CASE("density estimate: pushforward mean of x' = -x") {
  const SuiteResult r = check_pushforward_mean();
  INFO(r.detail);
  CHECK(r.measured <= 3.0);
}

TEST_CASE("density estimate: determinism across worker counts") {
  const SolverConfig c = preset("experiment1");
  const ArmSystem arm(c.arm);
  const Problem problem(arm, c);
  const ControlLaw law = initialize(arm, c);
  DensityOptions opt;
  opt.trackmax = 300;
  opt.rollout = c.rollout();
  opt.workers = 1;
  const DensityField a = estimate_density(arm, law, problem.rho0(), problem.box(), opt);
  opt.workers = 4;
  const DensityField b = estimate_density(arm, law, problem.rho0(), problem.box(), opt);
  CHECK(a.counts == b.counts);
  CHECK(a.exited == b.exited);
  REQUIRE(a.terminal_states.size() == b.terminal_states.size());
  for (std::size_t k = 0; k < a.terminal_states.size(); ++k) {
    CHECK(a.terminal_states[k] == b.terminal_states[k]);
  }
  opt.seed = 2;
  const DensityField other = estimate_density(arm, law, problem.rho0(), problem.box(), opt);
  CHECK(other.counts != a.counts);
}

TEST_CASE("terminal mismatch") {
  const PhaseBox box = line_box();
  const TimeGrid g(0.5, 10);
  const ControlLaw law = ControlLaw::zeros(g, 1, 1);
  const InitialDensity rho0(Vec::Constant(1, -0.8), box, 8);
  const int n = 4000;
  const DensityField field = run(kStill, law, rho0, box, n, 11);
  const double vol = box.cell_volume();

  SUBCASE("psi equal to the binned field") {
    BinnedDensity psi;
    for (const auto& [key, count] : field.counts[g.N]) psi[key] = field.fraction(g.N, key) / vol;
    CHECK(terminal_mismatch(field, psi) == 0.0);
  }
  SUBCASE("disjoint supports") {
    const TargetDensity far(Vec::Constant(1, 1.0), box, 8);
    const BinnedDensity psi = far.binned(box);
    double rho_sq = 0.0, psi_sq = 0.0;
    for (const auto& [key, count] : field.counts[g.N]) rho_sq += std::pow(field.fraction(g.N, key) / vol, 2) * vol;
    for (const auto& [key, value] : psi) psi_sq += value * value * vol;
    CHECK(terminal_mismatch(field, psi) == doctest::Approx(rho_sq + psi_sq).epsilon(1e-12));
  }
  SUBCASE("frozen dynamics against the exact cell masses") {
    // Expected squared error of the binned estimate: sum_c p_c (1 - p_c) / (n vol).
    const double w = 8 * box.cell_width()(0);
    BinnedDensity psi;
    double expected = 0.0;
    for (int c = 0; c < 100; ++c) {
      const double a = box.lower()(0) + c * box.cell_width()(0) + 0.8;
      const double p = kernel_mass(a, a + box.cell_width()(0), w);
      if (p <= 0.0) continue;
      psi[box.pack({c})] = p / vol;
      expected += p * (1 - p) / (n * vol);
    }
    const double got = terminal_mismatch(field, psi);
    CHECK(got <= 3.0 * expected);
    CHECK(got > 0.0);
  }
}

TEST_CASE("terminal mismatch spread shrinks like 1/sqrt(trackmax)") {
  const PhaseBox box = line_box();
  const TimeGrid g(1.0, 10);
  const ControlLaw law = ControlLaw::zeros(g, 1, 1);
  const InitialDensity rho0(Vec::Constant(1, 1.0), box, 8);
  const BinnedDensity psi = InitialDensity(Vec::Constant(1, 0.5), box, 8).binned(box);
  auto spread = [&](int n) {
    std::vector<double> values;
    for (int s = 0; s < 24; ++s) values.push_back(terminal_mismatch(run(kDecay, law, rho0, box, n, 500 + s), psi));
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    return std::sqrt(sq / (values.size() - 1));
  };
  const double ratio = spread(4000) / spread(2000);
  INFO("std ratio " << ratio);
  CHECK(ratio >= 0.7071 * 0.7);
  CHECK(ratio <= 0.7071 * 1.3);
}
