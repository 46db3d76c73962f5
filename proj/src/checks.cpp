#include "minatt/checks.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "minatt/adjoint.hpp"
#include "minatt/config.hpp"
#include "minatt/density.hpp"
#include "minatt/lqr_init.hpp"
#include "minatt/optimizer.hpp"
#include "minatt/rollout.hpp"

namespace minatt {

namespace {

template <class Fn>
SuiteResult timed(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult r = fn();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

SuiteResult finish(std::string name, double measured, double tolerance,
                   bool higher_is_better = false, std::string detail = {}) {
  SuiteResult r;
  r.name = std::move(name);
  r.measured = measured;
  r.tolerance = tolerance;
  r.passed = std::isfinite(measured) &&
             (higher_is_better ? measured >= tolerance : measured <= tolerance);
  r.detail = std::move(detail);
  return r;
}

// experiment1 pipeline pieces shared by the Riccati and lambda suites.
struct Pipeline {
  SolverConfig config = preset("experiment1");
  ArmSystem arm{config.arm};
  Reference ref;
  std::vector<Mat> A, B;
  RiccatiSolution riccati;
  ControlLaw law;

  Pipeline() {
    const Mat P_f = config.terminal_weight.asDiagonal();
    const Mat R = config.control_weight.asDiagonal();
    ReferenceOptions options;
    options.rollout = config.rollout();
    options.riccati = {config.riccati_substeps, config.riccati_bound};
    ref = make_reference(arm, config.x_init, config.target, config.grid(), P_f, R, options);
    linearize_along(arm, ref, A, B);
    riccati = solve_riccati_backward(A, B, R, P_f, config.grid(), options.riccati);
    law = initial_law(ref, riccati, R, B);
  }
};

// x' = -x in one dimension, no control authority.
struct Decay {
  LinearSystem system{Mat::Constant(1, 1, -1.0), Mat::Zero(1, 1)};
  TimeGrid grid{1.0, 20};
  ControlLaw law = ControlLaw::zeros(grid, 1, 1);
  PhaseBox box{Vec::Constant(1, -2.0), Vec::Constant(1, 2.0), {400}};
  InitialDensity rho0{Vec::Constant(1, 1.0), box, 8};

  DensityField run(int trackmax, std::uint64_t seed) const {
    DensityOptions options;
    options.trackmax = trackmax;
    options.seed = seed;
    options.workers = 1;
    return estimate_density(system, law, rho0, box, options);
  }
};

std::pair<double, double> mean_and_stderr(const std::vector<Vec>& xs) {
  double sum = 0.0, sq = 0.0;
  for (const Vec& x : xs) sum += x(0);
  const double n = static_cast<double>(xs.size());
  const double mean = sum / n;
  for (const Vec& x : xs) sq += (x(0) - mean) * (x(0) - mean);
  return {mean, std::sqrt(sq / (n - 1.0) / n)};
}

}  // namespace

double convergence_slope(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SuiteResult check_jacobians(bool corrupt_bias) {
  ArmSystem arm{ArmParams{}};
  arm.set_corrupt_bias_sign(corrupt_bias);
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI), rate(-5.0, 5.0),
      torque(-5.0, 5.0);
  double worst = 0.0;
  Mat A, B, A_fd, B_fd;
  for (int k = 0; k < 100; ++k) {
    Vec x(4), u(2);
    x << angle(rng), angle(rng), rate(rng), rate(rng);
    u << torque(rng), torque(rng);
    arm.jacobians(x, u, A, B);
    arm.fd_jacobians(x, u, A_fd, B_fd);
    worst = std::max(worst, (A - A_fd).norm() / std::max(1.0, A.norm()));
    worst = std::max(worst, (B - B_fd).norm() / std::max(1.0, B.norm()));
  }
  return finish("jacobian", worst, 1e-5, false, "100 random states, central differences");
}

SuiteResult check_riccati_oracle() {
  const double p = 2.0, T = 1.0;
  const TimeGrid grid(T, 10);
  const std::vector<Mat> A(grid.nodes(), Mat::Zero(1, 1)), B(grid.nodes(), Mat::Identity(1, 1));
  const RiccatiSolution sol = solve_riccati_backward(
      A, B, Mat::Identity(1, 1), Mat::Constant(1, 1, p), grid, {10, 1e12});
  double worst = 0.0;
  for (int i = 0; i < grid.nodes(); ++i) {
    const double exact = p / (1.0 + p * (T - grid.t(i)));
    worst = std::max(worst, std::abs(sol.P[i](0, 0) - exact));
  }
  return finish("riccati-oracle", worst, 1e-6, false, "P(t) = p/(1+p(T-t)), p = 2");
}

SuiteResult check_riccati_symmetry() {
  const Pipeline pipe;
  double worst = 0.0;
  for (const Mat& P : pipe.riccati.P) worst = std::max(worst, (P - P.transpose()).cwiseAbs().maxCoeff());
  return finish("riccati-symmetry", worst, 1e-10, false, "experiment1 4-D solve");
}

SuiteResult check_lambda_constancy() {
  const Pipeline pipe;
  const RolloutOptions rollout = pipe.config.rollout();
  const Trajectory traj = propagate_sensitivity(
      pipe.arm, pipe.law,
      integrate_closed_loop(pipe.arm, pipe.law, pipe.config.x_init, rollout), rollout);
  TerminalContext ctx;
  ctx.mode = TerminalMode::kEndpoint;
  ctx.gamma = pipe.config.gamma;
  ctx.target = pipe.config.target;
  ctx.system = &pipe.arm;
  const AdjointSchedule adj = lambda_schedule(traj, ctx);
  const std::vector<double> again = reverify_lambda(pipe.arm, pipe.law, traj, ctx, rollout);
  double worst = 0.0;
  for (std::size_t i = 0; i < again.size(); ++i) {
    worst = std::max(worst, std::abs(again[i] - adj.lambda.back()));
  }
  std::ostringstream detail;
  detail << "lambda(T) = " << adj.lambda.back();
  return finish("lambda-constancy", worst, 1e-6, false, detail.str());
}

SuiteResult check_density_conservation() {
  const Pipeline pipe;
  SolverConfig config = pipe.config;
  const Problem problem(pipe.arm, config);
  DensityOptions options;
  options.trackmax = 500;
  options.seed = config.seed;
  options.rollout = config.rollout();
  const DensityField field =
      estimate_density(pipe.arm, pipe.law, problem.rho0(), problem.box(), options);
  double worst = 0.0;
  bool monotone = true;
  for (int i = 0; i < field.grid.nodes(); ++i) {
    worst = std::max(worst, std::abs(field.mass(i) + field.exited_fraction(i) - 1.0));
    if (i > 0 && field.exited[i] < field.exited[i - 1]) monotone = false;
  }
  SuiteResult r = finish("density-conservation", monotone ? worst : INFINITY, 1e-12);
  std::ostringstream detail;
  detail << "exited(T) = " << field.exited_fraction(field.grid.N)
         << (monotone ? ", exits monotone" : ", exits NOT monotone");
  r.detail = detail.str();
  return r;
}

SuiteResult check_pushforward_mean() {
  const Decay decay;
  const DensityField field = decay.run(4000, 7);
  const auto [mean, se] = mean_and_stderr(field.terminal_states);
  const double expected = std::exp(-decay.grid.T);
  std::ostringstream detail;
  detail << "mean " << mean << " vs e^-T " << expected << ", se " << se;
  return finish("pushforward-mean", std::abs(mean - expected) / se, 3.0, false, detail.str());
}

SuiteResult check_integrator_order() {
  auto rhs = [](double, const Vec& x) -> Vec { return -x; };
  std::vector<double> hs, errs;
  for (int steps : {5, 10, 20, 40}) {
    const double h = 1.0 / steps;
    Vec x = Vec::Constant(1, 1.0);
    for (int k = 0; k < steps; ++k) x = rk4_step(rhs, k * h, x, h);
    hs.push_back(h);
    errs.push_back(std::abs(x(0) - std::exp(-1.0)));
  }
  return finish("integrator-order", convergence_slope(hs, errs), 3.7, true,
                "RK4 on x' = -x, h = 1/5 .. 1/40");
}

SuiteResult check_monte_carlo_rate() {
  const Decay decay;
  const double expected = std::exp(-decay.grid.T);
  std::vector<double> ns, rms;
  for (int n : {250, 1000, 4000}) {
    double sq = 0.0;
    const int repeats = 8;
    for (int s = 0; s < repeats; ++s) {
      const DensityField field = decay.run(n, 100 + s);
      const double mean = mean_and_stderr(field.terminal_states).first;
      sq += (mean - expected) * (mean - expected);
    }
    ns.push_back(n);
    rms.push_back(std::sqrt(sq / repeats));
  }
  const double slope = convergence_slope(ns, rms);
  std::ostringstream detail;
  detail << "rms error slope vs trackmax " << slope << " (ideal -0.5)";
  SuiteResult r = finish("montecarlo-rate", std::abs(slope + 0.5), 0.25, false, detail.str());
  return r;
}

std::vector<SuiteResult> run_checks(CheckLevel level, bool corrupt_bias) {
  std::vector<SuiteResult> out;
  out.push_back(timed([&] { return check_jacobians(corrupt_bias); }));
  out.push_back(timed(check_riccati_oracle));
  out.push_back(timed(check_riccati_symmetry));
  out.push_back(timed(check_lambda_constancy));
  out.push_back(timed(check_density_conservation));
  out.push_back(timed(check_pushforward_mean));
  out.push_back(timed(check_integrator_order));
  if (level == CheckLevel::kFull) out.push_back(timed(check_monte_carlo_rate));
  return out;
}

void print_report(std::ostream& os, const std::vector<SuiteResult>& results) {
  for (const SuiteResult& r : results) {
    os << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(22) << r.name
       << " measured=" << std::setprecision(6) << r.measured
       << " tol=" << r.tolerance << " (" << std::fixed << std::setprecision(2)
       << r.seconds << " s)" << std::defaultfloat;
    if (!r.detail.empty()) os << "  " << r.detail;
    os << "\n";
  }
}

}  // namespace minatt
