#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace minatt {

enum class CheckLevel { kFast, kFull };

struct SuiteResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
  double seconds = 0.0;
};

// Invariant suites: jacobian, riccati, lambda, density, integrator, and at
// the full level montecarlo. corrupt_bias flips the arm bias sign inside f
// (negative control for the Jacobian suite).
std::vector<SuiteResult> run_checks(CheckLevel level, bool corrupt_bias = false);

SuiteResult check_jacobians(bool corrupt_bias = false);
SuiteResult check_riccati_oracle();
SuiteResult check_riccati_symmetry();
SuiteResult check_lambda_constancy();
SuiteResult check_density_conservation();
SuiteResult check_pushforward_mean();
SuiteResult check_integrator_order();
SuiteResult check_monte_carlo_rate();

// Least-squares slope of log(err) against log(h).
double convergence_slope(const std::vector<double>& h, const std::vector<double>& err);

void print_report(std::ostream& os, const std::vector<SuiteResult>& results);

}  // namespace minatt
