#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "minatt/adjoint.hpp"
#include "minatt/config.hpp"
#include "minatt/cost.hpp"
#include "minatt/density.hpp"
#include "minatt/gradient_step.hpp"
#include "minatt/lqr_init.hpp"

namespace minatt {

enum class Termination { kConverged, kMaxIterations, kLineSearchExhausted };

std::string to_string(Termination reason);

struct LineSearchOptions {
  LineSearchRule rule = LineSearchRule::kOuterCost;
  int max_inner = 40;
  double eps_floor = 1e-12;
};

struct LineSearchOutcome {
  bool accepted = false;
  double eps = 0.0;        // accepted step
  double eta = 0.0;        // accepted cost
  // (eps, eta) of every trial in evaluation order.
  std::vector<std::pair<double, double>> trials;
};

// Evaluates trial(eps) for eps = eps_start, eps_start / 2, ... and returns
// the first accepted step. `incumbent` is the previous outer cost.
LineSearchOutcome line_search(const std::function<double(double)>& trial,
                              double eps_start, double incumbent,
                              const LineSearchOptions& options);

// Cost of a law together with the Monte Carlo field it was computed from.
struct Evaluation {
  CostBreakdown cost;
  DensityField field;
};

// Everything fixed across iterations of one solve: box, initial and target
// densities, terminal context, options. Evaluations reuse the configured seed
// so that trial costs share their random numbers.
class Problem {
 public:
  Problem(const System& system, SolverConfig config);

  const System& system() const { return system_; }
  const SolverConfig& config() const { return config_; }
  const PhaseBox& box() const { return box_; }
  const InitialDensity& rho0() const { return rho0_; }
  const BinnedDensity& psi() const { return psi_; }

  Evaluation evaluate(const ControlLaw& law) const;
  Trajectory center_trajectory(const ControlLaw& law) const;
  TerminalContext terminal_context(const DensityField& field) const;
  double miss(const Trajectory& traj) const;

 private:
  const System& system_;
  SolverConfig config_;
  PhaseBox box_;
  InitialDensity rho0_;
  BinnedDensity psi_;
};

struct TrialRecord {
  int outer = 0;
  int inner = 0;
  double eps = 0.0;
  double eta = 0.0;
  bool accepted = false;
};

struct IterationRecord {
  int n = 0;
  CostBreakdown cost;
  double eps_accepted = 0.0;
  int trials = 0;
  Ellipticity ellipticity;
  double miss = 0.0;
  int density_fallbacks = 0;
};

struct SolveResult {
  ControlLaw initial_law;
  ControlLaw final_law;
  std::optional<Reference> reference;
  std::vector<IterationRecord> history;   // entry 0 is the initial law
  std::vector<TrialRecord> trials;
  int outer_iterations = 0;
  int inner_iterations = 0;
  Termination reason = Termination::kMaxIterations;
  Trajectory initial_trajectory;
  Trajectory final_trajectory;
  DensityField final_field;
};

// Mean of |K(t_i) x(t_i)| / |v(t_i)| over the nodes in the first and last
// quarter of the horizon.
struct FeedbackTrend {
  double first_quarter = 0.0;
  double last_quarter = 0.0;
};

FeedbackTrend feedback_trend(const ControlLaw& law, const Trajectory& traj);

// Gradient iteration from a given initial law.
SolveResult optimize(const Problem& problem, const ControlLaw& initial);

// LQR initialization for the arm: reference, Riccati solve, (K0, v0).
ControlLaw initialize(const ArmSystem& arm, const SolverConfig& config,
                      Reference* reference = nullptr);

// initialize + optimize.
SolveResult solve(const ArmSystem& arm, const SolverConfig& config);

}  // namespace minatt
