#include "minatt/optimizer.hpp"

#include <cmath>
#include <limits>

namespace minatt {

std::string to_string(Termination reason) {
  switch (reason) {
    case Termination::kConverged: return "converged";
    case Termination::kMaxIterations: return "max-iterations";
    case Termination::kLineSearchExhausted: return "line-search-exhausted";
  }
  return "unknown";
}

LineSearchOutcome line_search(const std::function<double(double)>& trial,
                              double eps_start, double incumbent,
                              const LineSearchOptions& options) {
  if (!(eps_start > 0.0)) throw Error("line search needs a positive start step");
  LineSearchOutcome out;
  double eps = eps_start;
  double previous = incumbent;
  for (int m = 0; m < options.max_inner && eps >= options.eps_floor; ++m) {
    const double eta = trial(eps);
    out.trials.emplace_back(eps, eta);
    const double reference =
        (options.rule == LineSearchRule::kPreviousTrial && m > 0) ? previous
                                                                  : incumbent;
    if (eta <= reference) {
      out.accepted = true;
      out.eps = eps;
      out.eta = eta;
      return out;
    }
    previous = eta;
    eps *= 0.5;
  }
  return out;
}

FeedbackTrend feedback_trend(const ControlLaw& law, const Trajectory& traj) {
  const TimeGrid& grid = law.grid;
  double first = 0.0, last = 0.0;
  int n_first = 0, n_last = 0;
  for (int i = 0; i < grid.nodes(); ++i) {
    const double vn = law.v[i].norm();
    const double ratio = vn > 0.0 ? (law.K[i] * traj.states[i]).norm() / vn
                                  : std::numeric_limits<double>::infinity();
    const double t = grid.t(i);
    if (t <= 0.25 * grid.T + 1e-12) {
      first += ratio;
      ++n_first;
    }
    if (t >= 0.75 * grid.T - 1e-12) {
      last += ratio;
      ++n_last;
    }
  }
  return {first / n_first, last / n_last};
}

namespace {

PhaseBox make_box(const SolverConfig& c) {
  std::vector<int> intervals = c.box_intervals;
  if (intervals.size() == 1) intervals.assign(c.state_dim(), intervals.front());
  return PhaseBox(c.box_lower, c.box_upper, intervals);
}

}  // namespace

Problem::Problem(const System& system, SolverConfig config)
    : system_(system),
      config_(std::move(config)),
      box_(make_box(config_)),
      rho0_(config_.x_init, box_, config_.half_width) {
  config_.validate();
  if (system_.state_dim() != config_.state_dim() ||
      system_.control_dim() != config_.control_dim()) {
    throw ConfigError("config dimensions do not match the system");
  }
  if (config_.mode == TerminalMode::kDensityMismatch) {
    if (config_.target.size() != config_.state_dim()) {
      throw ConfigError("density-mismatch mode needs a state-space target");
    }
    psi_ = TargetDensity(config_.target, box_, config_.half_width).binned(box_);
  }
}

Evaluation Problem::evaluate(const ControlLaw& law) const {
  DensityOptions options;
  options.trackmax = config_.trackmax;
  options.seed = config_.seed;
  options.workers = config_.workers;
  options.rollout = config_.rollout();
  Evaluation eval{CostBreakdown{}, estimate_density(system_, law, rho0_, box_, options)};
  const double terminal =
      config_.mode == TerminalMode::kEndpoint
          ? terminal_cost_endpoint(eval.field, config_.gamma, config_.target, system_)
          : terminal_cost_density(eval.field, psi_);
  const AttentionCost attention =
      attention_running_cost(law, box_, config_.normalize_volume);
  eval.cost = CostBreakdown::make(terminal, attention.attention_x, attention.attention_t);
  return eval;
}

Trajectory Problem::center_trajectory(const ControlLaw& law) const {
  return propagate_sensitivity(
      system_, law, integrate_closed_loop(system_, law, config_.x_init, config_.rollout()),
      config_.rollout());
}

TerminalContext Problem::terminal_context(const DensityField& field) const {
  TerminalContext ctx;
  ctx.mode = config_.mode;
  ctx.gamma = config_.gamma;
  ctx.target = config_.target;
  ctx.system = &system_;
  ctx.field = &field;
  ctx.psi = &psi_;
  return ctx;
}

double Problem::miss(const Trajectory& traj) const {
  const Vec y = system_.output(traj.states.back());
  if (y.size() != config_.target.size()) return std::numeric_limits<double>::quiet_NaN();
  return (y - config_.target).norm();
}

SolveResult optimize(const Problem& problem, const ControlLaw& initial) {
  const SolverConfig& config = problem.config();
  const System& system = problem.system();
  const Vec probe_scale = problem.box().half_extent();

  SolveResult result;
  result.initial_law = initial;
  result.initial_trajectory = problem.center_trajectory(initial);

  ControlLaw law = initial;
  Evaluation current = problem.evaluate(law);
  Trajectory traj = result.initial_trajectory;

  auto record = [&](int n, double eps, int trials, int fallbacks) {
    IterationRecord rec;
    rec.n = n;
    rec.cost = current.cost;
    rec.eps_accepted = eps;
    rec.trials = trials;
    rec.ellipticity = ellipticity_constants(system, law, traj, probe_scale);
    rec.miss = problem.miss(traj);
    rec.density_fallbacks = fallbacks;
    result.history.push_back(rec);
  };
  record(0, 0.0, 0, 0);

  const LineSearchOptions ls_options{config.line_search, config.max_inner,
                                     config.eps_floor};
  const double sign = config.step_sign == StepSign::kDescent ? -1.0 : 1.0;
  double eps_start = config.eps0;
  result.reason = Termination::kMaxIterations;
  for (int n = 1; n <= config.max_outer; ++n) {
    int fallbacks = 0;
    const std::vector<double> rho = density_along(current.field, traj, &fallbacks);
    const AdjointSchedule adj =
        lambda_schedule(traj, problem.terminal_context(current.field));
    const UpdateDirection dir = compute_direction(system, law, traj, rho, adj);

    // The last trial evaluated is the accepted one, so keep it around.
    std::optional<Evaluation> last;
    std::optional<Trajectory> last_traj;
    auto trial = [&](double eps) {
      const ControlLaw candidate = apply(law, dir, sign * eps);
      try {
        last_traj = problem.center_trajectory(candidate);
      } catch (const DivergenceError&) {
        last.reset();
        return std::numeric_limits<double>::infinity();
      }
      last = problem.evaluate(candidate);
      return last->cost.total;
    };
    const LineSearchOutcome ls =
        line_search(trial, eps_start, current.cost.total, ls_options);

    for (std::size_t m = 0; m < ls.trials.size(); ++m) {
      const bool accepted = ls.accepted && m + 1 == ls.trials.size();
      result.trials.push_back({n, static_cast<int>(m), ls.trials[m].first,
                               ls.trials[m].second, accepted});
    }
    result.inner_iterations += static_cast<int>(ls.trials.size());
    result.outer_iterations = n;
    if (!ls.accepted) {
      result.reason = Termination::kLineSearchExhausted;
      break;
    }

    const double previous = current.cost.total;
    law = apply(law, dir, sign * ls.eps);
    current = std::move(*last);
    traj = std::move(*last_traj);
    eps_start = 1.5 * ls.eps;
    record(n, ls.eps, static_cast<int>(ls.trials.size()), fallbacks);

    const double change = std::abs(current.cost.total - previous);
    if (previous == 0.0 || change / previous <= config.eps_tol) {
      result.reason = Termination::kConverged;
      break;
    }
  }
  result.final_law = law;
  result.final_trajectory = traj;
  result.final_field = std::move(current.field);
  return result;
}

ControlLaw initialize(const ArmSystem& arm, const SolverConfig& config,
                      Reference* reference) {
  const TimeGrid grid = config.grid();
  const Mat P_f = config.terminal_weight.asDiagonal();
  const Mat R = config.control_weight.asDiagonal();
  ReferenceOptions options;
  options.rollout = config.rollout();
  options.riccati = {config.riccati_substeps, config.riccati_bound};
  Reference ref = make_reference(arm, config.x_init, config.target, grid, P_f, R, options);
  std::vector<Mat> A_sched, B_sched;
  linearize_along(arm, ref, A_sched, B_sched);
  const RiccatiSolution riccati =
      solve_riccati_backward(A_sched, B_sched, R, P_f, grid, options.riccati);
  ControlLaw law = initial_law(ref, riccati, R, B_sched);
  if (reference) *reference = std::move(ref);
  return law;
}

SolveResult solve(const ArmSystem& arm, const SolverConfig& config) {
  config.validate();
  const Problem problem(arm, config);
  Reference ref;
  const ControlLaw initial = initialize(arm, config, &ref);
  SolveResult result = optimize(problem, initial);
  result.reference = std::move(ref);
  return result;
}

}  // namespace minatt
