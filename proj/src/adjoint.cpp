#include "minatt/adjoint.hpp"

#include <ostream>

#include "minatt/csv.hpp"

namespace minatt {

namespace {

void require_context(const TerminalContext& ctx) {
  if (ctx.mode == TerminalMode::kEndpoint) {
    if (ctx.system == nullptr) throw Error("endpoint terminal needs a system");
  } else if (ctx.field == nullptr || ctx.psi == nullptr) {
    throw Error("density-mismatch terminal needs a field and a target density");
  }
}

double cell_lambda(const TerminalContext& ctx, CellKey key) {
  const PhaseBox& box = ctx.field->box;
  const auto it = ctx.psi->find(key);
  const double psi = it == ctx.psi->end() ? 0.0 : it->second;
  return ctx.field->fraction(ctx.field->grid.N, key) / box.cell_volume() - psi;
}

}  // namespace

double terminal_lambda(const Vec& x_T, const TerminalContext& ctx) {
  require_context(ctx);
  if (ctx.mode == TerminalMode::kEndpoint) {
    return ctx.gamma * (ctx.system->output(x_T) - ctx.target).squaredNorm();
  }
  return density_at(*ctx.field, x_T, ctx.field->grid.N) -
         binned_at(*ctx.psi, ctx.field->box, x_T);
}

Vec terminal_gradient(const Vec& x_T, const TerminalContext& ctx) {
  require_context(ctx);
  if (ctx.mode == TerminalMode::kEndpoint) {
    const Vec miss = ctx.system->output(x_T) - ctx.target;
    return 2.0 * ctx.gamma * ctx.system->output_jacobian(x_T).transpose() * miss;
  }
  const PhaseBox& box = ctx.field->box;
  const int n = box.dim();
  Vec grad = Vec::Zero(n);
  const auto cell = box.cell_of(x_T);
  if (!cell) return grad;
  const std::vector<int> index = box.unpack(*cell);
  const int last = ctx.field->grid.N;
  const double here = cell_lambda(ctx, *cell);
  for (int d = 0; d < n; ++d) {
    const double h = box.cell_width()(d);
    std::vector<int> lo = index, hi = index;
    const bool has_lo = index[d] > 0;
    const bool has_hi = index[d] + 1 < box.intervals()[d];
    if (has_lo) --lo[d];
    if (has_hi) ++hi[d];
    const CellKey lo_key = box.pack(lo), hi_key = box.pack(hi);
    const bool lo_occupied = has_lo && ctx.field->occupied_count(last, lo_key) > 0;
    const bool hi_occupied = has_hi && ctx.field->occupied_count(last, hi_key) > 0;
    if (has_lo && has_hi && (lo_occupied == hi_occupied)) {
      grad(d) = (cell_lambda(ctx, hi_key) - cell_lambda(ctx, lo_key)) / (2.0 * h);
    } else if (hi_occupied || (has_hi && !has_lo)) {
      grad(d) = (cell_lambda(ctx, hi_key) - here) / h;
    } else if (has_lo) {
      grad(d) = (here - cell_lambda(ctx, lo_key)) / h;
    }
  }
  return grad;
}

AdjointSchedule lambda_schedule(const Trajectory& traj,
                                const TerminalContext& ctx) {
  if (!traj.has_sensitivities()) {
    throw Error("lambda_schedule: trajectory has no sensitivities");
  }
  const Vec& x_T = traj.states.back();
  const double lambda_T = terminal_lambda(x_T, ctx);
  const Vec grad_T = terminal_gradient(x_T, ctx);
  AdjointSchedule adj;
  adj.grid = traj.grid;
  adj.lambda.assign(traj.grid.nodes(), lambda_T);
  adj.grad.resize(traj.grid.nodes());
  for (int i = 0; i < traj.grid.nodes(); ++i) {
    adj.grad[i] = traj.sensitivities[i].transpose() * grad_T;
  }
  return adj;
}

std::vector<double> reverify_lambda(const System& system,
                                    const ControlLaw& law,
                                    const Trajectory& traj,
                                    const TerminalContext& ctx,
                                    const RolloutOptions& options) {
  const TimeGrid& grid = law.grid;
  std::vector<double> out(grid.nodes());
  for (int i = 0; i < grid.nodes(); ++i) {
    Vec x = traj.states[i];
    for (int j = i; j < grid.N; ++j) {
      x = advance_interval(system, law, x, j, options);
    }
    out[i] = terminal_lambda(x, ctx);
  }
  return out;
}

void write_adjoint_csv(std::ostream& os, const AdjointSchedule& adj) {
  const int n = static_cast<int>(adj.grad.front().size());
  std::vector<std::string> header{"t", "lambda"};
  for (int j = 0; j < n; ++j) header.push_back("grad_" + std::to_string(j));
  csv::write_row(os, header);
  for (int i = 0; i < adj.grid.nodes(); ++i) {
    std::vector<double> row{adj.grid.t(i), adj.lambda[i]};
    for (int j = 0; j < n; ++j) row.push_back(adj.grad[i](j));
    csv::write_row(os, row);
  }
}

}  // namespace minatt
