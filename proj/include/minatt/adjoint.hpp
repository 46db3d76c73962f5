#pragma once

#include <iosfwd>
#include <vector>

#include "minatt/density.hpp"
#include "minatt/rollout.hpp"

namespace minatt {

enum class TerminalMode { kEndpoint, kDensityMismatch };

// Data the terminal multiplier needs. Endpoint mode reads gamma, target and
// system (its output map is phi); density-mismatch mode reads field and psi.
struct TerminalContext {
  TerminalMode mode = TerminalMode::kEndpoint;
  double gamma = 1e6;
  Vec target;
  const System* system = nullptr;
  const DensityField* field = nullptr;
  const BinnedDensity* psi = nullptr;
};

// lambda(x, T): gamma |phi(x) - phi_f|^2, or rho(x, T) - psi(x).
double terminal_lambda(const Vec& x_T, const TerminalContext& ctx);

// d lambda(x, T) / dx. Endpoint: 2 gamma J_phi^T (phi - phi_f). Density
// mismatch: cell-spaced central differences, one-sided next to empty cells.
Vec terminal_gradient(const Vec& x_T, const TerminalContext& ctx);

struct AdjointSchedule {
  TimeGrid grid;
  std::vector<double> lambda;
  std::vector<Vec> grad;
};

// lambda is constant along the characteristic; the gradient is carried back
// with the state-transition matrices: grad_i = Phi(T, t_i)^T grad_T.
AdjointSchedule lambda_schedule(const Trajectory& traj,
                                const TerminalContext& ctx);

// Re-derives lambda(x(t_i), t_i) by rolling forward from every node to T.
std::vector<double> reverify_lambda(const System& system,
                                    const ControlLaw& law,
                                    const Trajectory& traj,
                                    const TerminalContext& ctx,
                                    const RolloutOptions& options = {});

// Columns t, lambda, grad_*.
void write_adjoint_csv(std::ostream& os, const AdjointSchedule& adj);

}  // namespace minatt
