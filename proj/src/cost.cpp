#include "minatt/cost.hpp"

namespace minatt {

AttentionCost attention_running_cost(const ControlLaw& law, const PhaseBox& box,
                                     bool normalize_volume) {
  const ScheduleDerivatives d = time_derivatives(law);
  const double volume = normalize_volume ? 1.0 : box.volume();
  // First and second moments of the uniform measure on the box, scaled by
  // the chosen volume: m1 = V c, m2 = V (c c^T + diag(h^2 / 3)).
  const Vec c = box.center();
  const Vec h = box.half_extent();
  const Vec m1 = volume * c;
  Mat m2 = volume * (c * c.transpose());
  m2.diagonal() += volume * h.cwiseProduct(h) / 3.0;

  const int nodes = law.grid.nodes();
  std::vector<double> gx(nodes), gt(nodes);
  for (int i = 0; i < nodes; ++i) {
    const Mat& dK = d.dK[i];
    const Vec& dv = d.dv[i];
    gx[i] = volume * law.K[i].squaredNorm();
    gt[i] = (dK * m2 * dK.transpose()).trace() + 2.0 * dv.dot(dK * m1) +
            volume * dv.squaredNorm();
  }
  const double dt = law.grid.dt();
  AttentionCost out;
  for (int i = 0; i + 1 < nodes; ++i) {
    out.attention_x += 0.5 * dt * (gx[i] + gx[i + 1]);
    out.attention_t += 0.5 * dt * (gt[i] + gt[i + 1]);
  }
  return out;
}

double terminal_cost_endpoint(const std::vector<Vec>& states,
                              const std::vector<double>& weights, double gamma,
                              const Vec& target, const System& system) {
  if (states.size() != weights.size()) {
    throw Error("terminal_cost_endpoint: states and weights differ in length");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    sum += weights[k] * (system.output(states[k]) - target).squaredNorm();
  }
  return gamma * sum;
}

double terminal_cost_endpoint(const DensityField& field, double gamma,
                              const Vec& target, const System& system) {
  const std::vector<double> weights(field.terminal_states.size(),
                                    1.0 / field.trackmax);
  return terminal_cost_endpoint(field.terminal_states, weights, gamma, target,
                                system);
}

double terminal_cost_density(const DensityField& field, const BinnedDensity& psi) {
  return terminal_mismatch(field, psi);
}

}  // namespace minatt
