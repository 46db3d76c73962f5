#pragma once

#include <vector>

#include "minatt/density.hpp"
#include "minatt/dynamics.hpp"
#include "minatt/schedules.hpp"

namespace minatt {

struct CostBreakdown {
  double terminal = 0.0;
  double attention_x = 0.0;   // int int |du/dx|^2
  double attention_t = 0.0;   // int int |du/dt|^2
  double total = 0.0;

  static CostBreakdown make(double terminal, double attention_x,
                            double attention_t) {
    return {terminal, attention_x, attention_t,
            terminal + attention_x + attention_t};
  }
};

struct AttentionCost {
  double attention_x = 0.0;
  double attention_t = 0.0;
};

// Running attention cost of u = K x + v integrated over the whole box in
// closed form from the box moments; time integrals by the trapezoid rule.
// With normalize_volume the box integral becomes a box average.
AttentionCost attention_running_cost(const ControlLaw& law, const PhaseBox& box,
                                     bool normalize_volume = false);

// gamma * sum_k w_k |phi(x_k) - phi_f|^2.
double terminal_cost_endpoint(const std::vector<Vec>& states,
                              const std::vector<double>& weights, double gamma,
                              const Vec& target, const System& system);

// Monte Carlo terminal samples each carry weight 1 / trackmax.
double terminal_cost_endpoint(const DensityField& field, double gamma,
                              const Vec& target, const System& system);

double terminal_cost_density(const DensityField& field, const BinnedDensity& psi);

}  // namespace minatt
