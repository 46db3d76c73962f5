#pragma once

#include <vector>

#include "minatt/dynamics.hpp"
#include "minatt/rollout.hpp"
#include "minatt/schedules.hpp"

namespace minatt {

struct RiccatiOptions {
  int substeps = 64;            // RK4 steps per grid interval
  double blowup_bound = 1e12;   // max |P_ij| before giving up
};

struct RiccatiSolution {
  TimeGrid grid;
  std::vector<Mat> P;           // P(t_i), symmetric
};

// Backward solve of -P' = P A + A^T P - P B R^-1 B^T P, P(T) = P_f, with
// A(t), B(t) linearly interpolated between the node schedules.
RiccatiSolution solve_riccati_backward(const std::vector<Mat>& A_sched,
                                       const std::vector<Mat>& B_sched,
                                       const Mat& R, const Mat& P_f,
                                       const TimeGrid& grid,
                                       const RiccatiOptions& options = {});

struct Reference {
  TimeGrid grid;
  std::vector<Vec> x_star;
  std::vector<Vec> u_star;
  Vec goal_state;               // joint-space goal from inverse kinematics
};

struct ReferenceOptions {
  RolloutOptions rollout;
  RiccatiOptions riccati;
};

// Finite-horizon LQR on the dynamics linearized at x_init, steering toward
// the inverse-kinematics goal of `target`, rolled through the nonlinear arm.
// The result need not reach the target.
Reference make_reference(const ArmSystem& arm, const Vec& x_init,
                         const Vec& target, const TimeGrid& grid,
                         const Mat& P_f, const Mat& R,
                         const ReferenceOptions& options = {});

// A(t_i), B(t_i) along the reference.
void linearize_along(const System& system, const Reference& ref,
                     std::vector<Mat>& A_sched, std::vector<Mat>& B_sched);

// K0 = -R^-1 B^T P and v0 = u* + R^-1 B^T P x* at every node.
ControlLaw initial_law(const Reference& ref, const RiccatiSolution& riccati,
                       const Mat& R, const std::vector<Mat>& B_sched);

}  // namespace minatt
