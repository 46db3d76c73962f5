#include "minatt/lqr_init.hpp"

#include <cmath>
#include <sstream>

namespace minatt {

namespace {

void require_spd(const Mat& R) {
  if (R.rows() != R.cols() || (R - R.transpose()).norm() > 1e-12 * R.norm()) {
    throw Error("R must be symmetric");
  }
  Eigen::LLT<Mat> llt(R);
  if (llt.info() != Eigen::Success) throw Error("R must be positive definite");
}

void require_psd(const Mat& P) {
  if (P.rows() != P.cols() || (P - P.transpose()).norm() > 1e-12 * P.norm()) {
    throw Error("P_f must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(P);
  if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, P.norm())) {
    throw Error("P_f must be positive semidefinite");
  }
}

// Backward sweep of the Riccati matrix P and the affine offset s for
// z' = A z + B w + c with cost z(T)^T P_f z(T) + int w^T R w dt:
//   -P' = P A + A^T P - P S P,         S = B R^-1 B^T
//   -s' = (A - S P)^T s + P c,         s(T) = 0
// Integrated in reversed time tau = T - t with RK4.
struct AffineSweep {
  std::vector<Mat> P;
  std::vector<Vec> s;
};

bool use_information_form(const Mat& P_f) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(P_f);
  return eig.eigenvalues().minCoeff() > 1e-9 * eig.eigenvalues().maxCoeff();
}

void check_peak(const Mat& P, const TimeGrid& grid, int i,
                const RiccatiOptions& options) {
  const double peak = P.cwiseAbs().maxCoeff();
  if (!std::isfinite(peak) || peak > options.blowup_bound) {
    std::ostringstream msg;
    msg << "Riccati solution blew up near t = " << grid.t(i)
        << " (max |P_ij| = " << peak
        << "); the weights are too stiff for the grid";
    throw RiccatiBlowUpError(msg.str());
  }
}

// For positive definite P_f the sweep runs on W = P^-1 and y = W s, which
// obey linear equations in reversed time tau = T - t:
//   dW/dtau = -A W - W A^T + S
//   dy/dtau = -A y + c
// Large terminal weights make the direct form stiff (rates ~ |S P_f|) while
// this form stays as smooth as A itself.
void information_sweep(const std::vector<Mat>& A_sched,
                       const std::vector<Mat>& B_sched,
                       const std::vector<Vec>& c, const Mat& r_inv,
                       const Mat& P_f, const TimeGrid& grid,
                       const RiccatiOptions& options, AffineSweep& out) {
  const int n = static_cast<int>(P_f.rows());
  out.P.assign(grid.nodes(), Mat());
  out.s.assign(grid.nodes(), Vec());
  Mat W = P_f.inverse();
  W = 0.5 * (W + W.transpose()).eval();
  Vec y = Vec::Zero(n);
  out.P[grid.N] = P_f;
  out.s[grid.N] = Vec::Zero(n);

  const double h = grid.dt() / options.substeps;
  for (int i = grid.N; i > 0; --i) {
    auto rhs = [&](double alpha, const Mat& Wk, const Vec& yk, Mat& dW,
                   Vec& dy) {
      const Mat A = alpha * A_sched[i] + (1.0 - alpha) * A_sched[i - 1];
      const Mat B = alpha * B_sched[i] + (1.0 - alpha) * B_sched[i - 1];
      const Vec ci = alpha * c[i] + (1.0 - alpha) * c[i - 1];
      dW = -A * Wk - Wk * A.transpose() + B * r_inv * B.transpose();
      dy = -A * yk + ci;
    };
    for (int k = 0; k < options.substeps; ++k) {
      const double a0 = 1.0 - static_cast<double>(k) / options.substeps;
      const double da = 1.0 / options.substeps;
      Mat k1W, k2W, k3W, k4W;
      Vec k1y, k2y, k3y, k4y;
      rhs(a0, W, y, k1W, k1y);
      rhs(a0 - 0.5 * da, W + 0.5 * h * k1W, y + 0.5 * h * k1y, k2W, k2y);
      rhs(a0 - 0.5 * da, W + 0.5 * h * k2W, y + 0.5 * h * k2y, k3W, k3y);
      rhs(a0 - da, W + h * k3W, y + h * k3y, k4W, k4y);
      W += (h / 6.0) * (k1W + 2.0 * k2W + 2.0 * k3W + k4W);
      y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
      W = 0.5 * (W + W.transpose()).eval();
    }
    Mat P = W.inverse();
    P = 0.5 * (P + P.transpose()).eval();
    check_peak(P, grid, i, options);
    out.P[i - 1] = P;
    out.s[i - 1] = P * y;
  }
}

AffineSweep sweep(const std::vector<Mat>& A_sched,
                  const std::vector<Mat>& B_sched, const std::vector<Vec>& c,
                  const Mat& R, const Mat& P_f, const TimeGrid& grid,
                  const RiccatiOptions& options) {
  require_spd(R);
  require_psd(P_f);
  const int n = static_cast<int>(P_f.rows());
  if (static_cast<int>(A_sched.size()) != grid.nodes() ||
      static_cast<int>(B_sched.size()) != grid.nodes()) {
    throw Error("Riccati: schedule length does not match the grid");
  }
  const Mat r_inv = R.inverse();

  AffineSweep out;
  if (use_information_form(P_f)) {
    information_sweep(A_sched, B_sched, c, r_inv, P_f, grid, options, out);
    return out;
  }
  out.P.assign(grid.nodes(), Mat());
  out.s.assign(grid.nodes(), Vec());
  Mat P = P_f;
  Vec s = Vec::Zero(n);
  out.P[grid.N] = P;
  out.s[grid.N] = s;

  const double h = grid.dt() / options.substeps;
  for (int i = grid.N; i > 0; --i) {
    // Within [t_{i-1}, t_i]; alpha = 1 at t_i, 0 at t_{i-1}.
    auto coefficients = [&](double alpha, Mat& A, Mat& S, Vec& ci) {
      A = alpha * A_sched[i] + (1.0 - alpha) * A_sched[i - 1];
      const Mat B = alpha * B_sched[i] + (1.0 - alpha) * B_sched[i - 1];
      S = B * r_inv * B.transpose();
      ci = alpha * c[i] + (1.0 - alpha) * c[i - 1];
    };
    // Reversed-time derivatives dP/dtau = -P' and ds/dtau = -s'.
    auto rhs = [&](double alpha, const Mat& Pk, const Vec& sk, Mat& dP,
                   Vec& ds) {
      Mat A, S;
      Vec ci;
      coefficients(alpha, A, S, ci);
      dP = Pk * A + A.transpose() * Pk - Pk * S * Pk;
      ds = (A - S * Pk).transpose() * sk + Pk * ci;
    };
    for (int k = 0; k < options.substeps; ++k) {
      const double a0 = 1.0 - static_cast<double>(k) / options.substeps;
      const double da = 1.0 / options.substeps;
      Mat k1P, k2P, k3P, k4P;
      Vec k1s, k2s, k3s, k4s;
      rhs(a0, P, s, k1P, k1s);
      rhs(a0 - 0.5 * da, P + 0.5 * h * k1P, s + 0.5 * h * k1s, k2P, k2s);
      rhs(a0 - 0.5 * da, P + 0.5 * h * k2P, s + 0.5 * h * k2s, k3P, k3s);
      rhs(a0 - da, P + h * k3P, s + h * k3s, k4P, k4s);
      P += (h / 6.0) * (k1P + 2.0 * k2P + 2.0 * k3P + k4P);
      s += (h / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
      P = 0.5 * (P + P.transpose()).eval();
      const double peak = P.cwiseAbs().maxCoeff();
      if (!std::isfinite(peak) || peak > options.blowup_bound) {
        std::ostringstream msg;
        msg << "Riccati solution blew up near t = " << grid.t(i)
            << " (max |P_ij| = " << peak
            << "); the weights are too stiff for the grid";
        throw RiccatiBlowUpError(msg.str());
      }
    }
    out.P[i - 1] = P;
    out.s[i - 1] = s;
  }
  return out;
}

}  // namespace

RiccatiSolution solve_riccati_backward(const std::vector<Mat>& A_sched,
                                       const std::vector<Mat>& B_sched,
                                       const Mat& R, const Mat& P_f,
                                       const TimeGrid& grid,
                                       const RiccatiOptions& options) {
  const std::vector<Vec> zero(grid.nodes(), Vec::Zero(P_f.rows()));
  AffineSweep sw = sweep(A_sched, B_sched, zero, R, P_f, grid, options);
  return RiccatiSolution{grid, std::move(sw.P)};
}

Reference make_reference(const ArmSystem& arm, const Vec& x_init,
                         const Vec& target, const TimeGrid& grid,
                         const Mat& P_f, const Mat& R,
                         const ReferenceOptions& options) {
  const Vec goal = inverse_kinematics(arm.params(), Eigen::Vector4d(target));

  // Linearize at x_init about the bias-compensating torque.
  const Vec u_eq = bias(arm.params(), x_init.head<2>(), x_init.tail<2>());
  Mat A0, B0;
  arm.jacobians(x_init, u_eq, A0, B0);
  const Vec f0 = arm.f(x_init, u_eq);
  // In error coordinates z = x - goal: z' = A0 z + B0 (u - u_eq) + c.
  const Vec c = f0 + A0 * (goal - x_init);

  const std::vector<Mat> A_sched(grid.nodes(), A0);
  const std::vector<Mat> B_sched(grid.nodes(), B0);
  const std::vector<Vec> c_sched(grid.nodes(), c);
  const AffineSweep sw =
      sweep(A_sched, B_sched, c_sched, R, P_f, grid, options.riccati);

  // The LQR policy u = u_eq - R^-1 B0^T (P (x - goal) + s) is itself affine
  // in x, so it rolls out through the ordinary closed-loop integrator.
  const Mat gain_factor = R.llt().solve(B0.transpose());
  std::vector<Mat> K(grid.nodes());
  std::vector<Vec> v(grid.nodes());
  for (int i = 0; i < grid.nodes(); ++i) {
    K[i] = -gain_factor * sw.P[i];
    v[i] = u_eq + gain_factor * (sw.P[i] * goal - sw.s[i]);
  }
  const ControlLaw lqr(grid, std::move(K), std::move(v));
  const Trajectory traj =
      integrate_closed_loop(arm, lqr, x_init, options.rollout);

  Reference ref;
  ref.grid = grid;
  ref.x_star = traj.states;
  ref.u_star = traj.controls;
  ref.goal_state = goal;
  return ref;
}

void linearize_along(const System& system, const Reference& ref,
                     std::vector<Mat>& A_sched, std::vector<Mat>& B_sched) {
  const int nodes = ref.grid.nodes();
  A_sched.assign(nodes, Mat());
  B_sched.assign(nodes, Mat());
  for (int i = 0; i < nodes; ++i) {
    system.jacobians(ref.x_star[i], ref.u_star[i], A_sched[i], B_sched[i]);
  }
}

ControlLaw initial_law(const Reference& ref, const RiccatiSolution& riccati,
                       const Mat& R, const std::vector<Mat>& B_sched) {
  const int nodes = ref.grid.nodes();
  std::vector<Mat> K(nodes);
  std::vector<Vec> v(nodes);
  for (int i = 0; i < nodes; ++i) {
    const Mat gain = R.llt().solve(B_sched[i].transpose()) * riccati.P[i];
    K[i] = -gain;
    v[i] = ref.u_star[i] + gain * ref.x_star[i];
  }
  return ControlLaw(ref.grid, std::move(K), std::move(v));
}

}  // namespace minatt
