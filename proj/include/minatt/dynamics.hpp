#pragma once

#include <array>

#include "minatt/types.hpp"

namespace minatt {

// State-space model x' = f(x, u) with an output map phi(x) used by the
// endpoint cost. Subclasses supply f; Jacobians default to central
// differences and the output map defaults to the identity.
class System {
 public:
  virtual ~System() = default;

  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;

  virtual Vec f(const Vec& x, const Vec& u) const = 0;

  // A = df/dx (n x n), B = df/du (n x m).
  virtual void jacobians(const Vec& x, const Vec& u, Mat& A, Mat& B) const;

  virtual Vec output(const Vec& x) const { return x; }
  virtual Mat output_jacobian(const Vec& x) const;

  // Central-difference Jacobians of f; also the fallback path of jacobians().
  void fd_jacobians(const Vec& x, const Vec& u, Mat& A, Mat& B,
                    double rel_step = 1e-6) const;
};

// x' = A x + B u with constant matrices. Used as a test system throughout.
class LinearSystem : public System {
 public:
  LinearSystem(Mat A, Mat B);

  int state_dim() const override { return static_cast<int>(a_.rows()); }
  int control_dim() const override { return static_cast<int>(b_.cols()); }
  Vec f(const Vec& x, const Vec& u) const override;
  void jacobians(const Vec& x, const Vec& u, Mat& A, Mat& B) const override;

 private:
  Mat a_;
  Mat b_;
};

struct ArmParams {
  double L1 = 0.30;
  double L2 = 0.33;
  double M1 = 1.4;
  double M2 = 1.0;
  double S1 = 0.11;
  double S2 = 0.16;
  double I1 = 0.025;
  double I2 = 0.045;
  double B11 = 0.05;
  double B12 = 0.025;
  double B21 = 0.025;
  double B22 = 0.05;
  double g = 0.0;

  // Throws ConfigError naming the first violated constraint.
  void validate() const;
  bool operator==(const ArmParams&) const = default;
};

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

Mat2 mass_matrix(const ArmParams& p, const Vec2& q);
Vec2 bias(const ArmParams& p, const Vec2& q, const Vec2& dq);

// (X, Y, Xdot, Ydot) of the end effector.
Eigen::Vector4d forward_kinematics(const ArmParams& p, const Eigen::Vector4d& x);
Eigen::Matrix4d fk_jacobian(const ArmParams& p, const Eigen::Vector4d& x);

// Joint state reaching the Cartesian position-velocity target. Elbow-down
// branch (q2 in [0, pi]); throws UnreachableTargetError outside the annulus
// |L1 - L2| <= r <= L1 + L2.
Eigen::Vector4d inverse_kinematics(const ArmParams& p,
                                   const Eigen::Vector4d& target);

// Two-link planar arm, state (q1, q2, dq1, dq2), control = joint torques.
class ArmSystem : public System {
 public:
  enum class JacobianMode { kAnalytic, kFiniteDifference };

  explicit ArmSystem(ArmParams params, double max_mass_condition = 1e8);

  const ArmParams& params() const { return params_; }

  int state_dim() const override { return 4; }
  int control_dim() const override { return 2; }
  Vec f(const Vec& x, const Vec& u) const override;
  void jacobians(const Vec& x, const Vec& u, Mat& A, Mat& B) const override;
  Vec output(const Vec& x) const override;
  Mat output_jacobian(const Vec& x) const override;

  void set_jacobian_mode(JacobianMode mode) { jacobian_mode_ = mode; }

  // Test hook: flips the sign of the bias vector inside f() only, so that
  // the analytic Jacobians no longer describe f. Used as a negative control
  // by the self-check suites.
  void set_corrupt_bias_sign(bool on) { corrupt_bias_sign_ = on; }

 private:
  Mat2 checked_mass(const Vec2& q) const;

  ArmParams params_;
  double max_mass_condition_;
  JacobianMode jacobian_mode_ = JacobianMode::kAnalytic;
  bool corrupt_bias_sign_ = false;
};

}  // namespace minatt
