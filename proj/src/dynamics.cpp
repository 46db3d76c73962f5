#include "minatt/dynamics.hpp"

#include <cmath>
#include <algorithm>
#include <sstream>

namespace minatt {

void System::jacobians(const Vec& x, const Vec& u, Mat& A, Mat& B) const {
  fd_jacobians(x, u, A, B);
}

Mat System::output_jacobian(const Vec& x) const {
  return Mat::Identity(x.size(), x.size());
}

void System::fd_jacobians(const Vec& x, const Vec& u, Mat& A, Mat& B,
                          double rel_step) const {
  const int n = state_dim();
  const int m = control_dim();
  A.resize(n, n);
  B.resize(n, m);
  Vec xp = x;
  for (int j = 0; j < n; ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x(j)));
    xp(j) = x(j) + h;
    const Vec fp = f(xp, u);
    xp(j) = x(j) - h;
    const Vec fm = f(xp, u);
    xp(j) = x(j);
    A.col(j) = (fp - fm) / (2.0 * h);
  }
  Vec up = u;
  for (int j = 0; j < m; ++j) {
    const double h = rel_step * std::max(1.0, std::abs(u(j)));
    up(j) = u(j) + h;
    const Vec fp = f(x, up);
    up(j) = u(j) - h;
    const Vec fm = f(x, up);
    up(j) = u(j);
    B.col(j) = (fp - fm) / (2.0 * h);
  }
}

LinearSystem::LinearSystem(Mat A, Mat B) : a_(std::move(A)), b_(std::move(B)) {
  if (a_.rows() != a_.cols() || b_.rows() != a_.rows()) {
    throw Error("LinearSystem: inconsistent matrix shapes");
  }
}

Vec LinearSystem::f(const Vec& x, const Vec& u) const { return a_ * x + b_ * u; }

void LinearSystem::jacobians(const Vec&, const Vec&, Mat& A, Mat& B) const {
  A = a_;
  B = b_;
}

void ArmParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid arm parameter: ") + what);
  };
  require(L1 > 0 && L2 > 0, "L1, L2 must be positive");
  require(M1 > 0 && M2 > 0, "M1, M2 must be positive");
  require(S1 > 0 && S2 > 0, "S1, S2 must be positive");
  require(I1 > 0 && I2 > 0, "I1, I2 must be positive");
  require(S1 <= L1, "S1 must not exceed L1");
  require(S2 <= L2, "S2 must not exceed L2");
  for (double v : {L1, L2, M1, M2, S1, S2, I1, I2, B11, B12, B21, B22, g}) {
    require(std::isfinite(v), "all parameters must be finite");
  }
}

Mat2 mass_matrix(const ArmParams& p, const Vec2& q) {
  const double c2 = std::cos(q(1));
  const double coupling = p.M2 * p.L1 * p.S2 * c2;
  Mat2 m;
  m(0, 0) = p.I1 + p.I2 + 2.0 * coupling + p.M2 * p.L1 * p.L1;
  m(0, 1) = p.I2 + coupling;
  m(1, 0) = m(0, 1);
  m(1, 1) = p.I2;
  return m;
}

Vec2 bias(const ArmParams& p, const Vec2& q, const Vec2& dq) {
  const double h = p.M2 * p.L1 * p.S2 * std::sin(q(1));
  const double s1 = std::sin(q(0));
  const double s12 = std::sin(q(0) + q(1));
  Vec2 b;
  b(0) = -h * (2.0 * dq(0) + dq(1)) * dq(1) + p.B11 * dq(0) + p.B12 * dq(1) +
         p.g * ((p.M1 * p.S1 + p.M2 * p.L1) * s1 + p.M2 * p.S2 * s12);
  b(1) = h * dq(0) * dq(0) + p.B22 * dq(1) + p.B21 * dq(0) +
         p.g * p.M2 * p.S2 * s12;
  return b;
}

Eigen::Vector4d forward_kinematics(const ArmParams& p,
                                   const Eigen::Vector4d& x) {
  const double c1 = std::cos(x(0)), s1 = std::sin(x(0));
  const double c12 = std::cos(x(0) + x(1)), s12 = std::sin(x(0) + x(1));
  const double w = x(2) + x(3);
  return {p.L1 * c1 + p.L2 * c12,
          p.L1 * s1 + p.L2 * s12,
          -p.L1 * x(2) * s1 - p.L2 * w * s12,
          p.L1 * x(2) * c1 + p.L2 * w * c12};
}

Eigen::Matrix4d fk_jacobian(const ArmParams& p, const Eigen::Vector4d& x) {
  const double c1 = std::cos(x(0)), s1 = std::sin(x(0));
  const double c12 = std::cos(x(0) + x(1)), s12 = std::sin(x(0) + x(1));
  const double w = x(2) + x(3);
  Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
  // Position rows.
  J(0, 0) = -p.L1 * s1 - p.L2 * s12;
  J(0, 1) = -p.L2 * s12;
  J(1, 0) = p.L1 * c1 + p.L2 * c12;
  J(1, 1) = p.L2 * c12;
  // Velocity rows: d/dq of (Jpos * dq), and Jpos itself w.r.t. dq.
  J(2, 0) = -p.L1 * x(2) * c1 - p.L2 * w * c12;
  J(2, 1) = -p.L2 * w * c12;
  J(2, 2) = J(0, 0);
  J(2, 3) = J(0, 1);
  J(3, 0) = -p.L1 * x(2) * s1 - p.L2 * w * s12;
  J(3, 1) = -p.L2 * w * s12;
  J(3, 2) = J(1, 0);
  J(3, 3) = J(1, 1);
  return J;
}

Eigen::Vector4d inverse_kinematics(const ArmParams& p,
                                   const Eigen::Vector4d& target) {
  const double r2 = target(0) * target(0) + target(1) * target(1);
  const double r = std::sqrt(r2);
  constexpr double kTol = 1e-12;
  if (r > p.L1 + p.L2 + kTol || r < std::abs(p.L1 - p.L2) - kTol) {
    std::ostringstream msg;
    msg << "target position (" << target(0) << ", " << target(1)
        << ") is outside the reachable annulus [" << std::abs(p.L1 - p.L2)
        << ", " << p.L1 + p.L2 << "]";
    throw UnreachableTargetError(msg.str());
  }
  double c2 = (r2 - p.L1 * p.L1 - p.L2 * p.L2) / (2.0 * p.L1 * p.L2);
  c2 = std::clamp(c2, -1.0, 1.0);
  // acos returns [0, pi]: the elbow-down branch, and exactly 0 at full reach.
  const double q2 = std::acos(c2);
  const double q1 = std::atan2(target(1), target(0)) -
                    std::atan2(p.L2 * std::sin(q2), p.L1 + p.L2 * std::cos(q2));
  Eigen::Vector4d x(q1, q2, 0.0, 0.0);

  const Eigen::Matrix4d J = fk_jacobian(p, x);
  const Mat2 Jpos = J.block<2, 2>(0, 0);
  const Vec2 vel = target.tail<2>();
  if (vel.squaredNorm() > 0.0) {
    if (std::abs(Jpos.determinant()) < 1e-12) {
      throw UnreachableTargetError(
          "target velocity requested at a kinematic singularity");
    }
    x.tail<2>() = Jpos.inverse() * vel;
  }
  return x;
}

ArmSystem::ArmSystem(ArmParams params, double max_mass_condition)
    : params_(params), max_mass_condition_(max_mass_condition) {
  params_.validate();
}

Mat2 ArmSystem::checked_mass(const Vec2& q) const {
  const Mat2 m = mass_matrix(params_, q);
  // Closed-form eigenvalues of the symmetric 2x2 matrix.
  const double mean = 0.5 * (m(0, 0) + m(1, 1));
  const double diff = 0.5 * (m(0, 0) - m(1, 1));
  const double rad = std::sqrt(diff * diff + m(0, 1) * m(0, 1));
  const double lo = mean - rad, hi = mean + rad;
  if (!(lo > 0.0) || hi / lo > max_mass_condition_) {
    std::ostringstream msg;
    msg << "mass matrix is numerically singular at q = (" << q(0) << ", "
        << q(1) << "), eigenvalues " << lo << ", " << hi;
    throw SingularMassError(msg.str());
  }
  return m;
}

Vec ArmSystem::f(const Vec& x, const Vec& u) const {
  if (!x.allFinite() || !u.allFinite()) {
    throw DivergenceError("arm dynamics evaluated at a non-finite state or control");
  }
  const Vec2 q = x.head<2>();
  const Vec2 dq = x.tail<2>();
  const Mat2 m = checked_mass(q);
  Vec2 b = bias(params_, q, dq);
  if (corrupt_bias_sign_) b = -b;
  Vec out(4);
  out.head<2>() = dq;
  out.tail<2>() = m.inverse() * (Vec2(u) - b);
  return out;
}

void ArmSystem::jacobians(const Vec& x, const Vec& u, Mat& A, Mat& B) const {
  if (jacobian_mode_ == JacobianMode::kFiniteDifference) {
    fd_jacobians(x, u, A, B);
    return;
  }
  const ArmParams& p = params_;
  const Vec2 q = x.head<2>();
  const Vec2 dq = x.tail<2>();
  const Mat2 minv = checked_mass(q).inverse();
  const Vec2 acc = minv * (Vec2(u) - bias(p, q, dq));

  const double h = p.M2 * p.L1 * p.S2 * std::sin(q(1));
  const double hc = p.M2 * p.L1 * p.S2 * std::cos(q(1));
  const double c1 = std::cos(q(0));
  const double c12 = std::cos(q(0) + q(1));
  const double grav12 = p.g * p.M2 * p.S2 * c12;

  // db/dq and db/ddq.
  Mat2 db_dq;
  db_dq(0, 0) = p.g * (p.M1 * p.S1 + p.M2 * p.L1) * c1 + grav12;
  db_dq(0, 1) = -hc * (2.0 * dq(0) + dq(1)) * dq(1) + grav12;
  db_dq(1, 0) = grav12;
  db_dq(1, 1) = hc * dq(0) * dq(0) + grav12;
  Mat2 db_ddq;
  db_ddq(0, 0) = -2.0 * h * dq(1) + p.B11;
  db_ddq(0, 1) = -2.0 * h * (dq(0) + dq(1)) + p.B12;
  db_ddq(1, 0) = 2.0 * h * dq(0) + p.B21;
  db_ddq(1, 1) = p.B22;

  // dM/dq2; M does not depend on q1.
  Mat2 dm_dq2;
  dm_dq2 << -2.0 * h, -h, -h, 0.0;

  Mat2 dacc_dq = -minv * db_dq;
  dacc_dq.col(1) -= minv * (dm_dq2 * acc);
  const Mat2 dacc_ddq = -minv * db_ddq;

  A = Mat::Zero(4, 4);
  A.block<2, 2>(0, 2) = Mat2::Identity();
  A.block<2, 2>(2, 0) = dacc_dq;
  A.block<2, 2>(2, 2) = dacc_ddq;
  B = Mat::Zero(4, 2);
  B.block<2, 2>(2, 0) = minv;
}

Vec ArmSystem::output(const Vec& x) const {
  return forward_kinematics(params_, Eigen::Vector4d(x));
}

Mat ArmSystem::output_jacobian(const Vec& x) const {
  return fk_jacobian(params_, Eigen::Vector4d(x));
}

}  // namespace minatt
