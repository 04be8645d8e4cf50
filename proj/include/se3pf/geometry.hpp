// Rotation and SE(3)/se(3) primitives, angle utilities and the two
// trajectory error metrics (chordal / Euclidean). Everything else in the
// library builds on the functions in this header.

#ifndef SE3PF_GEOMETRY_HPP
#define SE3PF_GEOMETRY_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

namespace se3pf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = std::numbers::pi;

/// Roll/pitch/yaw in radians. Canonical range after wrapping is (-pi, pi].
struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// se(3) twist split into its linear and angular parts. Twist coordinates
/// are ordered [x, y, z, phi, theta, psi] = [v; w].
struct Twist {
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();

  Vec6 coords() const {
    Vec6 xi;
    xi << v, w;
    return xi;
  }

  static Twist from_coords(const Vec6& xi) {
    return Twist{xi.head<3>(), xi.tail<3>()};
  }
};

/// Rigid transform: orthonormal rotation (det = +1) plus translation in
/// meters. Equivalent to the homogeneous matrix [R t; 0 0 0 1].
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

/// True when m is orthonormal and proper within tol (Frobenius / determinant).
inline bool is_rotation(const Mat3& m, double tol = 1e-9) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
  return ortho < tol && std::abs(m.determinant() - 1.0) <= tol;
}

/// Skew-symmetric matrix such that skew(v) * u = v x u.
inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<    0.0, -v.z(),  v.y(),
        v.z(),    0.0, -v.x(),
       -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

inline Vec3 unskew(const Mat3& m) {
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

/// Wrap an angle into (-pi, pi]; -pi maps to +pi.
inline double wrap_angle(double a) {
  double r = std::fmod(a + kPi, 2.0 * kPi);
  if (r <= 0.0) {
    r += 2.0 * kPi;
  }
  return r - kPi;
}

/// Circular mean atan2(sum sin, sum cos), wrapped into (-pi, pi].
/// Throws std::domain_error when the resultant vector is (numerically) zero,
/// i.e. the mean is undefined.
inline double circular_mean(std::span<const double> angles) {
  if (angles.empty()) {
    throw std::invalid_argument("circular_mean: empty angle list");
  }
  double sum_sin = 0.0;
  double sum_cos = 0.0;
  for (double a : angles) {
    sum_sin += std::sin(a);
    sum_cos += std::cos(a);
  }
  if (std::hypot(sum_sin, sum_cos) <= 1e-12) {
    throw std::domain_error("circular_mean: degenerate (zero resultant)");
  }
  return wrap_angle(std::atan2(sum_sin, sum_cos));
}

/// Rotation matrix R_z(yaw) * R_y(pitch) * R_x(roll); rotations applied in
/// the order yaw, pitch, roll.
inline Mat3 euler_to_rotation(const EulerAngles& angles) {
  const Eigen::AngleAxisd rz(angles.yaw, Vec3::UnitZ());
  const Eigen::AngleAxisd ry(angles.pitch, Vec3::UnitY());
  const Eigen::AngleAxisd rx(angles.roll, Vec3::UnitX());
  return (rz * ry * rx).toRotationMatrix();
}

/// SO(3) exponential (Rodrigues). Total on finite inputs.
inline Mat3 so3_exp(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 w_hat = skew(w);
  if (theta < 1e-12) {
    return Mat3::Identity() + w_hat;
  }
  const double half = 0.5 * theta;
  const double sin_half = std::sin(half);
  // 1 - cos(theta) written as 2 sin^2(theta/2) to avoid cancellation
  return Mat3::Identity() + (std::sin(theta) / theta) * w_hat +
         (2.0 * sin_half * sin_half / (theta * theta)) * (w_hat * w_hat);
}

/// SO(3) logarithm: rotation vector theta * axis with theta in [0, pi).
/// Throws std::domain_error when the rotation angle reaches pi
/// (trace(R) <= -1 + 1e-9), where the logarithm is not unique.
inline Vec3 so3_log(const Mat3& r) {
  const double trace = r.trace();
  if (trace <= -1.0 + 1e-9) {
    throw std::domain_error("so3_log: rotation angle at pi, log not unique");
  }
  const Vec3 anti = unskew(r - r.transpose());  // 2 sin(theta) * axis
  const double sin_theta = 0.5 * anti.norm();
  const double cos_theta = 0.5 * (trace - 1.0);
  const double theta = std::atan2(sin_theta, cos_theta);
  if (theta < 1e-10) {
    return 0.5 * anti;
  }
  return (theta / (2.0 * sin_theta)) * anti;
}

/// SE(3) exponential: xi = [v; w] to a rigid transform, t = V(w) v.
inline Pose se3_exp(const Twist& xi) {
  const double theta = xi.w.norm();
  const Mat3 w_hat = skew(xi.w);
  Mat3 v_mat;
  if (theta < 1e-12) {
    v_mat = Mat3::Identity() + 0.5 * w_hat + (w_hat * w_hat) / 6.0;
  } else {
    const double theta_sq = theta * theta;
    const double half = 0.5 * theta;
    const double sin_half = std::sin(half);
    const double a = 2.0 * sin_half * sin_half / theta_sq;          // (1-cos)/th^2
    const double b = (theta - std::sin(theta)) / (theta_sq * theta);  // (th-sin)/th^3
    v_mat = Mat3::Identity() + a * w_hat + b * (w_hat * w_hat);
  }
  return Pose{so3_exp(xi.w), v_mat * xi.v};
}

/// SE(3) logarithm, inverse of se3_exp on rotation angles below pi.
/// Propagates the angle-at-pi error from so3_log.
inline Twist se3_log(const Pose& pose) {
  const Vec3 w = so3_log(pose.rotation);
  const double theta = w.norm();
  const Mat3 w_hat = skew(w);
  Mat3 v_inv;
  if (theta < 1e-6) {
    v_inv = Mat3::Identity() - 0.5 * w_hat +
            (1.0 / 12.0 + theta * theta / 720.0) * (w_hat * w_hat);
  } else {
    const double c =
        (1.0 - theta / (2.0 * std::tan(0.5 * theta))) / (theta * theta);
    v_inv = Mat3::Identity() - 0.5 * w_hat + c * (w_hat * w_hat);
  }
  return Twist{v_inv * pose.translation, w};
}

/// Chordal rotation error ||r_gt^T r_est - I||_F, dimensionless in [0, 2*sqrt(2)].
inline double chordal_distance(const Mat3& r_gt, const Mat3& r_est) {
  return (r_gt.transpose() * r_est - Mat3::Identity()).norm();
}

/// Euclidean translation error ||t_gt - t_est||_2 in meters.
inline double euclidean_distance(const Vec3& t_gt, const Vec3& t_est) {
  return (t_gt - t_est).norm();
}

/// Rotation matrix from a unit quaternion (x, y, z, w).
/// Throws std::invalid_argument unless ||q|| is within 1e-6 of one.
inline Mat3 quat_to_rotation(const Eigen::Quaterniond& q) {
  const double n = q.norm();
  if (std::abs(n - 1.0) > 1e-6) {
    throw std::invalid_argument("quat_to_rotation: quaternion not unit norm");
  }
  return q.normalized().toRotationMatrix();
}

/// Quaternion for a rotation matrix, choosing the representative with
/// qw >= 0 (ties broken lexicographically on x, y, z) so output is
/// deterministic for diffing.
inline Eigen::Quaterniond rotation_to_quat(const Mat3& r) {
  Eigen::Quaterniond q(r);
  const bool flip =
      q.w() < 0.0 ||
      (q.w() == 0.0 &&
       (q.x() < 0.0 || (q.x() == 0.0 && (q.y() < 0.0 || (q.y() == 0.0 && q.z() < 0.0)))));
  if (flip) {
    q.coeffs() = -q.coeffs();
  }
  return q;
}

inline Pose pose_compose(const Pose& a, const Pose& b) {
  return Pose{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

inline Pose pose_inverse(const Pose& a) {
  const Mat3 rt = a.rotation.transpose();
  return Pose{rt, -(rt * a.translation)};
}

}  // namespace se3pf

#endif  // SE3PF_GEOMETRY_HPP
