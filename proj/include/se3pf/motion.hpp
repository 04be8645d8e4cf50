// Constant-velocity motion model: controls derived from sequential pose
// pairs (unit time-step), scale-proportional control noise, and pose
// propagation with body-frame rotation and world-frame translation.

#ifndef SE3PF_MOTION_HPP
#define SE3PF_MOTION_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "se3pf/geometry.hpp"
#include "se3pf/random.hpp"

namespace se3pf {

/// Per-step pose delta [dx, dy, dz, droll, dpitch, dyaw] assuming a unit
/// time-step, so deltas double as rates.
struct Control {
  Vec3 dt_vec = Vec3::Zero();  // meters
  Vec3 dr_vec = Vec3::Zero();  // radians, each in (-pi, pi]
};

/// Fraction of each control component used as the noise standard deviation.
struct NoiseFraction {
  double fraction = 0.05;
};

/// Roll/pitch/yaw of R such that euler_to_rotation(result) == R.
/// Throws std::domain_error within 1e-6 of the |pitch| = pi/2 singularity,
/// where the decomposition is not unique.
inline EulerAngles rotation_to_euler(const Mat3& r) {
  const double sin_pitch = std::clamp(-r(2, 0), -1.0, 1.0);
  const double pitch = std::asin(sin_pitch);
  if (kPi / 2.0 - std::abs(pitch) < 1e-6) {
    throw std::domain_error("rotation_to_euler: gimbal lock, |pitch| at pi/2");
  }
  return EulerAngles{std::atan2(r(2, 1), r(2, 2)), pitch,
                     std::atan2(r(1, 0), r(0, 0))};
}

/// Controls between consecutive poses: dt = t_k - t_{k-1} in the world frame,
/// dr = Euler angles of the relative rotation R_{k-1}^T R_k. Output length is
/// poses - 1.
inline std::vector<Control> derive_controls(std::span<const Pose> poses) {
  if (poses.size() < 2) {
    throw std::invalid_argument("derive_controls: need at least two poses");
  }
  std::vector<Control> controls;
  controls.reserve(poses.size() - 1);
  for (std::size_t k = 1; k < poses.size(); ++k) {
    const Mat3 rel = poses[k - 1].rotation.transpose() * poses[k].rotation;
    const EulerAngles e = rotation_to_euler(rel);
    Control c;
    c.dt_vec = poses[k].translation - poses[k - 1].translation;
    c.dr_vec = Vec3(wrap_angle(e.roll), wrap_angle(e.pitch), wrap_angle(e.yaw));
    controls.push_back(c);
  }
  return controls;
}

/// Add zero-mean Gaussian noise with per-component sigma = fraction * |c_i|.
/// Zero components stay exactly zero.
inline Control perturb_control(const Control& c, const NoiseFraction& f, Rng& rng) {
  if (f.fraction < 0.0) {
    throw std::invalid_argument("perturb_control: negative noise fraction");
  }
  Control out = c;
  for (int i = 0; i < 3; ++i) {
    out.dt_vec[i] += gaussian(rng, f.fraction * std::abs(c.dt_vec[i]));
  }
  for (int i = 0; i < 3; ++i) {
    out.dr_vec[i] += gaussian(rng, f.fraction * std::abs(c.dr_vec[i]));
  }
  return out;
}

/// Apply a control: rotation right-multiplied by the control rotation,
/// translation added in the world frame. The translation of the result never
/// depends on the pose's rotation.
inline Pose propagate(const Pose& pose, const Control& c) {
  const Mat3 r_in = euler_to_rotation(
      EulerAngles{c.dr_vec.x(), c.dr_vec.y(), c.dr_vec.z()});
  return Pose{pose.rotation * r_in, pose.translation + c.dt_vec};
}

}  // namespace se3pf

#endif  // SE3PF_MOTION_HPP
