// Synthetic measurement trajectories: a two-component Gaussian mixture
// (inliers plus occasional large outliers) applied to ground truth, emulating
// the error profile of an upstream localization front-end.

#ifndef SE3PF_SYNTHETIC_HPP
#define SE3PF_SYNTHETIC_HPP

#include <cstdint>
#include <random>

#include "se3pf/geometry.hpp"
#include "se3pf/random.hpp"
#include "se3pf/trajectory_io.hpp"

namespace se3pf {

struct MeasurementNoiseModel {
  double trans_sigma = 0.0;          // meters, per axis
  double rot_sigma = 0.0;            // radians, rotation-vector per axis
  double outlier_prob = 0.0;         // in [0, 1]
  double outlier_trans_sigma = 0.0;  // meters
  double outlier_rot_sigma = 0.0;    // radians
  std::uint64_t seed = 0;
};

struct SynthResult {
  Trajectory measurements;
  int outlier_count = 0;
};

/// Perturb every ground-truth pose: translation by per-axis Gaussian noise,
/// rotation by a right-multiplied exponential of a Gaussian rotation vector.
/// Each pose independently uses the outlier sigmas with probability
/// outlier_prob. Timestamps are preserved; output is a pure function of
/// (gt, model).
inline SynthResult generate_measurements(const Trajectory& gt,
                                         const MeasurementNoiseModel& model) {
  if (model.trans_sigma < 0.0 || model.rot_sigma < 0.0 ||
      model.outlier_trans_sigma < 0.0 || model.outlier_rot_sigma < 0.0) {
    throw std::invalid_argument("generate_measurements: negative sigma");
  }
  if (model.outlier_prob < 0.0 || model.outlier_prob > 1.0) {
    throw std::invalid_argument("generate_measurements: outlier_prob outside [0, 1]");
  }
  Rng rng(model.seed);
  SynthResult result;
  result.measurements.samples.reserve(gt.size());
  for (const TimedPose& s : gt.samples) {
    const bool outlier = std::bernoulli_distribution(model.outlier_prob)(rng);
    if (outlier) {
      ++result.outlier_count;
    }
    const double ts = outlier ? model.outlier_trans_sigma : model.trans_sigma;
    const double rs = outlier ? model.outlier_rot_sigma : model.rot_sigma;

    TimedPose out = s;
    if (ts > 0.0) {
      for (int i = 0; i < 3; ++i) {
        out.pose.translation[i] += gaussian(rng, ts);
      }
    }
    if (rs > 0.0) {
      const Vec3 rot_noise(gaussian(rng, rs), gaussian(rng, rs), gaussian(rng, rs));
      out.pose.rotation = s.pose.rotation * so3_exp(rot_noise);
    }
    result.measurements.samples.push_back(out);
  }
  return result;
}

}  // namespace se3pf

#endif  // SE3PF_SYNTHETIC_HPP
