// Sample-Importance-Resampling particle filter on SE(3) with low-variance
// (systematic) resampling, ESS-gated at a configurable fraction of the
// particle count. Weights are kept in linear space but updated through
// log-space likelihoods so long twist distances cannot underflow the whole
// population.

#ifndef SE3PF_FILTER_HPP
#define SE3PF_FILTER_HPP

#include <Eigen/Cholesky>

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "se3pf/geometry.hpp"
#include "se3pf/motion.hpp"
#include "se3pf/random.hpp"

namespace se3pf {

struct Particle {
  Pose pose;
  double weight = 0.0;  // probability mass in [0, 1]
};

/// Ordered, weight-normalized particle population. The particle count stays
/// constant across the filter's lifetime.
struct ParticleSet {
  std::vector<Particle> particles;
  int step_index = 0;
};

struct FilterConfig {
  int particle_count = 200;
  double init_pos_halfwidth = 0.25;         // meters, per axis
  double init_ang_halfwidth = kPi / 4.0;    // radians, per Euler angle
  double resample_fraction = 1.0 / 3.0;     // resample when ess < fraction * n
  Mat6 meas_covariance = Mat6::Identity();  // SPD, twist coordinates
  NoiseFraction control_noise{0.05};
  std::uint64_t seed = 0;
};

/// Posterior summary for one filter step.
struct PoseEstimate {
  Pose mean;
  Mat6 covariance = Mat6::Zero();
  double ess = 0.0;        // effective sample size before any resampling
  bool resampled = false;
  bool degenerate_weights = false;  // every likelihood underflowed this step
};

namespace detail {

inline void validate(const FilterConfig& cfg) {
  if (cfg.particle_count < 1) {
    throw std::invalid_argument("FilterConfig: particle_count must be >= 1");
  }
  if (cfg.init_pos_halfwidth < 0.0 || cfg.init_ang_halfwidth < 0.0) {
    throw std::invalid_argument("FilterConfig: negative init halfwidth");
  }
  if (cfg.resample_fraction <= 0.0 || cfg.resample_fraction > 1.0) {
    throw std::invalid_argument("FilterConfig: resample_fraction outside (0, 1]");
  }
}

/// Cholesky factor of the measurement covariance, reused across particles.
struct MeasurementModel {
  Eigen::LLT<Mat6> llt;
  double log_norm;  // log of the MVN normalization constant

  explicit MeasurementModel(const Mat6& cov) : llt(cov) {
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("measurement covariance is not SPD");
    }
    double log_det = 0.0;
    for (int i = 0; i < 6; ++i) {
      log_det += 2.0 * std::log(llt.matrixL()(i, i));
    }
    log_norm = -0.5 * (6.0 * std::log(2.0 * kPi) + log_det);
  }

  double log_density(const Vec6& mean, const Vec6& x) const {
    const Vec6 d = x - mean;
    return log_norm - 0.5 * d.dot(llt.solve(d));
  }
};

}  // namespace detail

/// Uniformly spread particles around the first measurement: positions within
/// +/- init_pos_halfwidth per axis, orientations composed on the right from
/// roll/pitch/yaw offsets within +/- init_ang_halfwidth. All weights 1/n.
inline ParticleSet init_particles(const Pose& first_measurement,
                                  const FilterConfig& cfg, Rng& rng) {
  detail::validate(cfg);
  ParticleSet ps;
  ps.particles.resize(cfg.particle_count);
  const double hp = cfg.init_pos_halfwidth;
  const double ha = cfg.init_ang_halfwidth;
  for (Particle& p : ps.particles) {
    Vec3 offset;
    for (int i = 0; i < 3; ++i) {
      offset[i] = hp > 0.0 ? uniform_in(rng, -hp, hp) : 0.0;
    }
    EulerAngles e;
    if (ha > 0.0) {
      e.roll = uniform_in(rng, -ha, ha);
      e.pitch = uniform_in(rng, -ha, ha);
      e.yaw = uniform_in(rng, -ha, ha);
    }
    p.pose.translation = first_measurement.translation + offset;
    p.pose.rotation = first_measurement.rotation * euler_to_rotation(e);
    p.weight = 1.0 / cfg.particle_count;
  }
  return ps;
}

/// Propagate every particle by the control with independent per-particle
/// noise. Weights are untouched.
inline ParticleSet predict(ParticleSet ps, const Control& c,
                           const FilterConfig& cfg, Rng& rng) {
  for (Particle& p : ps.particles) {
    p.pose = propagate(p.pose, perturb_control(c, cfg.control_noise, rng));
  }
  return ps;
}

/// Multivariate normal density of the measurement's twist coordinates under
/// a distribution centered on the particle's twist coordinates. With the
/// identity covariance this is (2 pi)^-3 exp(-0.5 ||xi_p - xi_z||^2).
inline double measurement_likelihood(const Pose& particle_pose,
                                     const Pose& measurement, const Mat6& cov) {
  const detail::MeasurementModel model(cov);
  return std::exp(model.log_density(se3_log(particle_pose).coords(),
                                    se3_log(measurement).coords()));
}

/// Multiply each weight by the measurement likelihood of its particle and
/// renormalize to sum one. Accumulation happens in log space; if every
/// log-weight underflows to -inf the set is reset to uniform weights and
/// *degenerate_event (when given) is raised instead of failing.
inline ParticleSet update_weights(ParticleSet ps, const Pose& measurement,
                                  const FilterConfig& cfg,
                                  bool* degenerate_event = nullptr) {
  if (ps.particles.empty()) {
    throw std::invalid_argument("update_weights: empty particle set");
  }
  const detail::MeasurementModel model(cfg.meas_covariance);
  const Vec6 meas_twist = se3_log(measurement).coords();

  const std::size_t n = ps.particles.size();
  std::vector<double> log_w(n);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Particle& p = ps.particles[i];
    const double prior = p.weight > 0.0
                             ? std::log(p.weight)
                             : -std::numeric_limits<double>::infinity();
    log_w[i] = prior + model.log_density(se3_log(p.pose).coords(), meas_twist);
    max_log = std::max(max_log, log_w[i]);
  }

  if (degenerate_event != nullptr) {
    *degenerate_event = false;
  }
  if (!std::isfinite(max_log)) {
    // Every likelihood underflowed: one uninformative update beats halting.
    for (Particle& p : ps.particles) {
      p.weight = 1.0 / static_cast<double>(n);
    }
    if (degenerate_event != nullptr) {
      *degenerate_event = true;
    }
    return ps;
  }

  // log-sum-exp normalization
  double sum = 0.0;
  for (double lw : log_w) {
    sum += std::exp(lw - max_log);
  }
  const double log_total = max_log + std::log(sum);
  for (std::size_t i = 0; i < n; ++i) {
    ps.particles[i].weight = std::exp(log_w[i] - log_total);
  }
  return ps;
}

/// 1 / sum of squared weights; n for uniform weights, 1 for a single
/// surviving particle.
inline double effective_sample_size(const ParticleSet& ps) {
  double sum_sq = 0.0;
  for (const Particle& p : ps.particles) {
    sum_sq += p.weight * p.weight;
  }
  return 1.0 / sum_sq;
}

/// Systematic resampling with an explicit comb offset r in [0, 1/n): comb
/// positions u_i = r + i/n each select the first index whose cumulative
/// weight reaches u_i. Output weights are uniform and each input particle
/// appears floor(n w_i) or ceil(n w_i) times.
inline ParticleSet resample_with_offset(const ParticleSet& ps, double r) {
  const std::size_t n = ps.particles.size();
  if (n == 0) {
    throw std::invalid_argument("resample_with_offset: empty particle set");
  }
  if (r < 0.0 || r >= 1.0 / static_cast<double>(n)) {
    throw std::invalid_argument("resample_with_offset: offset outside [0, 1/n)");
  }
  ParticleSet out;
  out.step_index = ps.step_index;
  out.particles.resize(n);
  double cumulative = ps.particles[0].weight;
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = r + static_cast<double>(i) / static_cast<double>(n);
    while (u > cumulative && j + 1 < n) {
      ++j;
      cumulative += ps.particles[j].weight;
    }
    out.particles[i].pose = ps.particles[j].pose;
    out.particles[i].weight = 1.0 / static_cast<double>(n);
  }
  return out;
}

inline ParticleSet low_variance_resample(const ParticleSet& ps, Rng& rng) {
  const double n = static_cast<double>(ps.particles.size());
  return resample_with_offset(ps, uniform_in(rng, 0.0, 1.0 / n));
}

/// Posterior mean pose: arithmetic mean of translations, and a rotation
/// rebuilt from the per-component circular mean of the particles' rotation
/// vectors (components wrapped before averaging).
inline Pose estimate_mean(const ParticleSet& ps) {
  if (ps.particles.empty()) {
    throw std::invalid_argument("estimate_mean: empty particle set");
  }
  const std::size_t n = ps.particles.size();
  Vec3 t_mean = Vec3::Zero();
  std::array<std::vector<double>, 3> angle_components;
  for (auto& v : angle_components) {
    v.reserve(n);
  }
  for (const Particle& p : ps.particles) {
    t_mean += p.pose.translation;
    const Vec3 rot_vec = so3_log(p.pose.rotation);
    for (int i = 0; i < 3; ++i) {
      angle_components[i].push_back(wrap_angle(rot_vec[i]));
    }
  }
  t_mean /= static_cast<double>(n);
  Vec3 w_mean;
  for (int i = 0; i < 3; ++i) {
    w_mean[i] = circular_mean(angle_components[i]);
  }
  return Pose{so3_exp(w_mean), t_mean};
}

/// Covariance of the zero-mean twist deviations [t_i - t_mean;
/// wrap(w_i - w_mean)], divided by n. Symmetric PSD by construction.
inline Mat6 estimate_covariance(const ParticleSet& ps, const Pose& mean) {
  if (ps.particles.empty()) {
    throw std::invalid_argument("estimate_covariance: empty particle set");
  }
  const Vec3 w_mean = so3_log(mean.rotation);
  Mat6 cov = Mat6::Zero();
  for (const Particle& p : ps.particles) {
    Vec6 d;
    d.head<3>() = p.pose.translation - mean.translation;
    const Vec3 w = so3_log(p.pose.rotation);
    for (int i = 0; i < 3; ++i) {
      d[3 + i] = wrap_angle(w[i] - w_mean[i]);
    }
    cov += d * d.transpose();
  }
  return cov / static_cast<double>(ps.particles.size());
}

/// One full filter iteration: predict, reweight, resample when the effective
/// sample size drops strictly below resample_fraction * n, then summarize.
/// The estimate uses the post-resample set when resampling fired; ess in the
/// estimate is the pre-resample value.
inline std::pair<ParticleSet, PoseEstimate> step(ParticleSet ps,
                                                 const Control& c,
                                                 const Pose& measurement,
                                                 const FilterConfig& cfg,
                                                 Rng& rng) {
  detail::validate(cfg);
  ps = predict(std::move(ps), c, cfg, rng);
  bool degenerate = false;
  ps = update_weights(std::move(ps), measurement, cfg, &degenerate);

  PoseEstimate est;
  est.degenerate_weights = degenerate;
  est.ess = effective_sample_size(ps);
  const double threshold =
      cfg.resample_fraction * static_cast<double>(ps.particles.size());
  if (est.ess < threshold) {
    ps = low_variance_resample(ps, rng);
    est.resampled = true;
  }
  est.mean = estimate_mean(ps);
  est.covariance = estimate_covariance(ps, est.mean);
  ps.step_index += 1;
  return {std::move(ps), est};
}

struct RunResult {
  std::vector<Pose> means;                // one mean pose per measurement
  std::vector<PoseEstimate> estimates;
};

/// Run the filter over a measurement sequence: initialize on the first
/// measurement, then apply one step per subsequent measurement. Controls must
/// number one less than the measurements.
inline RunResult run(std::span<const Control> controls,
                     std::span<const Pose> measurements,
                     const FilterConfig& cfg) {
  if (measurements.empty()) {
    throw std::invalid_argument("run: no measurements");
  }
  if (controls.size() + 1 != measurements.size()) {
    throw std::invalid_argument("run: controls must number measurements - 1");
  }
  Rng rng(cfg.seed);
  ParticleSet ps = init_particles(measurements[0], cfg, rng);

  RunResult result;
  result.means.reserve(measurements.size());
  result.estimates.reserve(measurements.size());

  PoseEstimate init_est;
  init_est.mean = estimate_mean(ps);
  init_est.covariance = estimate_covariance(ps, init_est.mean);
  init_est.ess = effective_sample_size(ps);
  result.means.push_back(init_est.mean);
  result.estimates.push_back(init_est);

  for (std::size_t k = 1; k < measurements.size(); ++k) {
    auto [next, est] = step(std::move(ps), controls[k - 1], measurements[k], cfg, rng);
    ps = std::move(next);
    result.means.push_back(est.mean);
    result.estimates.push_back(est);
  }
  return result;
}

}  // namespace se3pf

#endif  // SE3PF_FILTER_HPP
