// TUM-format trajectory parsing and writing ("timestamp tx ty tz qx qy qz qw"
// with '#' comments), timestamp association between two trajectories, and the
// flat key=value run configuration.

#ifndef SE3PF_TRAJECTORY_IO_HPP
#define SE3PF_TRAJECTORY_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "se3pf/filter.hpp"
#include "se3pf/geometry.hpp"

namespace se3pf {

struct TimedPose {
  double timestamp = 0.0;  // seconds, finite and >= 0
  Pose pose;
};

/// Ordered pose samples with strictly increasing timestamps.
struct Trajectory {
  std::vector<TimedPose> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  std::vector<Pose> poses() const {
    std::vector<Pose> out;
    out.reserve(samples.size());
    for (const TimedPose& s : samples) {
      out.push_back(s.pose);
    }
    return out;
  }
};

/// Parse failure carrying the 1-based line number it occurred on.
class TumParseError : public std::runtime_error {
 public:
  TumParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

namespace detail {

inline std::string strip(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace detail

/// Read a TUM trajectory. Lines starting with '#' and blank lines are
/// skipped; every other line must hold exactly eight decimals. Quaternions
/// within 1e-3 of unit norm are renormalized, anything further is an error.
/// Timestamps must be non-negative and strictly increasing.
inline Trajectory parse_tum(std::istream& in) {
  Trajectory traj;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::strip(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    std::istringstream fields(line);
    double ts, tx, ty, tz, qx, qy, qz, qw;
    if (!(fields >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw TumParseError(line_no, "expected 8 numeric fields "
                                   "(timestamp tx ty tz qx qy qz qw)");
    }
    std::string extra;
    if (fields >> extra) {
      throw TumParseError(line_no, "trailing field '" + extra + "'");
    }
    if (!std::isfinite(ts) || ts < 0.0) {
      throw TumParseError(line_no, "timestamp must be finite and >= 0");
    }
    if (!traj.samples.empty() && ts <= traj.samples.back().timestamp) {
      throw TumParseError(line_no, "non-increasing timestamp");
    }
    Eigen::Quaterniond q(qw, qx, qy, qz);
    const double norm = q.norm();
    if (std::abs(norm - 1.0) > 1e-3) {
      throw TumParseError(line_no, "quaternion norm " + std::to_string(norm) +
                                   " too far from 1");
    }
    q.coeffs() /= norm;
    TimedPose sample;
    sample.timestamp = ts;
    sample.pose.rotation = quat_to_rotation(q);
    sample.pose.translation = Vec3(tx, ty, tz);
    traj.samples.push_back(sample);
  }
  return traj;
}

/// Write a trajectory in TUM format, one sample per line, with enough digits
/// that parse_tum(write_tum(t)) reproduces every pose within 1e-9. The
/// quaternion representative with qw >= 0 is emitted.
inline void write_tum(const Trajectory& traj, std::ostream& out) {
  char buf[256];
  for (const TimedPose& s : traj.samples) {
    const Eigen::Quaterniond q = rotation_to_quat(s.pose.rotation);
    std::snprintf(buf, sizeof(buf),
                  "%.9f %.12f %.12f %.12f %.12f %.12f %.12f %.12f\n",
                  s.timestamp, s.pose.translation.x(), s.pose.translation.y(),
                  s.pose.translation.z(), q.x(), q.y(), q.z(), q.w());
    out << buf;
  }
  if (!out) {
    throw std::runtime_error("write_tum: output stream failure");
  }
}

/// Timestamp association of a measurement stream against ground truth.
struct Association {
  std::vector<std::pair<TimedPose, TimedPose>> pairs;  // (ground truth, measurement)
  int dropped = 0;  // measurements without a ground-truth match
};

/// Match each measurement (in order) to the nearest unused ground-truth
/// sample within tol seconds; measurements without one are dropped and
/// counted. Throws when nothing matches at all.
inline Association associate(const Trajectory& gt, const Trajectory& meas,
                             double tol) {
  if (gt.empty() || meas.empty()) {
    throw std::invalid_argument("associate: empty trajectory");
  }
  if (tol <= 0.0) {
    throw std::invalid_argument("associate: tolerance must be > 0");
  }
  std::vector<bool> used(gt.samples.size(), false);
  Association out;
  for (const TimedPose& m : meas.samples) {
    // nearest unused ground-truth sample within tol, scanning outward from
    // the insertion point
    const auto it = std::lower_bound(
        gt.samples.begin(), gt.samples.end(), m.timestamp,
        [](const TimedPose& s, double t) { return s.timestamp < t; });
    std::ptrdiff_t right = it - gt.samples.begin();
    std::ptrdiff_t left = right - 1;
    std::ptrdiff_t best = -1;
    double best_gap = std::numeric_limits<double>::infinity();
    const auto consider = [&](std::ptrdiff_t idx) {
      if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(gt.samples.size())) {
        return false;
      }
      const double gap = std::abs(gt.samples[idx].timestamp - m.timestamp);
      if (gap > tol) {
        return false;  // further candidates on this side are worse
      }
      if (!used[idx] && gap < best_gap) {
        best = idx;
        best_gap = gap;
      }
      return true;
    };
    while (true) {
      const bool l = consider(left);
      const bool r = consider(right);
      if (!l && !r) {
        break;
      }
      --left;
      ++right;
    }
    if (best >= 0) {
      used[best] = true;
      out.pairs.emplace_back(gt.samples[best], m);
    } else {
      ++out.dropped;
    }
  }
  if (out.pairs.empty()) {
    throw std::runtime_error("associate: no measurement matched ground truth");
  }
  return out;
}

/// Filter parameters plus run-level settings and file paths.
struct RunConfig {
  FilterConfig filter;
  int runs = 10;
  double assoc_tolerance = 0.02;  // seconds
  std::string gt_path;
  std::string meas_path;
  std::string out_path;
};

/// Load a flat key=value config. Unknown keys are rejected; missing keys
/// keep their defaults. Blank lines and '#' comments are allowed.
inline RunConfig load_config(std::istream& in) {
  RunConfig cfg;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::strip(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key=value");
    }
    const std::string key = detail::strip(line.substr(0, eq));
    const std::string value = detail::strip(line.substr(eq + 1));

    const auto numeric = [&](auto& dst) {
      std::istringstream vs(value);
      if (!(vs >> dst) || !(vs >> std::ws).eof()) {
        throw std::runtime_error("config key '" + key + "': cannot parse '" +
                                 value + "'");
      }
    };

    if (key == "particles") {
      numeric(cfg.filter.particle_count);
      if (cfg.filter.particle_count < 1) {
        throw std::runtime_error("config key 'particles': must be >= 1");
      }
    } else if (key == "init_pos_halfwidth") {
      numeric(cfg.filter.init_pos_halfwidth);
    } else if (key == "init_ang_halfwidth_deg") {
      double deg = 0.0;
      numeric(deg);
      cfg.filter.init_ang_halfwidth = deg * kPi / 180.0;
    } else if (key == "resample_fraction") {
      numeric(cfg.filter.resample_fraction);
    } else if (key == "control_noise") {
      numeric(cfg.filter.control_noise.fraction);
    } else if (key == "seed") {
      numeric(cfg.filter.seed);
    } else if (key == "runs") {
      numeric(cfg.runs);
      if (cfg.runs < 1) {
        throw std::runtime_error("config key 'runs': must be >= 1");
      }
    } else if (key == "assoc_tolerance") {
      numeric(cfg.assoc_tolerance);
      if (cfg.assoc_tolerance <= 0.0) {
        throw std::runtime_error("config key 'assoc_tolerance': must be > 0");
      }
    } else if (key == "gt_path") {
      cfg.gt_path = value;
    } else if (key == "meas_path") {
      cfg.meas_path = value;
    } else if (key == "out_path") {
      cfg.out_path = value;
    } else {
      throw std::runtime_error("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

}  // namespace se3pf

#endif  // SE3PF_TRAJECTORY_IO_HPP
