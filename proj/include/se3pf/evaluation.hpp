// Per-pose trajectory errors (Euclidean translation, chordal rotation),
// min/max/mean/variance summaries, multi-run upper/lower bounds and the CSV
// report writers.

#ifndef SE3PF_EVALUATION_HPP
#define SE3PF_EVALUATION_HPP

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "se3pf/geometry.hpp"
#include "se3pf/trajectory_io.hpp"

namespace se3pf {

/// Per-pose error sequences for one estimate stream. Rotational values are
/// dimensionless chordal distances in [0, 2*sqrt(2)].
struct ErrorSeries {
  std::vector<double> translational;  // meters
  std::vector<double> rotational;     // chordal, dimensionless
  std::vector<double> timestamps;
};

struct ErrorStats {
  double minimum = 0.0;
  double maximum = 0.0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance, n - 1 denominator
};

/// Chordal and Euclidean errors for matched (ground truth, estimate) poses.
inline ErrorSeries pose_errors(std::span<const Pose> gt,
                               std::span<const Pose> est,
                               std::span<const double> timestamps = {}) {
  if (gt.empty() || gt.size() != est.size()) {
    throw std::invalid_argument("pose_errors: empty or mismatched pairing");
  }
  if (!timestamps.empty() && timestamps.size() != gt.size()) {
    throw std::invalid_argument("pose_errors: timestamp count mismatch");
  }
  ErrorSeries series;
  series.translational.reserve(gt.size());
  series.rotational.reserve(gt.size());
  series.timestamps.reserve(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    series.translational.push_back(
        euclidean_distance(gt[i].translation, est[i].translation));
    series.rotational.push_back(chordal_distance(gt[i].rotation, est[i].rotation));
    series.timestamps.push_back(timestamps.empty() ? static_cast<double>(i)
                                                   : timestamps[i]);
  }
  return series;
}

/// Min/max/mean and sample variance (n - 1 denominator; zero for a single
/// element).
inline ErrorStats summarize(std::span<const double> series) {
  if (series.empty()) {
    throw std::invalid_argument("summarize: empty series");
  }
  ErrorStats stats;
  stats.minimum = *std::min_element(series.begin(), series.end());
  stats.maximum = *std::max_element(series.begin(), series.end());
  double sum = 0.0;
  for (double v : series) {
    sum += v;
  }
  stats.mean = sum / static_cast<double>(series.size());
  if (series.size() > 1) {
    double sq = 0.0;
    for (double v : series) {
      sq += (v - stats.mean) * (v - stats.mean);
    }
    stats.variance = sq / static_cast<double>(series.size() - 1);
  }
  return stats;
}

/// Per-run statistics with the runs of maximal and minimal mean singled out.
struct MultiRunSummary {
  std::vector<ErrorStats> per_run;
  std::size_t upper_run = 0;  // index of the run with the largest mean
  std::size_t lower_run = 0;  // index of the run with the smallest mean
  ErrorStats upper_bound;
  ErrorStats lower_bound;
};

/// Pick the upper/lower-bound runs by mean; ties go to the lowest run index.
inline MultiRunSummary multi_run_bounds(std::span<const ErrorStats> per_run) {
  if (per_run.empty()) {
    throw std::invalid_argument("multi_run_bounds: no runs");
  }
  MultiRunSummary summary;
  summary.per_run.assign(per_run.begin(), per_run.end());
  for (std::size_t i = 1; i < per_run.size(); ++i) {
    if (per_run[i].mean > per_run[summary.upper_run].mean) {
      summary.upper_run = i;
    }
    if (per_run[i].mean < per_run[summary.lower_run].mean) {
      summary.lower_run = i;
    }
  }
  summary.upper_bound = per_run[summary.upper_run];
  summary.lower_bound = per_run[summary.lower_run];
  return summary;
}

inline constexpr const char* kReportHeader =
    "pose_error_type,minimum,maximum,mean,variance";

namespace detail {

inline std::string format_sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace detail

/// One labeled statistics row, values at 6 significant digits.
inline void write_stats_row(const std::string& label, const ErrorStats& s,
                            std::ostream& out) {
  out << label << ',' << detail::format_sig6(s.minimum) << ','
      << detail::format_sig6(s.maximum) << ',' << detail::format_sig6(s.mean)
      << ',' << detail::format_sig6(s.variance) << '\n';
}

/// Labeled stats CSV with the standard report header.
inline void write_stats_csv(
    std::span<const std::pair<std::string, ErrorStats>> rows,
    std::ostream& out) {
  out << kReportHeader << '\n';
  for (const auto& [label, stats] : rows) {
    write_stats_row(label, stats, out);
  }
  if (!out) {
    throw std::runtime_error("write_stats_csv: output stream failure");
  }
}

/// Full error report: unfused and fused estimate rows plus particle-filter
/// upper/lower bounds, translations first, then rotations. The .first of
/// each pair holds translational stats, .second rotational.
inline void write_report(const std::pair<ErrorStats, ErrorStats>& unfused,
                         const std::pair<ErrorStats, ErrorStats>& fused,
                         const std::pair<MultiRunSummary, MultiRunSummary>& pf,
                         std::ostream& out) {
  const std::vector<std::pair<std::string, ErrorStats>> rows = {
      {"Unfused translation", unfused.first},
      {"Fused translation", fused.first},
      {"PF upper-bound translation", pf.first.upper_bound},
      {"PF lower-bound translation", pf.first.lower_bound},
      {"Unfused rotation", unfused.second},
      {"Fused rotation", fused.second},
      {"PF upper-bound rotation", pf.second.upper_bound},
      {"PF lower-bound rotation", pf.second.lower_bound},
  };
  write_stats_csv(rows, out);
}

/// Per-pose error CSV, the data behind error-over-time plots.
inline void write_error_series(const ErrorSeries& series, std::ostream& out) {
  out << "index,timestamp,trans_error,rot_error\n";
  char buf[160];
  for (std::size_t i = 0; i < series.translational.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9f,%.9g,%.9g\n", i,
                  series.timestamps[i], series.translational[i],
                  series.rotational[i]);
    out << buf;
  }
  if (!out) {
    throw std::runtime_error("write_error_series: output stream failure");
  }
}

/// Largest consecutive translation jump, a scalar proxy for trajectory
/// smoothness (outliers dominate it).
inline double smoothness(const Trajectory& traj) {
  if (traj.size() < 2) {
    throw std::invalid_argument("smoothness: need at least two poses");
  }
  double max_jump = 0.0;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    max_jump = std::max(max_jump,
                        (traj.samples[k].pose.translation -
                         traj.samples[k - 1].pose.translation).norm());
  }
  return max_jump;
}

}  // namespace se3pf

#endif  // SE3PF_EVALUATION_HPP
