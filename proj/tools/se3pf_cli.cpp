// Command-line front end: synthesize measurement trajectories, filter them
// against ground-truth-derived controls, and evaluate estimate streams into
// CSV reports. Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "se3pf/evaluation.hpp"
#include "se3pf/filter.hpp"
#include "se3pf/motion.hpp"
#include "se3pf/synthetic.hpp"
#include "se3pf/trajectory_io.hpp"

namespace fs = std::filesystem;

namespace {

se3pf::Trajectory read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open trajectory file: " + path);
  }
  try {
    return se3pf::parse_tum(in);
  } catch (const se3pf::TumParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_trajectory(const se3pf::Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  se3pf::write_tum(traj, out);
}

se3pf::RunConfig read_config(const std::string& path) {
  if (path.empty()) {
    return se3pf::RunConfig{};
  }
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  return se3pf::load_config(in);
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  fs::path out = p.parent_path() / (p.stem().string() + suffix);
  out += p.extension();
  return out.string();
}

se3pf::Trajectory to_trajectory(const std::vector<se3pf::Pose>& poses,
                                const std::vector<double>& timestamps) {
  se3pf::Trajectory traj;
  traj.samples.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    traj.samples.push_back({timestamps[i], poses[i]});
  }
  return traj;
}

struct MatchedStreams {
  std::vector<se3pf::Pose> gt;
  std::vector<se3pf::Pose> meas;
  std::vector<double> timestamps;  // measurement timestamps
};

MatchedStreams match(const se3pf::Trajectory& gt, const se3pf::Trajectory& meas,
                     double tolerance) {
  const se3pf::Association assoc = se3pf::associate(gt, meas, tolerance);
  if (assoc.dropped > 0) {
    std::cout << "dropped " << assoc.dropped
              << " measurement(s) without a ground-truth match\n";
  }
  MatchedStreams out;
  out.gt.reserve(assoc.pairs.size());
  out.meas.reserve(assoc.pairs.size());
  out.timestamps.reserve(assoc.pairs.size());
  for (const auto& [g, m] : assoc.pairs) {
    out.gt.push_back(g.pose);
    out.meas.push_back(m.pose);
    out.timestamps.push_back(m.timestamp);
  }
  return out;
}

/// Filter runs with seeds base, base+1, ... and the across-run mean
/// trajectory (arithmetic translations, circular-mean rotations).
struct MultiRunOutput {
  std::vector<se3pf::RunResult> runs;
  std::vector<se3pf::Pose> mean_trajectory;
};

MultiRunOutput run_filter_runs(const MatchedStreams& streams,
                               se3pf::FilterConfig cfg, int runs) {
  const auto controls = se3pf::derive_controls(streams.gt);
  const std::uint64_t base_seed = cfg.seed;
  MultiRunOutput out;
  out.runs.reserve(runs);
  for (int k = 0; k < runs; ++k) {
    cfg.seed = base_seed + static_cast<std::uint64_t>(k);
    out.runs.push_back(se3pf::run(controls, streams.meas, cfg));
  }
  out.mean_trajectory.reserve(streams.meas.size());
  for (std::size_t i = 0; i < streams.meas.size(); ++i) {
    se3pf::ParticleSet per_run_poses;
    for (const se3pf::RunResult& r : out.runs) {
      per_run_poses.particles.push_back({r.means[i], 1.0 / runs});
    }
    out.mean_trajectory.push_back(se3pf::estimate_mean(per_run_poses));
  }
  return out;
}

double fraction_percent(double part, double whole) {
  return whole > 0.0 ? 100.0 * part / whole : 0.0;
}

int cmd_synth(const std::string& gt_path, const std::string& out_path,
              const se3pf::MeasurementNoiseModel& model) {
  const se3pf::Trajectory gt = read_trajectory(gt_path);
  const se3pf::SynthResult result = se3pf::generate_measurements(gt, model);
  write_trajectory(result.measurements, out_path);
  std::cout << "generated " << result.measurements.size() << " measurements, "
            << result.outlier_count << " outlier(s)\n";
  return 0;
}

int cmd_filter(se3pf::RunConfig cfg) {
  const se3pf::Trajectory gt = read_trajectory(cfg.gt_path);
  const se3pf::Trajectory meas = read_trajectory(cfg.meas_path);
  const MatchedStreams streams = match(gt, meas, cfg.assoc_tolerance);

  const MultiRunOutput output = run_filter_runs(streams, cfg.filter, cfg.runs);
  for (int k = 0; k < cfg.runs; ++k) {
    write_trajectory(to_trajectory(output.runs[k].means, streams.timestamps),
                     with_suffix(cfg.out_path, "_run" + std::to_string(k)));
    const se3pf::ErrorSeries errors =
        se3pf::pose_errors(streams.gt, output.runs[k].means, streams.timestamps);
    const se3pf::ErrorStats t = se3pf::summarize(errors.translational);
    const se3pf::ErrorStats r = se3pf::summarize(errors.rotational);
    char line[160];
    std::snprintf(line, sizeof(line),
                  "run %d: mean translation error %.6g m, "
                  "mean rotation error %.6g (chordal)\n",
                  k, t.mean, r.mean);
    std::cout << line;
  }
  write_trajectory(to_trajectory(output.mean_trajectory, streams.timestamps),
                   cfg.out_path);
  return 0;
}

int cmd_eval(const std::string& gt_path, const std::vector<std::string>& est_paths,
             const std::vector<std::string>& labels, const std::string& out_csv,
             double tolerance) {
  const se3pf::Trajectory gt = read_trajectory(gt_path);
  std::vector<std::pair<std::string, se3pf::ErrorStats>> rows;
  for (std::size_t i = 0; i < est_paths.size(); ++i) {
    const se3pf::Trajectory est = read_trajectory(est_paths[i]);
    const MatchedStreams streams = match(gt, est, tolerance);
    const se3pf::ErrorSeries errors =
        se3pf::pose_errors(streams.gt, streams.meas, streams.timestamps);
    rows.emplace_back(labels[i] + " translation",
                      se3pf::summarize(errors.translational));
    rows.emplace_back(labels[i] + " rotation",
                      se3pf::summarize(errors.rotational));
    std::ofstream per_pose(with_suffix(out_csv, "_" + labels[i]));
    if (!per_pose) {
      throw std::runtime_error("cannot open per-pose CSV for label " + labels[i]);
    }
    se3pf::write_error_series(errors, per_pose);
  }
  std::ofstream out(out_csv);
  if (!out) {
    throw std::runtime_error("cannot open output CSV: " + out_csv);
  }
  se3pf::write_stats_csv(rows, out);
  return 0;
}

int cmd_pipeline(const std::string& gt_path, const std::string& out_dir,
                 se3pf::RunConfig cfg, se3pf::MeasurementNoiseModel model) {
  const se3pf::Trajectory gt = read_trajectory(gt_path);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  model.seed = cfg.filter.seed;
  const se3pf::SynthResult synth = se3pf::generate_measurements(gt, model);
  write_trajectory(synth.measurements, (dir / "measurements.txt").string());
  std::cout << "synthesized " << synth.measurements.size() << " measurements, "
            << synth.outlier_count << " outlier(s)\n";

  const MatchedStreams streams = match(gt, synth.measurements, cfg.assoc_tolerance);
  const MultiRunOutput output = run_filter_runs(streams, cfg.filter, cfg.runs);

  const se3pf::ErrorSeries raw_errors =
      se3pf::pose_errors(streams.gt, streams.meas, streams.timestamps);
  {
    std::ofstream out(dir / "errors_raw.csv");
    se3pf::write_error_series(raw_errors, out);
  }

  std::vector<se3pf::ErrorStats> run_trans;
  std::vector<se3pf::ErrorStats> run_rot;
  for (int k = 0; k < cfg.runs; ++k) {
    write_trajectory(to_trajectory(output.runs[k].means, streams.timestamps),
                     (dir / ("filtered_run" + std::to_string(k) + ".txt")).string());
    const se3pf::ErrorSeries errors =
        se3pf::pose_errors(streams.gt, output.runs[k].means, streams.timestamps);
    std::ofstream per_pose(dir / ("errors_run" + std::to_string(k) + ".csv"));
    se3pf::write_error_series(errors, per_pose);
    run_trans.push_back(se3pf::summarize(errors.translational));
    run_rot.push_back(se3pf::summarize(errors.rotational));
  }
  write_trajectory(to_trajectory(output.mean_trajectory, streams.timestamps),
                   (dir / "filtered_mean.txt").string());

  const se3pf::MultiRunSummary trans_bounds = se3pf::multi_run_bounds(run_trans);
  const se3pf::MultiRunSummary rot_bounds = se3pf::multi_run_bounds(run_rot);
  const se3pf::ErrorStats raw_trans = se3pf::summarize(raw_errors.translational);
  const se3pf::ErrorStats raw_rot = se3pf::summarize(raw_errors.rotational);

  const std::vector<std::pair<std::string, se3pf::ErrorStats>> rows = {
      {"Raw translation", raw_trans},
      {"PF upper-bound translation", trans_bounds.upper_bound},
      {"PF lower-bound translation", trans_bounds.lower_bound},
      {"Raw rotation", raw_rot},
      {"PF upper-bound rotation", rot_bounds.upper_bound},
      {"PF lower-bound rotation", rot_bounds.lower_bound},
  };
  {
    std::ofstream out(dir / "summary.csv");
    if (!out) {
      throw std::runtime_error("cannot open summary CSV");
    }
    se3pf::write_stats_csv(rows, out);
  }

  char line[256];
  std::snprintf(line, sizeof(line),
                "raw mean translation error %.6g m; PF bounds [%.6g, %.6g] m "
                "(%.1f%% / %.1f%% of raw)\n",
                raw_trans.mean, trans_bounds.lower_bound.mean,
                trans_bounds.upper_bound.mean,
                fraction_percent(trans_bounds.lower_bound.mean, raw_trans.mean),
                fraction_percent(trans_bounds.upper_bound.mean, raw_trans.mean));
  std::cout << line;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SE(3) particle-filter refinement of noisy pose trajectories"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand(
      "synth", "Generate noisy measurements from a ground-truth trajectory");
  std::string synth_gt, synth_out;
  se3pf::MeasurementNoiseModel model;
  synth->add_option("--gt", synth_gt, "ground-truth TUM file")->required();
  synth->add_option("--out", synth_out, "output TUM file")->required();
  synth->add_option("--trans-sigma", model.trans_sigma, "translation sigma [m]");
  synth->add_option("--rot-sigma", model.rot_sigma, "rotation sigma [rad]");
  synth->add_option("--outlier-prob", model.outlier_prob, "outlier probability");
  synth->add_option("--outlier-trans-sigma", model.outlier_trans_sigma,
                    "outlier translation sigma [m]");
  synth->add_option("--outlier-rot-sigma", model.outlier_rot_sigma,
                    "outlier rotation sigma [rad]");
  synth->add_option("--seed", model.seed, "random seed");

  // filter
  auto* filter = app.add_subcommand(
      "filter", "Run the particle filter over a measurement trajectory");
  std::string filter_gt, filter_meas, filter_out, filter_config;
  std::uint64_t filter_seed = 0;
  int filter_particles = 0, filter_runs = 0;
  filter->add_option("--gt", filter_gt, "ground-truth TUM file (controls, errors)");
  filter->add_option("--meas", filter_meas, "measurement TUM file");
  filter->add_option("--out", filter_out, "mean trajectory output; per-run files "
                                          "get a _run<k> suffix");
  filter->add_option("--config", filter_config, "key=value config file");
  auto* filter_seed_opt = filter->add_option("--seed", filter_seed, "base seed");
  auto* filter_particles_opt =
      filter->add_option("--particles", filter_particles, "particle count");
  auto* filter_runs_opt = filter->add_option("--runs", filter_runs, "filter runs");

  // eval
  auto* eval = app.add_subcommand(
      "eval", "Compare estimate trajectories against ground truth");
  std::string eval_gt, eval_csv;
  std::vector<std::string> eval_est, eval_labels;
  double eval_tol = 0.02;
  eval->add_option("--gt", eval_gt, "ground-truth TUM file")->required();
  eval->add_option("--est", eval_est, "estimate TUM file(s)")->required();
  eval->add_option("--labels", eval_labels, "one label per estimate file")
      ->required();
  eval->add_option("--out-csv", eval_csv, "statistics CSV output")->required();
  eval->add_option("--tolerance", eval_tol, "association tolerance [s]");

  // pipeline
  auto* pipeline = app.add_subcommand(
      "pipeline", "synth + filter + eval in one reproducible pass");
  std::string pipe_gt, pipe_dir, pipe_config;
  std::uint64_t pipe_seed = 0;
  int pipe_runs = 0;
  se3pf::MeasurementNoiseModel pipe_model{0.5, 0.1, 0.1, 2.0, 0.5, 0};
  pipeline->add_option("--gt", pipe_gt, "ground-truth TUM file")->required();
  pipeline->add_option("--out-dir", pipe_dir, "output directory")->required();
  pipeline->add_option("--config", pipe_config, "key=value config file");
  auto* pipe_seed_opt = pipeline->add_option("--seed", pipe_seed, "master seed");
  auto* pipe_runs_opt = pipeline->add_option("--runs", pipe_runs, "filter runs");
  pipeline->add_option("--trans-sigma", pipe_model.trans_sigma,
                       "measurement translation sigma [m]");
  pipeline->add_option("--rot-sigma", pipe_model.rot_sigma,
                       "measurement rotation sigma [rad]");
  pipeline->add_option("--outlier-prob", pipe_model.outlier_prob,
                       "measurement outlier probability");
  pipeline->add_option("--outlier-trans-sigma", pipe_model.outlier_trans_sigma,
                       "outlier translation sigma [m]");
  pipeline->add_option("--outlier-rot-sigma", pipe_model.outlier_rot_sigma,
                       "outlier rotation sigma [rad]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help text, exit 0
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << std::endl;
    return 2;
  }

  try {
    if (synth->parsed()) {
      return cmd_synth(synth_gt, synth_out, model);
    }
    if (filter->parsed()) {
      se3pf::RunConfig cfg = read_config(filter_config);
      if (!filter_gt.empty()) cfg.gt_path = filter_gt;
      if (!filter_meas.empty()) cfg.meas_path = filter_meas;
      if (!filter_out.empty()) cfg.out_path = filter_out;
      if (filter_seed_opt->count() > 0) cfg.filter.seed = filter_seed;
      if (filter_particles_opt->count() > 0) cfg.filter.particle_count = filter_particles;
      if (filter_runs_opt->count() > 0) cfg.runs = filter_runs;
      if (cfg.gt_path.empty() || cfg.meas_path.empty() || cfg.out_path.empty()) {
        std::cerr << "filter: --gt, --meas and --out are required "
                     "(directly or via config)\n";
        return 2;
      }
      return cmd_filter(std::move(cfg));
    }
    if (eval->parsed()) {
      if (eval_est.size() != eval_labels.size()) {
        std::cerr << "eval: --labels count must match --est count\n";
        return 2;
      }
      return cmd_eval(eval_gt, eval_est, eval_labels, eval_csv, eval_tol);
    }
    if (pipeline->parsed()) {
      se3pf::RunConfig cfg = read_config(pipe_config);
      if (pipe_seed_opt->count() > 0) cfg.filter.seed = pipe_seed;
      if (pipe_runs_opt->count() > 0) cfg.runs = pipe_runs;
      return cmd_pipeline(pipe_gt, pipe_dir, std::move(cfg), pipe_model);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
