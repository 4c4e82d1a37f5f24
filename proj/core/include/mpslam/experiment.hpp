#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mpslam/engine.hpp"
#include "mpslam/metrics.hpp"
#include "mpslam/world.hpp"

namespace mpslam {

struct RunConfig {
  std::filesystem::path scenario;  ///< empty selects the built-in scenario
  std::uint64_t seed = 1;
  std::size_t runs = 1;
  std::size_t steps = 0;  ///< 0 runs the whole trajectory
  EngineParams engine;
  std::filesystem::path out;
  bool dump_frames = false;
  std::size_t jobs = 1;
  /// final-step position error above this marks a run diverged
  double convergence_threshold = 1.0;

  /// Throws std::invalid_argument naming the first invalid field.
  void validate() const;
};

/// One physical anchor, four walls of a 10 m x 8 m room and a 300 step loop.
Scenario make_paper_scenario();

/// Ground truth seen by the scoring code at step n.
std::vector<TruthSnapshot> truth_snapshot(const Scenario& s, std::size_t n);

/// Column suffix of truth feature index f: "pa", "va1", ...
std::string feature_suffix(std::size_t f);

std::size_t effective_steps(const Scenario& s, const RunConfig& cfg);

/// Measurement frames of one run, from the (seed, run) frame stream.
std::vector<MeasurementFrame> simulate_frames(const Scenario& s, std::uint64_t seed, std::size_t run,
                                              std::size_t steps);

/// Runs the filter on one Monte Carlo run and scores every step.
RunLog run_single(const Scenario& s, const RunConfig& cfg, std::size_t run,
                  std::vector<MeasurementFrame>* frames_out = nullptr);

/// Position error of the prediction-only baseline (prior mean propagated by the motion model).
std::vector<double> dead_reckoning_errors(const Scenario& s, std::size_t steps);

struct ExperimentResult {
  std::vector<RunLog> runs;
  std::vector<std::vector<MeasurementFrame>> frames;  ///< filled when dump_frames is set
  MetricSeries series;
};

using RunCallback = std::function<void(std::size_t run, const RunLog& log)>;

/// Independent runs on up to cfg.jobs threads; results do not depend on jobs.
ExperimentResult run_experiment(const Scenario& s, const RunConfig& cfg, const RunCallback& on_done = {});

void write_results_csv(std::ostream& out, const MetricSeries& m, const RunConfig& cfg, std::size_t n_features);
void write_estimates_csv(std::ostream& out, const RunLog& log, const Scenario& s);
void write_features_csv(std::ostream& out, const RunLog& log);

/// Writes results.csv, run_XXX_estimates.csv, run_XXX_features.csv and, on request, run_XXX_frames.csv.
void write_outputs(const ExperimentResult& r, const Scenario& s, const RunConfig& cfg);

}  // namespace mpslam
