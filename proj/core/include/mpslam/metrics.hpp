#pragma once

#include <span>
#include <vector>

#include "mpslam/transitions.hpp"
#include "mpslam/types.hpp"

namespace mpslam {

struct FeatureEstimate {
  int label = 0;
  bool is_pa = false;
  double existence = 0.0;
  Vec2 position = Vec2::Zero();
  Dispersion psi;
};

struct EstimateRecord {
  std::size_t t = 0;
  AgentState agent = AgentState::Zero();
  /// Confirmed features per PA (existence > p_cf).
  std::vector<std::vector<FeatureEstimate>> confirmed;
  /// Every tracked feature per PA, for logging.
  std::vector<std::vector<FeatureEstimate>> all;
};

AgentState mmse(std::span<const AgentState> particles, std::span<const double> log_w);
FeatureParticle mmse(std::span<const FeatureParticle> particles, std::span<const double> log_w);

std::vector<FeatureEstimate> confirm_and_extract(const std::vector<FeatureEstimate>& features, double p_cf);

/// Minimum-cost assignment of rows to columns (rows <= cols). Returns the column per row.
std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost);

struct OspaResult {
  double distance = 0.0;
  /// truth index matched to each estimate within the cutoff, or -1
  std::vector<int> match;
};

OspaResult ospa_detail(const std::vector<Vec2>& est, const std::vector<Vec2>& truth, double cutoff = 5.0,
                       double order = 2.0);
double ospa(const std::vector<Vec2>& est, const std::vector<Vec2>& truth, double cutoff = 5.0, double order = 2.0);

/// Per-step truth of one PA used for scoring.
struct TruthSnapshot {
  std::vector<Vec2> va_positions;
  std::vector<Dispersion> va_psi;
  std::vector<int> va_index;  ///< truth feature index (surface + 1)
  Dispersion pa_psi;
};

/// Errors of one run at one step.
struct StepErrors {
  double pos_err = 0.0;
  double ospa = 0.0;
  double card_err = 0.0;
  /// indexed by truth feature index (0 = LOS); NaN when unmatched
  std::vector<Dispersion> psi_err;
};

struct RunLog {
  std::vector<EstimateRecord> estimates;
  std::vector<StepErrors> errors;
  bool converged = true;
};

StepErrors score_step(const EstimateRecord& est, const Vec2& true_pos, const std::vector<TruthSnapshot>& truth,
                      std::size_t n_truth_features, double cutoff = 5.0, double order = 2.0);

struct MetricSeries {
  std::vector<double> rmse_pos;
  std::vector<double> mospa;
  std::vector<double> card_err;
  /// [t][feature] RMSE of psi over converged runs with a match; NaN if none
  std::vector<std::vector<Dispersion>> psi_rmse;
  std::size_t runs_total = 0;
  std::size_t runs_converged = 0;
};

MetricSeries aggregate(const std::vector<RunLog>& runs);

}  // namespace mpslam
