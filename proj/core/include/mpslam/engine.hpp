#pragma once

#include <cstdint>
#include <vector>

#include "mpslam/association.hpp"
#include "mpslam/likelihoods.hpp"
#include "mpslam/metrics.hpp"
#include "mpslam/model.hpp"
#include "mpslam/transitions.hpp"
#include "mpslam/world.hpp"

namespace mpslam {

enum class PaDispersionMode { kKnown, kUnknown };

struct EngineParams {
  std::size_t particles = 10000;
  int mp_iterations = 3;
  double da_tol = 1e-6;
  TransitionParams transitions;
  double p_cf = 0.5;
  double p_pr = 1e-3;
  PaDispersionMode pa_mode = PaDispersionMode::kUnknown;
  /// Delay residuals beyond this many sigmas outside the dispersion window give zero likelihood.
  double gate_sigma = 12.0;
  /// Fraction of new-PVA particles proposed by inverting the measurement around agent particles.
  double inversion_fraction = 0.5;
  double inversion_range_window = 0.5;             ///< m
  double inversion_angle_window = deg2rad(20.0);   ///< rad
  std::size_t max_features_per_pa = 64;

  /// Throws std::invalid_argument naming the first invalid field.
  void validate() const;
};

struct TrackedFeature {
  int label = 0;
  std::size_t birth_step = 0;
  bool is_pa = false;
  std::vector<FeatureParticle> particles;
  std::vector<double> log_w;  ///< normalized
  double existence = 0.0;
  /// measurements whose association probability to this feature exceeded 0.5 at the last step
  int last_associated = 0;
  bool underflow = false;

  // predicted quantities of the current step
  std::vector<double> pred_log_mass;  ///< per particle r = 1 mass, without agent pairing factor
  double pred_log_mass0 = 0.0;
};

struct AgentBelief {
  std::vector<AgentState> particles;
  std::vector<double> log_w;  ///< normalized
};

/// One candidate new PVA of the current step (one per measurement).
struct NewCandidate {
  std::size_t measurement = 0;
  std::vector<FeatureParticle> particles;
  std::size_t node = static_cast<std::size_t>(-1);  ///< node index or npos when impossible
};

/// Per-PA scratch of one time step.
struct PaWorkspace {
  std::vector<MeasurementContext> meas;
  FactorTable table;
  std::vector<std::size_t> legacy_node;  ///< node per legacy feature
  std::vector<NewCandidate> fresh;
  AssociationStatus status;
};

struct PaTracks {
  Vec2 position = Vec2::Zero();
  Dispersion true_psi;  ///< used when the PA dispersion is treated as known
  std::vector<TrackedFeature> features;
  int next_label = 1;
};

struct StepDiagnostics {
  std::size_t t = 0;
  bool agent_degenerate = false;
  double agent_ess = 0.0;
  std::vector<AssociationStatus> da;
  std::vector<std::size_t> features_before_prune;
  std::vector<std::size_t> features_after_prune;
};

/// Particle-based sum-product filter for one agent and a set of physical anchors.
class SpaFilter {
 public:
  SpaFilter(const std::vector<PaSpec>& pas, const ModelConstants& constants, const EngineParams& params,
            const AgentPrior& prior, const AgentPose& start, std::uint64_t seed);

  /// Full time step: predict, message passing, agent update, bookkeeping.
  StepDiagnostics step(const std::vector<std::vector<Measurement>>& per_pa);

  // Individual stages, in the order step() runs them.
  void predict();
  void evaluate_messages(const std::vector<std::vector<Measurement>>& per_pa);
  void associate_messages();
  void update_pvas();
  void update_agent();
  void finish_step();

  const AgentBelief& agent() const { return agent_; }
  AgentBelief& agent() { return agent_; }
  const std::vector<PaTracks>& tracks() const { return pas_; }
  std::vector<PaTracks>& tracks() { return pas_; }
  const std::vector<PaWorkspace>& workspaces() const { return work_; }
  const EstimateRecord& last_estimate() const { return estimate_; }
  std::size_t time() const { return n_; }
  const EngineParams& params() const { return params_; }

  EstimateRecord make_estimate() const;

 private:
  void build_legacy_links(std::size_t j, std::size_t k);
  void build_candidate(std::size_t j, std::size_t m);
  std::vector<double> agent_log_pairing() const;

  ModelConstants constants_;
  NoiseModel noise_;
  EngineParams params_;
  std::uint64_t seed_;
  std::size_t n_ = 0;  ///< index of the step being processed
  bool first_ = true;
  AgentBelief agent_;
  std::vector<double> heading_;
  std::vector<PaTracks> pas_;
  std::vector<PaWorkspace> work_;
  EstimateRecord estimate_;
  StepDiagnostics diag_;
};

}  // namespace mpslam
