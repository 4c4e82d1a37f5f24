#pragma once

#include <string>
#include <vector>

#include "mpslam/geometry.hpp"
#include "mpslam/likelihoods.hpp"
#include "mpslam/model.hpp"
#include "mpslam/rng.hpp"
#include "mpslam/transitions.hpp"

namespace mpslam {

struct PaSpec {
  Anchor anchor;
  Dispersion psi;  ///< LOS dispersion
};

struct SurfaceSpec {
  Surface surface;
  Dispersion psi;  ///< dispersion of the VAs mirrored across this surface
};

/// Uniform prior on the initial agent state.
struct AgentPrior {
  double pos_half_width = 0.1;   ///< m, centred on the first trajectory pose
  double vel_half_width = 0.01;  ///< m/s, centred on zero velocity
};

struct Scenario {
  std::vector<SurfaceSpec> surfaces;
  std::vector<PaSpec> pas;
  std::vector<AgentPose> trajectory;
  ModelConstants constants;
  Region birth_region;
  AgentPrior prior;

  std::vector<Surface> surface_list() const;
  /// Throws std::invalid_argument naming the violated field.
  void validate() const;
};

/// Ground-truth feature of one PA. index 0 is the LOS path, index l+1 the
/// single-bounce VA of surface l.
struct TruthFeature {
  int index = 0;
  Anchor anchor;
  Dispersion psi;
  int bounces = 0;
};

std::vector<TruthFeature> truth_features(const Scenario& s, std::size_t pa);
std::vector<TruthFeature> visible_features(const Scenario& s, std::size_t pa, std::size_t n);

/// Where a synthetic measurement came from. feature -1 marks clutter.
struct OriginLabel {
  int feature = -1;
  bool sub = false;

  std::string str() const;
  bool operator==(const OriginLabel&) const = default;
};

struct MeasurementFrame {
  std::size_t t = 0;
  std::vector<std::vector<Measurement>> per_pa;  ///< what the filter sees
  std::vector<std::vector<OriginLabel>> origins; ///< diagnostics only
};

double true_amplitude(double dist, int n_bounces, const ModelConstants& c);

MeasurementFrame synthesize_frame(const Scenario& s, std::size_t n, Rng& rng);

}  // namespace mpslam
