#pragma once

#include <cstddef>
#include <vector>

#include "mpslam/particles.hpp"

namespace mpslam {

/// Edge between a feature node and one measurement.
struct Link {
  std::size_t measurement = 0;
  /// v-link of a new PVA: if the feature exists it generated this measurement.
  bool forcing = false;
  /// Per-particle log likelihood ratio mu_m f(z | .) / (mu_fp f_fp(z)).
  std::vector<double> log_lambda;
  double log_eps = kNegInf;  ///< feature -> measurement message, eps(a=0) = 1
  double log_rho = kNegInf;  ///< nu(1) / nu(0)
  bool has_rho = false;      ///< false until the first measurement-side pass
};

/// Feature-oriented node: a legacy PVA or a new PVA.
struct FeatureNode {
  std::vector<double> log_base;  ///< per-particle r = 1 mass
  double log_mass0 = 0.0;        ///< r = 0 mass
  std::vector<Link> links;
};

struct FactorTable {
  std::size_t num_measurements = 0;
  std::vector<FeatureNode> nodes;
};

struct AssociationStatus {
  bool converged = false;
  int iterations = 0;
  double max_change = 0.0;
};

/// Per-particle log gamma(r = 1) of a link under the current rho.
double log_gamma(const Link& link, std::size_t i);

/// Feature side: recompute eps on every link of the node from its extrinsic
/// information. Returns the largest relative change of eps.
double update_feature_messages(FeatureNode& node);

/// Measurement side: rho_fl = 1 / (1 + sum_{f' != f} eps_f'l).
void update_measurement_messages(FactorTable& table);

/// Alternates both sides until the relative eps change drops below tol or
/// max_iterations passes were made. Never throws on non-convergence.
AssociationStatus associate(FactorTable& table, int max_iterations, double tol);

/// Per-particle log posterior weight of the r = 1 branch with all links applied.
std::vector<double> posterior_log_weights(const FeatureNode& node);

/// Posterior existence probability of the node.
double posterior_existence(const FeatureNode& node);

/// p(b_l = f) for every link, indexed like table.nodes[f].links. Clutter gets the rest.
std::vector<std::vector<double>> association_probabilities(const FactorTable& table);

/// Discrete association instance with known feature states.
struct ScalarAssociationProblem {
  struct Legacy {
    double existence = 1.0;
    std::vector<double> ratio;  ///< one per measurement
  };
  struct Fresh {
    double weight = 0.0;        ///< prior r = 1 mass, r = 0 mass is 1
    std::vector<double> ratio;  ///< entries 0..m, m = own measurement
  };
  std::size_t num_measurements = 0;
  std::vector<Legacy> legacy;
  std::vector<Fresh> fresh;  ///< empty or one per measurement
};

struct ScalarAssociation {
  /// p[l][h]: h = 0 clutter, 1..K legacy, K+1+m new PVA m
  std::vector<std::vector<double>> p;
  std::vector<double> existence;  ///< legacy then new
  AssociationStatus status;
};

FactorTable build_table(const ScalarAssociationProblem& problem);
ScalarAssociation associate(const ScalarAssociationProblem& problem, int max_iterations = 200, double tol = 1e-6);

}  // namespace mpslam
