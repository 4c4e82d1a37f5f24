#pragma once

#include <Eigen/Core>

#include "mpslam/rng.hpp"
#include "mpslam/types.hpp"

namespace mpslam {

/// [px, py, vx, vy]
using AgentState = Eigen::Vector4d;

/// One particle of a PVA belief.
struct FeatureParticle {
  Vec2 position = Vec2::Zero();
  Dispersion psi;
};

struct PvaState {
  Vec2 position = Vec2::Zero();
  Dispersion psi;
  bool exists = true;
};

/// Axis-aligned square.
struct Region {
  Vec2 center = Vec2::Zero();
  double half_width = 15.0;

  bool contains(const Vec2& p) const {
    return std::abs(p.x() - center.x()) <= half_width && std::abs(p.y() - center.y()) <= half_width;
  }
  double area() const { return 4.0 * half_width * half_width; }
};

struct TransitionParams {
  double sigma_w = 0.05;  ///< m/s^2
  double q_tau = 1e3;
  double q_theta = 1e3;
  double q_vartheta = 1e3;
  double p_s = 0.999;
  double mu_n = 0.01;
  Region birth_region;
  double sigma_a = 1e-3;  ///< m
  /// Upper limits of the uniform birth law for dispersion.
  Dispersion psi_max{2.0 / kSpeedOfLight, deg2rad(20.0), deg2rad(20.0)};

  /// Throws std::invalid_argument naming the first invalid field.
  void validate() const;
};

Eigen::Matrix4d cv_transition_matrix(double dt);
Eigen::Matrix<double, 4, 2> cv_noise_matrix(double dt);

AgentState agent_transition_sample(const AgentState& x, double dt, double sigma_w, Rng& rng);

/// Gamma(q, psi / q) draw of a floored dispersion component.
double dispersion_transition_sample(double psi, double floor, double q, Rng& rng);
Dispersion dispersion_transition_sample(const Dispersion& psi, const TransitionParams& p, Rng& rng);

struct SurvivalFactors {
  double exist = 0.0;   ///< mass carried into r = 1
  double vanish = 1.0;  ///< mass carried into r = 0
};

/// Branch factors for one existence state, before the e^{-mu_m} factor.
SurvivalFactors survival_weight(bool r, double p_s);

/// Uniform birth law on the region; psi uniform on [0, psi_max], floored.
PvaState birth_prior_sample(const TransitionParams& p, Rng& rng);
Dispersion birth_dispersion_sample(const TransitionParams& p, Rng& rng);

Vec2 regularize_position(const Vec2& p, double sigma_a, Rng& rng);

}  // namespace mpslam
