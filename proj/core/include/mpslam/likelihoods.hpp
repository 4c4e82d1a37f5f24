#pragma once

#include "mpslam/model.hpp"
#include "mpslam/types.hpp"

namespace mpslam {

struct Measurement {
  double tau = 0.0;       ///< s
  double theta = 0.0;     ///< AoA, rad
  double vartheta = 0.0;  ///< AoD, rad
  double u = 0.0;         ///< normalized amplitude

  bool operator==(const Measurement&) const = default;
};

struct NoiseModel {
  double beta_bw = 500e6 / std::sqrt(12.0);
  double k_theta = deg2rad(1.0) * 100.0;
  double k_vartheta = deg2rad(1.0) * 100.0;

  static NoiseModel from(const ModelConstants& c) {
    return {c.rms_bandwidth(), c.k_theta, c.k_vartheta};
  }
};

/// Delay standard deviation in seconds.
double sigma_tau(double u, double beta_bw);
double sigma_angle(double u, double k);

/// erf(b) - erf(a) without cancellation.
double erf_diff(double a, double b);

double main_pdf(double z, double mean, double sigma);
/// Gaussian in the wrapped difference, summing 2 pi images when needed.
double main_angle_pdf(double z, double mean, double sigma);
/// Uniform [tau, tau + psi] convolved with N(0, sigma^2), evaluated at z.
double dispersed_delay_pdf(double z, double tau, double psi, double sigma);
/// Uniform [mean - psi/2, mean + psi/2] convolved with N(0, sigma^2), wrapped.
double dispersed_angle_pdf(double z, double mean, double psi, double sigma);

/// Expected number of detected measurements of a feature.
double mean_measurements(const Dispersion& psi, const ModelConstants& c);

/// Clutter density over delay, both angles and amplitude.
double false_positive_pdf(const Measurement& z, const ModelConstants& c);

/// Per-measurement cached noise levels.
struct MeasurementContext {
  Measurement z;
  double sigma_tau = 0.0;
  double sigma_theta = 0.0;
  double sigma_vartheta = 0.0;
  double log_clutter = 0.0;  ///< log(mu_fp * f_fp(z))

  static MeasurementContext make(const Measurement& z, const NoiseModel& noise, const ModelConstants& c);
};

/// Geometric means predicted for a feature hypothesis.
struct PredictedParams {
  double tau = 0.0;
  double theta = 0.0;
  double vartheta = 0.0;
};

/// Two-branch mixture density of one measurement given geometry and dispersion.
/// Returns exactly 0 when the delay residual lies more than `gate` delay
/// standard deviations outside the dispersion window.
double mixture_density(const MeasurementContext& m, const PredictedParams& g, const Dispersion& psi,
                       double gate = 40.0);

/// Predicted parameters of a feature hypothesis seen from an agent state.
/// Returns false when the AoD is undefined (degenerate virtual-anchor geometry).
bool predict_params(const Vec2& agent_pos, double agent_heading, const Vec2& feature_pos, const Vec2& pa,
                    bool is_pa_feature, PredictedParams& out);

/// f(z | agent, feature) using the mixture; zero for degenerate geometry.
double feature_likelihood(const MeasurementContext& m, const Vec2& agent_pos, const Vec2& agent_vel,
                          const Vec2& feature_pos, const Dispersion& psi, const Vec2& pa, bool is_pa_feature);

}  // namespace mpslam
