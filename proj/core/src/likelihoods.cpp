#include "mpslam/likelihoods.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mpslam/geometry.hpp"

namespace mpslam {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kTwoOverSqrtPi = 1.12837916709551257390;


double gauss(double d, double sigma) {
  const double x = d / sigma;
  return kInvSqrt2Pi / sigma * std::exp(-0.5 * x * x);
}

bool needs_wrap(double half_width, double sigma) { return half_width + 8.0 * sigma >= kPi; }

/// True when the 2 pi k image is below 1e-17 of the k = 0 term.
bool negligible_image(double d, int k, double half_width, double sigma) {
  if (k == 0) return false;
  const double d0 = std::max(0.0, std::abs(d) - half_width);
  const double dk = std::max(0.0, std::abs(d + k * kTwoPi) - half_width);
  return (dk * dk - d0 * d0) > 80.0 * sigma * sigma;
}

}  // namespace

void ModelConstants::validate() const {
  auto fail = [](const char* field) { throw std::invalid_argument(std::string("invalid model constant: ") + field); };
  if (!(delta_t > 0.0)) fail("delta_t_s");
  if (!(bandwidth > 0.0)) fail("bandwidth_hz");
  if (!(p_d > 0.0 && p_d <= 1.0)) fail("p_d");
  if (!(mu_fp >= 0.0)) fail("mu_fp");
  if (!(gamma_det > 0.0)) fail("gamma_det");
  if (!(tau_max > 0.0)) fail("tau_max_s");
  if (!(beta_sub > 0.0)) fail("beta_sub");
  if (!(n_ny_tau > 0.0)) fail("n_ny_tau");
  if (!(n_ny_theta > 0.0)) fail("n_ny_theta");
  if (!(n_ny_vartheta > 0.0)) fail("n_ny_vartheta");
  if (!(k_theta > 0.0)) fail("k_theta");
  if (!(k_vartheta > 0.0)) fail("k_vartheta");
  if (!(beta_bw >= 0.0)) fail("beta_bw_hz");
}

double sigma_tau(double u, double beta_bw) {
  if (!(u > 0.0)) throw std::domain_error("sigma_tau: amplitude must be positive");
  return 1.0 / (std::sqrt(8.0) * kPi * beta_bw * u);
}

double sigma_angle(double u, double k) {
  if (!(u > 0.0)) throw std::domain_error("sigma_angle: amplitude must be positive");
  return k / u;
}

double erf_diff(double a, double b) {
  if (b < a) return -erf_diff(b, a);
  const double h = 0.5 * (b - a);
  const double m = 0.5 * (a + b);
  if (h * (std::abs(m) + 1.0) <= 0.25) {
    // integral of exp(-(m + s)^2) over |s| <= h via the Hermite generating function
    double hk = 1.0, hk1 = 2.0 * m;  // H_k(m), H_{k+1}(m)
    double hp = h, fact = 1.0, acc = 2.0 * h;
    for (int k = 0; k < 60;) {
      const double h2 = 2.0 * m * hk1 - 2.0 * (k + 1) * hk;
      const double h3 = 2.0 * m * h2 - 2.0 * (k + 2) * hk1;
      fact *= (k + 1) * (k + 2);
      k += 2;
      hk = h2;
      hk1 = h3;
      hp *= h * h;
      const double term = 2.0 * hk * hp / ((k + 1) * fact);
      acc += term;
      if (std::abs(term) <= 1e-17 * std::abs(acc)) break;
    }
    return kTwoOverSqrtPi * std::exp(-m * m) * acc;
  }
  if (a >= 0.0) return std::erfc(a) - std::erfc(b);
  if (b <= 0.0) return std::erfc(-b) - std::erfc(-a);
  return std::erf(b) - std::erf(a);
}

double main_pdf(double z, double mean, double sigma) { return gauss(z - mean, sigma); }

double main_angle_pdf(double z, double mean, double sigma) {
  const double d = wrap_angle(z - mean);
  if (!needs_wrap(0.0, sigma)) return gauss(d, sigma);
  double acc = 0.0;
  for (int k = -3; k <= 3; ++k)
    if (!negligible_image(d, k, 0.0, sigma)) acc += gauss(d + k * kTwoPi, sigma);
  return acc;
}

double dispersed_delay_pdf(double z, double tau, double psi, double sigma) {
  const double s = kInvSqrt2 / sigma;
  // residual first: tau + psi would round psi away near the floor
  const double r = tau - z;
  return erf_diff(r * s, (r + psi) * s) / (2.0 * psi);
}

double dispersed_angle_pdf(double z, double mean, double psi, double sigma) {
  const double d = wrap_angle(z - mean);
  const double s = kInvSqrt2 / sigma;
  auto one = [&](double dd) { return erf_diff((-0.5 * psi - dd) * s, (0.5 * psi - dd) * s) / (2.0 * psi); };
  if (!needs_wrap(0.5 * psi, sigma)) return one(d);
  double acc = 0.0;
  for (int k = -3; k <= 3; ++k)
    if (!negligible_image(d, k, 0.5 * psi, sigma)) acc += one(d + k * kTwoPi);
  return acc;
}

double mean_measurements(const Dispersion& psi, const ModelConstants& c) {
  return (1.0 + c.n_ny_tau * psi.tau * c.bandwidth + psi.theta / c.n_ny_theta + psi.vartheta / c.n_ny_vartheta) *
         c.p_d;
}

double false_positive_pdf(const Measurement& z, const ModelConstants& c) {
  if (z.tau < 0.0 || z.tau > c.tau_max || z.u < c.gamma_det) return 0.0;
  return std::exp(-(z.u - c.gamma_det)) / (c.tau_max * kTwoPi * kTwoPi);
}

MeasurementContext MeasurementContext::make(const Measurement& z, const NoiseModel& noise, const ModelConstants& c) {
  MeasurementContext m;
  m.z = z;
  m.sigma_tau = mpslam::sigma_tau(z.u, noise.beta_bw);
  m.sigma_theta = sigma_angle(z.u, noise.k_theta);
  m.sigma_vartheta = sigma_angle(z.u, noise.k_vartheta);
  const double fp = false_positive_pdf(z, c);
  m.log_clutter = (fp > 0.0 && c.mu_fp > 0.0) ? std::log(c.mu_fp * fp) : -std::numeric_limits<double>::infinity();
  return m;
}

double mixture_density(const MeasurementContext& m, const PredictedParams& g, const Dispersion& psi, double gate) {
  const Dispersion p = floored(psi);
  const double r = m.z.tau - g.tau;
  if (r < -gate * m.sigma_tau || r > p.tau + gate * m.sigma_tau) return 0.0;
  const double main = main_pdf(m.z.tau, g.tau, m.sigma_tau) * main_angle_pdf(m.z.theta, g.theta, m.sigma_theta) *
                      main_angle_pdf(m.z.vartheta, g.vartheta, m.sigma_vartheta);
  const double sub = dispersed_delay_pdf(m.z.tau, g.tau, p.tau, m.sigma_tau) *
                     dispersed_angle_pdf(m.z.theta, g.theta, p.theta, m.sigma_theta) *
                     dispersed_angle_pdf(m.z.vartheta, g.vartheta, p.vartheta, m.sigma_vartheta);
  return 0.5 * (main + sub);
}

bool predict_params(const Vec2& agent_pos, double agent_heading, const Vec2& feature_pos, const Vec2& pa,
                    bool is_pa_feature, PredictedParams& out) {
  const Vec2 d = feature_pos - agent_pos;
  out.tau = d.norm() / kSpeedOfLight;
  out.theta = wrap_angle(std::atan2(d.y(), d.x()) - agent_heading);
  if (is_pa_feature) {
    out.vartheta = wrap_angle(std::atan2(-d.y(), -d.x()));
    return true;
  }
  const auto aod = pva_aod(agent_pos, pa, feature_pos);
  if (!aod) return false;
  out.vartheta = *aod;
  return true;
}

double feature_likelihood(const MeasurementContext& m, const Vec2& agent_pos, const Vec2& agent_vel,
                          const Vec2& feature_pos, const Dispersion& psi, const Vec2& pa, bool is_pa_feature) {
  PredictedParams g;
  if (!predict_params(agent_pos, heading(agent_vel), feature_pos, pa, is_pa_feature, g)) return 0.0;
  return mixture_density(m, g, psi);
}

}  // namespace mpslam
