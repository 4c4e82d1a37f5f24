#include "mpslam/transitions.hpp"

#include <stdexcept>
#include <string>

namespace mpslam {

void TransitionParams::validate() const {
  auto fail = [](const char* f) { throw std::invalid_argument(std::string("invalid transition parameter: ") + f); };
  if (!(sigma_w >= 0.0)) fail("sigma_w");
  if (!(q_tau > 0.0)) fail("q_tau");
  if (!(q_theta > 0.0)) fail("q_theta");
  if (!(q_vartheta > 0.0)) fail("q_vartheta");
  if (!(p_s > 0.0 && p_s <= 1.0)) fail("p_s");
  if (!(mu_n >= 0.0)) fail("mu_n");
  if (!(sigma_a >= 0.0)) fail("sigma_a");
  if (!(birth_region.half_width >= 0.0)) fail("birth_region");
  if (!(psi_max.tau >= 0.0 && psi_max.theta >= 0.0 && psi_max.vartheta >= 0.0)) fail("psi_max");
}

Eigen::Matrix4d cv_transition_matrix(double dt) {
  Eigen::Matrix4d a = Eigen::Matrix4d::Identity();
  a(0, 2) = dt;
  a(1, 3) = dt;
  return a;
}

Eigen::Matrix<double, 4, 2> cv_noise_matrix(double dt) {
  Eigen::Matrix<double, 4, 2> b = Eigen::Matrix<double, 4, 2>::Zero();
  b(0, 0) = b(1, 1) = 0.5 * dt * dt;
  b(2, 0) = b(3, 1) = dt;
  return b;
}

AgentState agent_transition_sample(const AgentState& x, double dt, double sigma_w, Rng& rng) {
  AgentState out = x;
  out(0) += dt * x(2);
  out(1) += dt * x(3);
  if (sigma_w > 0.0) {
    std::normal_distribution<double> n(0.0, sigma_w);
    const double wx = n(rng);
    const double wy = n(rng);
    out(0) += 0.5 * dt * dt * wx;
    out(1) += 0.5 * dt * dt * wy;
    out(2) += dt * wx;
    out(3) += dt * wy;
  }
  return out;
}

double dispersion_transition_sample(double psi, double floor, double q, Rng& rng) {
  const double base = std::max(psi, floor);
  std::gamma_distribution<double> g(q, base / q);
  return std::max(g(rng), floor);
}

Dispersion dispersion_transition_sample(const Dispersion& psi, const TransitionParams& p, Rng& rng) {
  return {dispersion_transition_sample(psi.tau, kDispersionFloor.tau, p.q_tau, rng),
          dispersion_transition_sample(psi.theta, kDispersionFloor.theta, p.q_theta, rng),
          dispersion_transition_sample(psi.vartheta, kDispersionFloor.vartheta, p.q_vartheta, rng)};
}

SurvivalFactors survival_weight(bool r, double p_s) {
  if (!r) return {0.0, 1.0};
  return {p_s, 1.0 - p_s};
}

Dispersion birth_dispersion_sample(const TransitionParams& p, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a = u(rng);
  const double b = u(rng);
  const double c = u(rng);
  return floored({a * p.psi_max.tau, b * p.psi_max.theta, c * p.psi_max.vartheta});
}

PvaState birth_prior_sample(const TransitionParams& p, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PvaState s;
  const double x = u(rng);
  const double y = u(rng);
  s.position = p.birth_region.center + p.birth_region.half_width * Vec2(x, y);
  s.psi = birth_dispersion_sample(p, rng);
  s.exists = true;
  return s;
}

Vec2 regularize_position(const Vec2& p, double sigma_a, Rng& rng) {
  if (sigma_a <= 0.0) return p;
  std::normal_distribution<double> n(0.0, sigma_a);
  const double dx = n(rng);
  const double dy = n(rng);
  return p + Vec2(dx, dy);
}

}  // namespace mpslam
