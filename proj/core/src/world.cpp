#include "mpslam/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpslam {

std::vector<Surface> Scenario::surface_list() const {
  std::vector<Surface> out;
  out.reserve(surfaces.size());
  for (const auto& s : surfaces) out.push_back(s.surface);
  return out;
}

void Scenario::validate() const {
  auto fail = [](const std::string& f) { throw std::invalid_argument("invalid scenario field: " + f); };
  constants.validate();
  if (trajectory.size() < 2) fail("trajectory (need at least 2 poses)");
  if (pas.empty()) fail("pa (need at least one physical anchor)");
  auto nonneg = [](const Dispersion& d) { return d.tau >= 0.0 && d.theta >= 0.0 && d.vartheta >= 0.0; };
  for (const auto& s : surfaces) {
    if (!nonneg(s.psi)) fail("surface dispersion");
    if (std::abs(s.surface.normal.norm() - 1.0) > 1e-12) fail("surface normal");
    if (std::abs(s.surface.normal.dot(s.surface.b - s.surface.a)) > 1e-9) fail("surface normal");
  }
  for (const auto& p : pas)
    if (!nonneg(p.psi)) fail("pa dispersion");
  if (!(prior.pos_half_width >= 0.0)) fail("init_pos_halfwidth_m");
  if (!(prior.vel_half_width >= 0.0)) fail("init_vel_halfwidth_mps");
  if (!(birth_region.half_width >= 0.0)) fail("birth_region");
}

std::vector<TruthFeature> truth_features(const Scenario& s, std::size_t pa) {
  std::vector<TruthFeature> out;
  const PaSpec& p = s.pas.at(pa);
  out.push_back({0, p.anchor, p.psi, 0});
  for (std::size_t l = 0; l < s.surfaces.size(); ++l)
    out.push_back({static_cast<int>(l) + 1, mirror_anchor(p.anchor, s.surfaces[l].surface, l), s.surfaces[l].psi, 1});
  return out;
}

std::vector<TruthFeature> visible_features(const Scenario& s, std::size_t pa, std::size_t n) {
  const auto surfaces = s.surface_list();
  const Vec2& agent = s.trajectory.at(n).position;
  const Vec2& pa_pos = s.pas.at(pa).anchor.position;
  std::vector<TruthFeature> out;
  for (auto& f : truth_features(s, pa))
    if (is_visible(agent, f.anchor, pa_pos, surfaces)) out.push_back(f);
  return out;
}

std::string OriginLabel::str() const {
  if (feature < 0) return "fp";
  const std::string kind = sub ? ":sub" : ":main";
  if (feature == 0) return "los" + kind;
  return "va" + std::to_string(feature) + kind;
}

double true_amplitude(double dist, int n_bounces, const ModelConstants& c) {
  if (!(dist > 0.0)) throw std::domain_error("true_amplitude: distance must be positive");
  const double u1 = std::pow(10.0, c.snr_1m_db / 20.0);
  return u1 / dist * std::pow(10.0, -n_bounces * c.reflection_loss_db / 20.0);
}

MeasurementFrame synthesize_frame(const Scenario& s, std::size_t n, Rng& rng) {
  const ModelConstants& c = s.constants;
  const NoiseModel noise = NoiseModel::from(c);
  const auto surfaces = s.surface_list();
  const AgentPose& pose = s.trajectory.at(n);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> stdn(0.0, 1.0);
  std::bernoulli_distribution detect(c.p_d);

  MeasurementFrame frame;
  frame.t = n;
  frame.per_pa.resize(s.pas.size());
  frame.origins.resize(s.pas.size());

  for (std::size_t j = 0; j < s.pas.size(); ++j) {
    const Vec2& pa = s.pas[j].anchor.position;
    std::vector<std::pair<Measurement, OriginLabel>> items;

    auto emit = [&](double tau, double theta, double vartheta, double u_true, OriginLabel label) {
      Measurement z;
      z.u = std::max(c.gamma_det, u_true + stdn(rng));
      z.tau = tau + sigma_tau(z.u, noise.beta_bw) * stdn(rng);
      z.theta = wrap_angle(theta + sigma_angle(z.u, noise.k_theta) * stdn(rng));
      z.vartheta = wrap_angle(vartheta + sigma_angle(z.u, noise.k_vartheta) * stdn(rng));
      if (z.tau < 0.0 || z.tau > c.tau_max) return;
      items.emplace_back(z, label);
    };

    for (const auto& f : visible_features(s, j, n)) {
      const double dist = (pose.position - f.anchor.position).norm();
      const double tau = dist / kSpeedOfLight;
      const double theta = true_aoa(pose, f.anchor.position);
      const double vartheta = true_aod(pose.position, f.anchor, pa, surfaces);
      const double u_main = true_amplitude(dist, f.bounces, c);
      if (detect(rng)) emit(tau, theta, vartheta, u_main, {f.index, false});

      const double mean_sub = std::max(0.0, mean_measurements(f.psi, c) / c.p_d - 1.0);
      std::poisson_distribution<int> count(mean_sub);
      const int n_sub = mean_sub > 0.0 ? count(rng) : 0;
      for (int i = 0; i < n_sub; ++i) {
        const double nu = unit(rng) * f.psi.tau;
        const double eta = (unit(rng) - 0.5) * f.psi.theta;
        const double zeta = (unit(rng) - 0.5) * f.psi.vartheta;
        if (detect(rng)) emit(tau + nu, theta + eta, vartheta + zeta, c.beta_sub * u_main, {f.index, true});
      }
    }

    if (c.mu_fp > 0.0) {
      std::poisson_distribution<int> fp_count(c.mu_fp);
      const int n_fp = fp_count(rng);
      std::exponential_distribution<double> amp(1.0);
      for (int i = 0; i < n_fp; ++i) {
        Measurement z;
        z.tau = unit(rng) * c.tau_max;
        z.theta = wrap_angle(kPi - kTwoPi * unit(rng));
        z.vartheta = wrap_angle(kPi - kTwoPi * unit(rng));
        z.u = c.gamma_det + amp(rng);
        items.emplace_back(z, OriginLabel{});
      }
    }

    std::shuffle(items.begin(), items.end(), rng);
    for (auto& [z, label] : items) {
      frame.per_pa[j].push_back(z);
      frame.origins[j].push_back(label);
    }
  }
  return frame;
}

}  // namespace mpslam
