#include "mpslam/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mpslam/geometry.hpp"
#include "mpslam/particles.hpp"

namespace mpslam {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct Box {
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = Vec2::Constant(-std::numeric_limits<double>::infinity());

  void add(const Vec2& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  bool empty() const { return lo.x() > hi.x(); }
};

// Smallest and largest distance between points of two boxes.
std::pair<double, double> box_distance_range(const Box& a, const Box& b) {
  const double gx = std::max({0.0, a.lo.x() - b.hi.x(), b.lo.x() - a.hi.x()});
  const double gy = std::max({0.0, a.lo.y() - b.hi.y(), b.lo.y() - a.hi.y()});
  const double fx = std::max(a.hi.x() - b.lo.x(), b.hi.x() - a.lo.x());
  const double fy = std::max(a.hi.y() - b.lo.y(), b.hi.y() - a.lo.y());
  return {std::hypot(gx, gy), std::hypot(fx, fy)};
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

template <class T>
void apply_permutation(std::vector<T>& v, const std::vector<std::size_t>& perm) {
  std::vector<T> out;
  out.reserve(v.size());
  for (std::size_t i : perm) out.push_back(v[i]);
  v.swap(out);
}

}  // namespace

void EngineParams::validate() const {
  auto fail = [](const char* f) { throw std::invalid_argument(std::string("invalid engine parameter: ") + f); };
  transitions.validate();
  if (particles == 0) fail("particles");
  if (mp_iterations < 1) fail("mp_iterations");
  if (!(p_cf >= 0.0 && p_cf <= 1.0)) fail("p_cf");
  if (!(p_pr >= 0.0 && p_pr <= 1.0)) fail("p_pr");
  if (!(gate_sigma > 0.0)) fail("gate_sigma");
  if (!(inversion_fraction >= 0.0 && inversion_fraction <= 1.0)) fail("inversion_fraction");
  if (!(inversion_range_window > 0.0)) fail("inversion_range_window");
  if (!(inversion_angle_window > 0.0)) fail("inversion_angle_window");
  if (max_features_per_pa == 0) fail("max_features_per_pa");
}

SpaFilter::SpaFilter(const std::vector<PaSpec>& pas, const ModelConstants& constants, const EngineParams& params,
                     const AgentPrior& prior, const AgentPose& start, std::uint64_t seed)
    : constants_(constants), noise_(NoiseModel::from(constants)), params_(params), seed_(seed) {
  constants_.validate();
  params_.validate();
  if (!(constants_.mu_fp > 0.0)) throw std::invalid_argument("invalid model constant: mu_fp must be positive for inference");
  const std::size_t n = params_.particles;

  Rng rng = make_stream(seed_, StreamTag::kPrior, {0});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  agent_.particles.resize(n);
  for (auto& x : agent_.particles) {
    const double px = u(rng), py = u(rng), vx = u(rng), vy = u(rng);
    x << start.position.x() + prior.pos_half_width * px, start.position.y() + prior.pos_half_width * py,
        prior.vel_half_width * vx, prior.vel_half_width * vy;
  }
  agent_.log_w.assign(n, -std::log(static_cast<double>(n)));

  for (std::size_t j = 0; j < pas.size(); ++j) {
    PaTracks t;
    t.position = pas[j].anchor.position;
    t.true_psi = pas[j].psi;
    TrackedFeature f;
    f.label = 0;
    f.is_pa = true;
    f.existence = 1.0;
    f.particles.resize(n);
    Rng frng = make_stream(seed_, StreamTag::kPrior, {1 + j});
    for (auto& p : f.particles) {
      p.position = t.position;
      p.psi = params_.pa_mode == PaDispersionMode::kKnown ? floored(t.true_psi)
                                                          : birth_dispersion_sample(params_.transitions, frng);
    }
    f.log_w.assign(n, -std::log(static_cast<double>(n)));
    t.features.push_back(std::move(f));
    pas_.push_back(std::move(t));
  }
  work_.resize(pas_.size());
}

std::vector<double> SpaFilter::agent_log_pairing() const {
  const double log_n = std::log(static_cast<double>(params_.particles));
  std::vector<double> s(agent_.log_w.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = agent_.log_w[i] + log_n;
  return s;
}

void SpaFilter::predict() {
  const TransitionParams& tp = params_.transitions;
  const std::size_t n = params_.particles;
  if (!first_) {
    Rng rng = make_stream(seed_, StreamTag::kAgent, {n_});
    for (auto& x : agent_.particles) x = agent_transition_sample(x, constants_.delta_t, tp.sigma_w, rng);
  }
  heading_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = agent_.particles[i];
    heading_[i] = (x(2) == 0.0 && x(3) == 0.0) ? 0.0 : std::atan2(x(3), x(2));
  }

  for (std::size_t j = 0; j < pas_.size(); ++j) {
    for (auto& f : pas_[j].features) {
      Rng rng = make_stream(seed_, StreamTag::kFeature, {j, static_cast<std::uint64_t>(f.label), n_});
      const double log_exist = safe_log(tp.p_s * f.existence);
      f.pred_log_mass.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        f.pred_log_mass[i] = log_exist + f.log_w[i] - mean_measurements(f.particles[i].psi, constants_);
      f.pred_log_mass0 = safe_log(1.0 - tp.p_s * f.existence);

      const bool frozen = f.is_pa && params_.pa_mode == PaDispersionMode::kKnown;
      if (!frozen)
        for (auto& p : f.particles) p.psi = dispersion_transition_sample(p.psi, tp, rng);

      // fresh pairing with the agent particles
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      apply_permutation(f.particles, perm);
      apply_permutation(f.log_w, perm);
      apply_permutation(f.pred_log_mass, perm);
    }
  }
}

void SpaFilter::build_legacy_links(std::size_t j, std::size_t k) {
  PaWorkspace& ws = work_[j];
  const TrackedFeature& f = pas_[j].features[k];
  const Vec2& pa = pas_[j].position;
  FeatureNode& node = ws.table.nodes[ws.legacy_node[k]];
  const std::size_t n = params_.particles;
  const double gate = params_.gate_sigma;

  Box abox, fbox;
  double psi_tau_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (node.log_base[i] == kNegInf) continue;
    abox.add(agent_.particles[i].head<2>());
    fbox.add(f.particles[i].position);
    psi_tau_max = std::max(psi_tau_max, f.particles[i].psi.tau);
  }
  if (abox.empty()) return;
  const auto [dmin, dmax] = box_distance_range(abox, fbox);

  std::vector<double> log_mu(n);
  for (std::size_t i = 0; i < n; ++i) log_mu[i] = std::log(mean_measurements(f.particles[i].psi, constants_));

  for (std::size_t l = 0; l < ws.meas.size(); ++l) {
    const MeasurementContext& m = ws.meas[l];
    if (m.log_clutter == kNegInf) continue;
    const double slack = gate * m.sigma_tau;
    if (m.z.tau < dmin / kSpeedOfLight - slack || m.z.tau > dmax / kSpeedOfLight + psi_tau_max + slack) continue;

    Link link;
    link.measurement = l;
    link.log_lambda.assign(n, kNegInf);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (node.log_base[i] == kNegInf) continue;
      const Vec2 a = agent_.particles[i].head<2>();
      const FeatureParticle& y = f.particles[i];
      const Dispersion psi = floored(y.psi);
      const Vec2 d = y.position - a;
      PredictedParams g;
      g.tau = d.norm() / kSpeedOfLight;
      const double r = m.z.tau - g.tau;
      if (r < -slack || r > psi.tau + slack) continue;
      g.theta = wrap_angle(std::atan2(d.y(), d.x()) - heading_[i]);
      if (f.is_pa) {
        g.vartheta = wrap_angle(std::atan2(-d.y(), -d.x()));
      } else {
        const auto aod = pva_aod(a, pa, y.position);
        if (!aod) continue;
        g.vartheta = *aod;
      }
      const double dens = mixture_density(m, g, psi, gate);
      if (dens <= 0.0) continue;
      link.log_lambda[i] = std::log(dens) + log_mu[i] - m.log_clutter;
      any = true;
    }
    if (any) node.links.push_back(std::move(link));
  }
}

void SpaFilter::build_candidate(std::size_t j, std::size_t m) {
  PaWorkspace& ws = work_[j];
  NewCandidate& cand = ws.fresh[m];
  cand.measurement = m;
  const TransitionParams& tp = params_.transitions;
  if (!(tp.mu_n > 0.0)) return;
  const MeasurementContext& ctx = ws.meas[m];
  if (ctx.log_clutter == kNegInf) return;

  const std::size_t n = params_.particles;
  const Vec2& pa = pas_[j].position;
  const double gate = params_.gate_sigma;
  const double beta = params_.inversion_fraction;
  const double area = tp.birth_region.area();
  const double fn = area > 0.0 ? 1.0 / area : 0.0;
  const double range_c = kSpeedOfLight * ctx.z.tau;
  const double s_r = 3.0 * kSpeedOfLight * ctx.sigma_tau + 0.02;
  const double s_phi = 1.5 * ctx.sigma_theta + 0.02;
  const double win_r = params_.inversion_range_window;
  const double win_phi = params_.inversion_angle_window;

  Rng rng = make_stream(seed_, StreamTag::kBirth, {j, n_, m});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> stdn(0.0, 1.0);

  cand.particles.resize(n);
  std::vector<double> log_base(n, kNegInf);
  const double log_mu_n = std::log(tp.mu_n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = agent_.particles[i].head<2>();
    const bool invert = std::floor((i + 1) * beta) > std::floor(i * beta);
    FeatureParticle& p = cand.particles[i];
    bool placed = false;
    if (invert) {
      const double r = range_c - win_r * unit(rng) + s_r * stdn(rng);
      const double phi = heading_[i] + ctx.z.theta + win_phi * (unit(rng) - 0.5) + s_phi * stdn(rng);
      if (r > 0.0) {
        p.position = a + r * Vec2(std::cos(phi), std::sin(phi));
        placed = true;
      }
    }
    if (!placed) {
      const double x = 2.0 * unit(rng) - 1.0;
      const double y = 2.0 * unit(rng) - 1.0;
      p.position = tp.birth_region.center + tp.birth_region.half_width * Vec2(x, y);
    }
    p.psi = birth_dispersion_sample(tp, rng);

    if (!tp.birth_region.contains(p.position) || agent_.log_w[i] == kNegInf) continue;
    const Vec2 d = p.position - a;
    const double r = d.norm();
    double q_inv = 0.0;
    if (beta > 0.0 && r > 0.0) {
      const double phi = std::atan2(d.y(), d.x());
      q_inv = dispersed_delay_pdf(range_c, r, win_r, s_r) *
              dispersed_angle_pdf(phi, heading_[i] + ctx.z.theta, win_phi, s_phi) / r;
    }
    const double imp = fn / ((1.0 - beta) * fn + beta * q_inv);
    log_base[i] = agent_.log_w[i] + std::log(imp) + log_mu_n - mean_measurements(p.psi, constants_);
  }

  // likelihood ratios of this candidate for measurements 0..m
  auto ratios = [&](std::size_t l, const std::vector<double>& active) {
    const MeasurementContext& mc = ws.meas[l];
    std::vector<double> out(n, kNegInf);
    bool any = false;
    if (mc.log_clutter == kNegInf) return std::make_pair(out, false);
    const double slack = gate * mc.sigma_tau;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] == kNegInf) continue;
      const Vec2 a = agent_.particles[i].head<2>();
      const FeatureParticle& y = cand.particles[i];
      const Dispersion psi = floored(y.psi);
      const Vec2 d = y.position - a;
      PredictedParams g;
      g.tau = d.norm() / kSpeedOfLight;
      const double r = mc.z.tau - g.tau;
      if (r < -slack || r > psi.tau + slack) continue;
      g.theta = wrap_angle(std::atan2(d.y(), d.x()) - heading_[i]);
      const auto aod = pva_aod(a, pa, y.position);
      if (!aod) continue;
      g.vartheta = *aod;
      const double dens = mixture_density(mc, g, psi, gate);
      if (dens <= 0.0) continue;
      out[i] = std::log(dens) + std::log(mean_measurements(y.psi, constants_)) - mc.log_clutter;
      any = true;
    }
    return std::make_pair(out, any);
  };

  auto [own, any_own] = ratios(m, log_base);
  if (!any_own) return;
  FeatureNode node;
  node.log_mass0 = 0.0;
  // particles that cannot produce their own measurement carry no mass
  for (std::size_t i = 0; i < n; ++i)
    if (own[i] == kNegInf) log_base[i] = kNegInf;
  Link v;
  v.measurement = m;
  v.forcing = true;
  v.log_lambda = std::move(own);
  node.links.push_back(std::move(v));
  for (std::size_t l = 0; l < m; ++l) {
    auto [lam, any] = ratios(l, log_base);
    if (!any) continue;
    Link u;
    u.measurement = l;
    u.log_lambda = std::move(lam);
    node.links.push_back(std::move(u));
  }
  node.log_base = std::move(log_base);
  cand.node = ws.table.nodes.size();
  ws.table.nodes.push_back(std::move(node));
}

void SpaFilter::evaluate_messages(const std::vector<std::vector<Measurement>>& per_pa) {
  if (per_pa.size() != pas_.size()) throw std::invalid_argument("measurement frame has wrong number of PAs");
  const std::vector<double> log_s = agent_log_pairing();
  for (std::size_t j = 0; j < pas_.size(); ++j) {
    PaWorkspace& ws = work_[j];
    ws = PaWorkspace{};
    for (const auto& z : per_pa[j]) ws.meas.push_back(MeasurementContext::make(z, noise_, constants_));
    ws.table.num_measurements = ws.meas.size();

    auto& feats = pas_[j].features;
    ws.legacy_node.resize(feats.size());
    for (std::size_t k = 0; k < feats.size(); ++k) {
      FeatureNode node;
      node.log_base.resize(params_.particles);
      for (std::size_t i = 0; i < params_.particles; ++i) node.log_base[i] = feats[k].pred_log_mass[i] + log_s[i];
      node.log_mass0 = feats[k].pred_log_mass0;
      ws.legacy_node[k] = ws.table.nodes.size();
      ws.table.nodes.push_back(std::move(node));
      build_legacy_links(j, k);
    }
    ws.fresh.resize(ws.meas.size());
    for (std::size_t m = 0; m < ws.meas.size(); ++m) build_candidate(j, m);
  }
}

void SpaFilter::associate_messages() {
  for (auto& ws : work_) ws.status = associate(ws.table, params_.mp_iterations, params_.da_tol);
}

void SpaFilter::update_pvas() {
  const double p_pr = params_.p_pr;
  for (std::size_t j = 0; j < pas_.size(); ++j) {
    PaWorkspace& ws = work_[j];
    auto& feats = pas_[j].features;
    // association probabilities for diagnostics
    for (auto& node : ws.table.nodes) update_feature_messages(node);
    const auto probs = association_probabilities(ws.table);

    for (std::size_t k = 0; k < feats.size(); ++k) {
      TrackedFeature& f = feats[k];
      const std::size_t ni = ws.legacy_node[k];
      const FeatureNode& node = ws.table.nodes[ni];
      std::vector<double> w = posterior_log_weights(node);
      const double b1 = log_sum_exp(w);
      f.last_associated = 0;
      for (double p : probs[ni])
        if (p > 0.5) ++f.last_associated;
      f.underflow = false;
      if (b1 == kNegInf || std::isnan(b1)) {
        if (log_sum_exp(f.pred_log_mass) > kNegInf) {
          f.underflow = true;
          f.existence = p_pr / 2.0;
        } else {
          f.existence = 0.0;
        }
        continue;  // keep previous particle weights
      }
      normalize_log_weights(w);
      f.log_w = std::move(w);
      f.existence = std::clamp(posterior_existence(node), 0.0, 1.0);
    }
  }
}

void SpaFilter::update_agent() {
  const std::size_t n = params_.particles;
  std::vector<double> log_beta(n, 0.0);
  bool any = false;
  for (std::size_t j = 0; j < pas_.size(); ++j) {
    PaWorkspace& ws = work_[j];
    for (std::size_t k = 0; k < ws.legacy_node.size(); ++k) {
      const FeatureNode& node = ws.table.nodes[ws.legacy_node[k]];
      if (node.links.empty()) continue;
      // N * m^i * prod(gamma) = posterior weight without the agent factor a^i
      const std::vector<double> w = posterior_log_weights(node);
      for (std::size_t i = 0; i < n; ++i) {
        if (agent_.log_w[i] == kNegInf) continue;
        const double r1 = w[i] == kNegInf ? kNegInf : w[i] - agent_.log_w[i];
        log_beta[i] += log_add(r1, node.log_mass0);
      }
      any = true;
    }
  }
  diag_.agent_degenerate = false;
  if (any) {
    std::vector<double> lw(n);
    for (std::size_t i = 0; i < n; ++i) lw[i] = agent_.log_w[i] + log_beta[i];
    const double z = normalize_log_weights(lw);
    if (z == kNegInf || !std::isfinite(z)) {
      lw.assign(n, -std::log(static_cast<double>(n)));
      diag_.agent_degenerate = true;
    }
    agent_.log_w = std::move(lw);
  }
  diag_.agent_ess = effective_sample_size(agent_.log_w);
}

EstimateRecord SpaFilter::make_estimate() const {
  EstimateRecord r;
  r.t = n_;
  r.agent = mmse(agent_.particles, agent_.log_w);
  r.confirmed.resize(pas_.size());
  r.all.resize(pas_.size());
  for (std::size_t j = 0; j < pas_.size(); ++j) {
    for (const auto& f : pas_[j].features) {
      const FeatureParticle m = mmse(f.particles, f.log_w);
      r.all[j].push_back({f.label, f.is_pa, f.existence, m.position, m.psi});
    }
    r.confirmed[j] = confirm_and_extract(r.all[j], params_.p_cf);
  }
  return r;
}

void SpaFilter::finish_step() {
  const std::size_t n = params_.particles;
  const double p_pr = params_.p_pr;
  diag_.features_before_prune.assign(pas_.size(), 0);
  diag_.features_after_prune.assign(pas_.size(), 0);
  diag_.da.clear();

  for (std::size_t j = 0; j < pas_.size(); ++j) {
    PaWorkspace& ws = work_[j];
    PaTracks& t = pas_[j];
    diag_.da.push_back(ws.status);
    // promote new PVAs
    for (auto& cand : ws.fresh) {
      if (cand.node == kNone) continue;
      const FeatureNode& node = ws.table.nodes[cand.node];
      const double e = posterior_existence(node);
      if (!(e >= p_pr)) continue;
      std::vector<double> w = posterior_log_weights(node);
      if (normalize_log_weights(w) == kNegInf) continue;
      TrackedFeature f;
      f.label = t.next_label++;
      f.birth_step = n_;
      f.is_pa = false;
      f.particles = std::move(cand.particles);
      f.log_w = std::move(w);
      f.existence = std::clamp(e, 0.0, 1.0);
      t.features.push_back(std::move(f));
    }
    diag_.features_before_prune[j] = ws.legacy_node.size() + ws.fresh.size();
  }

  estimate_ = make_estimate();

  for (std::size_t j = 0; j < pas_.size(); ++j) {
    auto& feats = pas_[j].features;
    std::erase_if(feats, [&](const TrackedFeature& f) { return f.existence < p_pr; });
    if (feats.size() > params_.max_features_per_pa) {
      std::stable_sort(feats.begin(), feats.end(), [](const TrackedFeature& a, const TrackedFeature& b) {
        if (a.is_pa != b.is_pa) return a.is_pa;
        return a.existence > b.existence;
      });
      feats.resize(params_.max_features_per_pa);
      std::stable_sort(feats.begin(), feats.end(),
                       [](const TrackedFeature& a, const TrackedFeature& b) { return a.label < b.label; });
    }
    diag_.features_after_prune[j] = feats.size();
  }

  if (effective_sample_size(agent_.log_w) < 0.5 * static_cast<double>(n)) {
    Rng rng = make_stream(seed_, StreamTag::kResample, {n_, 0});
    const auto idx = systematic_resample(agent_.log_w, n, rng);
    std::vector<AgentState> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = agent_.particles[idx[i]];
    agent_.particles = std::move(next);
    agent_.log_w.assign(n, -std::log(static_cast<double>(n)));
  }

  const TransitionParams& tp = params_.transitions;
  for (std::size_t j = 0; j < pas_.size(); ++j) {
    for (auto& f : pas_[j].features) {
      const auto lbl = static_cast<std::uint64_t>(f.label);
      if (effective_sample_size(f.log_w) < 0.5 * static_cast<double>(n)) {
        Rng rng = make_stream(seed_, StreamTag::kResample, {n_, 1 + j, lbl});
        const auto idx = systematic_resample(f.log_w, n, rng);
        std::vector<FeatureParticle> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = f.particles[idx[i]];
        f.particles = std::move(next);
        f.log_w.assign(n, -std::log(static_cast<double>(n)));
      }
      if (!f.is_pa && tp.sigma_a > 0.0) {
        Rng rng = make_stream(seed_, StreamTag::kFeature, {j, lbl, n_, 1});
        for (auto& p : f.particles) p.position = regularize_position(p.position, tp.sigma_a, rng);
      }
      f.pred_log_mass.clear();
    }
  }
  diag_.t = n_;
  ++n_;
  first_ = false;
}

StepDiagnostics SpaFilter::step(const std::vector<std::vector<Measurement>>& per_pa) {
  predict();
  evaluate_messages(per_pa);
  associate_messages();
  update_pvas();
  update_agent();
  finish_step();
  return diag_;
}

}  // namespace mpslam
