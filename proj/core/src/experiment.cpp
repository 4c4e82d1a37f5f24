#include "mpslam/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "mpslam/scenario_io.hpp"

namespace mpslam {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string run_name(std::size_t run, const char* what) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "run_%03zu_%s.csv", run, what);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write output file: " + p.string());
  return f;
}

// Trajectory: ellipse around the room centre, counter-clockwise, speed ramping up.
std::vector<AgentPose> loop_trajectory(std::size_t poses, double dt) {
  const Vec2 c(0.0, 5.0);
  const double ax = 3.5, ay = 2.5;
  const double v0 = 0.005, v1 = 0.3, ramp = 15.0;

  constexpr std::size_t kTable = 20000;
  std::vector<double> arc(kTable + 1, 0.0);
  auto point = [&](double phi) { return Vec2(c.x() + ax * std::cos(phi), c.y() + ay * std::sin(phi)); };
  for (std::size_t i = 1; i <= kTable; ++i)
    arc[i] = arc[i - 1] + (point(kTwoPi * i / kTable) - point(kTwoPi * (i - 1) / kTable)).norm();
  const double perimeter = arc.back();

  auto angle_at = [&](double s) {
    s = std::fmod(s, perimeter);
    const auto it = std::upper_bound(arc.begin(), arc.end(), s);
    const std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - arc.begin(), 1), kTable);
    const double f = (s - arc[i - 1]) / (arc[i] - arc[i - 1]);
    return kTwoPi * (static_cast<double>(i - 1) + f) / kTable;
  };
  auto distance = [&](double t) {
    if (t <= ramp) return v0 * t + 0.5 * (v1 - v0) * t * t / ramp;
    return v0 * ramp + 0.5 * (v1 - v0) * ramp + v1 * (t - ramp);
  };
  auto speed = [&](double t) { return v0 + (v1 - v0) * std::min(t / ramp, 1.0); };

  std::vector<AgentPose> out(poses);
  for (std::size_t n = 0; n < poses; ++n) {
    const double t = dt * static_cast<double>(n);
    const double phi = angle_at(distance(t));
    const Vec2 tangent = Vec2(-ax * std::sin(phi), ay * std::cos(phi)).normalized();
    out[n].position = point(phi);
    out[n].velocity = speed(t) * tangent;
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const char* f) { throw std::invalid_argument(std::string("invalid config field: ") + f); };
  if (runs == 0) fail("runs (must be positive)");
  if (jobs == 0) fail("jobs (must be positive)");
  if (!(convergence_threshold > 0.0)) fail("convergence_threshold");
  engine.validate();
}

Scenario make_paper_scenario() {
  Scenario s;
  const Vec2 inside(0.0, 5.0);
  const Vec2 ll(-5.0, 1.0), lr(5.0, 1.0), ur(5.0, 9.0), ul(-5.0, 9.0);
  auto deg = [](double d_m, double th, double vt) { return Dispersion{d_m / kSpeedOfLight, deg2rad(th), deg2rad(vt)}; };
  s.surfaces.push_back({Surface::from_endpoints(lr, ur, inside), deg(0.0, 0.0, 0.0)});
  s.surfaces.push_back({Surface::from_endpoints(ur, ul, inside), deg(0.2, 10.0, 10.0)});
  s.surfaces.push_back({Surface::from_endpoints(ul, ll, inside), deg(0.1, 5.0, 5.0)});
  s.surfaces.push_back({Surface::from_endpoints(ll, lr, inside), deg(0.0, 0.0, 0.0)});
  PaSpec pa;
  pa.anchor.position = Vec2(0.1, 6.0);
  s.pas.push_back(pa);
  s.birth_region = Region{inside, 15.0};
  s.trajectory = loop_trajectory(300, s.constants.delta_t);
  return s;
}

std::vector<TruthSnapshot> truth_snapshot(const Scenario& s, std::size_t n) {
  std::vector<TruthSnapshot> out(s.pas.size());
  for (std::size_t j = 0; j < s.pas.size(); ++j) {
    out[j].pa_psi = s.pas[j].psi;
    for (const auto& f : visible_features(s, j, n)) {
      if (f.index == 0) continue;
      out[j].va_positions.push_back(f.anchor.position);
      out[j].va_psi.push_back(f.psi);
      out[j].va_index.push_back(f.index);
    }
  }
  return out;
}

std::string feature_suffix(std::size_t f) { return f == 0 ? "pa" : "va" + std::to_string(f); }

std::size_t effective_steps(const Scenario& s, const RunConfig& cfg) {
  const std::size_t n = s.trajectory.size();
  return cfg.steps == 0 ? n : std::min(cfg.steps, n);
}

std::vector<MeasurementFrame> simulate_frames(const Scenario& s, std::uint64_t seed, std::size_t run,
                                              std::size_t steps) {
  std::vector<MeasurementFrame> frames;
  frames.reserve(steps);
  for (std::size_t n = 0; n < steps; ++n) {
    Rng rng = make_stream(seed, StreamTag::kFrame, {run, n});
    frames.push_back(synthesize_frame(s, n, rng));
  }
  return frames;
}

RunLog run_single(const Scenario& s, const RunConfig& cfg, std::size_t run,
                  std::vector<MeasurementFrame>* frames_out) {
  const std::size_t steps = effective_steps(s, cfg);
  const std::size_t n_feat = s.surfaces.size() + 1;
  std::vector<MeasurementFrame> frames = simulate_frames(s, cfg.seed, run, steps);

  EngineParams ep = cfg.engine;
  ep.transitions.birth_region = s.birth_region;
  const std::uint64_t run_seed = splitmix64(cfg.seed ^ splitmix64(run + 1));
  SpaFilter filter(s.pas, s.constants, ep, s.prior, s.trajectory.front(), run_seed);

  RunLog log;
  log.estimates.reserve(steps);
  log.errors.reserve(steps);
  for (std::size_t n = 0; n < steps; ++n) {
    filter.step(frames[n].per_pa);
    log.estimates.push_back(filter.last_estimate());
    log.errors.push_back(score_step(log.estimates.back(), s.trajectory[n].position, truth_snapshot(s, n), n_feat));
  }
  log.converged = !log.errors.empty() && log.errors.back().pos_err <= cfg.convergence_threshold;
  if (frames_out) *frames_out = std::move(frames);
  return log;
}

std::vector<double> dead_reckoning_errors(const Scenario& s, std::size_t steps) {
  const Eigen::Matrix4d a = cv_transition_matrix(s.constants.delta_t);
  AgentState x;
  x << s.trajectory.front().position, 0.0, 0.0;
  std::vector<double> out;
  for (std::size_t n = 0; n < steps && n < s.trajectory.size(); ++n) {
    if (n > 0) x = a * x;
    out.push_back((x.head<2>() - s.trajectory[n].position).norm());
  }
  return out;
}

ExperimentResult run_experiment(const Scenario& s, const RunConfig& cfg, const RunCallback& on_done) {
  cfg.validate();
  s.validate();
  ExperimentResult r;
  r.runs.resize(cfg.runs);
  if (cfg.dump_frames) r.frames.resize(cfg.runs);

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cfg.runs) return;
      try {
        r.runs[k] = run_single(s, cfg, k, cfg.dump_frames ? &r.frames[k] : nullptr);
        if (on_done) {
          std::lock_guard lock(mu);
          on_done(k, r.runs[k]);
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next = cfg.runs;
        return;
      }
    }
  };
  const std::size_t threads = std::min(cfg.jobs, cfg.runs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  r.series = aggregate(r.runs);
  return r;
}

void write_results_csv(std::ostream& out, const MetricSeries& m, const RunConfig& cfg, std::size_t n_features) {
  out << "# seed=" << cfg.seed << ",particles=" << cfg.engine.particles << ",runs_total=" << m.runs_total
      << ",runs_converged=" << m.runs_converged
      << ",pa_dispersion=" << (cfg.engine.pa_mode == PaDispersionMode::kKnown ? "known" : "unknown") << "\n";
  out << "t,rmse_pos_m,mospa_m,card_err";
  for (const char* col : {"psi_d_rmse_m_", "psi_theta_rmse_deg_", "psi_vartheta_rmse_deg_"})
    for (std::size_t f = 0; f < n_features; ++f) out << "," << col << feature_suffix(f);
  out << "\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t t = 0; t < m.rmse_pos.size(); ++t) {
    out << t << "," << num(m.rmse_pos[t]) << "," << num(m.mospa[t]) << "," << num(m.card_err[t]);
    auto psi = [&](std::size_t f) { return f < m.psi_rmse[t].size() ? m.psi_rmse[t][f] : Dispersion{nan, nan, nan}; };
    for (std::size_t f = 0; f < n_features; ++f) out << "," << num(psi(f).tau * kSpeedOfLight);
    for (std::size_t f = 0; f < n_features; ++f) out << "," << num(rad2deg(psi(f).theta));
    for (std::size_t f = 0; f < n_features; ++f) out << "," << num(rad2deg(psi(f).vartheta));
    out << "\n";
  }
}

void write_estimates_csv(std::ostream& out, const RunLog& log, const Scenario& s) {
  out << "t,px_m,py_m,vx_mps,vy_mps,true_px_m,true_py_m,pos_err_m,ospa_m,card_err,n_confirmed\n";
  for (std::size_t i = 0; i < log.estimates.size(); ++i) {
    const auto& e = log.estimates[i];
    const auto& err = log.errors[i];
    std::size_t conf = 0;
    for (const auto& c : e.confirmed) conf += c.size();
    const Vec2 tp = s.trajectory[e.t].position;
    out << e.t << "," << num(e.agent(0)) << "," << num(e.agent(1)) << "," << num(e.agent(2)) << ","
        << num(e.agent(3)) << "," << num(tp.x()) << "," << num(tp.y()) << "," << num(err.pos_err) << ","
        << num(err.ospa) << "," << num(err.card_err) << "," << conf << "\n";
  }
}

void write_features_csv(std::ostream& out, const RunLog& log) {
  out << "t,pa,label,is_pa,existence,x_m,y_m,psi_d_m,psi_theta_deg,psi_vartheta_deg\n";
  for (const auto& e : log.estimates)
    for (std::size_t j = 0; j < e.all.size(); ++j)
      for (const auto& f : e.all[j])
        out << e.t << "," << j << "," << f.label << "," << (f.is_pa ? 1 : 0) << "," << num(f.existence) << ","
            << num(f.position.x()) << "," << num(f.position.y()) << "," << num(f.psi.tau * kSpeedOfLight) << ","
            << num(rad2deg(f.psi.theta)) << "," << num(rad2deg(f.psi.vartheta)) << "\n";
}

void write_outputs(const ExperimentResult& r, const Scenario& s, const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw std::runtime_error("output directory not writable: " + cfg.out.string() + " (" + ec.message() + ")");
  {
    auto f = open_out(cfg.out / "results.csv");
    write_results_csv(f, r.series, cfg, s.surfaces.size() + 1);
  }
  for (std::size_t k = 0; k < r.runs.size(); ++k) {
    auto e = open_out(cfg.out / run_name(k, "estimates"));
    write_estimates_csv(e, r.runs[k], s);
    auto f = open_out(cfg.out / run_name(k, "features"));
    write_features_csv(f, r.runs[k]);
    if (k < r.frames.size() && !r.frames[k].empty()) save_frames(r.frames[k], cfg.out / run_name(k, "frames"));
  }
}

}  // namespace mpslam
