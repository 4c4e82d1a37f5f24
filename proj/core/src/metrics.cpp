#include "mpslam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mpslam/particles.hpp"

namespace mpslam {

AgentState mmse(std::span<const AgentState> particles, std::span<const double> log_w) {
  AgentState acc = AgentState::Zero();
  double total = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const double w = std::exp(log_w[i]);
    acc += w * particles[i];
    total += w;
  }
  return total > 0.0 ? AgentState(acc / total) : acc;
}

FeatureParticle mmse(std::span<const FeatureParticle> particles, std::span<const double> log_w) {
  FeatureParticle acc;
  double total = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const double w = std::exp(log_w[i]);
    acc.position += w * particles[i].position;
    acc.psi.tau += w * particles[i].psi.tau;
    acc.psi.theta += w * particles[i].psi.theta;
    acc.psi.vartheta += w * particles[i].psi.vartheta;
    total += w;
  }
  if (total > 0.0) {
    acc.position /= total;
    acc.psi = {acc.psi.tau / total, acc.psi.theta / total, acc.psi.vartheta / total};
  }
  return acc;
}

std::vector<FeatureEstimate> confirm_and_extract(const std::vector<FeatureEstimate>& features, double p_cf) {
  std::vector<FeatureEstimate> out;
  for (const auto& f : features)
    if (f.existence > p_cf) out.push_back(f);
  return out;
}

std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  // Hungarian algorithm (potentials form), 1-based internally.
  const std::size_t n = cost.size();
  if (n == 0) return {};
  const std::size_t m = cost[0].size();
  if (m < n) throw std::invalid_argument("min_cost_assignment: more rows than columns");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

OspaResult ospa_detail(const std::vector<Vec2>& est, const std::vector<Vec2>& truth, double cutoff, double order) {
  OspaResult r;
  r.match.assign(est.size(), -1);
  const std::size_t m = est.size();
  const std::size_t n = truth.size();
  if (m == 0 && n == 0) return r;
  if (m == 0 || n == 0) {
    r.distance = cutoff;
    return r;
  }
  const bool est_rows = m <= n;
  const std::vector<Vec2>& rows = est_rows ? est : truth;
  const std::vector<Vec2>& cols = est_rows ? truth : est;
  std::vector<std::vector<double>> cost(rows.size(), std::vector<double>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      cost[i][j] = std::pow(std::min((rows[i] - cols[j]).norm(), cutoff), order);
  const auto assign = min_cost_assignment(cost);
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    total += cost[i][assign[i]];
    const bool within = (rows[i] - cols[assign[i]]).norm() < cutoff;
    if (within) {
      if (est_rows)
        r.match[i] = static_cast<int>(assign[i]);
      else
        r.match[assign[i]] = static_cast<int>(i);
    }
  }
  const std::size_t big = std::max(m, n);
  total += std::pow(cutoff, order) * static_cast<double>(big - rows.size());
  r.distance = std::pow(total / static_cast<double>(big), 1.0 / order);
  return r;
}

double ospa(const std::vector<Vec2>& est, const std::vector<Vec2>& truth, double cutoff, double order) {
  return ospa_detail(est, truth, cutoff, order).distance;
}

StepErrors score_step(const EstimateRecord& est, const Vec2& true_pos, const std::vector<TruthSnapshot>& truth,
                      std::size_t n_truth_features, double cutoff, double order) {
  StepErrors e;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  e.psi_err.assign(n_truth_features, Dispersion{nan, nan, nan});
  e.pos_err = (est.agent.head<2>() - true_pos).norm();
  double ospa_sum = 0.0;
  double card_sum = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const auto& conf = j < est.confirmed.size() ? est.confirmed[j] : std::vector<FeatureEstimate>{};
    std::vector<Vec2> pos;
    std::vector<const FeatureEstimate*> vas;
    for (const auto& f : conf) {
      if (f.is_pa) {
        if (j == 0 && n_truth_features > 0)
          e.psi_err[0] = {f.psi.tau - truth[j].pa_psi.tau, f.psi.theta - truth[j].pa_psi.theta,
                          f.psi.vartheta - truth[j].pa_psi.vartheta};
        continue;
      }
      pos.push_back(f.position);
      vas.push_back(&f);
    }
    const auto o = ospa_detail(pos, truth[j].va_positions, cutoff, order);
    ospa_sum += o.distance;
    card_sum += std::abs(static_cast<double>(pos.size()) - static_cast<double>(truth[j].va_positions.size()));
    if (j == 0)
      for (std::size_t i = 0; i < vas.size(); ++i) {
        if (o.match[i] < 0) continue;
        const std::size_t t = static_cast<std::size_t>(o.match[i]);
        const std::size_t idx = static_cast<std::size_t>(truth[j].va_index[t]);
        if (idx >= n_truth_features) continue;
        const Dispersion& tp = truth[j].va_psi[t];
        e.psi_err[idx] = {vas[i]->psi.tau - tp.tau, vas[i]->psi.theta - tp.theta, vas[i]->psi.vartheta - tp.vartheta};
      }
  }
  if (!truth.empty()) {
    e.ospa = ospa_sum / static_cast<double>(truth.size());
    e.card_err = card_sum / static_cast<double>(truth.size());
  }
  return e;
}

MetricSeries aggregate(const std::vector<RunLog>& runs) {
  MetricSeries s;
  s.runs_total = runs.size();
  std::size_t steps = 0;
  std::size_t nf = 0;
  for (const auto& r : runs) {
    if (!r.converged) continue;
    ++s.runs_converged;
    steps = std::max(steps, r.errors.size());
    for (const auto& e : r.errors) nf = std::max(nf, e.psi_err.size());
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.rmse_pos.assign(steps, nan);
  s.mospa.assign(steps, nan);
  s.card_err.assign(steps, nan);
  s.psi_rmse.assign(steps, std::vector<Dispersion>(nf, Dispersion{nan, nan, nan}));
  for (std::size_t t = 0; t < steps; ++t) {
    double se = 0.0, os = 0.0, ce = 0.0;
    std::size_t cnt = 0;
    std::vector<Dispersion> psi_se(nf);
    std::vector<std::size_t> psi_cnt(nf, 0);
    for (const auto& r : runs) {
      if (!r.converged || t >= r.errors.size()) continue;
      const StepErrors& e = r.errors[t];
      se += e.pos_err * e.pos_err;
      os += e.ospa;
      ce += e.card_err;
      ++cnt;
      for (std::size_t f = 0; f < e.psi_err.size(); ++f) {
        if (std::isnan(e.psi_err[f].tau)) continue;
        psi_se[f].tau += e.psi_err[f].tau * e.psi_err[f].tau;
        psi_se[f].theta += e.psi_err[f].theta * e.psi_err[f].theta;
        psi_se[f].vartheta += e.psi_err[f].vartheta * e.psi_err[f].vartheta;
        ++psi_cnt[f];
      }
    }
    if (cnt == 0) continue;
    const double dc = static_cast<double>(cnt);
    s.rmse_pos[t] = std::sqrt(se / dc);
    s.mospa[t] = os / dc;
    s.card_err[t] = ce / dc;
    for (std::size_t f = 0; f < nf; ++f) {
      if (psi_cnt[f] == 0) continue;
      const double k = static_cast<double>(psi_cnt[f]);
      s.psi_rmse[t][f] = {std::sqrt(psi_se[f].tau / k), std::sqrt(psi_se[f].theta / k),
                          std::sqrt(psi_se[f].vartheta / k)};
    }
  }
  return s;
}

}  // namespace mpslam
