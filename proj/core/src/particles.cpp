#include "mpslam/particles.hpp"

#include <algorithm>

namespace mpslam {

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

double normalize_log_weights(std::vector<double>& log_w) {
  const double z = log_sum_exp(log_w);
  if (z == kNegInf || !std::isfinite(z)) return z;
  for (double& x : log_w) x -= z;
  return z;
}

double effective_sample_size(std::span<const double> log_w) {
  double acc = 0.0;
  for (double x : log_w) {
    const double w = std::exp(x);
    acc += w * w;
  }
  return acc > 0.0 ? 1.0 / acc : 0.0;
}

std::vector<std::size_t> systematic_resample(std::span<const double> log_w, std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  if (log_w.empty() || n == 0) return idx;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double step = 1.0 / static_cast<double>(n);
  double pos = u(rng) * step;
  double cum = std::exp(log_w[0]);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (cum < pos && j + 1 < log_w.size()) {
      ++j;
      cum += std::exp(log_w[j]);
    }
    idx[i] = j;
    pos += step;
  }
  return idx;
}

std::vector<double> leave_one_out(std::span<const double> log_terms) {
  std::size_t n_inf = 0;
  std::size_t inf_at = 0;
  double finite_sum = 0.0;
  for (std::size_t k = 0; k < log_terms.size(); ++k) {
    if (log_terms[k] == kNegInf) {
      ++n_inf;
      inf_at = k;
    } else {
      finite_sum += log_terms[k];
    }
  }
  std::vector<double> out(log_terms.size(), kNegInf);
  for (std::size_t l = 0; l < log_terms.size(); ++l) {
    if (n_inf == 0)
      out[l] = finite_sum - log_terms[l];
    else if (n_inf == 1 && l == inf_at)
      out[l] = finite_sum;
  }
  return out;
}

}  // namespace mpslam
