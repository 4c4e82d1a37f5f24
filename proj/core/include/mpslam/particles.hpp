#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "mpslam/rng.hpp"

namespace mpslam {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

double log_sum_exp(std::span<const double> v);

/// Subtracts log_sum_exp in place and returns it. All -inf input is left as is.
double normalize_log_weights(std::vector<double>& log_w);

/// 1 / sum w^2 for normalized log weights.
double effective_sample_size(std::span<const double> log_w);

/// Systematic resampling; returns ancestor indices of length n.
std::vector<std::size_t> systematic_resample(std::span<const double> log_w, std::size_t n, Rng& rng);

/// Leave-one-out sums of log terms: out[l] = sum_{k != l} terms[k], exact for -inf entries.
std::vector<double> leave_one_out(std::span<const double> log_terms);

}  // namespace mpslam
