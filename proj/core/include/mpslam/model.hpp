#pragma once

#include <cmath>
#include <stdexcept>

#include "mpslam/types.hpp"

namespace mpslam {

/// Radio and measurement-model constants shared by the simulator and the filter.
struct ModelConstants {
  double delta_t = 1.0;            ///< s
  double snr_1m_db = 40.0;         ///< LOS amplitude at 1 m, dB
  double bandwidth = 500e6;        ///< Hz
  double carrier = 6e9;            ///< Hz
  double reflection_loss_db = 3.0; ///< per bounce
  double beta_sub = 0.9;           ///< sub-component amplitude ratio
  double mu_fp = 5.0;
  double p_d = 0.98;
  double n_ny_tau = 4.0;
  double n_ny_theta = 2.0;
  double n_ny_vartheta = 2.0;
  double gamma_det = 2.0;
  double tau_max = 100e-9;         ///< s
  double beta_bw = 0.0;            ///< rms bandwidth in Hz; 0 selects B / sqrt(12)
  double k_theta = deg2rad(1.0) * 100.0;
  double k_vartheta = deg2rad(1.0) * 100.0;

  double rms_bandwidth() const { return beta_bw > 0.0 ? beta_bw : bandwidth / std::sqrt(12.0); }

  /// Throws std::invalid_argument naming the first invalid field.
  void validate() const;
};

}  // namespace mpslam
