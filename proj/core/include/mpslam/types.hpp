#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>

namespace mpslam {

using Vec2 = Eigen::Vector2d;

/// Speed of light in m/s.
inline constexpr double kSpeedOfLight = 299792458.0;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  if (a > -kPi && a <= kPi) return a;
  double w = std::remainder(a, kTwoPi);  // [-pi, pi]
  if (w <= -kPi) w += kTwoPi;
  return w;
}

/// Dispersion triple. Delay width in seconds, angular widths in radians.
struct Dispersion {
  double tau = 0.0;
  double theta = 0.0;
  double vartheta = 0.0;

  bool operator==(const Dispersion&) const = default;
};

/// Dispersion widths used for the delay/angle floor (see transitions).
inline constexpr Dispersion kDispersionFloor{1e-18, 1e-6, 1e-6};

inline Dispersion floored(const Dispersion& psi) {
  return {std::max(psi.tau, kDispersionFloor.tau), std::max(psi.theta, kDispersionFloor.theta),
          std::max(psi.vartheta, kDispersionFloor.vartheta)};
}

}  // namespace mpslam
