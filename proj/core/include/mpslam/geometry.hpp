#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "mpslam/types.hpp"

namespace mpslam {

/// Raised when the reflection geometry has no defined reflection point.
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Finite reflective segment with a unit normal.
struct Surface {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  Vec2 normal = Vec2::UnitY();

  /// Builds a segment whose normal points towards `inside`.
  static Surface from_endpoints(const Vec2& a, const Vec2& b, const Vec2& inside);
};

struct Anchor {
  Vec2 position = Vec2::Zero();
  bool is_virtual = false;
  std::optional<std::size_t> parent_surface;  ///< index into the surface list
};

struct AgentPose {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
};

/// Orientation of the array, rigidly coupled to the direction of motion.
double heading(const Vec2& velocity);

/// Householder reflection of a point across the infinite line through s.
Vec2 mirror_point(const Vec2& p, const Surface& s);

Anchor mirror_anchor(const Anchor& pa, const Surface& s, std::size_t surface_index);

/// Point where the path agent -> va crosses the mirror line with normal u.
/// Throws GeometryError when |2 (agent - va) . u| < 1e-12.
Vec2 reflection_point(const Vec2& agent, const Vec2& pa, const Vec2& va, const Vec2& u);

double true_delay(const Vec2& p, const Vec2& feature);

/// Angle of arrival relative to the heading. Requires nonzero velocity.
double true_aoa(const AgentPose& agent, const Vec2& feature);

/// Angle of departure at the physical anchor `pa`.
/// For a virtual anchor the departure direction points to the reflection point.
double true_aod(const Vec2& agent, const Anchor& feature, const Vec2& pa,
                const std::vector<Surface>& surfaces);

/// AoD for a potential VA with unknown surface: the mirror line is the
/// perpendicular bisector of pa and va. Returns nullopt on degenerate geometry.
std::optional<double> pva_aod(const Vec2& agent, const Vec2& pa, const Vec2& va);

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2);

/// Visibility of a feature of physical anchor `pa` from the agent.
bool is_visible(const Vec2& agent, const Anchor& feature, const Vec2& pa,
                const std::vector<Surface>& surfaces);

}  // namespace mpslam
