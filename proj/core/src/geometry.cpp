#include "mpslam/geometry.hpp"

#include <cmath>

namespace mpslam {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// True if open segment p1-p2 crosses segment q1-q2 (endpoints of p excluded).
bool crosses_open(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const Vec2 r = p2 - p1;
  const Vec2 s = q2 - q1;
  const double denom = cross(r, s);
  if (std::abs(denom) < 1e-15) return false;  // parallel; grazing contact ignored
  const Vec2 d = q1 - p1;
  const double t = cross(d, s) / denom;
  const double u = cross(d, r) / denom;
  constexpr double eps = 1e-9;
  return t > eps && t < 1.0 - eps && u >= -eps && u <= 1.0 + eps;
}

}  // namespace

Surface Surface::from_endpoints(const Vec2& a, const Vec2& b, const Vec2& inside) {
  const Vec2 d = b - a;
  const double len = d.norm();
  if (len <= 0.0) throw GeometryError("surface endpoints coincide");
  Vec2 n(-d.y() / len, d.x() / len);
  if (n.dot(inside - a) < 0.0) n = -n;
  return {a, b, n};
}

double heading(const Vec2& velocity) {
  if (velocity.squaredNorm() <= 0.0) throw GeometryError("heading undefined for zero velocity");
  return std::atan2(velocity.y(), velocity.x());
}

Vec2 mirror_point(const Vec2& p, const Surface& s) {
  return p - 2.0 * (p - s.a).dot(s.normal) * s.normal;
}

Anchor mirror_anchor(const Anchor& pa, const Surface& s, std::size_t surface_index) {
  return {mirror_point(pa.position, s), true, surface_index};
}

Vec2 reflection_point(const Vec2& agent, const Vec2& pa, const Vec2& va, const Vec2& u) {
  const Vec2 dir = agent - va;
  const double denom = 2.0 * dir.dot(u);
  if (std::abs(denom) < 1e-12) throw GeometryError("agent lies in the surface plane");
  return va + ((pa - va).dot(u) / denom) * dir;
}

double true_delay(const Vec2& p, const Vec2& feature) { return (p - feature).norm() / kSpeedOfLight; }

double true_aoa(const AgentPose& agent, const Vec2& feature) {
  const Vec2 d = feature - agent.position;
  return wrap_angle(std::atan2(d.y(), d.x()) - heading(agent.velocity));
}

double true_aod(const Vec2& agent, const Anchor& feature, const Vec2& pa,
                const std::vector<Surface>& surfaces) {
  if (!feature.is_virtual) {
    const Vec2 d = agent - pa;
    return wrap_angle(std::atan2(d.y(), d.x()));
  }
  if (!feature.parent_surface || *feature.parent_surface >= surfaces.size())
    throw GeometryError("virtual anchor without parent surface");
  const Vec2 q = reflection_point(agent, pa, feature.position, surfaces[*feature.parent_surface].normal);
  const Vec2 d = q - pa;
  return wrap_angle(std::atan2(d.y(), d.x()));
}

std::optional<double> pva_aod(const Vec2& agent, const Vec2& pa, const Vec2& va) {
  const Vec2 w = pa - va;
  const double dist = w.norm();
  if (dist <= 0.0) return std::nullopt;
  const Vec2 u = w / dist;
  const Vec2 dir = agent - va;
  const double denom = 2.0 * dir.dot(u);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const Vec2 q = va + (dist / denom) * dir;
  return wrap_angle(std::atan2(q.y() - pa.y(), q.x() - pa.x()));
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  return crosses_open(p1, p2, q1, q2);
}

bool is_visible(const Vec2& agent, const Anchor& feature, const Vec2& pa,
                const std::vector<Surface>& surfaces) {
  if (!feature.is_virtual) {
    for (const auto& s : surfaces)
      if (crosses_open(agent, pa, s.a, s.b)) return false;
    return true;
  }
  if (!feature.parent_surface || *feature.parent_surface >= surfaces.size()) return false;
  const std::size_t own = *feature.parent_surface;
  const Surface& wall = surfaces[own];
  // agent and anchor must sit on the reflecting side
  if ((agent - wall.a).dot(wall.normal) <= 0.0 || (pa - wall.a).dot(wall.normal) <= 0.0) return false;
  Vec2 q;
  try {
    q = reflection_point(agent, pa, feature.position, wall.normal);
  } catch (const GeometryError&) {
    return false;
  }
  const Vec2 seg = wall.b - wall.a;
  const double t = (q - wall.a).dot(seg) / seg.squaredNorm();
  if (t < 0.0 || t > 1.0) return false;
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    if (i == own) continue;
    if (crosses_open(agent, q, surfaces[i].a, surfaces[i].b)) return false;
    if (crosses_open(q, pa, surfaces[i].a, surfaces[i].b)) return false;
  }
  return true;
}

}  // namespace mpslam
