#include <gtest/gtest.h>

#include <random>

#include "mpslam/geometry.hpp"

using namespace mpslam;

namespace {

Surface line_through(const Vec2& a, const Vec2& normal) {
  const Vec2 n = normal.normalized();
  return {a, a + Vec2(-n.y(), n.x()), n};
}

// Intersection of segment p -> r with the infinite line through a with normal n.
Vec2 intersect_oracle(const Vec2& p, const Vec2& r, const Vec2& a, const Vec2& n) {
  const double t = n.dot(a - p) / n.dot(r - p);
  return p + t * (r - p);
}

Surface wall(double ax, double ay, double bx, double by) {
  return Surface::from_endpoints({ax, ay}, {bx, by}, {0.0, 5.0});
}

std::vector<Surface> room() {
  return {wall(5, 1, 5, 9), wall(5, 9, -5, 9), wall(-5, 9, -5, 1), wall(-5, 1, 5, 1)};
}

}  // namespace

TEST(MirrorPoint, ReflectsAcrossHorizontalAxis) {
  const Vec2 va = mirror_point({0, 2}, line_through({0, 0}, {0, 1}));
  EXPECT_NEAR(va.x(), 0.0, 1e-15);
  EXPECT_NEAR(va.y(), -2.0, 1e-15);
}

TEST(MirrorPoint, ReflectsAcrossVerticalAxis) {
  const Vec2 va = mirror_point({1, 2}, line_through({0, 0}, {1, 0}));
  EXPECT_NEAR(va.x(), -1.0, 1e-15);
  EXPECT_NEAR(va.y(), 2.0, 1e-15);
}

TEST(MirrorPoint, ReflectsAcrossDiagonal) {
  const Vec2 va = mirror_point({3, 1}, line_through({0, 0}, {-1, 1}));
  EXPECT_NEAR(va.x(), 1.0, 1e-14);
  EXPECT_NEAR(va.y(), 3.0, 1e-14);
}

TEST(MirrorPoint, IsAnInvolution) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const Surface s = line_through({u(rng), u(rng)}, {u(rng), u(rng)});
    const Vec2 p(u(rng), u(rng));
    EXPECT_LT((mirror_point(mirror_point(p, s), s) - p).norm(), 1e-12);
  }
}

TEST(MirrorAnchor, RecordsParentSurface) {
  Anchor pa;
  pa.position = {0, 2};
  const Anchor va = mirror_anchor(pa, line_through({0, 0}, {0, 1}), 3);
  EXPECT_TRUE(va.is_virtual);
  ASSERT_TRUE(va.parent_surface.has_value());
  EXPECT_EQ(*va.parent_surface, 3u);
}

TEST(ReflectionPoint, SymmetricConfiguration) {
  const Vec2 q = reflection_point({4, 2}, {0, 2}, {0, -2}, {0, 1});
  EXPECT_NEAR(q.x(), 2.0, 1e-12);
  EXPECT_NEAR(q.y(), 0.0, 1e-12);
}

TEST(ReflectionPoint, VerticalIncidence) {
  const Vec2 q = reflection_point({0, 2}, {0, 2}, {0, -2}, {0, 1});
  EXPECT_NEAR(q.x(), 0.0, 1e-12);
  EXPECT_NEAR(q.y(), 0.0, 1e-12);
}

TEST(ReflectionPoint, MatchesLineIntersection) {
  const Vec2 agent(5, 1), pa(0, 3), va(0, -3);
  const Vec2 q = reflection_point(agent, pa, va, {0, 1});
  const Vec2 o = intersect_oracle(agent, va, {0, 0}, {0, 1});
  EXPECT_LT((q - o).norm(), 1e-12);
}

TEST(ReflectionPoint, ThrowsOnDegenerateGeometry) {
  // agent to VA direction parallel to the surface
  EXPECT_THROW(reflection_point({3, -2}, {0, 2}, {0, -2}, {0, 1}), GeometryError);
  // an agent on the surface is its own reflection point
  EXPECT_LT((reflection_point({3, 0}, {0, 2}, {0, -2}, {0, 1}) - Vec2(3, 0)).norm(), 1e-12);
}

TEST(ReflectionPoint, RandomConfigurationsAgreeWithIntersectionOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0), ang(-kPi, kPi), pos(0.2, 10.0);
  int checked = 0;
  while (checked < 1000) {
    const Vec2 a(u(rng), u(rng));
    const double phi = ang(rng);
    const Vec2 n(std::cos(phi), std::sin(phi));
    const Vec2 t(-n.y(), n.x());
    // PA and agent strictly on the normal side
    const Vec2 pa = a + pos(rng) * n + u(rng) * t;
    const Vec2 agent = a + pos(rng) * n + u(rng) * t;
    const Surface s = line_through(a, n);
    const Vec2 va = mirror_point(pa, s);
    const Vec2 q = reflection_point(agent, pa, va, (pa - va).normalized());
    const Vec2 o = intersect_oracle(agent, va, a, n);
    EXPECT_LT((q - o).norm(), 1e-9);
    // q lies on the surface line
    EXPECT_LT(std::abs(n.dot(q - a)), 1e-9);
    // specular: incoming and outgoing directions mirror each other about the normal
    const Vec2 in = (q - pa).normalized();
    const Vec2 out = in - 2.0 * in.dot(n) * n;
    const Vec2 to_agent = (agent - q).normalized();
    EXPECT_LT((out - to_agent).norm(), 1e-9);
    EXPECT_NEAR(std::abs(in.dot(n)), std::abs(to_agent.dot(n)), 1e-9);
    ++checked;
  }
}

TEST(TrueDelay, Examples) {
  EXPECT_DOUBLE_EQ(true_delay({3, 4}, {0, 0}), 5.0 / kSpeedOfLight);
  EXPECT_DOUBLE_EQ(true_delay({1, 1}, {1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(true_delay({1, 1}, {-2, 5}), 5.0 / kSpeedOfLight);
}

TEST(TrueAoa, Examples) {
  EXPECT_NEAR(true_aoa({{0, 0}, {1, 0}}, {1, 1}), kPi / 4, 1e-15);
  EXPECT_NEAR(true_aoa({{0, 0}, {0, 1}}, {0, 5}), 0.0, 1e-15);
  EXPECT_NEAR(true_aoa({{2, 0}, {1, 1}}, {2, 4}), kPi / 4, 1e-15);
}

TEST(TrueAoa, WrapsIntoPrincipalRange) {
  const double a = true_aoa({{0, 0}, {-1, -0.01}}, {-1, 0.01});
  EXPECT_GT(a, -kPi);
  EXPECT_LE(a, kPi);
}

TEST(TrueAod, PhysicalAnchor) {
  Anchor pa;
  EXPECT_NEAR(true_aod({1, 1}, pa, pa.position, {}), kPi / 4, 1e-15);
}

TEST(TrueAod, VirtualAnchorPointsAtReflectionPoint) {
  Anchor pa;
  pa.position = {0, 2};
  const std::vector<Surface> s{line_through({0, 0}, {0, 1})};
  const Anchor va = mirror_anchor(pa, s[0], 0);
  EXPECT_NEAR(true_aod({4, 2}, va, pa.position, s), -kPi / 4, 1e-12);
}

TEST(TrueAod, RoughWallMatchesRayTrace) {
  Anchor pa;
  pa.position = {0, 3};
  const std::vector<Surface> s{line_through({0, 0}, {0, 1})};
  const Anchor va = mirror_anchor(pa, s[0], 0);
  const Vec2 agent(5, 1);
  // ray trace: the path agent -> va crosses y = 0 at x = 5 * 3 / 4
  const Vec2 q(5.0 * 3.0 / 4.0, 0.0);
  const double expected = std::atan2(q.y() - 3.0, q.x());
  EXPECT_NEAR(true_aod(agent, va, pa.position, s), expected, 1e-12);
}

TEST(PvaAod, AgreesWithSurfaceAod) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> x(-4.5, 4.5), y(1.5, 8.5);
  const auto walls = room();
  Anchor pa;
  pa.position = {0.1, 6.0};
  for (int i = 0; i < 200; ++i) {
    const Vec2 agent(x(rng), y(rng));
    for (std::size_t l = 0; l < walls.size(); ++l) {
      const Anchor va = mirror_anchor(pa, walls[l], l);
      const auto aod = pva_aod(agent, pa.position, va.position);
      ASSERT_TRUE(aod.has_value());
      EXPECT_NEAR(*aod, true_aod(agent, va, pa.position, walls), 1e-9);
    }
  }
}

TEST(PvaAod, DegenerateWhenVaCoincidesWithPa) { EXPECT_FALSE(pva_aod({1, 1}, {0, 0}, {0, 0}).has_value()); }

TEST(Visibility, ConvexRoomShowsAllSingleBounceVas) {
  const auto walls = room();
  Anchor pa;
  pa.position = {0.1, 6.0};
  const Vec2 agent(1.0, 4.0);
  EXPECT_TRUE(is_visible(agent, pa, pa.position, walls));
  for (std::size_t l = 0; l < walls.size(); ++l)
    EXPECT_TRUE(is_visible(agent, mirror_anchor(pa, walls[l], l), pa.position, walls)) << "wall " << l;
}

TEST(Visibility, ReflectionBeyondSegmentEndIsInvisible) {
  // short mirror segment on y = 0 from x = 0 to 1
  const Surface s = Surface::from_endpoints({0, 0}, {1, 0}, {0, 1});
  Anchor pa;
  pa.position = {0, 2};
  const Anchor va = mirror_anchor(pa, s, 0);
  EXPECT_TRUE(is_visible({1, 2}, va, pa.position, {s}));   // q = (0.5, 0)
  EXPECT_FALSE(is_visible({8, 2}, va, pa.position, {s}));  // q = (4, 0)
}

TEST(Visibility, InterposedWallBlocksPa) {
  const Surface blocker = Surface::from_endpoints({-1, 1}, {1, 1}, {0, 0});
  Anchor pa;
  pa.position = {0, 2};
  EXPECT_FALSE(is_visible({0, 0}, pa, pa.position, {blocker}));
  EXPECT_TRUE(is_visible({3, 0}, pa, pa.position, {blocker}));
  EXPECT_TRUE(segments_intersect({0, 0}, {0, 2}, {-1, 1}, {1, 1}));
  EXPECT_FALSE(segments_intersect({3, 0}, {0, 2}, {-1, 1}, {1, 1}));
}

TEST(Heading, FollowsVelocity) {
  EXPECT_NEAR(heading({0, 1}), kPi / 2, 1e-15);
  EXPECT_NEAR(heading({-1, 0}), kPi, 1e-15);
}

TEST(Surface, FromEndpointsOrientsNormalInside) {
  const Surface s = Surface::from_endpoints({5, 1}, {5, 9}, {0, 5});
  EXPECT_NEAR(s.normal.x(), -1.0, 1e-15);
  EXPECT_THROW(Surface::from_endpoints({1, 1}, {1, 1}, {0, 0}), GeometryError);
}
