#include <gtest/gtest.h>

#include <sstream>

#include "mpslam/experiment.hpp"
#include "mpslam/scenario_io.hpp"

using namespace mpslam;

namespace {

Scenario round_trip(const Scenario& s) {
  std::stringstream ss;
  write_scenario(ss, s);
  return parse_scenario(ss);
}

const char* kMinimal = R"(
[constants]
mu_fp = 3
birth_region_m = 0 0 10
[pa]
0 0 0 0 0
[trajectory]
1 1 0 0
2 1 1 0
)";

}  // namespace

TEST(ScenarioIo, PaperScenarioRoundTrip) {
  const Scenario s = make_paper_scenario();
  const Scenario r = round_trip(s);
  ASSERT_EQ(r.pas.size(), 1u);
  ASSERT_EQ(r.surfaces.size(), 4u);
  ASSERT_EQ(r.trajectory.size(), 300u);
  EXPECT_LT((r.pas[0].anchor.position - s.pas[0].anchor.position).norm(), 1e-12);
  for (std::size_t l = 0; l < 4; ++l) {
    EXPECT_LT((r.surfaces[l].surface.a - s.surfaces[l].surface.a).norm(), 1e-12);
    EXPECT_LT((r.surfaces[l].surface.normal - s.surfaces[l].surface.normal).norm(), 1e-12);
    EXPECT_NEAR(r.surfaces[l].psi.tau, s.surfaces[l].psi.tau, 1e-20);
    EXPECT_NEAR(r.surfaces[l].psi.theta, s.surfaces[l].psi.theta, 1e-12);
    EXPECT_NEAR(r.surfaces[l].psi.vartheta, s.surfaces[l].psi.vartheta, 1e-12);
  }
  for (std::size_t n = 0; n < 300; ++n) {
    EXPECT_LT((r.trajectory[n].position - s.trajectory[n].position).norm(), 1e-12);
    EXPECT_LT((r.trajectory[n].velocity - s.trajectory[n].velocity).norm(), 1e-12);
  }
  EXPECT_EQ(r.constants.mu_fp, s.constants.mu_fp);
  EXPECT_EQ(r.constants.p_d, s.constants.p_d);
  EXPECT_NEAR(r.constants.k_theta, s.constants.k_theta, 1e-15);
  EXPECT_EQ(r.birth_region.half_width, s.birth_region.half_width);
}

TEST(ScenarioIo, PaperDispersions) {
  const Scenario s = make_paper_scenario();
  EXPECT_NEAR(s.surfaces[0].psi.tau * kSpeedOfLight, 0.0, 1e-12);
  EXPECT_NEAR(s.surfaces[1].psi.tau * kSpeedOfLight, 0.2, 1e-12);
  EXPECT_NEAR(rad2deg(s.surfaces[1].psi.theta), 10.0, 1e-12);
  EXPECT_NEAR(rad2deg(s.surfaces[1].psi.vartheta), 10.0, 1e-12);
  EXPECT_NEAR(s.surfaces[2].psi.tau * kSpeedOfLight, 0.1, 1e-12);
  EXPECT_NEAR(rad2deg(s.surfaces[2].psi.theta), 5.0, 1e-12);
  EXPECT_NEAR(s.surfaces[3].psi.tau, 0.0, 1e-20);
  EXPECT_EQ(s.constants.mu_fp, 5.0);
  EXPECT_EQ(s.constants.p_d, 0.98);
}

TEST(ScenarioIo, MinimalFileWithoutSurfaces) {
  std::istringstream in(kMinimal);
  const Scenario s = parse_scenario(in);
  EXPECT_TRUE(s.surfaces.empty());
  EXPECT_EQ(s.trajectory.size(), 2u);
  EXPECT_EQ(s.constants.mu_fp, 3.0);
  EXPECT_EQ(s.birth_region.half_width, 10.0);
  EXPECT_EQ(round_trip(s).trajectory.size(), 2u);
}

TEST(ScenarioIo, MalformedRowNamesField) {
  std::istringstream in("[pa]\n0 zero 0 0 0\n");
  try {
    parse_scenario(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.field(), "y_m");
  }
}

TEST(ScenarioIo, MissingFieldNamesField) {
  std::istringstream in("[trajectory]\n1 2 3\n");
  try {
    parse_scenario(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "vy_mps");
  }
}

TEST(ScenarioIo, NegativeDispersionRejected) {
  std::istringstream in("[surface]\n0 0 1 0 -0.1 0 0\n");
  try {
    parse_scenario(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "psi_d_m");
  }
}

TEST(ScenarioIo, UnknownSectionAndConstant) {
  std::istringstream a("[walls]\n");
  EXPECT_THROW(parse_scenario(a), ParseError);
  std::istringstream b("[constants]\nfoo = 1\n");
  EXPECT_THROW(parse_scenario(b), ParseError);
}

TEST(ScenarioIo, MissingFileThrows) {
  EXPECT_THROW(load_scenario("/nonexistent/path.scn"), std::runtime_error);
}

TEST(ScenarioIo, FramesCsvHeaderAndRows) {
  const Scenario s = make_paper_scenario();
  const auto frames = simulate_frames(s, 1, 0, 3);
  std::ostringstream out;
  write_frames(out, frames);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,pa,z_tau_s,z_theta_rad,z_vartheta_rad,z_u,origin_label");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  std::size_t expected = 0;
  for (const auto& f : frames) expected += f.per_pa[0].size();
  EXPECT_EQ(rows, expected);
}
