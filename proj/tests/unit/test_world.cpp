#include <gtest/gtest.h>

#include "mpslam/experiment.hpp"
#include "mpslam/world.hpp"

using namespace mpslam;

namespace {

// Mean and standard error of a per-frame count.
struct CountStats {
  double mean = 0.0;
  double se = 0.0;
};

template <class F>
CountStats frame_counts(const Scenario& s, std::size_t frames, std::uint64_t seed, F&& count) {
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < frames; ++i) {
    Rng rng = make_stream(seed, StreamTag::kFrame, {i});
    const auto f = synthesize_frame(s, i % s.trajectory.size(), rng);
    const double c = count(f);
    sum += c;
    sum2 += c * c;
  }
  const double n = static_cast<double>(frames);
  const double mean = sum / n;
  return {mean, std::sqrt((sum2 / n - mean * mean) / n)};
}

}  // namespace

TEST(TrueAmplitude, Examples) {
  const ModelConstants c;
  EXPECT_NEAR(true_amplitude(1.0, 0, c), 100.0, 1e-12);
  EXPECT_NEAR(true_amplitude(2.0, 0, c), 50.0, 1e-12);
  EXPECT_NEAR(true_amplitude(1.0, 1, c), 100.0 * std::pow(10.0, -3.0 / 20.0), 1e-12);
  EXPECT_NEAR(true_amplitude(1.0, 1, c), 70.79, 0.01);
  EXPECT_THROW(true_amplitude(0.0, 0, c), std::domain_error);
}

TEST(TruthFeatures, LosFirstThenOnePerSurface) {
  const Scenario s = make_paper_scenario();
  const auto t = truth_features(s, 0);
  ASSERT_EQ(t.size(), 5u);
  EXPECT_EQ(t[0].index, 0);
  EXPECT_FALSE(t[0].anchor.is_virtual);
  for (std::size_t l = 1; l < t.size(); ++l) {
    EXPECT_EQ(t[l].index, static_cast<int>(l));
    EXPECT_EQ(t[l].bounces, 1);
    EXPECT_TRUE(t[l].anchor.is_virtual);
  }
  EXPECT_LT((t[2].anchor.position - Vec2(0.1, 12.0)).norm(), 1e-12);
}

TEST(SynthesizeFrame, PointFeaturesWithoutClutterGiveOneMeasurementEach) {
  Scenario s = make_paper_scenario();
  for (auto& w : s.surfaces) w.psi = {0, 0, 0};
  s.constants.p_d = 1.0;
  s.constants.mu_fp = 0.0;
  for (std::size_t n = 0; n < 50; ++n) {
    Rng rng = make_stream(1, StreamTag::kFrame, {n});
    const auto f = synthesize_frame(s, n, rng);
    const auto vis = visible_features(s, 0, n);
    ASSERT_EQ(f.per_pa[0].size(), vis.size());
    std::vector<int> seen;
    for (const auto& o : f.origins[0]) {
      EXPECT_FALSE(o.sub);
      seen.push_back(o.feature);
    }
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < vis.size(); ++i) EXPECT_EQ(seen[i], vis[i].index);
  }
}

TEST(SynthesizeFrame, RoughWallCountMatchesExpectedMeasurements) {
  const Scenario s = make_paper_scenario();
  const Dispersion psi = s.surfaces[1].psi;
  const auto st = frame_counts(s, 10000, 3, [](const MeasurementFrame& f) {
    return static_cast<double>(std::count_if(f.origins[0].begin(), f.origins[0].end(),
                                             [](const OriginLabel& o) { return o.feature == 2; }));
  });
  const double mu = mean_measurements(psi, s.constants);
  EXPECT_NEAR(st.mean, mu, 3.0 * st.se) << "mean " << st.mean << " expected " << mu;
}

TEST(SynthesizeFrame, ClutterOnlyFrameSize) {
  Scenario s;
  PaSpec pa;
  pa.anchor.position = {0.0, 2.0};
  s.pas.push_back(pa);
  // wall between agent and PA hides the LOS; its VA lies on the far side as well
  s.surfaces.push_back({Surface::from_endpoints({-50, 1}, {50, 1}, {0, 2}), {0, 0, 0}});
  s.trajectory = {{{0.0, 0.0}, {1.0, 0.0}}, {{1.0, 0.0}, {1.0, 0.0}}};
  ASSERT_TRUE(visible_features(s, 0, 0).empty());
  const auto st = frame_counts(s, 10000, 4, [](const MeasurementFrame& f) { return double(f.per_pa[0].size()); });
  EXPECT_NEAR(st.mean, 5.0, 3.0 * st.se);
}

TEST(SynthesizeFrame, MeasurementsWithinDomain) {
  const Scenario s = make_paper_scenario();
  for (std::size_t n = 0; n < 100; ++n) {
    Rng rng = make_stream(2, StreamTag::kFrame, {n});
    const auto f = synthesize_frame(s, n, rng);
    ASSERT_EQ(f.per_pa[0].size(), f.origins[0].size());
    for (const auto& z : f.per_pa[0]) {
      EXPECT_GE(z.tau, 0.0);
      EXPECT_LE(z.tau, s.constants.tau_max);
      EXPECT_GT(z.theta, -kPi);
      EXPECT_LE(z.theta, kPi);
      EXPECT_GE(z.u, s.constants.gamma_det);
    }
  }
}

TEST(SynthesizeFrame, DeterministicForFixedStream) {
  const Scenario s = make_paper_scenario();
  Rng a = make_stream(9, StreamTag::kFrame, {0, 4});
  Rng b = make_stream(9, StreamTag::kFrame, {0, 4});
  const auto fa = synthesize_frame(s, 4, a);
  const auto fb = synthesize_frame(s, 4, b);
  EXPECT_EQ(fa.per_pa, fb.per_pa);
  EXPECT_EQ(fa.origins, fb.origins);
}

TEST(OriginLabel, Strings) {
  EXPECT_EQ(OriginLabel{}.str(), "fp");
  EXPECT_EQ((OriginLabel{0, false}.str()), "los:main");
  EXPECT_EQ((OriginLabel{2, true}.str()), "va2:sub");
}

TEST(Scenario, ValidateRejectsBadInput) {
  Scenario s = make_paper_scenario();
  EXPECT_NO_THROW(s.validate());
  Scenario t = s;
  t.pas.clear();
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t = s;
  t.surfaces[0].psi.tau = -1.0;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t = s;
  t.trajectory.resize(1);
  EXPECT_THROW(t.validate(), std::invalid_argument);
}

TEST(Scenario, LosOnlyIsValid) {
  Scenario s = make_paper_scenario();
  s.surfaces.clear();
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(visible_features(s, 0, 0).size(), 1u);
}
