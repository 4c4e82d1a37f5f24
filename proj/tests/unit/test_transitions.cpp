#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include "mpslam/transitions.hpp"

using namespace mpslam;

TEST(AgentTransition, NoiselessPropagation) {
  Rng rng(1);
  AgentState x;
  x << 0, 0, 1, 2;
  const AgentState y = agent_transition_sample(x, 1.0, 0.0, rng);
  EXPECT_EQ(y, (AgentState() << 1, 2, 1, 2).finished());
  x << 1, 1, 2, 0;
  const AgentState z = agent_transition_sample(x, 0.5, 0.0, rng);
  EXPECT_EQ(z, (AgentState() << 2, 1, 2, 0).finished());
}

TEST(AgentTransition, MatricesMatchSampler) {
  const auto a = cv_transition_matrix(0.5);
  AgentState x;
  x << 1, 1, 2, 0;
  Rng rng(1);
  EXPECT_LT((a * x - agent_transition_sample(x, 0.5, 0.0, rng)).norm(), 1e-15);
}

TEST(AgentTransition, EmpiricalCovarianceMatchesAnalytic) {
  const double dt = 1.0, sw = 0.05;
  const auto b = cv_noise_matrix(dt);
  const Eigen::Matrix4d expected = b * (sw * sw) * b.transpose();
  Rng rng(7);
  const AgentState x0 = AgentState::Zero();
  Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const AgentState d = agent_transition_sample(x0, dt, sw, rng);
    acc += d * d.transpose();
  }
  acc /= n;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      if (expected(r, c) == 0.0)
        EXPECT_NEAR(acc(r, c), 0.0, 0.02 * expected.maxCoeff());
      else
        EXPECT_NEAR(acc(r, c) / expected(r, c), 1.0, 0.02) << r << "," << c;
    }
}

TEST(DispersionTransition, GammaMean) {
  Rng rng(3);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += dispersion_transition_sample(0.2, 1e-6, 1e3, rng);
  EXPECT_NEAR(sum / n, 0.2, 3.0 * 0.2 / std::sqrt(1e3 * n));
}

TEST(DispersionTransition, GammaVariance) {
  Rng rng(4);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = dispersion_transition_sample(1.0, 1e-6, 1e3, rng);
    s += v;
    s2 += v * v;
  }
  const double var = s2 / n - (s / n) * (s / n);
  EXPECT_NEAR(var / 1e-3, 1.0, 0.05);
}

TEST(DispersionTransition, ConcentratesForLargeShape) {
  Rng rng(5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) worst = std::max(worst, std::abs(dispersion_transition_sample(0.3, 1e-6, 1e12, rng) - 0.3));
  EXPECT_LT(worst, 1e-5);
}

TEST(DispersionTransition, RespectsFloor) {
  Rng rng(6);
  TransitionParams p;
  for (int i = 0; i < 1000; ++i) {
    const Dispersion d = dispersion_transition_sample(Dispersion{0, 0, 0}, p, rng);
    EXPECT_GE(d.tau, kDispersionFloor.tau);
    EXPECT_GE(d.theta, kDispersionFloor.theta);
    EXPECT_GE(d.vartheta, kDispersionFloor.vartheta);
  }
}

TEST(Survival, BranchFactors) {
  const auto dead = survival_weight(false, 0.999);
  EXPECT_EQ(dead.exist, 0.0);
  EXPECT_EQ(dead.vanish, 1.0);
  const auto alive = survival_weight(true, 0.999);
  EXPECT_DOUBLE_EQ(alive.exist, 0.999);
  EXPECT_NEAR(alive.vanish, 0.001, 1e-15);
  EXPECT_EQ(survival_weight(true, 1.0).exist, 1.0);
}

TEST(BirthPrior, SamplesInsideRegion) {
  TransitionParams p;
  p.birth_region = Region{{0.0, 0.0}, 15.0};
  Rng rng(8);
  for (int i = 0; i < 10000; ++i) {
    const auto s = birth_prior_sample(p, rng);
    EXPECT_TRUE(p.birth_region.contains(s.position));
    EXPECT_LE(s.psi.tau, p.psi_max.tau);
    EXPECT_LE(s.psi.theta, p.psi_max.theta);
  }
}

TEST(BirthPrior, DegenerateRegionIsAPoint) {
  TransitionParams p;
  p.birth_region = Region{{2.0, -1.0}, 0.0};
  Rng rng(9);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(birth_prior_sample(p, rng).position, Vec2(2.0, -1.0));
}

TEST(BirthPrior, PositionsAreUniform) {
  TransitionParams p;
  p.birth_region = Region{{0.0, 0.0}, 15.0};
  Rng rng(10);
  constexpr int kBins = 10, kSamples = 100000;
  std::vector<int> hist(kBins * kBins, 0);
  for (int i = 0; i < kSamples; ++i) {
    const Vec2 x = birth_prior_sample(p, rng).position;
    const int bx = std::min(kBins - 1, static_cast<int>((x.x() + 15.0) / 30.0 * kBins));
    const int by = std::min(kBins - 1, static_cast<int>((x.y() + 15.0) / 30.0 * kBins));
    ++hist[by * kBins + bx];
  }
  const double e = static_cast<double>(kSamples) / hist.size();
  double chi2 = 0.0;
  for (int h : hist) chi2 += (h - e) * (h - e) / e;
  const boost::math::chi_squared dist(hist.size() - 1);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01);
}

TEST(Regularize, ZeroNoiseIsIdentity) {
  Rng rng(11);
  EXPECT_EQ(regularize_position({1.0, 2.0}, 0.0, rng), Vec2(1.0, 2.0));
}

TEST(Regularize, EmpiricalStd) {
  Rng rng(12);
  const int n = 1000000;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) s2 += (regularize_position({0.0, 0.0}, 1e-3, rng)).squaredNorm();
  EXPECT_NEAR(std::sqrt(s2 / (2.0 * n)) / 1e-3, 1.0, 0.02);
}

TEST(TransitionParams, ValidateNamesField) {
  TransitionParams p;
  p.p_s = 1.5;
  try {
    p.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("p_s"), std::string::npos);
  }
}
