// Copyright 2026 The UDC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "udc/aleatoric.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "udc/env.h"
#include "udc/error.h"
#include "udc/stats.h"

namespace udc {
namespace {

std::vector<Eigen::VectorXd> GaussianSample(int n, int dim, uint64_t seed,
                                            const Eigen::MatrixXd& mix) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd z(dim);
    for (int k = 0; k < dim; ++k) z(k) = normal(rng);
    out.push_back(mix * z);
  }
  return out;
}

std::vector<int> AllDims(int dim) {
  std::vector<int> m(dim);
  for (int i = 0; i < dim; ++i) m[i] = i;
  return m;
}

TEST(FitAleatoricTest, ThreePointBruteForce) {
  const std::vector<Eigen::VectorXd> pts = {Eigen::Vector2d(0, 0),
                                            Eigen::Vector2d(1, 0),
                                            Eigen::Vector2d(0, 1)};
  const AleatoricModel m = FitAleatoric(pts, {0, 1});
  EXPECT_NEAR(m.mu(0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.mu(1), 1.0 / 3.0, 1e-15);
  // Two-loop outer-product sum with a 1/N divisor.
  const double mu[2] = {1.0 / 3.0, 1.0 / 3.0};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      double acc = 0.0;
      for (const auto& p : pts) acc += (p(r) - mu[r]) * (p(c) - mu[c]);
      const double expected = acc / 3.0 + (r == c ? 1e-6 : 0.0);
      EXPECT_NEAR(m.sigma(r, c), expected, 1e-15);
    }
  }
  EXPECT_NEAR(m.sigma(0, 0), 2.0 / 9.0 + 1e-6, 1e-15);
  EXPECT_NEAR(m.sigma(0, 1), -1.0 / 9.0, 1e-15);
}

TEST(FitAleatoricTest, IdenticalPointsGiveRidge) {
  const std::vector<Eigen::VectorXd> pts(10, Eigen::Vector3d(1, -2, 0.5));
  const AleatoricModel m = FitAleatoric(pts, {0, 1, 2});
  EXPECT_TRUE(m.sigma.isApprox(Eigen::Matrix3d::Identity() * 1e-6, 1e-12));
  EXPECT_EQ(AleaScore(m, pts[0]), 0.0);
}

TEST(FitAleatoricTest, StandardNormalMoments) {
  const auto pts = GaussianSample(10000, 4, 1, Eigen::MatrixXd::Identity(4, 4));
  const AleatoricModel m = FitAleatoric(pts, AllDims(4));
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(m.mu(i), 0.0, 0.05);
    EXPECT_NEAR(m.sigma(i, i), 1.0, 0.1);
  }
}

TEST(FitAleatoricTest, ModelInvariants) {
  Eigen::MatrixXd mix(5, 5);
  mix << 1, 0.5, 0, 0, 0, 0, 2, 0.3, 0, 0, 0, 0, 0.1, 0, 0, 0.4, 0, 0, 1, 0.9,
      0, 0, 0, 0, 0.01;
  const auto pts = GaussianSample(2000, 5, 2, mix);
  const AleatoricModel m = FitAleatoric(pts, AllDims(5));
  EXPECT_TRUE(m.sigma.isApprox(m.sigma.transpose(), 0.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.sigma);
  EXPECT_GE(eig.eigenvalues().minCoeff(), 1e-6 * (1 - 1e-9));
  EXPECT_LT((m.sigma_inv * m.sigma - Eigen::MatrixXd::Identity(5, 5))
                .cwiseAbs()
                .maxCoeff(),
            1e-8);
  EXPECT_TRUE(std::is_sorted(m.calib_scores.begin(), m.calib_scores.end()));
  EXPECT_EQ(m.tau_alea, NearestRankPercentile(m.calib_scores, 95.0) * m.m_a);
}

TEST(FitAleatoricTest, MultiplierScalesThreshold) {
  const auto pts = GaussianSample(500, 3, 3, Eigen::MatrixXd::Identity(3, 3));
  AleatoricOptions opt;
  opt.m_a = 1.5;
  const AleatoricModel a = FitAleatoric(pts, AllDims(3));
  const AleatoricModel b = FitAleatoric(pts, AllDims(3), opt);
  EXPECT_DOUBLE_EQ(b.tau_alea, 1.5 * a.tau_alea);
}

TEST(FitAleatoricTest, BadInputsThrow) {
  const auto pts = GaussianSample(50, 3, 3, Eigen::MatrixXd::Identity(3, 3));
  EXPECT_THROW(FitAleatoric(pts, {}), Error);
  EXPECT_THROW(FitAleatoric(pts, {0, 7}), Error);
  EXPECT_THROW(FitAleatoric(std::vector<Eigen::VectorXd>{}, {0}), Error);
  AleatoricOptions opt;
  opt.lambda = 0.0;
  EXPECT_THROW(FitAleatoric(pts, AllDims(3), opt), Error);
  auto bad = pts;
  bad[4](1) = std::nan("");
  EXPECT_THROW(FitAleatoric(bad, AllDims(3)), Error);
}

TEST(AleaScoreTest, MeanScoresZero) {
  const auto pts = GaussianSample(300, 3, 4, Eigen::MatrixXd::Identity(3, 3));
  const AleatoricModel m = FitAleatoric(pts, AllDims(3));
  EXPECT_NEAR(AleaScore(m, m.mu), 0.0, 1e-12);
}

TEST(AleaScoreTest, IdentityCovarianceIsEuclidean) {
  const std::vector<Eigen::VectorXd> pts(4, Eigen::VectorXd::Zero(6));
  AleatoricOptions opt;
  opt.lambda = 1.0;
  const AleatoricModel m = FitAleatoric(pts, AllDims(6), opt);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(6);
  q(0) = 3.0;
  q(1) = 4.0;
  EXPECT_NEAR(AleaScore(m, q), 5.0, 1e-12);
}

TEST(AleaScoreTest, MatchesLinearSolveOracle) {
  Eigen::MatrixXd mix = Eigen::MatrixXd::Random(9, 9);
  const auto pts = GaussianSample(1500, 9, 5, mix);
  const AleatoricModel m = FitAleatoric(pts, AllDims(9));
  const auto queries = GaussianSample(50, 9, 6, 2.0 * mix);
  for (const auto& q : queries) {
    const Eigen::VectorXd d = q - m.mu;
    const Eigen::VectorXd y = m.sigma.fullPivLu().solve(d);
    EXPECT_NEAR(AleaScore(m, q), std::sqrt(d.dot(y)), 1e-8);
  }
}

TEST(AleaScoreTest, MonotoneAlongRay) {
  const auto pts = GaussianSample(800, 4, 7, Eigen::MatrixXd::Random(4, 4));
  const AleatoricModel m = FitAleatoric(pts, AllDims(4));
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd dir(4);
    for (int k = 0; k < 4; ++k) dir(k) = normal(rng);
    double prev = -1.0;
    for (double c = 0.0; c <= 10.0; c += 0.25) {
      const double s = AleaScore(m, m.mu + c * dir);
      EXPECT_GE(s, prev);
      prev = s;
    }
  }
}

TEST(AleaScoreTest, GoalDimensionIgnored) {
  const auto pts = GaussianSample(500, kObsDim, 9,
                                  Eigen::MatrixXd::Identity(kObsDim, kObsDim));
  const AleatoricModel m = FitAleatoric(pts, ActiveMask());
  Eigen::VectorXd q = pts[3];
  const double base = AleaScore(m, q);
  for (double g : {-100.0, 0.0, 0.3, 1e6}) {
    q(kGoalHeight) = g;
    EXPECT_EQ(AleaScore(m, q), base);
  }
}

TEST(AleaScoreTest, DiagonalScalingInvariance) {
  const auto pts = GaussianSample(1000, 3, 10, Eigen::MatrixXd::Identity(3, 3));
  const Eigen::Vector3d scale(2.0, 0.5, 7.0);
  std::vector<Eigen::VectorXd> scaled;
  for (const auto& p : pts) scaled.push_back(scale.asDiagonal() * p);
  const AleatoricModel a = FitAleatoric(pts, AllDims(3));
  const AleatoricModel b = FitAleatoric(scaled, AllDims(3));
  const Eigen::Vector3d q(1.0, -2.0, 0.3);
  // The ridge is not scaled, so equality holds to its order.
  EXPECT_NEAR(AleaScore(b, scale.asDiagonal() * q), AleaScore(a, q), 1e-5);
}

TEST(AleaScoreTest, DimensionMismatchThrows) {
  const auto pts = GaussianSample(100, 3, 11, Eigen::MatrixXd::Identity(3, 3));
  const AleatoricModel m = FitAleatoric(pts, AllDims(3));
  EXPECT_THROW(AleaScore(m, Eigen::VectorXd::Zero(2)), Error);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(3);
  q(0) = std::nan("");
  EXPECT_THROW(AleaScore(m, q), Error);
}

TEST(AleaTriggerTest, StrictAtThreshold) {
  const std::vector<Eigen::VectorXd> pts(4, Eigen::VectorXd::Zero(2));
  AleatoricOptions opt;
  opt.lambda = 1.0;
  AleatoricModel m = FitAleatoric(pts, {0, 1}, opt);
  m.tau_alea = 5.0;
  EXPECT_FALSE(AleaTrigger(m, Eigen::Vector2d(3.0, 4.0)));
  EXPECT_TRUE(AleaTrigger(m, Eigen::Vector2d(3.0, 4.001)));
}

TEST(AleaTriggerTest, InSampleRateNearComplement) {
  for (uint64_t seed : {12u, 13u, 14u}) {
    const auto pts =
        GaussianSample(2000, 9, seed, Eigen::MatrixXd::Random(9, 9));
    const AleatoricModel m = FitAleatoric(pts, AllDims(9));
    int fired = 0;
    for (const auto& p : pts) fired += AleaTrigger(m, p);
    const double rate = static_cast<double>(fired) / pts.size();
    EXPECT_GE(rate, 0.04);
    EXPECT_LE(rate, 0.06);
  }
}

TEST(AleatoricJsonTest, RoundTripIsExact) {
  const auto pts = GaussianSample(400, kObsDim, 15,
                                  Eigen::MatrixXd::Random(kObsDim, kObsDim));
  const AleatoricModel m = FitAleatoric(pts, ActiveMask());
  const AleatoricModel back =
      AleatoricFromJson(nlohmann::json::parse(AleatoricToJson(m).dump()));
  EXPECT_EQ(back.mask, m.mask);
  EXPECT_EQ(back.mu, m.mu);
  EXPECT_EQ(back.sigma, m.sigma);
  EXPECT_EQ(back.tau_alea, m.tau_alea);
  EXPECT_EQ(back.lambda, m.lambda);
  for (const auto& q : pts) EXPECT_EQ(AleaScore(back, q), AleaScore(m, q));
}

TEST(GatherTest, PicksMaskedEntries) {
  const Eigen::VectorXd o = Eigen::VectorXd::LinSpaced(kObsDim, 0, 9);
  const Eigen::VectorXd g = Gather(o, ActiveMask());
  ASSERT_EQ(g.size(), 9);
  EXPECT_EQ(g(6), 7.0);
}

}  // namespace
}  // namespace udc
