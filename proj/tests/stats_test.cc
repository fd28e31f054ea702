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

#include "udc/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "udc/error.h"

namespace udc {
namespace {

TEST(NearestRankTest, OneToHundred) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  std::shuffle(v.begin(), v.end(), std::mt19937_64(3));
  EXPECT_EQ(NearestRankPercentile(v, 95.0), 95.0);
  EXPECT_EQ(NearestRankPercentile(v, 100.0), 100.0);
  EXPECT_EQ(NearestRankPercentile(v, 0.5), 1.0);
}

TEST(NearestRankTest, MatchesSortedIndexOracle) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  for (int n : {1, 2, 7, 19, 1000}) {
    std::vector<double> v(n);
    for (double& x : v) x = normal(rng);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (double p : {5.0, 50.0, 95.0, 99.0}) {
      const int rank = static_cast<int>(std::ceil(p / 100.0 * n));
      EXPECT_EQ(NearestRankPercentile(v, p), sorted[std::max(rank, 1) - 1]);
    }
  }
}

TEST(NearestRankTest, EmptyThrows) {
  EXPECT_THROW(NearestRankPercentile({}, 95.0), Error);
}

TEST(PearsonTest, IdentityAndNegation) {
  std::vector<double> x = {0.3, 1.2, -0.7, 4.0, 2.2};
  std::vector<double> neg(x.size());
  std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
  EXPECT_NEAR(PearsonR(x, x), 1.0, 1e-12);
  EXPECT_NEAR(PearsonR(x, neg), -1.0, 1e-12);
}

TEST(PearsonTest, ConstantSeriesGivesZero) {
  EXPECT_EQ(PearsonR({1.0, 2.0, 3.0}, {5.0, 5.0, 5.0}), 0.0);
}

TEST(WilsonTest, HalfOfTen) {
  const Interval ci = WilsonInterval(5, 10);
  EXPECT_NEAR(ci.low, 0.2366, 1e-4);
  EXPECT_NEAR(ci.high, 0.7634, 1e-4);
}

TEST(WilsonTest, BoundsStayInUnitInterval) {
  for (int s : {0, 1, 50, 99, 100}) {
    const Interval ci = WilsonInterval(s, 100);
    EXPECT_GE(ci.low, 0.0);
    EXPECT_LE(ci.high, 1.0);
    EXPECT_LE(ci.low, s / 100.0);
    EXPECT_GE(ci.high, s / 100.0);
  }
}

TEST(DifferenceTest, WaldOracle) {
  const Interval ci = DifferenceInterval(800, 1000, 700, 1000);
  const double se = std::sqrt(0.8 * 0.2 / 1000 + 0.7 * 0.3 / 1000);
  EXPECT_NEAR(ci.low, 0.1 - 1.959963984540054 * se, 1e-12);
  EXPECT_NEAR(ci.high, 0.1 + 1.959963984540054 * se, 1e-12);
}

TEST(MeanStdTest, PopulationStd) {
  const MeanStd m = ComputeMeanStd({2, 4, 4, 4, 5, 5, 7, 9});
  EXPECT_DOUBLE_EQ(m.mean, 5.0);
  EXPECT_DOUBLE_EQ(m.std, 2.0);
}

TEST(HashSeedTest, DistinctAndOrderSensitive) {
  std::set<uint64_t> seen;
  for (uint64_t c = 0; c < 4; ++c) {
    for (uint64_t e = 0; e < 1000; ++e) seen.insert(HashSeed(7, c, e));
  }
  EXPECT_EQ(seen.size(), 4000u);
  EXPECT_NE(HashSeed(1, 2), HashSeed(2, 1));
}

}  // namespace
}  // namespace udc
