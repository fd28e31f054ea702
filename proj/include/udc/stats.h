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

#ifndef UDC_STATS_H_
#define UDC_STATS_H_

#include <cstdint>
#include <vector>

namespace udc {

// SplitMix64 finalizer. Used to derive independent stream seeds.
uint64_t Mix64(uint64_t x);

// Order-sensitive combination of seed components.
uint64_t HashSeed(uint64_t a, uint64_t b);
uint64_t HashSeed(uint64_t a, uint64_t b, uint64_t c);

// Nearest-rank percentile: the ceil(p/100 * N)-th order statistic (1-based).
// p in (0, 100]. Throws on an empty sample.
double NearestRankPercentile(std::vector<double> values, double p);

// Pearson correlation. Returns 0 when either series has zero variance.
double PearsonR(const std::vector<double>& x, const std::vector<double>& y);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Wilson score interval for a binomial proportion at ~95% coverage.
Interval WilsonInterval(int successes, int trials);

// Wald interval for p1 - p2 of two independent proportions at ~95%.
Interval DifferenceInterval(int s1, int n1, int s2, int n2);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd ComputeMeanStd(const std::vector<double>& values);

}  // namespace udc

#endif  // UDC_STATS_H_
