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
#include <cstddef>
#include <vector>

#include "udc/error.h"

namespace udc {

namespace {
constexpr double kZ95 = 1.959963984540054;
}  // namespace

uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t HashSeed(uint64_t a, uint64_t b) { return Mix64(Mix64(a) ^ b); }

uint64_t HashSeed(uint64_t a, uint64_t b, uint64_t c) {
  return HashSeed(HashSeed(a, b), c);
}

double NearestRankPercentile(std::vector<double> values, double p) {
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidInput, "percentile of empty sample");
  }
  if (!(p > 0.0 && p <= 100.0)) {
    throw Error(ErrorCode::kInvalidInput, "percentile outside (0, 100]");
  }
  const size_t n = values.size();
  size_t rank = static_cast<size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
  return values[rank - 1];
}

double PearsonR(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kInvalidInput,
                "correlation needs two equal-length series of >= 2 values");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

Interval WilsonInterval(int successes, int trials) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = trials;
  const double p = successes / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // The closed form leaves rounding residue at the ends.
  const double low = successes <= 0 ? 0.0 : std::max(0.0, center - half);
  const double high = successes >= trials ? 1.0 : std::min(1.0, center + half);
  return {low, high};
}

Interval DifferenceInterval(int s1, int n1, int s2, int n2) {
  if (n1 <= 0 || n2 <= 0) return {-1.0, 1.0};
  const double p1 = static_cast<double>(s1) / n1;
  const double p2 = static_cast<double>(s2) / n2;
  const double se = std::sqrt(p1 * (1.0 - p1) / n1 + p2 * (1.0 - p2) / n2);
  const double d = p1 - p2;
  return {d - kZ95 * se, d + kZ95 * se};
}

MeanStd ComputeMeanStd(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

}  // namespace udc
