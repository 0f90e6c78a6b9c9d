// Copyright 2026 The mempower Authors.
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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "mempower/metrics.hpp"
#include "test_util.hpp"

namespace mempower {
namespace {

using testing::Rng;

std::vector<double> two_groups(Rng& rng, int a, int b, double center, double spread) {
  std::vector<double> h;
  for (int i = 0; i < a; ++i) h.push_back(wrap_angle(center + spread * rng.normal()));
  for (int i = 0; i < b; ++i) h.push_back(wrap_angle(center + kPi + spread * rng.normal()));
  return h;
}

// Circular 2-means (Lloyd iterations on unit vectors), best of many starts.
std::pair<double, double> circular_two_means(const std::vector<double>& h) {
  double best_cost = 1e300;
  std::pair<double, double> best{0.0, 0.0};
  for (int s = 0; s < 72; ++s) {
    double c0 = -kPi + s * kTwoPi / 72.0;
    double c1 = wrap_angle(c0 + kPi);
    for (int it = 0; it < 100; ++it) {
      double s0 = 0, k0 = 0, s1 = 0, k1 = 0;
      for (double x : h) {
        if (std::cos(x - c0) >= std::cos(x - c1)) {
          s0 += std::sin(x);
          k0 += std::cos(x);
        } else {
          s1 += std::sin(x);
          k1 += std::cos(x);
        }
      }
      if (s0 != 0 || k0 != 0) c0 = std::atan2(s0, k0);
      if (s1 != 0 || k1 != 0) c1 = std::atan2(s1, k1);
    }
    double cost = 0.0;
    for (double x : h) cost += 1.0 - std::max(std::cos(x - c0), std::cos(x - c1));
    if (cost < best_cost) {
      best_cost = cost;
      best = {c0, c1};
    }
  }
  return best;
}

TEST(OrderParameter, Examples) {
  const std::vector<double> same(5, 1.3);
  EXPECT_NEAR(order_parameter(same), 1.0, 1e-15);
  const std::vector<double> opposite{0.0, kPi};
  EXPECT_NEAR(order_parameter(opposite), 0.0, 1e-15);
  const std::vector<double> cross{0.0, kPi / 2};
  EXPECT_NEAR(order_parameter(cross), std::sqrt(0.5), 1e-15);
  const std::vector<double> none;
  try {
    order_parameter(none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
}

TEST(OrderParameter, BoundedAndRotationInvariant) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> h(static_cast<std::size_t>(rng.integer(1, 30)));
    for (double& x : h) x = rng.uniform(-10.0, 10.0);
    const double r = order_parameter(h);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
    const double shift = rng.uniform(-kPi, kPi);
    for (double& x : h) x += shift;
    EXPECT_NEAR(order_parameter(h), r, 1e-12);
  }
}

TEST(Histogram, BinEdges) {
  EXPECT_EQ(heading_bin(-kPi + 1e-12, 4), 0u);
  EXPECT_EQ(heading_bin(-kPi / 2, 4), 0u);
  EXPECT_EQ(heading_bin(-kPi / 2 + 1e-12, 4), 1u);
  EXPECT_EQ(heading_bin(0.0, 4), 1u);
  EXPECT_EQ(heading_bin(kPi, 4), 3u);
}

TEST(Histogram, CountsAndReference) {
  const std::vector<double> h{3.0, 3.1, -3.1};
  const auto raw = heading_histogram(h, false, 4);
  EXPECT_EQ(std::accumulate(raw.counts.begin(), raw.counts.end(), 0), 3);
  EXPECT_EQ(raw.counts[3], 2);
  EXPECT_EQ(raw.counts[0], 1);
  const auto centered = heading_histogram(h, true, 4);
  EXPECT_EQ(centered.counts[1] + centered.counts[2], 3);
  EXPECT_THROW(heading_histogram(std::vector<double>{}, false, 4), Error);
  EXPECT_THROW(heading_histogram(h, false, 1), Error);
}

TEST(Histogram, UniformHeadingsPassChiSquare) {
  Rng rng(4);
  std::vector<double> h(36000);
  for (double& x : h) x = rng.uniform(-kPi, kPi);
  const auto hist = heading_histogram(h, false, 36);
  double chi2 = 0.0;
  for (int c : hist.counts) chi2 += std::pow(c - 1000.0, 2) / 1000.0;
  // 35 degrees of freedom; 66.6 is the 0.999 quantile.
  EXPECT_LT(chi2, 66.6);
}

TEST(TwoCluster, AntipodalGroupsMatchTwoMeansOracle) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const double center = rng.uniform(-kPi, kPi);
    const int a = rng.integer(8, 17);
    const auto h = two_groups(rng, a, 25 - a, center, 0.15);
    const auto r = two_cluster_test(h);
    EXPECT_TRUE(r.passes);
    const auto [c0, c1] = circular_two_means(h);
    const double d0 = std::min(std::abs(angle_difference(r.first_center, c0)),
                               std::abs(angle_difference(r.first_center, c1)));
    const double d1 = std::min(std::abs(angle_difference(r.second_center, c0)),
                               std::abs(angle_difference(r.second_center, c1)));
    EXPECT_LT(d0, 1e-9);
    EXPECT_LT(d1, 1e-9);
  }
}

TEST(TwoCluster, RejectsSingleCluster) {
  Rng rng(6);
  const auto h = two_groups(rng, 25, 0, 0.4, 0.2);
  const auto r = two_cluster_test(h);
  EXPECT_FALSE(r.passes);
  EXPECT_EQ(r.minor_share, 0.0);
}

TEST(TwoCluster, RejectsUniform) {
  std::vector<double> h;
  for (int i = 0; i < 25; ++i) h.push_back(-kPi + (i + 0.5) * kTwoPi / 25.0);
  EXPECT_FALSE(two_cluster_test(h).passes);
}

TEST(TwoCluster, RejectsPerpendicularGroups) {
  std::vector<double> h(12, 0.0);
  h.insert(h.end(), 13, kPi / 2);
  const auto r = two_cluster_test(h);
  EXPECT_GT(std::abs(r.separation - kPi), kPi / 4);
  EXPECT_FALSE(r.passes);
}

TEST(TwoCluster, ConsistentWithOrderParameter) {
  // Balanced antipodal clusters have a low order parameter.
  Rng rng(7);
  const auto h = two_groups(rng, 12, 13, 1.0, 0.05);
  EXPECT_TRUE(two_cluster_test(h).passes);
  EXPECT_LT(order_parameter(h), 0.1);
}

}  // namespace
}  // namespace mempower
