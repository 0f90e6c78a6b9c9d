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

// Flock statistics over heading lists.

#ifndef MEMPOWER_METRICS_HPP_
#define MEMPOWER_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mempower/angles.hpp"
#include "mempower/error.hpp"

namespace mempower {

/// Length of the mean unit heading vector, in [0, 1].
inline double order_parameter(std::span<const double> headings) {
  require(!headings.empty(), ErrorCode::kEmptyInput, "order parameter of no headings");
  double s = 0.0;
  double c = 0.0;
  for (double h : headings) {
    s += std::sin(h);
    c += std::cos(h);
  }
  const double n = static_cast<double>(headings.size());
  return std::min(1.0, std::hypot(s, c) / n);
}

struct HeadingHistogram {
  std::vector<int> counts;
  double reference = 0.0;  // subtracted before binning

  std::size_t bins() const noexcept { return counts.size(); }
  double bin_width() const { return kTwoPi / static_cast<double>(counts.size()); }
  /// Center of bin b; bins tile (-pi, pi] left to right.
  double center(std::size_t b) const {
    return -kPi + (static_cast<double>(b) + 0.5) * bin_width();
  }
};

/// Bin index for a wrapped angle in (-pi, pi]; bin b covers
/// (-pi + b w, -pi + (b + 1) w].
inline std::size_t heading_bin(double wrapped, std::size_t bins) {
  const double w = kTwoPi / static_cast<double>(bins);
  const double pos = (wrapped + kPi) / w;
  auto b = static_cast<long>(std::ceil(pos)) - 1;
  return static_cast<std::size_t>(std::clamp(b, 0L, static_cast<long>(bins) - 1));
}

inline HeadingHistogram heading_histogram(std::span<const double> headings,
                                          bool mean_reference, int bins) {
  require(!headings.empty(), ErrorCode::kEmptyInput, "histogram of no headings");
  require(bins >= 2, ErrorCode::kInvalidArgument, "histogram needs at least 2 bins");
  HeadingHistogram hist;
  hist.counts.assign(static_cast<std::size_t>(bins), 0);
  hist.reference = mean_reference ? circular_mean(headings) : 0.0;
  for (double h : headings) {
    ++hist.counts[heading_bin(wrap_angle(h - hist.reference), hist.counts.size())];
  }
  return hist;
}

struct BimodalityResult {
  double first_center = 0.0;
  double second_center = 0.0;
  double separation = 0.0;  // |wrap(second - first)|, in [0, pi]
  double mass = 0.0;        // fraction of agents within the window of a center
  double minor_share = 0.0; // share of the smaller cluster
  bool passes = false;
};

struct BimodalityOptions {
  int bins = 36;
  double window = kPi / 4.0;        // cluster membership half-width
  double separation_slack = 0.5;    // centers must be pi +- this apart
  double min_mass = 0.7;
  double min_cluster_share = 0.1;
};

namespace detail {

inline int count_within(std::span<const double> headings, double center, double window) {
  int n = 0;
  for (double h : headings) {
    if (std::abs(angle_difference(h, center)) <= window) ++n;
  }
  return n;
}

inline double mean_within(std::span<const double> headings, double center, double window) {
  double s = 0.0;
  double c = 0.0;
  for (double h : headings) {
    if (std::abs(angle_difference(h, center)) <= window) {
      s += std::sin(h);
      c += std::cos(h);
    }
  }
  return (s == 0.0 && c == 0.0) ? center : std::atan2(s, c);
}

}  // namespace detail

/// Two-cluster test on a heading list. The densest window (scanned at bin
/// centers) gives the first cluster; the densest window whose center is at
/// least two windows away gives the second. Each center is refined to the
/// circular mean of its members. Agents in both windows count once.
inline BimodalityResult two_cluster_test(std::span<const double> headings,
                                         const BimodalityOptions& opts = {}) {
  require(!headings.empty(), ErrorCode::kEmptyInput, "two-cluster test of no headings");
  require(opts.bins >= 4 && opts.window > 0.0, ErrorCode::kInvalidArgument,
          "two-cluster test needs bins >= 4 and a positive window");
  const HeadingHistogram grid = heading_histogram(headings, false, opts.bins);

  auto densest = [&](auto&& allowed) {
    double best_center = 0.0;
    int best = -1;
    for (std::size_t b = 0; b < grid.bins(); ++b) {
      const double c = grid.center(b);
      if (!allowed(c)) continue;
      const int n = detail::count_within(headings, c, opts.window);
      if (n > best) {
        best = n;
        best_center = c;
      }
    }
    return best_center;
  };

  BimodalityResult r;
  r.first_center = detail::mean_within(
      headings, densest([](double) { return true; }), opts.window);
  r.second_center = detail::mean_within(
      headings, densest([&](double c) {
        return std::abs(angle_difference(c, r.first_center)) >= 2.0 * opts.window;
      }),
      opts.window);
  r.separation = std::abs(angle_difference(r.second_center, r.first_center));

  const double n = static_cast<double>(headings.size());
  r.minor_share = std::min(detail::count_within(headings, r.first_center, opts.window),
                           detail::count_within(headings, r.second_center, opts.window)) /
                  n;
  int members = 0;
  for (double h : headings) {
    if (std::abs(angle_difference(h, r.first_center)) <= opts.window ||
        std::abs(angle_difference(h, r.second_center)) <= opts.window) {
      ++members;
    }
  }
  r.mass = static_cast<double>(members) / n;
  r.passes = std::abs(r.separation - kPi) <= opts.separation_slack &&
             r.mass >= opts.min_mass && r.minor_share >= opts.min_cluster_share;
  return r;
}

}  // namespace mempower

#endif  // MEMPOWER_METRICS_HPP_
