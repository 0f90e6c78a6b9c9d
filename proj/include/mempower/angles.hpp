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

#ifndef MEMPOWER_ANGLES_HPP_
#define MEMPOWER_ANGLES_HPP_

#include <cmath>
#include <numbers>
#include <span>

namespace mempower {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, kTwoPi);  // [-pi, pi]
  if (w <= -kPi) w += kTwoPi;
  return w;
}

/// Atan2 of the summed unit vectors; 0 when they cancel exactly.
inline double circular_mean(std::span<const double> angles) {
  double s = 0.0;
  double c = 0.0;
  for (double a : angles) {
    s += std::sin(a);
    c += std::cos(a);
  }
  return std::atan2(s, c);
}

/// Shortest signed separation between two angles, in (-pi, pi].
inline double angle_difference(double a, double b) { return wrap_angle(a - b); }

}  // namespace mempower

#endif  // MEMPOWER_ANGLES_HPP_
