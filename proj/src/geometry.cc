// Copyright 2026 The itdsim Authors.
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

#include "itdsim/geometry.h"

#include <cmath>
#include <numbers>
#include <string>

#include "itdsim/error.h"

namespace itdsim {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

}  // namespace

void GeometryParams::validate() const {
  if (!(mic_distance > 0) || !(head_radius > 0) || !(speed_of_sound > 0)) {
    throw ConfigError("geometry: all parameters must be positive");
  }
}

double itd_from_distances(double d_left, double d_right,
                          double speed_of_sound) {
  if (!(speed_of_sound > 0)) {
    throw ConfigError("itd_from_distances: speed of sound must be positive");
  }
  return (d_left - d_right) / speed_of_sound;
}

double woodworth_itd(double theta, const GeometryParams& geom) {
  geom.validate();
  if (!(std::abs(theta) <= kHalfPi + 1e-12)) {
    throw Error("woodworth_itd: theta outside [-pi/2, pi/2]");
  }
  return geom.head_radius / geom.speed_of_sound * (theta + std::sin(theta));
}

double woodworth_angle(double itd, const GeometryParams& geom) {
  const double max_itd = woodworth_itd(kHalfPi, geom);
  if (!(std::abs(itd) <= max_itd * (1.0 + 1e-12))) {
    throw Error("woodworth_angle: |itd| " + std::to_string(std::abs(itd)) +
                " s exceeds the model maximum " + std::to_string(max_itd) +
                " s");
  }
  if (itd == 0.0) return 0.0;
  const double target = std::abs(itd);
  double lo = 0.0;
  double hi = kHalfPi;
  // theta + sin(theta) is strictly increasing; bisect to full precision.
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (woodworth_itd(mid, geom) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::copysign(0.5 * (lo + hi), itd);
}

double planewave_angle(double itd, double mic_distance,
                       double speed_of_sound) {
  if (!(mic_distance > 0) || !(speed_of_sound > 0)) {
    throw ConfigError("planewave_angle: geometry must be positive");
  }
  const double x = itd * speed_of_sound / mic_distance;
  if (!(std::abs(x) <= 1.0)) {
    throw Error("planewave_angle: |itd * c / d| = " + std::to_string(std::abs(x)) +
                " exceeds 1");
  }
  return std::asin(x);
}

double angular_resolution(double itd_step, const GeometryParams& geom) {
  return woodworth_angle(itd_step, geom);
}

}  // namespace itdsim
