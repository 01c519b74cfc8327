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

#ifndef ITDSIM_GEOMETRY_H_
#define ITDSIM_GEOMETRY_H_

// Interaural time difference <-> source angle relations. ITDs here follow
// the arrival-time convention t_left - t_right: a source on the right gives
// a positive ITD.

namespace itdsim {

struct GeometryParams {
  double mic_distance = 0.051;  // m
  double head_radius = 0.0255;  // m
  double speed_of_sound = 343;  // m/s

  static GeometryParams from_mic_distance(double d, double c = 343.0) {
    return {d, d / 2.0, c};
  }
  void validate() const;
};

// (d_left - d_right) / c
double itd_from_distances(double d_left, double d_right, double speed_of_sound);

// Woodworth far-field model, theta in [-pi/2, pi/2].
double woodworth_itd(double theta, const GeometryParams& geom);

// Numerical inverse of woodworth_itd.
double woodworth_angle(double itd, const GeometryParams& geom);

// arcsin(itd * c / d) for two free-field receivers.
double planewave_angle(double itd, double mic_distance, double speed_of_sound);

// Angular step at broadside that corresponds to an ITD step `itd_step`.
double angular_resolution(double itd_step, const GeometryParams& geom);

}  // namespace itdsim

#endif  // ITDSIM_GEOMETRY_H_
