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

#include "itdsim/frontend.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "itdsim/error.h"

namespace itdsim {

void FrontEndParams::validate() const {
  if (!(v_floor <= v_offset)) throw ConfigError("frontend: v_floor > v_offset");
  if (!(v_clip > v_floor)) throw ConfigError("frontend: v_clip <= v_floor");
  if (!(v_diode >= 0)) throw ConfigError("frontend: v_diode < 0");
  if (!(highpass_cutoff >= 0)) {
    throw ConfigError("frontend: highpass_cutoff < 0");
  }
  if (!std::isfinite(preamp_gain)) {
    throw ConfigError("frontend: preamp_gain must be finite");
  }
}

Trace highpass(std::span<const double> samples, int sample_rate,
               double cutoff_hz) {
  Trace out(samples.begin(), samples.end());
  if (cutoff_hz <= 0.0 || samples.empty()) return out;
  const double rc = 1.0 / (2.0 * std::numbers::pi * cutoff_hz);
  const double dt = 1.0 / sample_rate;
  const double a = rc / (rc + dt);
  double prev_x = samples.front();
  double prev_y = 0.0;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    prev_y = a * (prev_y + samples[n] - prev_x);
    prev_x = samples[n];
    out[n] = prev_y;
  }
  return out;
}

Trace condition(std::span<const double> samples, int sample_rate,
                const FrontEndParams& params) {
  params.validate();
  Trace gained(samples.begin(), samples.end());
  for (double& x : gained) x *= params.preamp_gain;
  Trace y = highpass(gained, sample_rate, params.highpass_cutoff);
  for (double& v : y) {
    v = std::max(v + params.v_offset - params.v_diode, params.v_floor);
    v = std::min(v, params.v_clip);
  }
  return y;
}

AudioClip condition(const AudioClip& clip, const FrontEndParams& params) {
  clip.validate();
  AudioClip out{clip.sample_rate, {}};
  for (const Trace& ch : clip.channels) {
    out.channels.push_back(condition(ch, clip.sample_rate, params));
  }
  return out;
}

}  // namespace itdsim
