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

#ifndef ITDSIM_FRONTEND_H_
#define ITDSIM_FRONTEND_H_

#include <span>

#include "itdsim/audio_clip.h"

namespace itdsim {

// Passive conditioning board between the preamplifier and the neuron pads.
struct FrontEndParams {
  double v_offset = 0.8;          // V, new DC level after the high-pass
  double v_diode = 0.6;           // V, series-diode forward drop
  double v_floor = 0.2;           // V, output when the diode blocks
  double v_clip = 1.2;            // V, limiter level
  double highpass_cutoff = 20.0;  // Hz, 0 disables the filter
  double preamp_gain = 1.0;

  void validate() const;
};

// Single-pole RC high-pass. The filter starts in steady state for the first
// sample, so a constant input maps to zero.
Trace highpass(std::span<const double> samples, int sample_rate,
               double cutoff_hz);

// gain -> high-pass -> +v_offset -> max(x - v_diode, v_floor) -> min(., v_clip)
Trace condition(std::span<const double> samples, int sample_rate,
                const FrontEndParams& params);

AudioClip condition(const AudioClip& clip, const FrontEndParams& params);

}  // namespace itdsim

#endif  // ITDSIM_FRONTEND_H_
