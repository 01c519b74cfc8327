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

#ifndef ITDSIM_STIMULUS_H_
#define ITDSIM_STIMULUS_H_

#include <cstdint>

#include "itdsim/audio_clip.h"

namespace itdsim {

// Synthetic transient: band-limited Gaussian noise under a linear-attack,
// exponential-decay envelope, silent before onset.
struct ClapSpec {
  double onset_time = 0.2e-3;     // s
  double rise_time = 0.1e-3;      // s
  double decay_time = 2.0e-3;     // s
  double amplitude = 1.65;        // V, peak |sample|
  double noise_bandwidth = 4000;  // Hz, low-pass corner of the noise
  std::uint64_t rng_seed = 1;

  void validate() const;
};

// Envelope value in [0, 1] at absolute time `t`.
double clap_envelope(const ClapSpec& spec, double t);

AudioClip synth_clap(const ClapSpec& spec, int sample_rate, double duration);

// Returns a stereo clip: left = `mono`, right = `mono` delayed by `itd`
// seconds (advanced when negative). Fractional delays use linear
// interpolation; samples shifted in from outside the clip are zero.
AudioClip apply_itd(const AudioClip& mono, double itd);

// Delays one trace by `delay` seconds, same interpolation as apply_itd.
Trace fractional_delay(std::span<const double> samples, int sample_rate,
                       double delay);

struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / den; }
};

// Linear-interpolation resampling by `factor`; the new rate is
// round(sample_rate * factor).
AudioClip resample(const AudioClip& clip, Rational factor);

// Adds zero-mean white Gaussian noise with standard deviation `rms` volts to
// every channel.
void add_white_noise(AudioClip& clip, double rms, std::uint64_t seed);

}  // namespace itdsim

#endif  // ITDSIM_STIMULUS_H_
