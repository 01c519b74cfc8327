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

#include "itdsim/stimulus.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "itdsim/error.h"
#include "itdsim/random.h"

namespace itdsim {
namespace {

// RBJ-cookbook low-pass biquad, direct form I.
class Biquad {
 public:
  Biquad(double cutoff_hz, double sample_rate, double q) {
    const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double cw = std::cos(w0);
    const double a0 = 1.0 + alpha;
    b0_ = (1.0 - cw) / 2.0 / a0;
    b1_ = (1.0 - cw) / a0;
    b2_ = b0_;
    a1_ = -2.0 * cw / a0;
    a2_ = (1.0 - alpha) / a0;
  }

  double process(double x) {
    const double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double b0_, b1_, b2_, a1_, a2_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

double sample_at(std::span<const double> x, double pos) {
  if (pos < 0.0 || pos > static_cast<double>(x.size() - 1)) return 0.0;
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= x.size()) return x[i];
  return x[i] + frac * (x[i + 1] - x[i]);
}

}  // namespace

void ClapSpec::validate() const {
  if (onset_time < 0 || rise_time < 0 || decay_time < 0) {
    throw ConfigError("clap: times must be non-negative");
  }
  if (!(amplitude > 0)) throw ConfigError("clap: amplitude must be positive");
  if (!(noise_bandwidth > 0)) {
    throw ConfigError("clap: noise bandwidth must be positive");
  }
}

double clap_envelope(const ClapSpec& spec, double t) {
  if (t < spec.onset_time) return 0.0;
  const double since_onset = t - spec.onset_time;
  if (since_onset < spec.rise_time) return since_onset / spec.rise_time;
  if (spec.decay_time <= 0.0) return since_onset == spec.rise_time ? 1.0 : 0.0;
  return std::exp(-(since_onset - spec.rise_time) / spec.decay_time);
}

AudioClip synth_clap(const ClapSpec& spec, int sample_rate, double duration) {
  spec.validate();
  if (sample_rate <= 0) throw ConfigError("clap: sample rate must be positive");
  if (!(duration > spec.onset_time)) {
    throw ConfigError("clap: duration must exceed onset time");
  }
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  Trace samples(n);

  Rng rng(spec.rng_seed);
  const double nyquist = 0.5 * sample_rate;
  const bool filtered = spec.noise_bandwidth < 0.95 * nyquist;
  // Fourth-order Butterworth as two cascaded sections.
  Biquad lp1(std::min(spec.noise_bandwidth, 0.95 * nyquist), sample_rate,
             0.54119610);
  Biquad lp2(std::min(spec.noise_bandwidth, 0.95 * nyquist), sample_rate,
             1.30656296);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = rng.gaussian();
    if (filtered) x = lp2.process(lp1.process(x));
    x *= clap_envelope(spec, static_cast<double>(i) / sample_rate);
    samples[i] = x;
    peak = std::max(peak, std::abs(x));
  }
  if (peak > 0.0) {
    const double scale = spec.amplitude / peak;
    for (double& x : samples) x *= scale;
  }
  return make_mono(sample_rate, std::move(samples));
}

Trace fractional_delay(std::span<const double> samples, int sample_rate,
                       double delay) {
  Trace out(samples.size());
  const double shift = delay * sample_rate;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    out[n] = sample_at(samples, static_cast<double>(n) - shift);
  }
  return out;
}

AudioClip apply_itd(const AudioClip& mono, double itd) {
  mono.validate();
  if (mono.channels.size() != 1) {
    throw ConfigError("apply_itd: expected a mono clip");
  }
  if (!(std::abs(itd) < mono.duration())) {
    throw ConfigError("apply_itd: |itd| must be shorter than the clip");
  }
  const Trace& left = mono.channels.front();
  return make_stereo(mono.sample_rate, left,
                     fractional_delay(left, mono.sample_rate, itd));
}

AudioClip resample(const AudioClip& clip, Rational factor) {
  if (factor.den == 0 || factor.num <= 0 || factor.den < 0) {
    throw ConfigError("resample: factor must be positive");
  }
  clip.validate();
  const long double new_rate =
      static_cast<long double>(clip.sample_rate) * factor.num / factor.den;
  AudioClip out;
  out.sample_rate = static_cast<int>(std::llround(new_rate));
  if (out.sample_rate <= 0) throw ConfigError("resample: rate rounds to zero");

  const std::size_t len = clip.num_samples();
  const std::size_t count =
      len == 0 ? 0
               : static_cast<std::size_t>(
                     (static_cast<std::int64_t>(len - 1) * factor.num) /
                     factor.den) + 1;
  for (const Trace& ch : clip.channels) {
    Trace r(count);
    for (std::size_t m = 0; m < count; ++m) {
      const std::int64_t scaled = static_cast<std::int64_t>(m) * factor.den;
      const auto i = static_cast<std::size_t>(scaled / factor.num);
      const double frac =
          static_cast<double>(scaled % factor.num) / factor.num;
      r[m] = (i + 1 < len) ? ch[i] + frac * (ch[i + 1] - ch[i]) : ch[i];
    }
    out.channels.push_back(std::move(r));
  }
  return out;
}

void add_white_noise(AudioClip& clip, double rms, std::uint64_t seed) {
  if (rms < 0) throw ConfigError("noise rms must be non-negative");
  if (rms == 0) return;
  Rng rng(seed);
  for (Trace& ch : clip.channels) {
    for (double& x : ch) x += rms * rng.gaussian();
  }
}

}  // namespace itdsim
