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

#include "itdsim/audio_clip.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "itdsim/error.h"

namespace itdsim {

void AudioClip::validate() const {
  if (sample_rate <= 0) {
    throw ConfigError("audio clip: sample rate must be positive");
  }
  if (channels.empty() || channels.size() > 2) {
    throw ConfigError("audio clip: expected 1 or 2 channels, got " +
                      std::to_string(channels.size()));
  }
  for (const Trace& ch : channels) {
    if (ch.size() != channels.front().size()) {
      throw ConfigError("audio clip: channels differ in length");
    }
    for (double v : ch) {
      if (!std::isfinite(v)) {
        throw ConfigError("audio clip: non-finite sample");
      }
    }
  }
}

AudioClip make_mono(int sample_rate, Trace samples) {
  AudioClip clip{sample_rate, {std::move(samples)}};
  clip.validate();
  return clip;
}

AudioClip make_stereo(int sample_rate, Trace left, Trace right) {
  AudioClip clip{sample_rate, {std::move(left), std::move(right)}};
  clip.validate();
  return clip;
}

void write_trace_csv(const std::filesystem::path& path,
                     std::span<const double> samples, int sample_rate) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "time_s,volts\n";
  char line[64];
  for (std::size_t n = 0; n < samples.size(); ++n) {
    std::snprintf(line, sizeof(line), "%.9f,%.6f\n",
                  static_cast<double>(n) / sample_rate, samples[n]);
    out << line;
  }
}

}  // namespace itdsim
