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

#ifndef ITDSIM_AUDIO_CLIP_H_
#define ITDSIM_AUDIO_CLIP_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace itdsim {

using Trace = std::vector<double>;

// Sampled voltage traces, one or two channels of equal length.
struct AudioClip {
  int sample_rate = 0;
  std::vector<Trace> channels;

  std::size_t num_samples() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  double duration() const {
    return sample_rate > 0 ? static_cast<double>(num_samples()) / sample_rate
                           : 0.0;
  }
  // Throws ConfigError unless the clip satisfies its invariants (1-2
  // channels, equal length, positive rate, finite samples).
  void validate() const;
};

AudioClip make_mono(int sample_rate, Trace samples);
AudioClip make_stereo(int sample_rate, Trace left, Trace right);

// Writes `time_s,volts` rows for one channel.
void write_trace_csv(const std::filesystem::path& path,
                     std::span<const double> samples, int sample_rate);

}  // namespace itdsim

#endif  // ITDSIM_AUDIO_CLIP_H_
