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

#ifndef ITDSIM_READOUT_H_
#define ITDSIM_READOUT_H_

// Emulation of the embedded-processor readout loop: poll the detector spike
// counters, average the ids of every detector with a nonzero counter, emit a
// direction, sleep through the dead time, reset the counters.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itdsim/lif.h"

namespace itdsim {

struct ReadoutConfig {
  double iteration_time = 55e-6;  // s, one pass over all counters
  double dead_time = 0.2;         // s, sleep after an update
  // Detector neuron ids in read order; the reported direction is the mean
  // position within this list.
  std::vector<NeuronId> detectors;

  void validate() const;
};

struct DirectionEvent {
  double t = 0.0;
  double direction = 0.0;
  bool operator==(const DirectionEvent&) const = default;
};

// Counters are read atomically at t_k; iteration k sees every spike in
// (last reset, t_k]. The first poll is at t = iteration_time. After an
// update at t_k the loop sleeps until t_k + dead_time, resets every counter
// (discarding spikes from the sleep), and resumes polling one iteration
// later. Spikes must be time-ordered.
std::vector<DirectionEvent> poll_loop(std::span<const SpikeEvent> spikes,
                                      const ReadoutConfig& cfg, double t_end);

inline std::vector<DirectionEvent> poll_loop(const SpikeRecord& record,
                                             const ReadoutConfig& cfg,
                                             double t_end) {
  return poll_loop(record.events(), cfg, t_end);
}

struct PwmConfig {
  double period = 20e-3;
  double pulse_min = 1.0e-3;
  double pulse_max = 2.0e-3;

  void validate() const;
};

// Linear map of direction in [0, n-1] onto [pulse_min, pulse_max].
double pwm_encode(double direction, int n, const PwmConfig& cfg);

struct PwmEdge {
  double t = 0.0;
  int level = 0;
};

// Rising edge at every period start in [t_begin, t_end), falling edge
// `pulse_width` later.
std::vector<PwmEdge> pwm_edges(double pulse_width, const PwmConfig& cfg,
                               double t_begin, double t_end);

void write_pwm_csv(const std::filesystem::path& path,
                   std::span<const PwmEdge> edges);

// "t_us=<integer microseconds> dir=<index, 3 decimals>\n"
std::string serial_encode(const DirectionEvent& event);

// Parses one serial_encode line; nullopt if malformed.
std::optional<DirectionEvent> serial_decode(std::string_view line);

}  // namespace itdsim

#endif  // ITDSIM_READOUT_H_
