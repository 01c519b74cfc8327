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

#include "itdsim/readout.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <unordered_map>

#include "itdsim/error.h"

namespace itdsim {

void ReadoutConfig::validate() const {
  if (!(iteration_time > 0)) {
    throw ConfigError("readout: iteration_time must be positive");
  }
  if (!(dead_time >= 0)) throw ConfigError("readout: dead_time < 0");
}

std::vector<DirectionEvent> poll_loop(std::span<const SpikeEvent> spikes,
                                      const ReadoutConfig& cfg, double t_end) {
  cfg.validate();
  std::unordered_map<NeuronId, std::size_t> position;
  for (std::size_t k = 0; k < cfg.detectors.size(); ++k) {
    position.emplace(cfg.detectors[k], k);
  }
  std::vector<unsigned> counters(cfg.detectors.size(), 0);
  std::vector<DirectionEvent> events;

  std::size_t next = 0;
  // Poll instants are base + k * iteration_time, k >= 1.
  double base = 0.0;
  long long k = 1;
  while (true) {
    const double poll = base + static_cast<double>(k) * cfg.iteration_time;
    if (poll > t_end) break;
    while (next < spikes.size() && spikes[next].t <= poll) {
      const auto it = position.find(spikes[next].neuron);
      if (it != position.end()) ++counters[it->second];
      ++next;
    }
    double accumulator = 0.0;
    int active = 0;
    for (std::size_t d = 0; d < counters.size(); ++d) {
      if (counters[d] != 0) {
        accumulator += static_cast<double>(d);
        ++active;
      }
    }
    if (active == 0) {
      // Nothing can change before the next spike; skip idle iterations.
      if (next >= spikes.size()) break;
      const auto skip = static_cast<long long>(
          std::floor((spikes[next].t - base) / cfg.iteration_time));
      k = std::max(k + 1, skip);
      continue;
    }
    events.push_back({poll, accumulator / active});
    const double reset_at = poll + cfg.dead_time;
    while (next < spikes.size() && spikes[next].t <= reset_at) ++next;
    std::fill(counters.begin(), counters.end(), 0u);
    base = reset_at;
    k = 1;
  }
  return events;
}

void PwmConfig::validate() const {
  if (!(0 < pulse_min && pulse_min < pulse_max && pulse_max < period)) {
    throw ConfigError("pwm: need 0 < pulse_min < pulse_max < period");
  }
}

double pwm_encode(double direction, int n, const PwmConfig& cfg) {
  cfg.validate();
  if (n < 2) throw ConfigError("pwm_encode: need at least two detectors");
  if (!(direction >= 0.0 && direction <= n - 1)) {
    throw Error("pwm_encode: direction " + std::to_string(direction) +
                " outside [0, " + std::to_string(n - 1) + "]");
  }
  return cfg.pulse_min +
         direction / (n - 1) * (cfg.pulse_max - cfg.pulse_min);
}

std::vector<PwmEdge> pwm_edges(double pulse_width, const PwmConfig& cfg,
                               double t_begin, double t_end) {
  cfg.validate();
  if (!(pulse_width > 0 && pulse_width < cfg.period)) {
    throw Error("pwm_edges: pulse width must lie in (0, period)");
  }
  std::vector<PwmEdge> edges;
  for (long k = 0;; ++k) {
    const double rise = t_begin + static_cast<double>(k) * cfg.period;
    if (rise >= t_end) break;
    edges.push_back({rise, 1});
    edges.push_back({rise + pulse_width, 0});
  }
  return edges;
}

void write_pwm_csv(const std::filesystem::path& path,
                   std::span<const PwmEdge> edges) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "t_s,level\n";
  char line[64];
  for (const PwmEdge& e : edges) {
    std::snprintf(line, sizeof(line), "%.9f,%d\n", e.t, e.level);
    out << line;
  }
}

std::string serial_encode(const DirectionEvent& event) {
  char line[96];
  std::snprintf(line, sizeof(line), "t_us=%lld dir=%.3f\n",
                static_cast<long long>(std::llround(event.t * 1e6)),
                event.direction);
  return line;
}

std::optional<DirectionEvent> serial_decode(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  constexpr std::string_view kTime = "t_us=";
  constexpr std::string_view kDir = " dir=";
  if (!line.starts_with(kTime)) return std::nullopt;
  const std::size_t split = line.find(kDir);
  if (split == std::string_view::npos) return std::nullopt;

  long long t_us = 0;
  const char* t_begin = line.data() + kTime.size();
  const char* t_stop = line.data() + split;
  auto [tp, tec] = std::from_chars(t_begin, t_stop, t_us);
  if (tec != std::errc() || tp != t_stop) return std::nullopt;

  const std::string dir_text(line.substr(split + kDir.size()));
  char* end = nullptr;
  const double dir = std::strtod(dir_text.c_str(), &end);
  if (dir_text.empty() || end != dir_text.c_str() + dir_text.size()) {
    return std::nullopt;
  }
  return DirectionEvent{static_cast<double>(t_us) * 1e-6, dir};
}

}  // namespace itdsim
