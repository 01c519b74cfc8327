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

#include <algorithm>
#include <cmath>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "itdsim/error.h"
#include "itdsim/random.h"
#include "itdsim/readout.h"

using namespace itdsim;
using Catch::Approx;

namespace {

constexpr double kT = 55e-6;

ReadoutConfig config(int n = 50, NeuronId first = 102) {
  ReadoutConfig cfg;
  for (int j = 0; j < n; ++j) cfg.detectors.push_back(first + j);
  return cfg;
}

SpikeEvent det(double t, int j, NeuronId first = 102) {
  return {t, static_cast<NeuronId>(first + j)};
}

// Straight transcription of the polling program: every iteration is
// visited, counters accumulate spikes up to the poll instant, and after an
// update the program sleeps and only then clears the counters.
std::vector<DirectionEvent> literal_loop(const std::vector<SpikeEvent>& spikes,
                                         const ReadoutConfig& cfg, double t_end) {
  std::vector<DirectionEvent> out;
  std::vector<int> counter(cfg.detectors.size(), 0);
  std::size_t next = 0;
  double base = 0.0;
  for (long long k = 1;; ++k) {
    const double now = base + static_cast<double>(k) * cfg.iteration_time;
    if (now > t_end) break;
    for (; next < spikes.size() && spikes[next].t <= now; ++next) {
      for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
        if (cfg.detectors[d] == spikes[next].neuron) ++counter[d];
      }
    }
    double accumulator = 0;
    int active_neurons = 0;
    for (std::size_t d = 0; d < counter.size(); ++d) {
      if (counter[d] > 0) {
        accumulator += static_cast<double>(d);
        ++active_neurons;
      }
    }
    if (active_neurons == 0) continue;
    out.push_back({now, accumulator / active_neurons});
    const double wake = now + cfg.dead_time;
    for (; next < spikes.size() && spikes[next].t <= wake; ++next) {
      for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
        if (cfg.detectors[d] == spikes[next].neuron) ++counter[d];
      }
    }
    std::fill(counter.begin(), counter.end(), 0);
    base = wake;
    k = 0;
  }
  return out;
}

std::vector<SpikeEvent> random_record(Rng& rng, double t_end) {
  std::vector<SpikeEvent> s;
  double t = 0;
  while (true) {
    // Bursts of activity separated by quiet gaps.
    t += rng.uniform() < 0.2 ? rng.uniform() * 0.3 : rng.uniform() * 200e-6;
    if (t > t_end) break;
    const auto id = static_cast<NeuronId>(100 + rng.uniform() * 54);
    s.push_back({t, id});
  }
  return s;
}

}  // namespace

TEST_CASE("no active counters produce no events") {
  CHECK(poll_loop(std::vector<SpikeEvent>{}, config(), 1.0).empty());
  // Spikes from non-detector neurons are invisible to the loop.
  const std::vector<SpikeEvent> inputs = {{1e-3, 0}, {2e-3, 1}, {3e-3, 30}};
  CHECK(poll_loop(inputs, config(), 1.0).empty());
}

TEST_CASE("active ids are averaged without weighting by count") {
  const std::vector<SpikeEvent> s = {det(1.00e-3, 10), det(1.01e-3, 12)};
  const auto ev = poll_loop(s, config(), 1.0);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].direction == 11.0);

  std::vector<SpikeEvent> burst;
  for (int i = 0; i < 5; ++i) burst.push_back(det(1.0e-3 + i * 1e-6, 10));
  burst.push_back(det(1.01e-3, 20));
  CHECK(poll_loop(burst, config(), 1.0)[0].direction == 15.0);
}

TEST_CASE("a single active detector reports its own index") {
  const auto ev = poll_loop(std::vector<SpikeEvent>{det(0.7e-3, 25)}, config(), 1.0);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].direction == 25.0);
  // Empty iterations are skipped until the poll after the spike.
  CHECK(ev[0].t == Approx(13 * kT));
}

TEST_CASE("a spike on a poll instant counts for that poll") {
  const double poll = 4 * kT;
  const auto ev = poll_loop(std::vector<SpikeEvent>{det(poll, 3)}, config(), 1.0);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].t == poll);
}

TEST_CASE("dead time swallows a second clap 50 ms later but not 250 ms later") {
  auto clap = [](double t0, int j) {
    return std::vector<SpikeEvent>{det(t0, j), det(t0 + 3e-6, j + 1)};
  };
  std::vector<SpikeEvent> near = clap(1e-3, 20);
  for (const auto& e : clap(51e-3, 30)) near.push_back(e);
  CHECK(poll_loop(near, config(), 1.0).size() == 1);

  std::vector<SpikeEvent> far = clap(1e-3, 20);
  for (const auto& e : clap(251e-3, 30)) far.push_back(e);
  const auto ev = poll_loop(far, config(), 1.0);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].direction == 20.5);
  CHECK(ev[1].direction == 30.5);
  CHECK(ev[1].t - ev[0].t >= 0.2);
}

TEST_CASE("later iterations never influence an earlier event") {
  // Detector 10 is seen at the first active poll, 30 only afterwards.
  const std::vector<SpikeEvent> s = {det(1.0e-3, 10), det(1.0e-3 + kT, 30)};
  const auto ev = poll_loop(s, config(), 1.0);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].direction == 10.0);
}

TEST_CASE("spikes during the sleep do not leak into the next detection") {
  const double poll = 19 * kT;  // first poll after 1 ms
  const std::vector<SpikeEvent> s = {
      det(1e-3, 5),
      det(poll + 0.1, 40),        // mid sleep
      det(poll + 0.2, 41),        // at the reset instant
      det(poll + 0.2 + 1e-6, 7),  // after the reset
  };
  const auto ev = poll_loop(s, config(), 1.0);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].direction == 5.0);
  CHECK(ev[1].direction == 7.0);
  CHECK(ev[1].t == Approx(poll + 0.2 + kT));
}

TEST_CASE("direction is the position in the configured read order") {
  ReadoutConfig cfg;
  cfg.detectors = {9, 4, 7};
  const auto ev = poll_loop(std::vector<SpikeEvent>{{1e-4, 7}}, cfg, 1.0);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].direction == 2.0);
}

TEST_CASE("poll_loop matches a literal transcription on random records") {
  Rng rng(17);
  const ReadoutConfig cfg = config();
  for (int trial = 0; trial < 30; ++trial) {
    const std::vector<SpikeEvent> s = random_record(rng, 2.0);
    const auto fast = poll_loop(s, cfg, 2.0);
    const auto ref = literal_loop(s, cfg, 2.0);
    REQUIRE(fast == ref);
    for (std::size_t i = 1; i < fast.size(); ++i) {
      CHECK(fast[i].t - fast[i - 1].t >= cfg.dead_time);
    }
    for (const auto& e : fast) {
      CHECK(e.direction >= 0);
      CHECK(e.direction <= 49);
    }
    CHECK(poll_loop(s, cfg, 2.0) == fast);
  }
}

TEST_CASE("poll_loop accepts a SpikeRecord") {
  SpikeRecord rec(160);
  rec.add(det(1e-3, 12));
  CHECK(poll_loop(rec, config(), 1.0).size() == 1);
}

TEST_CASE("readout config invariants") {
  ReadoutConfig cfg = config();
  cfg.iteration_time = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = config();
  cfg.dead_time = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = config();
  cfg.dead_time = 0;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("pwm pulse width is linear in direction") {
  const PwmConfig p;
  CHECK(pwm_encode(0, 50, p) == Approx(1.0e-3));
  CHECK(pwm_encode(24.5, 50, p) == Approx(1.5e-3));
  CHECK(pwm_encode(49, 50, p) == Approx(2.0e-3));
  CHECK_THROWS_AS(pwm_encode(-0.1, 50, p), Error);
  CHECK_THROWS_AS(pwm_encode(49.1, 50, p), Error);
  PwmConfig bad;
  bad.pulse_max = 30e-3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("pwm edge schedule") {
  const auto edges = pwm_edges(1.5e-3, PwmConfig{}, 0.1, 0.16);
  REQUIRE(edges.size() == 6);
  for (int k = 0; k < 3; ++k) {
    CHECK(edges[2 * k].t == Approx(0.1 + k * 20e-3));
    CHECK(edges[2 * k].level == 1);
    CHECK(edges[2 * k + 1].t - edges[2 * k].t == Approx(1.5e-3));
    CHECK(edges[2 * k + 1].level == 0);
  }
}

TEST_CASE("serial frames") {
  CHECK(serial_encode({1.5e-3, 24.5}) == "t_us=1500 dir=24.500\n");
  CHECK(serial_encode({0.0, 0.0}) == "t_us=0 dir=0.000\n");
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const DirectionEvent e{std::round(rng.uniform() * 5e6) * 1e-6, rng.uniform() * 49};
    const auto back = serial_decode(serial_encode(e));
    REQUIRE(back);
    CHECK(back->t == Approx(e.t).margin(1e-12));
    CHECK(std::abs(back->direction - e.direction) <= 0.0005);
  }
  CHECK_FALSE(serial_decode("garbage"));
  CHECK_FALSE(serial_decode("t_us=12 dir="));
  CHECK_FALSE(serial_decode("t_us=x dir=1.0"));
}
