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

#ifndef ITDSIM_LIF_H_
#define ITDSIM_LIF_H_

// Fixed-timestep simulator for current-based leaky integrate-and-fire
// neurons with exponential synaptic currents and direct membrane injection.
//
// Within a step the linear subthreshold dynamics are integrated exactly
// (the membrane/synapse system has a closed-form propagator for constant
// injection), and threshold crossings, synaptic arrivals and refractory ends
// are resolved at their precise time inside the step. Spike times are
// therefore not quantized to the step grid and converge as dt shrinks.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "itdsim/audio_clip.h"

namespace itdsim {

using NeuronId = std::uint32_t;

struct LifParams {
  double tau_m = 15e-6;    // s
  double tau_syn = 15e-6;  // s
  double v_leak = 0.5;     // V
  double v_thresh = 1.0;   // V
  double v_reset = 0.3;    // V
  double t_ref = 0.5e-3;   // s
  double c_m = 2.4e-12;    // F

  double g_leak() const { return c_m / tau_m; }
  void validate() const;
  bool operator==(const LifParams&) const = default;
};

struct SynapseSpec {
  NeuronId pre = 0;
  NeuronId post = 0;
  double weight = 0.0;  // A, signed jump of the postsynaptic current
  bool quantized = false;
};

enum class InjectionMode {
  kResistive,  // pad couples to the membrane through r_src
  kTrigger,    // rising threshold crossings of the pad voltage fire the neuron
};

enum class Interpolation { kZeroOrderHold, kLinear };

struct AnalogInjection {
  NeuronId target = 0;
  Trace trace;          // V
  int sample_rate = 0;  // Hz
  double r_src = 110e3;
  InjectionMode mode = InjectionMode::kResistive;
};

// Makes `target` emit a spike at time `t`, unless it is refractory.
struct ForcedSpike {
  NeuronId target = 0;
  double t = 0.0;
};

struct NetworkSpec {
  std::vector<LifParams> neurons;
  std::vector<SynapseSpec> synapses;
  std::vector<AnalogInjection> injections;
  std::vector<ForcedSpike> forced_spikes;
  // Spike-to-arrival latency of every synapse; must be >= dt.
  double transmission_delay = 0.1e-6;
  // Weight step for synapses marked `quantized`.
  double weight_lsb = 0.0;
  Interpolation injection_interpolation = Interpolation::kZeroOrderHold;

  std::size_t size() const { return neurons.size(); }
  // Throws ConfigError on any violated invariant, including an invalid dt.
  void validate(double dt) const;
};

struct NeuronState {
  double v = 0.0;
  double i_syn = 0.0;
  double refractory_until = -std::numeric_limits<double>::infinity();
};

struct NetworkState {
  std::vector<NeuronState> neurons;
  double t = 0.0;
};

struct SpikeEvent {
  double t = 0.0;
  NeuronId neuron = 0;
  bool operator==(const SpikeEvent&) const = default;
};

// Time-ordered spike log plus per-neuron counters that can be reset
// independently of the log.
class SpikeRecord {
 public:
  explicit SpikeRecord(std::size_t num_neurons = 0)
      : counters_(num_neurons, 0) {}

  void add(const SpikeEvent& event);
  void reset_counters();

  const std::vector<SpikeEvent>& events() const { return events_; }
  const std::vector<std::uint64_t>& counters() const { return counters_; }
  // Events logged since the last reset_counters() call.
  std::span<const SpikeEvent> events_since_reset() const {
    return std::span(events_).subspan(reset_mark_);
  }
  std::size_t num_neurons() const { return counters_.size(); }

 private:
  std::vector<SpikeEvent> events_;
  std::vector<std::uint64_t> counters_;
  std::size_t reset_mark_ = 0;
};

struct TraceSample {
  double t = 0.0;
  NeuronId neuron = 0;
  double v = 0.0;
  double i_syn = 0.0;
};

class Simulator {
 public:
  // Validates `spec` against `dt`. The state starts at rest (v = v_leak).
  Simulator(NetworkSpec spec, double dt);

  // Advances the clock by one dt and returns the spikes emitted within the
  // step, ordered by time then neuron id.
  std::vector<SpikeEvent> step();

  const NetworkSpec& spec() const { return spec_; }
  const NetworkState& state() const { return state_; }
  NetworkState& mutable_state() { return state_; }
  double dt() const { return dt_; }
  std::uint64_t steps_taken() const { return step_index_; }
  // True once any injection was sampled past the end of its trace.
  bool injection_overrun() const { return injection_overrun_; }

 private:
  struct Arrival {
    double t;
    std::uint64_t seq;
    NeuronId post;
    double weight;
  };
  struct Outgoing {
    NeuronId post;
    double weight;
  };
  // Step propagation factors for one neuron.
  struct StepFactors {
    double decay_m = 0.0;
    double decay_syn = 0.0;
    double kernel = 0.0;
  };
  struct LocalEvent {
    double t;
    double weight;
    bool forced;
  };

  double injection_voltage(const AnalogInjection& inj, double t0);
  void advance(NeuronId n, double from, double to, double v_sig, double g_src,
               std::vector<SpikeEvent>& emitted, bool whole_step = false);
  void fire(NeuronId n, double t, std::vector<SpikeEvent>& emitted);

  NetworkSpec spec_;
  double dt_;
  NetworkState state_;
  std::uint64_t step_index_ = 0;
  std::uint64_t arrival_seq_ = 0;
  std::vector<std::vector<Outgoing>> outgoing_;
  std::vector<int> injection_of_;  // index into spec_.injections or -1
  std::vector<StepFactors> free_factors_;
  std::vector<StepFactors> coupled_factors_;
  std::vector<double> last_trigger_voltage_;
  std::vector<Arrival> pending_;  // min-heap on (t, seq)
  std::vector<ForcedSpike> forced_;
  std::size_t next_forced_ = 0;
  std::vector<std::vector<LocalEvent>> local_;
  bool injection_overrun_ = false;
};

struct RunResult {
  SpikeRecord spikes;
  std::vector<TraceSample> traces;
  std::vector<std::string> warnings;
};

// Simulates `spec` from rest for `duration` seconds. Injection traces that
// end early are held at their final value and reported in `warnings`.
RunResult run(const NetworkSpec& spec, double duration, double dt,
              std::span<const NeuronId> record_traces = {});

// round(w / w_lsb), half away from zero, clamped to [-63, 63], times w_lsb.
double quantize_weight(double w, double w_lsb);

void write_spikes_csv(const std::filesystem::path& path,
                      const SpikeRecord& record);
void write_traces_csv(const std::filesystem::path& path,
                      std::span<const TraceSample> traces);

}  // namespace itdsim

#endif  // ITDSIM_LIF_H_
