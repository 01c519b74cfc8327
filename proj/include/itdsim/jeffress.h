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

#ifndef ITDSIM_JEFFRESS_H_
#define ITDSIM_JEFFRESS_H_

// Jeffress delay-line network: two counter-directional chains of LIF
// neurons, each stage adding the PSP rise time as delay, and a row of
// coincidence detectors fed by the chain neurons at the same index.

#include <string>
#include <vector>

#include "itdsim/audio_clip.h"
#include "itdsim/lif.h"

namespace itdsim {

enum class Side { kLeft, kRight };

struct JeffressConfig {
  int n_stages = 50;
  // Chain synapse weight in amperes. 0 selects the weight whose stage
  // delay equals `target_stage_delay` (see resolve_weights).
  double chain_weight = 0.0;
  // Detector synapse weight in amperes. 0 selects coincidence_ratio times
  // the single-spike firing weight of `neuron_params`.
  double coincidence_weight = 0.0;
  double coincidence_ratio = 0.7;
  double target_stage_delay = 3.8e-6;
  LifParams neuron_params;
  LifParams input_neuron_params;
  // true: the left chain runs from index 0 upward and the right chain from
  // index N-1 downward. false mirrors both.
  bool left_first_index = true;
  double transmission_delay = 0.1e-6;
  // > 0 rounds every weight to a signed 6-bit multiple of this step.
  double weight_lsb = 0.0;

  void validate() const;
};

// Neuron id layout: 0 left input, 1 right input, then N left-chain neurons,
// N right-chain neurons and N detectors, each block in index order.
struct NetworkLayout {
  int n_stages = 0;
  bool left_first_index = true;

  static constexpr NeuronId kLeftInput = 0;
  static constexpr NeuronId kRightInput = 1;
  NeuronId left_chain(int j) const { return 2 + j; }
  NeuronId right_chain(int j) const { return 2 + n_stages + j; }
  NeuronId detector(int j) const { return 2 + 2 * n_stages + j; }
  std::size_t num_neurons() const { return 3 * n_stages + 2; }
  // Chain neuron ids in propagation order, head first.
  std::vector<NeuronId> chain(Side side) const;
  std::vector<NeuronId> detectors() const;
  // Arrival-time ITD (t_left - t_right) that detector `j` is tuned to.
  double detector_itd(double j, double stage_delay) const;
  // Inverse of detector_itd; may fall outside [0, N-1].
  double itd_detector(double itd, double stage_delay) const;
};

struct JeffressNetwork {
  NetworkSpec spec;
  NetworkLayout layout;
  double chain_weight = 0.0;
  double coincidence_weight = 0.0;
};

// Smallest weight whose single PSP lifts a resting neuron to threshold.
double single_spike_firing_weight(const LifParams& params);

// Fills zero weights in `cfg` (tuning the chain weight at `dt`).
JeffressConfig resolve_weights(JeffressConfig cfg, double dt);

// Builds the 3N+2 neuron network. Weights must be resolved; throws
// ConfigError if a detector input could fire a detector alone or a chain
// synapse is too weak to fire the next stage.
JeffressNetwork build(const JeffressConfig& cfg);

// Connects conditioned stereo traces to the two input neurons.
void attach_inputs(JeffressNetwork& net, const AudioClip& stereo,
                   double r_src = 110e3,
                   InjectionMode mode = InjectionMode::kResistive);

// Plain-text dump of parameters, id layout and synapses.
std::string describe(const JeffressNetwork& net);

struct CalibrationResult {
  double stage_delay_mean = 0.0;
  double stage_delay_std = 0.0;
  std::vector<double> stage_delays;
};

// Forces the head of one chain to spike and returns the first differences
// of the chain's spike times. Throws Error naming the first stage that does
// not fire exactly once.
CalibrationResult calibrate_stage_delay(const JeffressNetwork& net, double dt,
                                        Side side = Side::kLeft);

// Mean stage delay of a short isolated chain driven at `weight`; +inf if the
// chain does not propagate.
double probe_stage_delay(double weight, const LifParams& params, double dt,
                         double transmission_delay = 0.1e-6);

// Bisects the chain weight until the probe chain's stage delay is within
// 0.1 us of `target` (the search runs to much tighter tolerance). Throws
// Error listing the achievable delay range if `target` lies outside it.
double tune_chain_weight(double target, const LifParams& params, double dt,
                         double transmission_delay = 0.1e-6);

// (N - 1 - 2j) * delta, negated when `negate` is set.
double detector_to_itd(double j, double stage_delay, int n_stages,
                       bool negate = false);

}  // namespace itdsim

#endif  // ITDSIM_JEFFRESS_H_
