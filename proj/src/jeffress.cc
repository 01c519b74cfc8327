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

#include "itdsim/jeffress.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "itdsim/error.h"

namespace itdsim {
namespace {

constexpr double kProbeStart = 1e-6;
constexpr int kProbeStages = 4;

// Membrane excursion per ampere of synaptic jump, `t` after the jump.
double psp_per_ampere(const LifParams& p, double t) {
  const double a = 1.0 / p.tau_m - 1.0 / p.tau_syn;
  if (std::abs(a * t) < 1e-9) return t * std::exp(-t / p.tau_m) / p.c_m;
  return (std::exp(-t / p.tau_syn) - std::exp(-t / p.tau_m)) / a / p.c_m;
}

double psp_peak_time(const LifParams& p) {
  if (std::abs(p.tau_m - p.tau_syn) < 1e-15) return p.tau_m;
  return std::log(p.tau_syn / p.tau_m) * p.tau_m * p.tau_syn /
         (p.tau_syn - p.tau_m);
}

// Runs the given network until every id in `order` has fired or the chain
// stalls. Returns spike times (NaN for stages that never fired) and the
// per-neuron spike counts.
struct ChainRun {
  std::vector<double> times;
  std::vector<int> counts;
};

ChainRun run_chain(const NetworkSpec& spec, const std::vector<NeuronId>& order,
                   double dt, double stall_window) {
  Simulator sim(spec, dt);
  ChainRun out{std::vector<double>(order.size(), std::nan("")),
               std::vector<int>(order.size(), 0)};
  std::vector<int> position(spec.size(), -1);
  for (std::size_t k = 0; k < order.size(); ++k) {
    position[order[k]] = static_cast<int>(k);
  }
  double last_progress = 0.0;
  double settle_until = std::numeric_limits<double>::infinity();
  while (sim.state().t < settle_until) {
    for (const SpikeEvent& e : sim.step()) {
      const int k = position[e.neuron];
      if (k < 0) continue;
      if (out.counts[k]++ == 0) out.times[k] = e.t;
      last_progress = e.t;
    }
    if (out.counts.back() > 0 &&
        settle_until == std::numeric_limits<double>::infinity()) {
      settle_until = sim.state().t + stall_window;
    }
    if (sim.state().t - last_progress > stall_window &&
        sim.state().t > kProbeStart + stall_window) {
      break;
    }
  }
  return out;
}

std::string format_us(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f us", seconds * 1e6);
  return buf;
}

}  // namespace

void JeffressConfig::validate() const {
  if (n_stages < 2) throw ConfigError("jeffress: n_stages must be >= 2");
  neuron_params.validate();
  input_neuron_params.validate();
  if (!(coincidence_ratio > 0.5 && coincidence_ratio < 1.0)) {
    throw ConfigError("jeffress: coincidence_ratio must lie in (0.5, 1)");
  }
  if (chain_weight < 0 || coincidence_weight < 0) {
    throw ConfigError("jeffress: weights must be non-negative");
  }
  if (!(target_stage_delay > 0)) {
    throw ConfigError("jeffress: target_stage_delay must be positive");
  }
  if (!(transmission_delay > 0)) {
    throw ConfigError("jeffress: transmission_delay must be positive");
  }
  if (weight_lsb < 0) throw ConfigError("jeffress: weight_lsb < 0");
}

std::vector<NeuronId> NetworkLayout::chain(Side side) const {
  std::vector<NeuronId> ids(n_stages);
  const bool ascending = (side == Side::kLeft) == left_first_index;
  for (int k = 0; k < n_stages; ++k) {
    const int j = ascending ? k : n_stages - 1 - k;
    ids[k] = side == Side::kLeft ? left_chain(j) : right_chain(j);
  }
  return ids;
}

std::vector<NeuronId> NetworkLayout::detectors() const {
  std::vector<NeuronId> ids(n_stages);
  for (int j = 0; j < n_stages; ++j) ids[j] = detector(j);
  return ids;
}

double NetworkLayout::detector_itd(double j, double stage_delay) const {
  return detector_to_itd(j, stage_delay, n_stages, !left_first_index);
}

double NetworkLayout::itd_detector(double itd, double stage_delay) const {
  const double signed_itd = left_first_index ? itd : -itd;
  return 0.5 * ((n_stages - 1) - signed_itd / stage_delay);
}

double single_spike_firing_weight(const LifParams& params) {
  params.validate();
  const double peak = psp_per_ampere(params, psp_peak_time(params));
  return (params.v_thresh - params.v_leak) / peak;
}

JeffressConfig resolve_weights(JeffressConfig cfg, double dt) {
  cfg.validate();
  if (cfg.chain_weight == 0.0) {
    cfg.chain_weight = tune_chain_weight(cfg.target_stage_delay,
                                         cfg.neuron_params, dt,
                                         cfg.transmission_delay);
  }
  if (cfg.coincidence_weight == 0.0) {
    cfg.coincidence_weight =
        cfg.coincidence_ratio * single_spike_firing_weight(cfg.neuron_params);
  }
  return cfg;
}

JeffressNetwork build(const JeffressConfig& cfg) {
  cfg.validate();
  double chain_w = cfg.chain_weight;
  double coinc_w = cfg.coincidence_weight;
  if (!(chain_w > 0) || !(coinc_w > 0)) {
    throw ConfigError("jeffress: weights must be resolved before build");
  }
  const bool quantized = cfg.weight_lsb > 0;
  if (quantized) {
    chain_w = quantize_weight(chain_w, cfg.weight_lsb);
    coinc_w = quantize_weight(coinc_w, cfg.weight_lsb);
  }
  const double fire_w = single_spike_firing_weight(cfg.neuron_params);
  if (coinc_w >= fire_w) {
    throw ConfigError("jeffress: coincidence weight " + std::to_string(coinc_w) +
                      " A fires a detector from a single input (limit " +
                      std::to_string(fire_w) + " A)");
  }
  if (coinc_w <= 0.5 * fire_w) {
    throw ConfigError(
        "jeffress: coincidence weight too small for two inputs to fire");
  }
  if (chain_w <= fire_w) {
    throw ConfigError("jeffress: chain weight " + std::to_string(chain_w) +
                      " A cannot fire the next stage (needs > " +
                      std::to_string(fire_w) + " A)");
  }

  const int n = cfg.n_stages;
  JeffressNetwork net;
  net.layout = {n, cfg.left_first_index};
  net.chain_weight = chain_w;
  net.coincidence_weight = coinc_w;
  NetworkSpec& spec = net.spec;
  spec.transmission_delay = cfg.transmission_delay;
  spec.weight_lsb = cfg.weight_lsb;
  spec.neurons.assign(net.layout.num_neurons(), cfg.neuron_params);
  spec.neurons[NetworkLayout::kLeftInput] = cfg.input_neuron_params;
  spec.neurons[NetworkLayout::kRightInput] = cfg.input_neuron_params;

  for (Side side : {Side::kLeft, Side::kRight}) {
    const std::vector<NeuronId> ids = net.layout.chain(side);
    const NeuronId input = side == Side::kLeft ? NetworkLayout::kLeftInput
                                               : NetworkLayout::kRightInput;
    spec.synapses.push_back({input, ids.front(), chain_w, quantized});
    for (std::size_t k = 0; k + 1 < ids.size(); ++k) {
      spec.synapses.push_back({ids[k], ids[k + 1], chain_w, quantized});
    }
  }
  for (int j = 0; j < n; ++j) {
    spec.synapses.push_back(
        {net.layout.left_chain(j), net.layout.detector(j), coinc_w, quantized});
    spec.synapses.push_back(
        {net.layout.right_chain(j), net.layout.detector(j), coinc_w, quantized});
  }
  return net;
}

void attach_inputs(JeffressNetwork& net, const AudioClip& stereo, double r_src,
                   InjectionMode mode) {
  stereo.validate();
  if (stereo.channels.size() != 2) {
    throw ConfigError("attach_inputs: expected a stereo clip");
  }
  net.spec.injections.clear();
  net.spec.injections.push_back({NetworkLayout::kLeftInput,
                                 stereo.channels[0], stereo.sample_rate, r_src,
                                 mode});
  net.spec.injections.push_back({NetworkLayout::kRightInput,
                                 stereo.channels[1], stereo.sample_rate, r_src,
                                 mode});
}

std::string describe(const JeffressNetwork& net) {
  std::ostringstream out;
  const NetworkLayout& l = net.layout;
  out.precision(9);
  out << "network jeffress\n";
  out << "n_stages " << l.n_stages << "\n";
  out << "left_first_index " << (l.left_first_index ? "true" : "false") << "\n";
  out << "neurons " << net.spec.size() << "\n";
  out << "synapses " << net.spec.synapses.size() << "\n";
  out << "transmission_delay " << net.spec.transmission_delay << "\n";
  out << "layout left_input " << NetworkLayout::kLeftInput << "\n";
  out << "layout right_input " << NetworkLayout::kRightInput << "\n";
  out << "layout left_chain " << l.left_chain(0) << ".."
      << l.left_chain(l.n_stages - 1) << "\n";
  out << "layout right_chain " << l.right_chain(0) << ".."
      << l.right_chain(l.n_stages - 1) << "\n";
  out << "layout detectors " << l.detector(0) << ".."
      << l.detector(l.n_stages - 1) << "\n";
  for (std::size_t i = 0; i < net.spec.size(); ++i) {
    const LifParams& p = net.spec.neurons[i];
    out << "neuron " << i << " tau_m=" << p.tau_m << " tau_syn=" << p.tau_syn
        << " v_leak=" << p.v_leak << " v_thresh=" << p.v_thresh
        << " v_reset=" << p.v_reset << " t_ref=" << p.t_ref
        << " c_m=" << p.c_m << "\n";
  }
  for (const SynapseSpec& s : net.spec.synapses) {
    out << "synapse " << s.pre << " " << s.post << " " << s.weight
        << (s.quantized ? " quantized" : "") << "\n";
  }
  return out.str();
}

CalibrationResult calibrate_stage_delay(const JeffressNetwork& net, double dt,
                                        Side side) {
  NetworkSpec spec = net.spec;
  spec.injections.clear();
  spec.forced_spikes.clear();
  const std::vector<NeuronId> order = net.layout.chain(side);
  spec.forced_spikes.push_back({order.front(), kProbeStart});

  const LifParams& p = spec.neurons[order.front()];
  const double stall = 10.0 * (p.tau_m + p.tau_syn);
  const ChainRun r = run_chain(spec, order, dt, stall);
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (r.counts[k] != 1) {
      throw Error("calibration: chain stage " + std::to_string(k) +
                  " (neuron " + std::to_string(order[k]) + ") fired " +
                  std::to_string(r.counts[k]) + " times, expected once");
    }
  }
  CalibrationResult result;
  for (std::size_t k = 1; k < order.size(); ++k) {
    const double d = r.times[k] - r.times[k - 1];
    if (!(d > 0)) {
      throw Error("calibration: non-positive delay at stage " +
                  std::to_string(k));
    }
    result.stage_delays.push_back(d);
  }
  const double n = static_cast<double>(result.stage_delays.size());
  result.stage_delay_mean =
      std::accumulate(result.stage_delays.begin(), result.stage_delays.end(),
                      0.0) / n;
  double ss = 0.0;
  for (double d : result.stage_delays) {
    ss += (d - result.stage_delay_mean) * (d - result.stage_delay_mean);
  }
  result.stage_delay_std = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return result;
}

double probe_stage_delay(double weight, const LifParams& params, double dt,
                         double transmission_delay) {
  NetworkSpec spec;
  spec.transmission_delay = transmission_delay;
  spec.neurons.assign(kProbeStages, params);
  std::vector<NeuronId> order(kProbeStages);
  for (int k = 0; k < kProbeStages; ++k) {
    order[k] = static_cast<NeuronId>(k);
    if (k + 1 < kProbeStages) {
      spec.synapses.push_back({static_cast<NeuronId>(k),
                               static_cast<NeuronId>(k + 1), weight, false});
    }
  }
  spec.forced_spikes.push_back({0, kProbeStart});
  const double stall = 10.0 * (params.tau_m + params.tau_syn);
  const ChainRun r = run_chain(spec, order, dt, stall);
  if (std::isnan(r.times.back())) {
    return std::numeric_limits<double>::infinity();
  }
  return (r.times.back() - r.times.front()) / (kProbeStages - 1);
}

double tune_chain_weight(double target, const LifParams& params, double dt,
                         double transmission_delay) {
  const double w_fire = single_spike_firing_weight(params);
  double w_lo = w_fire * (1.0 + 1e-4);
  double w_hi = w_fire * 1e4;
  const double delay_max = probe_stage_delay(w_lo, params, dt, transmission_delay);
  const double delay_min = probe_stage_delay(w_hi, params, dt, transmission_delay);
  if (!(target >= delay_min && target <= delay_max)) {
    throw Error("tune_chain_weight: target " + format_us(target) +
                " outside achievable range [" + format_us(delay_min) + ", " +
                format_us(delay_max) + "]");
  }
  // Stage delay decreases monotonically with weight; bisect in log space.
  for (int it = 0; it < 100; ++it) {
    const double mid = std::sqrt(w_lo * w_hi);
    const double d = probe_stage_delay(mid, params, dt, transmission_delay);
    if (std::abs(d - target) < 1e-12) return mid;
    if (d > target) {
      w_lo = mid;
    } else {
      w_hi = mid;
    }
    if (w_hi / w_lo - 1.0 < 1e-12) break;
  }
  const double w = std::sqrt(w_lo * w_hi);
  const double achieved = probe_stage_delay(w, params, dt, transmission_delay);
  if (!(std::abs(achieved - target) < 0.1e-6)) {
    throw Error("tune_chain_weight: bisection stalled at " +
                format_us(achieved) + " for target " + format_us(target));
  }
  return w;
}

double detector_to_itd(double j, double stage_delay, int n_stages,
                       bool negate) {
  if (!(j >= 0.0 && j <= n_stages - 1)) {
    throw Error("detector_to_itd: index " + std::to_string(j) +
                " outside [0, " + std::to_string(n_stages - 1) + "]");
  }
  const double itd = (n_stages - 1 - 2.0 * j) * stage_delay;
  return negate ? -itd : itd;
}

}  // namespace itdsim
