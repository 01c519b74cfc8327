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

#include "itdsim/lif.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "itdsim/error.h"

namespace itdsim {
namespace {

// Integral of exp(-(h - s) / tau) * exp(-s / tau_syn) over s in [0, h]: the
// membrane response at h to a unit synaptic current present at s = 0.
double synaptic_kernel(double h, double tau, double tau_syn) {
  const double a = 1.0 / tau - 1.0 / tau_syn;
  const double x = a * h;
  if (std::abs(x) < 1e-6) {
    return h * std::exp(-h / tau) * (1.0 + x / 2.0 + x * x / 6.0);
  }
  return (std::exp(-h / tau_syn) - std::exp(-h / tau)) / a;
}

struct Coupling {
  double tau;    // effective membrane time constant
  double v_inf;  // steady state without synaptic current
};

Coupling coupling(const LifParams& p, double g_src, double v_sig) {
  const double g = p.g_leak() + g_src;
  return {p.c_m / g, (p.g_leak() * p.v_leak + g_src * v_sig) / g};
}

double propagate_v(const LifParams& p, const Coupling& k, double v, double i,
                   double h) {
  return k.v_inf + (v - k.v_inf) * std::exp(-h / k.tau) +
         i / p.c_m * synaptic_kernel(h, k.tau, p.tau_syn);
}

bool approx_le(double a, double b) { return a <= b * (1.0 + 1e-9); }

}  // namespace

void LifParams::validate() const {
  if (!(tau_m > 0) || !(tau_syn > 0) || !(t_ref > 0) || !(c_m > 0)) {
    throw ConfigError("lif: tau_m, tau_syn, t_ref and c_m must be positive");
  }
  if (!(v_reset < v_thresh)) throw ConfigError("lif: v_reset >= v_thresh");
  if (!(v_leak < v_thresh)) throw ConfigError("lif: v_leak >= v_thresh");
}

void NetworkSpec::validate(double dt) const {
  if (!(dt > 0)) throw ConfigError("network: dt must be positive");
  for (const LifParams& p : neurons) {
    p.validate();
    if (!approx_le(dt, std::min(p.tau_m, p.tau_syn) / 10.0)) {
      throw ConfigError("network: dt must not exceed min(tau_m, tau_syn)/10");
    }
  }
  if (!approx_le(dt, transmission_delay)) {
    throw ConfigError("network: transmission delay must be >= dt");
  }
  const auto n = neurons.size();
  for (const SynapseSpec& s : synapses) {
    if (s.pre >= n || s.post >= n) {
      throw ConfigError("network: synapse references unknown neuron");
    }
    if (!std::isfinite(s.weight)) throw ConfigError("network: bad weight");
    if (s.quantized) {
      if (!(weight_lsb > 0)) {
        throw ConfigError("network: quantized synapse needs weight_lsb > 0");
      }
      const double k = s.weight / weight_lsb;
      if (std::abs(k - std::round(k)) > 1e-9 || std::abs(k) > 63.0 + 1e-9) {
        throw ConfigError("network: weight is not a 6-bit multiple of lsb");
      }
    }
  }
  std::vector<bool> injected(n, false);
  for (const AnalogInjection& inj : injections) {
    if (inj.target >= n) {
      throw ConfigError("network: injection targets unknown neuron");
    }
    if (injected[inj.target]) {
      throw ConfigError("network: neuron has more than one injection");
    }
    injected[inj.target] = true;
    if (!(inj.r_src > 0)) throw ConfigError("network: r_src must be positive");
    if (inj.sample_rate <= 0 || inj.trace.empty()) {
      throw ConfigError("network: injection trace is empty");
    }
    for (double v : inj.trace) {
      if (!std::isfinite(v)) throw ConfigError("network: non-finite trace");
    }
  }
  for (const ForcedSpike& f : forced_spikes) {
    if (f.target >= n || !std::isfinite(f.t)) {
      throw ConfigError("network: invalid forced spike");
    }
  }
}

void SpikeRecord::add(const SpikeEvent& event) {
  if (event.neuron >= counters_.size()) counters_.resize(event.neuron + 1, 0);
  events_.push_back(event);
  ++counters_[event.neuron];
}

void SpikeRecord::reset_counters() {
  std::fill(counters_.begin(), counters_.end(), 0);
  reset_mark_ = events_.size();
}

Simulator::Simulator(NetworkSpec spec, double dt)
    : spec_(std::move(spec)), dt_(dt) {
  spec_.validate(dt_);
  const std::size_t n = spec_.size();
  state_.neurons.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    state_.neurons[i].v = spec_.neurons[i].v_leak;
  }
  outgoing_.resize(n);
  for (const SynapseSpec& s : spec_.synapses) {
    outgoing_[s.pre].push_back({s.post, s.weight});
  }
  injection_of_.assign(n, -1);
  for (std::size_t k = 0; k < spec_.injections.size(); ++k) {
    injection_of_[spec_.injections[k].target] = static_cast<int>(k);
  }
  free_factors_.resize(n);
  coupled_factors_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const LifParams& p = spec_.neurons[i];
    const double tau_free = p.tau_m;
    free_factors_[i] = {std::exp(-dt_ / tau_free),
                        std::exp(-dt_ / p.tau_syn),
                        synaptic_kernel(dt_, tau_free, p.tau_syn)};
    if (injection_of_[i] >= 0) {
      const auto& inj = spec_.injections[injection_of_[i]];
      const double g_src =
          inj.mode == InjectionMode::kResistive ? 1.0 / inj.r_src : 0.0;
      const double tau = coupling(p, g_src, 0.0).tau;
      coupled_factors_[i] = {std::exp(-dt_ / tau), std::exp(-dt_ / p.tau_syn),
                             synaptic_kernel(dt_, tau, p.tau_syn)};
    }
  }
  last_trigger_voltage_.assign(n, -std::numeric_limits<double>::infinity());
  forced_ = spec_.forced_spikes;
  std::stable_sort(forced_.begin(), forced_.end(),
                   [](const ForcedSpike& a, const ForcedSpike& b) {
                     return a.t < b.t;
                   });
  local_.resize(n);
}

double Simulator::injection_voltage(const AnalogInjection& inj, double t0) {
  const Trace& tr = inj.trace;
  if (spec_.injection_interpolation == Interpolation::kZeroOrderHold) {
    const double pos = t0 * inj.sample_rate + 1e-6;
    const auto idx = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
    if (idx >= tr.size()) {
      injection_overrun_ = true;
      return tr.back();
    }
    return tr[idx];
  }
  const double pos = (t0 + 0.5 * dt_) * inj.sample_rate;
  const auto idx = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
  if (idx + 1 >= tr.size()) {
    if (idx >= tr.size()) injection_overrun_ = true;
    return tr.back();
  }
  const double frac = pos - static_cast<double>(idx);
  return tr[idx] + frac * (tr[idx + 1] - tr[idx]);
}

void Simulator::fire(NeuronId n, double t, std::vector<SpikeEvent>& emitted) {
  NeuronState& s = state_.neurons[n];
  const LifParams& p = spec_.neurons[n];
  s.v = p.v_reset;
  s.refractory_until = t + p.t_ref;
  emitted.push_back({t, n});
}

void Simulator::advance(NeuronId n, double from, double to, double v_sig,
                        double g_src, std::vector<SpikeEvent>& emitted,
                        bool whole_step) {
  NeuronState& s = state_.neurons[n];
  const LifParams& p = spec_.neurons[n];
  const Coupling k = coupling(p, g_src, v_sig);
  double a = from;
  while (a < to) {
    if (s.refractory_until > a) {
      const double end = std::min(s.refractory_until, to);
      s.i_syn *= std::exp(-(end - a) / p.tau_syn);
      s.v = p.v_reset;
      a = end;
      continue;
    }
    const double h = to - a;
    double v_end;
    double i_end;
    if (whole_step && a == from) {
      const StepFactors& f =
          g_src > 0 ? coupled_factors_[n] : free_factors_[n];
      v_end = k.v_inf + (s.v - k.v_inf) * f.decay_m +
              s.i_syn / p.c_m * f.kernel;
      i_end = s.i_syn * f.decay_syn;
    } else {
      v_end = propagate_v(p, k, s.v, s.i_syn, h);
      i_end = s.i_syn * std::exp(-h / p.tau_syn);
    }
    if (v_end < p.v_thresh) {
      s.v = v_end;
      s.i_syn = i_end;
      return;
    }
    // Locate the first crossing inside (a, to] by bisection on the exact
    // trajectory.
    double lo = 0.0;
    double hi = h;
    if (s.v < p.v_thresh) {
      for (int it = 0; it < 60 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (propagate_v(p, k, s.v, s.i_syn, mid) >= p.v_thresh) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
    } else {
      hi = 0.0;
    }
    s.i_syn *= std::exp(-hi / p.tau_syn);
    fire(n, a + hi, emitted);
    a += hi;
  }
}

std::vector<SpikeEvent> Simulator::step() {
  const double t0 = static_cast<double>(step_index_) * dt_;
  const double t1 = static_cast<double>(step_index_ + 1) * dt_;
  const auto later = [](const Arrival& x, const Arrival& y) {
    return x.t > y.t || (x.t == y.t && x.seq > y.seq);
  };

  while (!pending_.empty() && pending_.front().t < t1) {
    std::pop_heap(pending_.begin(), pending_.end(), later);
    const Arrival& a = pending_.back();
    local_[a.post].push_back({std::max(a.t, t0), a.weight, false});
    pending_.pop_back();
  }
  while (next_forced_ < forced_.size() && forced_[next_forced_].t < t1) {
    const ForcedSpike& f = forced_[next_forced_++];
    local_[f.target].push_back({std::max(f.t, t0), 0.0, true});
  }

  std::vector<SpikeEvent> emitted;
  const auto num = static_cast<NeuronId>(spec_.size());
  for (NeuronId n = 0; n < num; ++n) {
    double v_sig = 0.0;
    double g_src = 0.0;
    auto& events = local_[n];
    if (injection_of_[n] >= 0) {
      const AnalogInjection& inj = spec_.injections[injection_of_[n]];
      const double v = injection_voltage(inj, t0);
      if (inj.mode == InjectionMode::kResistive) {
        v_sig = v;
        g_src = 1.0 / inj.r_src;
      } else {
        const double thresh = spec_.neurons[n].v_thresh;
        if (v >= thresh && last_trigger_voltage_[n] < thresh) {
          events.push_back({t0, 0.0, true});
        }
        last_trigger_voltage_[n] = v;
      }
    }
    if (events.empty()) {
      advance(n, t0, t1, v_sig, g_src, emitted, true);
      continue;
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const LocalEvent& x, const LocalEvent& y) {
                       return x.t < y.t;
                     });
    double cur = t0;
    NeuronState& s = state_.neurons[n];
    for (const LocalEvent& e : events) {
      advance(n, cur, e.t, v_sig, g_src, emitted);
      cur = e.t;
      if (e.forced) {
        if (s.refractory_until <= e.t) fire(n, e.t, emitted);
      } else {
        s.i_syn += e.weight;
      }
    }
    advance(n, cur, t1, v_sig, g_src, emitted);
    events.clear();
  }

  std::sort(emitted.begin(), emitted.end(),
            [](const SpikeEvent& x, const SpikeEvent& y) {
              return x.t < y.t || (x.t == y.t && x.neuron < y.neuron);
            });
  for (const SpikeEvent& e : emitted) {
    for (const Outgoing& o : outgoing_[e.neuron]) {
      pending_.push_back(
          {e.t + spec_.transmission_delay, arrival_seq_++, o.post, o.weight});
      std::push_heap(pending_.begin(), pending_.end(), later);
    }
  }
  ++step_index_;
  state_.t = t1;
  return emitted;
}

RunResult run(const NetworkSpec& spec, double duration, double dt,
              std::span<const NeuronId> record_traces) {
  if (!(duration > 0)) throw ConfigError("run: duration must be positive");
  Simulator sim(spec, dt);
  RunResult result{SpikeRecord(spec.size()), {}, {}};
  for (const AnalogInjection& inj : spec.injections) {
    const double length = static_cast<double>(inj.trace.size()) / inj.sample_rate;
    if (length + 0.5 / inj.sample_rate < duration) {
      result.warnings.push_back(
          "injection trace for neuron " + std::to_string(inj.target) +
          " ends before the run; holding its final value");
    }
  }
  for (NeuronId id : record_traces) {
    if (id >= spec.size()) throw ConfigError("run: trace id out of range");
  }
  const auto steps =
      static_cast<std::uint64_t>(std::ceil(duration / dt - 1e-9));
  for (std::uint64_t k = 0; k < steps; ++k) {
    for (const SpikeEvent& e : sim.step()) result.spikes.add(e);
    for (NeuronId id : record_traces) {
      const NeuronState& s = sim.state().neurons[id];
      result.traces.push_back({sim.state().t, id, s.v, s.i_syn});
    }
  }
  return result;
}

double quantize_weight(double w, double w_lsb) {
  if (!(w_lsb > 0)) throw ConfigError("quantize_weight: w_lsb must be > 0");
  const double k = std::clamp(std::round(w / w_lsb), -63.0, 63.0);
  return k * w_lsb;
}

void write_spikes_csv(const std::filesystem::path& path,
                      const SpikeRecord& record) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "time_s,neuron_id\n";
  char line[64];
  for (const SpikeEvent& e : record.events()) {
    std::snprintf(line, sizeof(line), "%.10f,%u\n", e.t, e.neuron);
    out << line;
  }
}

void write_traces_csv(const std::filesystem::path& path,
                      std::span<const TraceSample> traces) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "time_s,neuron_id,v_volts,i_syn_amps\n";
  char line[128];
  for (const TraceSample& s : traces) {
    std::snprintf(line, sizeof(line), "%.10f,%u,%.9f,%.6e\n", s.t, s.neuron,
                  s.v, s.i_syn);
    out << line;
  }
}

}  // namespace itdsim
