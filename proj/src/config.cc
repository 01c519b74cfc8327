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

#include "itdsim/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "itdsim/error.h"
#include "json.hpp"

namespace itdsim {
namespace {

using nlohmann::json;

// Reads keys out of one JSON object and rejects whatever is left over.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) {
        throw ConfigError("unknown config key: " + child_path(key));
      }
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(child_path(key) + ": " + e.what());
    }
  }

  // Nested object; `fn` receives a reader for it.
  template <typename Fn>
  void object(const char* key, Fn fn) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    ObjectReader child(j_.at(key), child_path(key));
    fn(child);
    child.finish();
  }

 private:
  std::string child_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_lif(ObjectReader& r, LifParams& p) {
  r.read("tau_m_s", p.tau_m);
  r.read("tau_syn_s", p.tau_syn);
  r.read("v_leak_v", p.v_leak);
  r.read("v_thresh_v", p.v_thresh);
  r.read("v_reset_v", p.v_reset);
  r.read("t_ref_s", p.t_ref);
  r.read("c_m_f", p.c_m);
}

json dump_lif(const LifParams& p) {
  return {{"tau_m_s", p.tau_m},       {"tau_syn_s", p.tau_syn},
          {"v_leak_v", p.v_leak},     {"v_thresh_v", p.v_thresh},
          {"v_reset_v", p.v_reset},   {"t_ref_s", p.t_ref},
          {"c_m_f", p.c_m}};
}

std::string mode_name(InjectionMode m) {
  return m == InjectionMode::kResistive ? "resistive" : "trigger";
}

std::string interpolation_name(Interpolation i) {
  return i == Interpolation::kZeroOrderHold ? "zoh" : "linear";
}

}  // namespace

SweepConfig RunConfig::default_sweep() {
  SweepConfig s;
  s.itds = SweepConfig::linspace(-160e-6, 160e-6, 41);
  return s;
}

void RunConfig::validate() const {
  pipeline.validate();
  sweep.validate();
  pwm.validate();
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  PipelineConfig& p = c.pipeline;
  {
    ObjectReader r(root, "");
    r.object("stimulus", [&](ObjectReader& s) {
      s.read("sample_rate_hz", p.stimulus.sample_rate);
      s.read("duration_s", p.stimulus.duration);
      s.read("wav_path", p.stimulus.wav_path);
      s.read("wav_channel", p.stimulus.wav_channel);
      s.object("clap", [&](ObjectReader& k) {
        ClapSpec& clap = p.stimulus.clap;
        k.read("onset_time_s", clap.onset_time);
        k.read("rise_time_s", clap.rise_time);
        k.read("decay_time_s", clap.decay_time);
        k.read("amplitude_v", clap.amplitude);
        k.read("noise_bandwidth_hz", clap.noise_bandwidth);
        k.read("rng_seed", clap.rng_seed);
      });
    });
    r.object("frontend", [&](ObjectReader& f) {
      f.read("v_offset_v", p.frontend.v_offset);
      f.read("v_diode_v", p.frontend.v_diode);
      f.read("v_floor_v", p.frontend.v_floor);
      f.read("v_clip_v", p.frontend.v_clip);
      f.read("highpass_cutoff_hz", p.frontend.highpass_cutoff);
      f.read("preamp_gain", p.frontend.preamp_gain);
    });
    r.object("network", [&](ObjectReader& n) {
      JeffressConfig& j = p.network;
      n.read("n_stages", j.n_stages);
      n.read("chain_weight_a", j.chain_weight);
      n.read("coincidence_weight_a", j.coincidence_weight);
      n.read("coincidence_ratio", j.coincidence_ratio);
      n.read("target_stage_delay_s", j.target_stage_delay);
      n.read("left_first_index", j.left_first_index);
      n.read("transmission_delay_s", j.transmission_delay);
      n.read("weight_lsb_a", j.weight_lsb);
      n.object("neuron", [&](ObjectReader& l) { read_lif(l, j.neuron_params); });
      n.object("input_neuron",
               [&](ObjectReader& l) { read_lif(l, j.input_neuron_params); });
    });
    r.object("geometry", [&](ObjectReader& g) {
      g.read("mic_distance_m", p.geometry.mic_distance);
      g.read("head_radius_m", p.geometry.head_radius);
      g.read("speed_of_sound_mps", p.geometry.speed_of_sound);
    });
    r.object("readout", [&](ObjectReader& o) {
      o.read("iteration_time_s", p.readout.iteration_time);
      o.read("dead_time_s", p.readout.dead_time);
    });
    r.object("pwm", [&](ObjectReader& o) {
      o.read("period_s", c.pwm.period);
      o.read("pulse_min_s", c.pwm.pulse_min);
      o.read("pulse_max_s", c.pwm.pulse_max);
    });
    r.object("simulation", [&](ObjectReader& s) {
      s.read("dt_s", p.dt);
      s.read("sim_rate_hz", p.sim_rate);
      s.read("r_src_ohm", p.r_src);
      std::string mode = mode_name(p.injection_mode);
      s.read("injection_mode", mode);
      if (mode == "resistive") {
        p.injection_mode = InjectionMode::kResistive;
      } else if (mode == "trigger") {
        p.injection_mode = InjectionMode::kTrigger;
      } else {
        throw ConfigError("simulation.injection_mode: expected resistive or "
                          "trigger, got " + mode);
      }
      std::string interp = interpolation_name(p.injection_interpolation);
      s.read("injection_interpolation", interp);
      if (interp == "zoh") {
        p.injection_interpolation = Interpolation::kZeroOrderHold;
      } else if (interp == "linear") {
        p.injection_interpolation = Interpolation::kLinear;
      } else {
        throw ConfigError("simulation.injection_interpolation: expected zoh "
                          "or linear, got " + interp);
      }
      s.read("positive_itd_delays_right", p.positive_itd_delays_right);
    });
    r.object("sweep", [&](ObjectReader& s) {
      s.read("itds_s", c.sweep.itds);
      s.read("trials", c.sweep.trials);
      s.read("base_seed", c.sweep.base_seed);
      s.read("jobs", c.sweep.jobs);
      s.read("noise_rms_v", p.noise_rms);
    });
    r.read("out_dir", c.out_dir);
    r.finish();
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const RunConfig& c) {
  const PipelineConfig& p = c.pipeline;
  const ClapSpec& clap = p.stimulus.clap;
  const JeffressConfig& j = p.network;
  json root = {
      {"stimulus",
       {{"sample_rate_hz", p.stimulus.sample_rate},
        {"duration_s", p.stimulus.duration},
        {"wav_path", p.stimulus.wav_path},
        {"wav_channel", p.stimulus.wav_channel},
        {"clap",
         {{"onset_time_s", clap.onset_time},
          {"rise_time_s", clap.rise_time},
          {"decay_time_s", clap.decay_time},
          {"amplitude_v", clap.amplitude},
          {"noise_bandwidth_hz", clap.noise_bandwidth},
          {"rng_seed", clap.rng_seed}}}}},
      {"frontend",
       {{"v_offset_v", p.frontend.v_offset},
        {"v_diode_v", p.frontend.v_diode},
        {"v_floor_v", p.frontend.v_floor},
        {"v_clip_v", p.frontend.v_clip},
        {"highpass_cutoff_hz", p.frontend.highpass_cutoff},
        {"preamp_gain", p.frontend.preamp_gain}}},
      {"network",
       {{"n_stages", j.n_stages},
        {"chain_weight_a", j.chain_weight},
        {"coincidence_weight_a", j.coincidence_weight},
        {"coincidence_ratio", j.coincidence_ratio},
        {"target_stage_delay_s", j.target_stage_delay},
        {"left_first_index", j.left_first_index},
        {"transmission_delay_s", j.transmission_delay},
        {"weight_lsb_a", j.weight_lsb},
        {"neuron", dump_lif(j.neuron_params)},
        {"input_neuron", dump_lif(j.input_neuron_params)}}},
      {"geometry",
       {{"mic_distance_m", p.geometry.mic_distance},
        {"head_radius_m", p.geometry.head_radius},
        {"speed_of_sound_mps", p.geometry.speed_of_sound}}},
      {"readout",
       {{"iteration_time_s", p.readout.iteration_time},
        {"dead_time_s", p.readout.dead_time}}},
      {"pwm",
       {{"period_s", c.pwm.period},
        {"pulse_min_s", c.pwm.pulse_min},
        {"pulse_max_s", c.pwm.pulse_max}}},
      {"simulation",
       {{"dt_s", p.dt},
        {"sim_rate_hz", p.sim_rate},
        {"r_src_ohm", p.r_src},
        {"injection_mode", mode_name(p.injection_mode)},
        {"injection_interpolation",
         interpolation_name(p.injection_interpolation)},
        {"positive_itd_delays_right", p.positive_itd_delays_right}}},
      {"sweep",
       {{"itds_s", c.sweep.itds},
        {"trials", c.sweep.trials},
        {"base_seed", c.sweep.base_seed},
        {"jobs", c.sweep.jobs},
        {"noise_rms_v", p.noise_rms}}},
      {"out_dir", c.out_dir}};
  return root.dump(2) + "\n";
}

}  // namespace itdsim
