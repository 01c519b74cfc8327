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

// Command-line front end: calibrate, simulate, sweep, oracle, config dump.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "itdsim/config.h"
#include "itdsim/error.h"
#include "itdsim/harness.h"
#include "itdsim/jeffress.h"
#include "itdsim/lif.h"
#include "itdsim/readout.h"
#include "itdsim/stimulus.h"
#include "itdsim/wav.h"

namespace fs = std::filesystem;
using namespace itdsim;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> jobs;
};

RunConfig load(const CommonOptions& o) {
  RunConfig c = o.config_path.empty() ? parse_config("{}")
                                      : load_config(o.config_path);
  if (o.seed) c.sweep.base_seed = *o.seed;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.jobs) c.sweep.jobs = *o.jobs;
  c.validate();
  return c;
}

fs::path ensure_out_dir(const RunConfig& c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string());
  return dir;
}

std::vector<NeuronId> parse_ids(const std::string& text) {
  std::vector<NeuronId> ids;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      ids.push_back(static_cast<NeuronId>(v));
    } catch (const std::exception&) {
      throw ConfigError("--traces: not a neuron id: " + item);
    }
  }
  return ids;
}

int cmd_calibrate(const CommonOptions& o, std::optional<double> target_us) {
  RunConfig c = load(o);
  JeffressConfig& net = c.pipeline.network;
  if (target_us) {
    net.target_stage_delay = *target_us * 1e-6;
    net.chain_weight = 0.0;
  }
  net = resolve_weights(net, c.pipeline.dt);
  const JeffressNetwork built = build(net);
  const CalibrationResult cal = calibrate_stage_delay(built, c.pipeline.dt);
  const ResolutionReport res =
      resolution(cal.stage_delay_mean, c.pipeline.geometry);
  std::printf("chain_weight_a %.9e\n", built.chain_weight);
  std::printf("coincidence_weight_a %.9e\n", built.coincidence_weight);
  std::printf("stages %d\n", net.n_stages);
  std::printf("stage_delays %zu\n", cal.stage_delays.size());
  std::printf("stage_delay_mean_us %.4f\n", cal.stage_delay_mean * 1e6);
  std::printf("stage_delay_std_us %.4f\n", cal.stage_delay_std * 1e6);
  std::printf("resolution_per_stage_deg %.3f\n", res.per_stage_deg);
  std::printf("resolution_per_detector_deg %.3f\n", res.per_detector_deg);

  const fs::path out = ensure_out_dir(c) / "config.calibrated.json";
  std::ofstream file(out);
  if (!file) throw Error("cannot write " + out.string());
  file << dump_config(c);
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

int cmd_simulate(const CommonOptions& o, std::optional<double> itd_us,
                 const std::string& wav, const std::string& traces) {
  RunConfig c = load(o);
  std::optional<AudioClip> stereo;
  if (!wav.empty()) {
    AudioClip clip = load_wav(wav);
    if (clip.channels.size() == 2) {
      stereo = std::move(clip);
    } else {
      c.pipeline.stimulus.wav_path = wav;
      c.pipeline.stimulus.wav_channel = 0;
    }
  }
  const std::vector<NeuronId> ids = parse_ids(traces);
  const Pipeline pipeline(c.pipeline);
  const double itd = itd_us.value_or(0.0) * 1e-6;
  const TrialTrace t =
      stereo ? pipeline.run_stimulus(*stereo, ids)
             : pipeline.run_trial_traced(itd, trial_seed(c.sweep.base_seed, 0, 0),
                                         ids);
  for (const std::string& w : t.run.warnings) {
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  }

  const fs::path dir = ensure_out_dir(c);
  write_spikes_csv(dir / "spikes.csv", t.run.spikes);
  if (!ids.empty()) write_traces_csv(dir / "traces.csv", t.run.traces);
  std::ofstream serial(dir / "events.txt");
  for (const DirectionEvent& e : t.events) {
    const std::string line = serial_encode(e);
    std::fputs(line.c_str(), stdout);
    serial << line;
  }
  if (!t.events.empty()) {
    const double width = pwm_encode(t.events.front().direction,
                                    c.pipeline.network.n_stages, c.pwm);
    const double start = t.events.front().t;
    write_pwm_csv(dir / "pwm.csv",
                  pwm_edges(width, c.pwm, start, start + 5 * c.pwm.period));
  } else {
    std::fprintf(stderr, "no direction event\n");
  }
  std::ofstream layout(dir / "network.txt");
  layout << describe(pipeline.network());
  if (t.result.latency) {
    std::fprintf(stderr, "latency_us %.3f\n", *t.result.latency * 1e6);
  }
  return 0;
}

int cmd_sweep(const CommonOptions& o, std::optional<int> trials,
              const std::vector<double>& itds_us,
              std::optional<double> noise_mv) {
  RunConfig c = load(o);
  if (trials) c.sweep.trials = *trials;
  if (noise_mv) c.pipeline.noise_rms = *noise_mv * 1e-3;
  if (!itds_us.empty()) {
    c.sweep.itds.clear();
    for (double us : itds_us) c.sweep.itds.push_back(us * 1e-6);
  }
  c.validate();
  const Pipeline pipeline(c.pipeline);
  const SweepResult r = run_sweep(pipeline, c.sweep);
  const fs::path dir = ensure_out_dir(c);
  write_sweep_csv(dir / "sweep.csv", r);
  write_stats_csv(dir / "stats.csv", r);
  int misses = 0;
  for (const ItdStats& s : r.stats) misses += s.misses;
  std::printf("rows %zu\n", r.rows.size());
  std::printf("misses %d\n", misses);
  std::printf("stage_delay_us %.4f\n", pipeline.stage_delay() * 1e6);
  std::printf("fit_slope_per_us %.5f\n", r.fit.slope * 1e-6);
  std::printf("fit_max_residual %.3f\n", r.fit.max_abs_residual);
  std::printf("wrote %s and %s\n", (dir / "sweep.csv").string().c_str(),
              (dir / "stats.csv").string().c_str());
  return 0;
}

int cmd_oracle(const CommonOptions& o, const std::string& wav,
               std::optional<double> itd_us, double max_lag_us) {
  (void)o;
  AudioClip clip = load_wav(wav);
  if (clip.channels.size() == 1) {
    if (!itd_us) {
      throw ConfigError("oracle: mono input needs --itd to build a stereo pair");
    }
    clip = apply_itd(clip, *itd_us * 1e-6);
  } else if (itd_us) {
    clip = apply_itd(make_mono(clip.sample_rate, clip.channels[0]),
                     *itd_us * 1e-6);
  }
  const double lag = xcorr_oracle(clip, max_lag_us * 1e-6);
  std::printf("itd_us %.3f\n", lag * 1e6);
  return 0;
}

int cmd_config_dump(const CommonOptions& o) {
  std::fputs(dump_config(load(o)).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neuromorphic ITD sound-localization simulator"};
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config file");
    sub->add_option("--seed", common.seed, "Base RNG seed");
    sub->add_option("--out", common.out_dir, "Output directory");
    sub->add_option("--jobs", common.jobs, "Worker threads")
        ->check(CLI::PositiveNumber);
  };

  std::optional<double> target_us;
  auto* calibrate = app.add_subcommand(
      "calibrate", "Tune the chain weight and report the stage delay");
  add_common(calibrate);
  calibrate->add_option("--target-us", target_us,
                        "Stage delay target in microseconds");

  std::optional<double> sim_itd_us;
  std::string sim_wav;
  std::string sim_traces;
  auto* simulate =
      app.add_subcommand("simulate", "Run one trial and write spike/event CSVs");
  add_common(simulate);
  simulate->add_option("--itd", sim_itd_us, "ITD in microseconds");
  simulate->add_option("--wav", sim_wav,
                       "Stereo WAV stimulus, or mono source to shift by --itd");
  simulate->add_option("--traces", sim_traces,
                       "Comma-separated neuron ids to record");

  std::optional<int> sweep_trials;
  std::vector<double> sweep_itds;
  std::optional<double> sweep_noise_mv;
  auto* sweep = app.add_subcommand("sweep", "Run an ITD sweep");
  add_common(sweep);
  sweep->add_option("--trials", sweep_trials, "Trials per ITD")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--itds", sweep_itds, "ITDs in microseconds")
      ->delimiter(',');
  sweep->add_option("--noise-mv", sweep_noise_mv,
                    "White-noise rms per raw channel in millivolts")
      ->check(CLI::NonNegativeNumber);

  std::string oracle_wav;
  std::optional<double> oracle_itd_us;
  double oracle_max_lag_us = 500.0;
  auto* oracle =
      app.add_subcommand("oracle", "Cross-correlation ITD estimate of a WAV");
  add_common(oracle);
  oracle->add_option("--wav", oracle_wav, "WAV file")->required();
  oracle->add_option("--itd", oracle_itd_us,
                     "Shift the first channel by this ITD (us) first");
  oracle->add_option("--max-lag-us", oracle_max_lag_us, "Search range");

  auto* config = app.add_subcommand("config", "Configuration utilities");
  config->require_subcommand(1);
  auto* dump = config->add_subcommand("dump", "Print the full config tree");
  add_common(dump);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*calibrate) return cmd_calibrate(common, target_us);
    if (*simulate) return cmd_simulate(common, sim_itd_us, sim_wav, sim_traces);
    if (*sweep) return cmd_sweep(common, sweep_trials, sweep_itds, sweep_noise_mv);
    if (*oracle) {
      return cmd_oracle(common, oracle_wav, oracle_itd_us, oracle_max_lag_us);
    }
    if (*dump) return cmd_config_dump(common);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
