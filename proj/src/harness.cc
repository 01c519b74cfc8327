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

#include "itdsim/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>

#include "itdsim/error.h"
#include "itdsim/random.h"
#include "itdsim/wav.h"

namespace itdsim {
namespace {

std::optional<double> first_crossing(const AudioClip& clip, double threshold) {
  for (std::size_t n = 0; n < clip.num_samples(); ++n) {
    for (const Trace& ch : clip.channels) {
      if (ch[n] >= threshold) {
        return static_cast<double>(n) / clip.sample_rate;
      }
    }
  }
  return std::nullopt;
}

std::string format_fixed(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  // Avoid "-0.000" so mirrored runs diff cleanly.
  if (std::string_view(buf) == "-0.000") return "0.000";
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  stimulus.clap.validate();
  if (stimulus.sample_rate <= 0 || !(stimulus.duration > 0)) {
    throw ConfigError("stimulus: sample_rate and duration must be positive");
  }
  frontend.validate();
  network.validate();
  readout.validate();
  geometry.validate();
  if (!(dt > 0)) throw ConfigError("pipeline: dt must be positive");
  NetworkSpec probe;
  probe.neurons = {network.neuron_params, network.input_neuron_params};
  probe.transmission_delay = network.transmission_delay;
  probe.validate(dt);
  if (sim_rate <= 0) throw ConfigError("pipeline: sim_rate must be positive");
  if (!(r_src > 0)) throw ConfigError("pipeline: r_src must be positive");
  if (!(noise_rms >= 0)) throw ConfigError("pipeline: noise_rms < 0");
}

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  cfg_.network = resolve_weights(cfg_.network, cfg_.dt);
  net_ = build(cfg_.network);
  net_.spec.validate(cfg_.dt);
  calibration_ = calibrate_stage_delay(net_, cfg_.dt);
  cfg_.readout.detectors = net_.layout.detectors();

  if (cfg_.stimulus.wav_path.empty()) {
    source_ = synth_clap(cfg_.stimulus.clap, cfg_.stimulus.sample_rate,
                         cfg_.stimulus.duration);
  } else {
    const AudioClip wav = load_wav(cfg_.stimulus.wav_path);
    const int ch = cfg_.stimulus.wav_channel;
    if (ch < 0 || ch >= static_cast<int>(wav.channels.size())) {
      throw ConfigError("stimulus: wav_channel " + std::to_string(ch) +
                        " not present in " + cfg_.stimulus.wav_path);
    }
    source_ = make_mono(wav.sample_rate, wav.channels[ch]);
  }
}

AudioClip Pipeline::stimulus(double itd, std::uint64_t seed,
                             double noise_rms) const {
  const double shift = cfg_.positive_itd_delays_right ? itd : -itd;
  AudioClip stereo = apply_itd(source_, shift);
  add_white_noise(stereo, noise_rms, seed);
  return stereo;
}

TrialTrace Pipeline::run_trial_traced(
    double itd, std::uint64_t seed,
    std::span<const NeuronId> record_traces) const {
  return run_stimulus(stimulus(itd, seed, cfg_.noise_rms), record_traces);
}

TrialTrace Pipeline::run_stimulus(
    AudioClip stereo, std::span<const NeuronId> record_traces) const {
  TrialTrace out;
  out.stereo = std::move(stereo);
  const AudioClip conditioned = condition(out.stereo, cfg_.frontend);
  const std::int64_t g = std::gcd<std::int64_t>(cfg_.sim_rate,
                                                conditioned.sample_rate);
  out.conditioned =
      resample(conditioned, {cfg_.sim_rate / g, conditioned.sample_rate / g});

  JeffressNetwork net = net_;
  attach_inputs(net, out.conditioned, cfg_.r_src, cfg_.injection_mode);
  net.spec.injection_interpolation = cfg_.injection_interpolation;
  const double duration = out.conditioned.duration();
  out.run = run(net.spec, duration, cfg_.dt, record_traces);
  out.events = poll_loop(out.run.spikes, cfg_.readout, duration);
  out.first_crossing = first_crossing(
      out.conditioned, cfg_.network.input_neuron_params.v_thresh);
  if (!out.events.empty()) {
    out.result.direction = out.events.front().direction;
    if (out.first_crossing) {
      out.result.latency = out.events.front().t - *out.first_crossing;
    }
  }
  return out;
}

TrialResult Pipeline::run_trial(double itd, std::uint64_t seed) const {
  return run_trial_traced(itd, seed).result;
}

double Pipeline::expected_direction(double itd) const {
  const double arrival_itd = cfg_.positive_itd_delays_right ? -itd : itd;
  return net_.layout.itd_detector(arrival_itd, stage_delay());
}

double Pipeline::direction_to_itd(double direction) const {
  const double arrival_itd = net_.layout.detector_itd(direction, stage_delay());
  return cfg_.positive_itd_delays_right ? -arrival_itd : arrival_itd;
}

std::vector<double> SweepConfig::linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    out[k] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  }
  return out;
}

void SweepConfig::validate() const {
  if (itds.empty()) throw ConfigError("sweep: no ITDs given");
  if (trials < 1) throw ConfigError("sweep: trials must be >= 1");
  if (jobs < 1) throw ConfigError("sweep: jobs must be >= 1");
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t itd_index,
                         std::size_t trial_index) {
  return combine_seeds(combine_seeds(base_seed, itd_index), trial_index);
}

SweepResult run_sweep(const Pipeline& pipeline, const SweepConfig& cfg) {
  cfg.validate();
  const double max_itd = std::abs(pipeline.direction_to_itd(0.0));
  for (double itd : cfg.itds) {
    if (std::abs(itd) > max_itd) {
      throw ConfigError("sweep: ITD " + format_fixed(itd * 1e6) +
                        " us outside the detector range +-" +
                        format_fixed(max_itd * 1e6) + " us");
    }
  }
  const std::size_t n_trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t total = cfg.itds.size() * n_trials;
  SweepResult result;
  result.rows.resize(total);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string error;
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= total) return;
      const std::size_t i = k / n_trials;
      const std::size_t t = k % n_trials;
      SweepRow& row = result.rows[k];
      row.itd = cfg.itds[i];
      row.trial = static_cast<int>(t);
      row.seed = trial_seed(cfg.base_seed, i, t);
      try {
        const TrialResult r = pipeline.run_trial(row.itd, row.seed);
        row.direction = r.direction;
        row.latency = r.latency;
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (error.empty()) {
          error = "trial failed (itd " + format_fixed(row.itd * 1e6) +
                  " us, trial " + std::to_string(t) + ", seed " +
                  std::to_string(row.seed) + "): " + e.what();
        }
        next.store(total);
      }
    }
  };
  const int jobs = std::min<int>(cfg.jobs, static_cast<int>(total));
  std::vector<std::thread> threads;
  for (int j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (std::thread& th : threads) th.join();
  if (!error.empty()) throw Error(error);

  compute_stats(result);
  return result;
}

void compute_stats(SweepResult& result) {
  result.stats.clear();
  std::map<double, std::size_t> index;
  for (const SweepRow& row : result.rows) {
    if (index.emplace(row.itd, result.stats.size()).second) {
      result.stats.push_back({row.itd, std::nullopt, std::nullopt, 0, 0, 0});
    }
  }
  std::vector<std::vector<double>> hits(result.stats.size());
  for (const SweepRow& row : result.rows) {
    ItdStats& s = result.stats[index[row.itd]];
    ++s.count;
    if (row.direction) {
      hits[index[row.itd]].push_back(*row.direction);
    } else {
      ++s.misses;
    }
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = 0; k < result.stats.size(); ++k) {
    const std::vector<double>& h = hits[k];
    if (h.empty()) continue;
    ItdStats& s = result.stats[k];
    const double n = static_cast<double>(h.size());
    const double mean = std::accumulate(h.begin(), h.end(), 0.0) / n;
    double ss = 0.0;
    for (double d : h) ss += (d - mean) * (d - mean);
    s.mean = mean;
    s.stddev = h.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    s.outliers = static_cast<int>(std::count_if(
        h.begin(), h.end(), [&](double d) { return std::abs(d - mean) > 3.0; }));
    xs.push_back(s.itd);
    ys.push_back(mean);
  }

  LinearFit& fit = result.fit;
  fit = {};
  fit.points = static_cast<int>(xs.size());
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxy += (xs[k] - mx) * (ys[k] - my);
      sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    fit.slope = sxx > 0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
  } else if (xs.size() == 1) {
    fit.intercept = ys.front();
  }
  for (std::size_t k = 0; k < xs.size(); ++k) {
    fit.max_abs_residual =
        std::max(fit.max_abs_residual,
                 std::abs(ys[k] - (fit.intercept + fit.slope * xs[k])));
  }
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& r) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "itd_us,trial,direction,latency_us,miss\n";
  for (const SweepRow& row : r.rows) {
    out << format_fixed(row.itd * 1e6) << ',' << row.trial << ','
        << (row.direction ? format_fixed(*row.direction) : "") << ','
        << (row.latency ? format_fixed(*row.latency * 1e6) : "") << ','
        << (row.direction ? 0 : 1) << '\n';
  }
}

void write_stats_csv(const std::filesystem::path& path, const SweepResult& r) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "itd_us,mean,std,outliers,misses\n";
  for (const ItdStats& s : r.stats) {
    out << format_fixed(s.itd * 1e6) << ','
        << (s.mean ? format_fixed(*s.mean) : "") << ','
        << (s.stddev ? format_fixed(*s.stddev) : "") << ',' << s.outliers << ','
        << s.misses << '\n';
  }
}

double xcorr_oracle(const AudioClip& stereo, double max_lag) {
  stereo.validate();
  if (stereo.channels.size() != 2) {
    throw ConfigError("xcorr_oracle: expected a stereo clip");
  }
  if (!(max_lag >= 0 && max_lag < stereo.duration())) {
    throw ConfigError("xcorr_oracle: max_lag must be in [0, duration)");
  }
  const std::size_t n = stereo.num_samples();
  const auto centered = [n](const Trace& x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    Trace c(x);
    for (double& v : c) v -= mean;
    return c;
  };
  const Trace a = centered(stereo.channels[0]);
  const Trace b = centered(stereo.channels[1]);
  const auto energy = [](const Trace& x) {
    return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
  };
  if (energy(a) <= 0.0 || energy(b) <= 0.0) {
    throw Error("xcorr_oracle: silent channel (zero variance)");
  }

  const auto max_samples =
      static_cast<long>(std::floor(max_lag * stereo.sample_rate));
  // r(lag) = sum a[i] b[i + lag] over the overlap, normalized by the
  // overlap energies.
  const auto corr = [&](long lag) {
    double ab = 0.0;
    double aa = 0.0;
    double bb = 0.0;
    const long len = static_cast<long>(n);
    for (long i = std::max(0L, -lag); i < len && i + lag < len; ++i) {
      ab += a[i] * b[i + lag];
      aa += a[i] * a[i];
      bb += b[i + lag] * b[i + lag];
    }
    return (aa > 0 && bb > 0) ? ab / std::sqrt(aa * bb) : 0.0;
  };
  std::vector<double> r(2 * max_samples + 1);
  long best = 0;
  for (long lag = -max_samples; lag <= max_samples; ++lag) {
    r[lag + max_samples] = corr(lag);
    if (r[lag + max_samples] > r[best + max_samples]) best = lag;
  }
  double offset = 0.0;
  if (best > -max_samples && best < max_samples) {
    const double ym = r[best - 1 + max_samples];
    const double y0 = r[best + max_samples];
    const double yp = r[best + 1 + max_samples];
    const double denom = ym - 2.0 * y0 + yp;
    if (denom < 0.0) offset = 0.5 * (ym - yp) / denom;
  }
  return (static_cast<double>(best) + offset) / stereo.sample_rate;
}

ResolutionReport resolution(double stage_delay, const GeometryParams& geom) {
  constexpr double kDeg = 180.0 / std::numbers::pi;
  return {woodworth_angle(stage_delay, geom) * kDeg,
          woodworth_angle(2.0 * stage_delay, geom) * kDeg};
}

}  // namespace itdsim
