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

#ifndef ITDSIM_HARNESS_H_
#define ITDSIM_HARNESS_H_

// End-to-end evaluation: stimulus -> ITD shift -> noise -> conditioning ->
// resampling -> network -> readout, plus ITD sweeps, per-ITD statistics and
// a cross-correlation reference estimator.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "itdsim/audio_clip.h"
#include "itdsim/frontend.h"
#include "itdsim/geometry.h"
#include "itdsim/jeffress.h"
#include "itdsim/lif.h"
#include "itdsim/readout.h"
#include "itdsim/stimulus.h"

namespace itdsim {

struct StimulusConfig {
  ClapSpec clap;
  int sample_rate = 192000;  // Hz, playback rate of the stimulus
  double duration = 1.5e-3;  // s
  // When set, the clip is read from this WAV file instead of synthesized.
  std::string wav_path;
  int wav_channel = 0;
};

struct PipelineConfig {
  StimulusConfig stimulus;
  FrontEndParams frontend;
  JeffressConfig network;
  ReadoutConfig readout;  // detector ids are filled from the network layout
  GeometryParams geometry;
  double dt = 0.1e-6;
  int sim_rate = 10'000'000;  // Hz, rate of the injected traces
  double r_src = 110e3;
  InjectionMode injection_mode = InjectionMode::kResistive;
  Interpolation injection_interpolation = Interpolation::kZeroOrderHold;
  // Sign convention of stimulus ITDs: true means a positive ITD delays the
  // right channel. false flips every requested ITD before shifting.
  bool positive_itd_delays_right = true;
  double noise_rms = 0.0;  // V, white noise added to each raw channel

  void validate() const;
};

struct TrialResult {
  std::optional<double> direction;
  std::optional<double> latency;  // s
};

// Everything one trial produced, for the simulate command and diagnostics.
struct TrialTrace {
  AudioClip stereo;       // raw shifted (and noisy) stimulus
  AudioClip conditioned;  // at the simulator rate
  RunResult run;
  std::vector<DirectionEvent> events;
  std::optional<double> first_crossing;  // s
  TrialResult result;
};

// Prepared network and stimulus shared by every trial of a sweep. Immutable
// after construction; run_trial may be called concurrently.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg);

  TrialResult run_trial(double itd, std::uint64_t seed) const;
  TrialTrace run_trial_traced(double itd, std::uint64_t seed,
                              std::span<const NeuronId> record_traces = {}) const;

  // Runs an already shifted raw stereo stimulus through the pipeline.
  TrialTrace run_stimulus(AudioClip stereo,
                          std::span<const NeuronId> record_traces = {}) const;

  // Raw stereo stimulus for a stimulus ITD, with optional noise.
  AudioClip stimulus(double itd, std::uint64_t seed, double noise_rms) const;

  // Detector index expected for a stimulus ITD, and the stimulus ITD that a
  // (fractional) detector index stands for.
  double expected_direction(double itd) const;
  double direction_to_itd(double direction) const;

  const PipelineConfig& config() const { return cfg_; }
  const JeffressNetwork& network() const { return net_; }
  const CalibrationResult& calibration() const { return calibration_; }
  double stage_delay() const { return calibration_.stage_delay_mean; }
  const AudioClip& source() const { return source_; }

 private:
  PipelineConfig cfg_;
  JeffressNetwork net_;
  CalibrationResult calibration_;
  AudioClip source_;  // mono
};

struct SweepConfig {
  std::vector<double> itds;  // s, stimulus convention
  int trials = 100;
  std::uint64_t base_seed = 1;
  int jobs = 1;

  static std::vector<double> linspace(double lo, double hi, int n);
  void validate() const;
};

struct SweepRow {
  double itd = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::optional<double> direction;
  std::optional<double> latency;
};

struct ItdStats {
  double itd = 0.0;
  std::optional<double> mean;
  std::optional<double> stddev;
  int outliers = 0;
  int misses = 0;
  int count = 0;
};

struct LinearFit {
  double slope = 0.0;  // detector units per second of ITD
  double intercept = 0.0;
  double max_abs_residual = 0.0;
  int points = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<ItdStats> stats;
  LinearFit fit;
};

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t itd_index,
                         std::size_t trial_index);

SweepResult run_sweep(const Pipeline& pipeline, const SweepConfig& cfg);

// Per-ITD mean/std/outliers/misses (rows grouped by ITD in first-seen
// order) and a least-squares line through the available means. Outliers
// deviate more than 3 detector units from their ITD's mean.
void compute_stats(SweepResult& result);

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& r);
void write_stats_csv(const std::filesystem::path& path, const SweepResult& r);

// Lag of the right channel relative to the left (positive: right later),
// by normalized cross-correlation over |lag| <= max_lag with parabolic
// peak refinement.
double xcorr_oracle(const AudioClip& stereo, double max_lag);

struct ResolutionReport {
  double per_stage_deg = 0.0;     // angle spanned by one stage delay
  double per_detector_deg = 0.0;  // angle spanned by the 2-delay pitch
};

ResolutionReport resolution(double stage_delay, const GeometryParams& geom);

}  // namespace itdsim

#endif  // ITDSIM_HARNESS_H_
