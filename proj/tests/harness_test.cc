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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "itdsim/error.h"
#include "itdsim/harness.h"
#include "itdsim/random.h"

using namespace itdsim;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

const Pipeline& noiseless() {
  static const Pipeline p{PipelineConfig{}};
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

SweepRow row(double itd, int trial, std::optional<double> dir) {
  return {itd, trial, 0, dir, dir ? std::optional<double>(1e-4) : std::nullopt};
}

}  // namespace

TEST_CASE("xcorr_oracle returns zero for identical channels") {
  const AudioClip mono = synth_clap(ClapSpec{}, 192000, 2e-3);
  const AudioClip st = make_stereo(192000, mono.channels[0], mono.channels[0]);
  CHECK(std::abs(xcorr_oracle(st, 500e-6)) < 1e-9);
}

TEST_CASE("xcorr_oracle recovers a constructed fractional shift") {
  const AudioClip mono = synth_clap(ClapSpec{}, 192000, 2e-3);
  for (double itd : {149e-6, -149e-6, 28.4e-6, -71.3e-6}) {
    const double est = xcorr_oracle(apply_itd(mono, itd), 500e-6);
    // Half a sample at 192 kHz.
    CHECK(std::abs(est - itd) <= 2.6e-6);
  }
}

TEST_CASE("xcorr_oracle rejects a silent channel") {
  const AudioClip mono = synth_clap(ClapSpec{}, 192000, 2e-3);
  const AudioClip st = make_stereo(192000, mono.channels[0], Trace(mono.num_samples(), 0.0));
  CHECK_THROWS_AS(xcorr_oracle(st, 500e-6), Error);
  CHECK_THROWS_AS(xcorr_oracle(mono, 500e-6), Error);
}

TEST_CASE("stats of constant rows have zero spread") {
  SweepResult r;
  for (int t = 0; t < 5; ++t) r.rows.push_back(row(10e-6, t, 17.0));
  compute_stats(r);
  REQUIRE(r.stats.size() == 1);
  CHECK(*r.stats[0].mean == 17.0);
  CHECK(*r.stats[0].stddev == 0.0);
  CHECK(r.stats[0].misses == 0);
  CHECK(r.stats[0].count == 5);
}

TEST_CASE("all-miss ITDs have absent stats and are left out of the fit") {
  SweepResult r;
  r.rows = {row(-10e-6, 0, 30.0), row(0.0, 0, std::nullopt), row(0.0, 1, std::nullopt),
            row(10e-6, 0, 20.0)};
  compute_stats(r);
  REQUIRE(r.stats.size() == 3);
  CHECK_FALSE(r.stats[1].mean);
  CHECK_FALSE(r.stats[1].stddev);
  CHECK(r.stats[1].misses == 2);
  CHECK(r.fit.points == 2);
  CHECK(r.fit.slope == Approx(-0.5e6));
  CHECK(r.fit.intercept == Approx(25.0));
}

TEST_CASE("stats are recomputable from rows") {
  Rng rng(12);
  SweepResult r;
  const std::vector<double> itds = {-50e-6, -20e-6, 0, 35e-6};
  for (double itd : itds) {
    for (int t = 0; t < 40; ++t) {
      const double u = rng.uniform();
      r.rows.push_back(row(itd, t, u < 0.1 ? std::nullopt
                                           : std::optional<double>(24.5 - itd * 1e5 + 2 * rng.gaussian())));
    }
  }
  compute_stats(r);
  // Independent recomputation.
  std::map<double, std::vector<double>> groups;
  std::map<double, int> misses;
  for (const SweepRow& x : r.rows) {
    if (x.direction) groups[x.itd].push_back(*x.direction); else ++misses[x.itd];
  }
  std::vector<double> xs, ys;
  for (const ItdStats& s : r.stats) {
    const auto& g = groups[s.itd];
    double m = 0;
    for (double d : g) m += d;
    m /= g.size();
    double ss = 0;
    int out = 0;
    for (double d : g) {
      ss += (d - m) * (d - m);
      out += std::abs(d - m) > 3;
    }
    CHECK(*s.mean == Approx(m).epsilon(1e-12));
    CHECK(*s.stddev == Approx(std::sqrt(ss / (g.size() - 1))).epsilon(1e-12));
    CHECK(s.outliers == out);
    CHECK(s.misses == misses[s.itd]);
    xs.push_back(s.itd);
    ys.push_back(m);
  }
  // Normal equations for the least-squares line.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k]; sy += ys[k]; sxx += xs[k] * xs[k]; sxy += xs[k] * ys[k];
  }
  const double n = xs.size();
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(r.fit.slope == Approx(slope).epsilon(1e-9));
  CHECK(r.fit.intercept == Approx((sy - slope * sx) / n).epsilon(1e-9));
}

TEST_CASE("pipeline calibrates the tuned chain") {
  CHECK(std::abs(noiseless().stage_delay() - 3.8e-6) < 0.1e-6);
  CHECK(noiseless().config().readout.detectors.size() == 50);
  CHECK(noiseless().expected_direction(0.0) == Approx(24.5));
  CHECK(noiseless().direction_to_itd(noiseless().expected_direction(77e-6)) ==
        Approx(77e-6));
}

TEST_CASE("itd 0 lands in the center with sub-millisecond latency") {
  const TrialResult r = noiseless().run_trial(0.0, 1);
  REQUIRE(r.direction);
  REQUIRE(r.latency);
  CHECK(std::abs(*r.direction - 24.5) <= 1.0);
  CHECK(*r.latency > 0);
  CHECK(*r.latency <= 0.5e-3);
}

TEST_CASE("itd 149 us lands within 2 of the expected detector") {
  for (double itd : {149e-6, -149e-6}) {
    const TrialResult r = noiseless().run_trial(itd, 1);
    REQUIRE(r.direction);
    CHECK(std::abs(*r.direction - noiseless().expected_direction(itd)) <= 2.0);
  }
}

TEST_CASE("mirrored ITDs give mirrored means") {
  SweepConfig sc;
  sc.itds = {-60e-6, 60e-6};
  sc.trials = 2;
  const SweepResult r = run_sweep(noiseless(), sc);
  CHECK(std::abs(*r.stats[0].mean + *r.stats[1].mean - 49.0) <= 0.5);
}

TEST_CASE("a sweep yields one row per itd and trial") {
  SweepConfig sc;
  sc.itds = {-40e-6, 0, 40e-6};
  sc.trials = 2;
  const SweepResult r = run_sweep(noiseless(), sc);
  REQUIRE(r.rows.size() == 6);
  CHECK(r.stats.size() == 3);
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(r.rows[k].itd == sc.itds[k / 2]);
    CHECK(r.rows[k].trial == static_cast<int>(k % 2));
    CHECK(r.rows[k].seed == trial_seed(1, k / 2, k % 2));
  }
}

TEST_CASE("sweeps are byte-reproducible and independent of job count") {
  PipelineConfig cfg;
  cfg.noise_rms = 0.05;
  const Pipeline noisy(cfg);
  SweepConfig sc;
  sc.itds = {-100e-6, 0, 100e-6};
  sc.trials = 4;
  sc.base_seed = 77;
  const fs::path dir = fs::temp_directory_path() / "itdsim_harness_test";
  fs::create_directories(dir);
  write_sweep_csv(dir / "a.csv", run_sweep(noisy, sc));
  write_sweep_csv(dir / "b.csv", run_sweep(noisy, sc));
  sc.jobs = 3;
  const SweepResult par = run_sweep(noisy, sc);
  write_sweep_csv(dir / "c.csv", par);
  write_stats_csv(dir / "s.csv", par);
  const std::string a = slurp(dir / "a.csv");
  CHECK(a == slurp(dir / "b.csv"));
  CHECK(a == slurp(dir / "c.csv"));
  CHECK(a.starts_with("itd_us,trial,direction,latency_us,miss\n"));
  CHECK(slurp(dir / "s.csv").starts_with("itd_us,mean,std,outliers,misses\n"));
  // A different seed changes the noisy rows.
  sc.base_seed = 78;
  write_sweep_csv(dir / "d.csv", run_sweep(noisy, sc));
  CHECK(a != slurp(dir / "d.csv"));
}

TEST_CASE("sub-threshold claps in light noise are always missed") {
  PipelineConfig cfg;
  cfg.stimulus.clap.amplitude = 0.5;
  cfg.noise_rms = 0.02;
  const Pipeline quiet(cfg);
  SweepConfig sc;
  sc.itds = {-80e-6, 0, 80e-6};
  sc.trials = 10;
  const SweepResult r = run_sweep(quiet, sc);
  for (const SweepRow& x : r.rows) {
    CHECK_FALSE(x.direction);
    CHECK_FALSE(x.latency);
  }
  for (const ItdStats& s : r.stats) {
    CHECK(s.misses == 10);
    CHECK_FALSE(s.mean);
  }
  const TrialTrace t = quiet.run_trial_traced(0.0, 3);
  CHECK(t.events.empty());
  CHECK_FALSE(t.first_crossing);
}

TEST_CASE("sweep ITDs outside the detector range are rejected") {
  SweepConfig sc;
  sc.itds = {200e-6};
  CHECK_THROWS_AS(run_sweep(noiseless(), sc), ConfigError);
  sc.itds = {};
  CHECK_THROWS_AS(run_sweep(noiseless(), sc), ConfigError);
  sc.itds = {0};
  sc.trials = 0;
  CHECK_THROWS_AS(run_sweep(noiseless(), sc), ConfigError);
}

TEST_CASE("a failing trial reports its itd, trial and seed") {
  PipelineConfig cfg;
  cfg.stimulus.clap.onset_time = 0.02e-3;
  cfg.stimulus.duration = 0.1e-3;
  const Pipeline shortclip(cfg);
  SweepConfig sc;
  sc.itds = {150e-6};
  sc.trials = 1;
  CHECK_THROWS_WITH(run_sweep(shortclip, sc),
                    ContainsSubstring("itd 150.000 us, trial 0, seed " +
                                      std::to_string(trial_seed(1, 0, 0))));
}

TEST_CASE("resolution reports per stage and per detector angles") {
  const ResolutionReport r = resolution(3.8e-6, GeometryParams{});
  CHECK(r.per_stage_deg == Approx(1.464).margin(0.01));
  CHECK(r.per_detector_deg == Approx(2.93).margin(0.01));
}
