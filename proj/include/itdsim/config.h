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

#ifndef ITDSIM_CONFIG_H_
#define ITDSIM_CONFIG_H_

// Run configuration: one JSON document holding the full parameter tree.
// Keys are optional (missing keys keep their defaults) but unknown keys are
// rejected, and every loaded value is validated.

#include <filesystem>
#include <string>

#include "itdsim/harness.h"
#include "itdsim/readout.h"

namespace itdsim {

struct RunConfig {
  PipelineConfig pipeline;
  SweepConfig sweep = default_sweep();
  PwmConfig pwm;
  std::string out_dir = "out";

  static SweepConfig default_sweep();
  void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
// Full tree, every field present; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& config);

}  // namespace itdsim

#endif  // ITDSIM_CONFIG_H_
