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

#ifndef ITDSIM_WAV_H_
#define ITDSIM_WAV_H_

#include <filesystem>

#include "itdsim/audio_clip.h"

namespace itdsim {

// Reads a RIFF/WAVE file holding 16- or 24-bit integer PCM or 32-bit IEEE
// float samples in one or two channels. Integer full scale maps to +-1.0 V;
// no gain or offset is applied. Throws Error on anything else.
AudioClip load_wav(const std::filesystem::path& path);

enum class WavEncoding { kPcm16, kPcm24, kFloat32 };

// Writes `clip` in the given encoding. Integer encodings clip to full scale.
void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding = WavEncoding::kPcm16);

}  // namespace itdsim

#endif  // ITDSIM_WAV_H_
