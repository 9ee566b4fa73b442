// fade/audio.h

// Copyright 2026  The fadekit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef FADE_AUDIO_H_
#define FADE_AUDIO_H_

#include <string>
#include <vector>

#include "fade/common.h"

namespace fade {

// Mono sampled waveform. Samples are nominally full-scale -1..1 but the
// pipeline is float end-to-end; mixtures may exceed that range.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 0;

  size_t size() const { return samples.size(); }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Throws InvalidArgument unless sample_rate > 0, the buffer is nonempty and
// every sample is finite.
void validate_audio(const AudioBuffer &a, const std::string &context);

// Root of the mean squared sample value.
double rms_level(const AudioBuffer &a);

enum class WavFormat { kPcm16, kFloat32 };

// Mono WAV only; 16-bit integer PCM and 32-bit float PCM are accepted.
// Multichannel input and other encodings raise LoadError.
AudioBuffer read_wav(const std::string &path);

void write_wav(const std::string &path, const AudioBuffer &a,
               WavFormat format = WavFormat::kFloat32);

}  // namespace fade

#endif  // FADE_AUDIO_H_
