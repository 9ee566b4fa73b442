// fade/noise.h

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

#ifndef FADE_NOISE_H_
#define FADE_NOISE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fade/audio.h"

namespace fade {

enum class NoiseKind { kFile, kStationarySurrogate, kGatedSurrogate };

// A masker. File-backed sources are first class (standardized noises are not
// redistributable); the surrogate generators let the full pipeline run with
// zero external assets.
struct NoiseSource {
  NoiseKind kind = NoiseKind::kFile;
  AudioBuffer audio;
  std::string label;
};

NoiseSource load_noise(const std::string &path, const std::string &label);

// SNR convention used throughout: broadband RMS of the speech over the RMS of
// the scaled noise section, 20*log10, measured over the full sentence extent.
struct SnrSpec {
  double snr_db = 0.0;
};

// Adds a uniformly random contiguous section of the noise, scaled so that
// 20*log10(rms_speech / rms_scaled_section) equals snr_db. The speech samples
// are untouched; deterministic given the seed. The noise must be strictly
// longer than the speech and the speech must not be silent.
AudioBuffer mix_at_snr(const AudioBuffer &speech, const NoiseSource &noise, SnrSpec snr,
                       uint64_t rng_seed);

// Long-term average power spectrum (Welch, Hann window, 50% overlap) with
// nfft/2 + 1 bins; shared by the surrogate generator and the spectral-match
// test oracles.
std::vector<double> welch_power_spectrum(const AudioBuffer &a, int nfft);

// Stationary noise whose long-term spectrum matches the reference's long-term
// average spectrum (random-phase resynthesis), RMS-matched to the reference.
NoiseSource gen_stationary_speech_shaped(const AudioBuffer &reference, double duration_s,
                                         uint64_t rng_seed);

struct GateConfig {
  double on_min_ms = 80.0;
  double on_max_ms = 600.0;
  double off_min_ms = 20.0;
  double off_max_ms = 250.0;
  double ramp_ms = 10.0;
};

// Multiplies the base noise with a random on/off envelope (raised-cosine
// ramps). Every off-interval is at most max_gap_ms long; on/off durations are
// uniform over the configured ranges (the off range is clipped to max_gap_ms).
NoiseSource gen_gated(const NoiseSource &base, double max_gap_ms, uint64_t rng_seed,
                      const GateConfig &cfg = GateConfig());

}  // namespace fade

#endif  // FADE_NOISE_H_
