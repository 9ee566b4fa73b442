// fade/dsp.h

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

#ifndef FADE_DSP_H_
#define FADE_DSP_H_

#include <vector>

#include "fade/audio.h"
#include "fade/common.h"

namespace fade {

// Mel scale: Mel(f) = 2595 * log10(1 + f / 700). hz_to_mel throws on negative
// or non-finite input; the two functions are exact inverses.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular mel filterbank. Band centers are equally spaced on the mel axis
// with spacing delta = (mel(f_max) - mel(f_min)) / num_bands; band i peaks at
// mel(f_min) + (i + 0.5) * delta and falls to zero at the centers of its
// neighbours, so adjacent triangles meet at band centers. band_edges_hz holds
// the num_bands + 1 boundary points (equally spaced on the mel axis).
struct MelFilterbank {
  int num_bands = 0;
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;
  std::vector<double> band_centers_hz;
  std::vector<double> band_edges_hz;
  // weights(band, bin) over fft_size/2 + 1 magnitude bins.
  Mat weights;
};

MelFilterbank build_mel_filterbank(int num_bands, double f_min_hz, double f_max_hz,
                                   int fft_size, int sample_rate);

struct StftConfig {
  double window_ms = 25.0;
  double shift_ms = 10.0;
  bool pre_emphasis = false;
  double pre_emphasis_coeff = 0.97;
};

// Hamming-windowed magnitude spectra, one row per frame. The first frame
// starts at sample 0 and frames are laid out without centering, so the frame
// count is exactly floor((len - win) / shift) + 1. FFT size is the next power
// of two >= window length (zero padded).
struct Stft {
  Mat magnitudes;  // frames x (fft_size / 2 + 1)
  int window_samples = 0;
  int shift_samples = 0;
  int fft_size = 0;
};

Stft stft(const AudioBuffer &audio, const StftConfig &cfg);

// Log-compressed mel-band energies on a (channel x frame) grid. Natural log
// of the per-band power, clamped below at kLogMelFloorEnergy before the log
// so that digital silence stays finite.
inline constexpr double kLogMelFloorEnergy = 1e-10;

struct LogMelSpectrogram {
  Mat values;  // num_bands x frames
  double frame_shift_s = 0.0;
  std::vector<double> band_centers_hz;

  int num_channels() const { return values.rows(); }
  int num_frames() const { return values.cols(); }
};

LogMelSpectrogram log_mel_spectrogram(const AudioBuffer &audio, const MelFilterbank &fb,
                                      const StftConfig &cfg);

}  // namespace fade

#endif  // FADE_DSP_H_
