// fade/dsp.cc

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

#include "fade/dsp.h"

#include <cmath>

#include "fade/fft.h"

namespace fade {

double hz_to_mel(double hz) {
  if (!std::isfinite(hz) || hz < 0.0)
    throw InvalidArgument("hz_to_mel: frequency must be finite and >= 0");
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) {
  if (!std::isfinite(mel) || mel < 0.0)
    throw InvalidArgument("mel_to_hz: mel value must be finite and >= 0");
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank build_mel_filterbank(int num_bands, double f_min_hz, double f_max_hz,
                                   int fft_size, int sample_rate) {
  if (num_bands < 2) throw InvalidArgument("build_mel_filterbank: need at least 2 bands");
  if (!(f_min_hz >= 0.0 && f_min_hz < f_max_hz && f_max_hz <= sample_rate / 2.0))
    throw InvalidArgument("build_mel_filterbank: need 0 <= f_min < f_max <= sample_rate/2");
  if (fft_size <= 0 || sample_rate <= 0)
    throw InvalidArgument("build_mel_filterbank: fft_size and sample_rate must be positive");

  MelFilterbank fb;
  fb.num_bands = num_bands;
  fb.f_min_hz = f_min_hz;
  fb.f_max_hz = f_max_hz;

  const double mel_lo = hz_to_mel(f_min_hz);
  const double mel_hi = hz_to_mel(f_max_hz);
  const double delta = (mel_hi - mel_lo) / num_bands;

  fb.band_centers_hz.resize(num_bands);
  for (int i = 0; i < num_bands; ++i)
    fb.band_centers_hz[i] = mel_to_hz(mel_lo + (i + 0.5) * delta);
  fb.band_edges_hz.resize(num_bands + 1);
  for (int i = 0; i <= num_bands; ++i) fb.band_edges_hz[i] = mel_to_hz(mel_lo + i * delta);

  const int num_bins = fft_size / 2 + 1;
  fb.weights = Mat(num_bands, num_bins);
  for (int bin = 0; bin < num_bins; ++bin) {
    const double f = static_cast<double>(bin) * sample_rate / fft_size;
    const double m = hz_to_mel(f);
    for (int band = 0; band < num_bands; ++band) {
      const double center = mel_lo + (band + 0.5) * delta;
      const double w = 1.0 - std::abs(m - center) / delta;
      if (w > 0.0) fb.weights(band, bin) = w;
    }
  }
  for (int band = 0; band < num_bands; ++band) {
    double sum = 0.0;
    for (int bin = 0; bin < num_bins; ++bin) sum += fb.weights(band, bin);
    if (sum <= 0.0)
      throw InvalidArgument("build_mel_filterbank: band " + std::to_string(band) +
                            " has no FFT bin support; increase fft_size");
  }
  return fb;
}

Stft stft(const AudioBuffer &audio, const StftConfig &cfg) {
  validate_audio(audio, "stft");
  const int win = static_cast<int>(std::lround(cfg.window_ms * 1e-3 * audio.sample_rate));
  const int shift = static_cast<int>(std::lround(cfg.shift_ms * 1e-3 * audio.sample_rate));
  if (win < 1 || shift < 1)
    throw InvalidArgument("stft: window and shift must be at least one sample");
  const int len = static_cast<int>(audio.samples.size());
  if (len < win)
    throw InputTooShort("stft: audio (" + std::to_string(len) + " samples) shorter than one window (" +
                        std::to_string(win) + ")");

  Stft out;
  out.window_samples = win;
  out.shift_samples = shift;
  out.fft_size = static_cast<int>(next_pow2(static_cast<size_t>(win)));

  const int frames = (len - win) / shift + 1;
  const int num_bins = out.fft_size / 2 + 1;
  out.magnitudes = Mat(frames, num_bins);

  std::vector<double> window(win);
  for (int n = 0; n < win; ++n)
    window[n] = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / (win - 1));

  std::vector<double> frame(win);
  for (int t = 0; t < frames; ++t) {
    const int start = t * shift;
    if (cfg.pre_emphasis) {
      for (int n = 0; n < win; ++n) {
        const int idx = start + n;
        const double prev = idx > 0 ? audio.samples[idx - 1] : audio.samples[0];
        frame[n] = (audio.samples[idx] - cfg.pre_emphasis_coeff * prev) * window[n];
      }
    } else {
      for (int n = 0; n < win; ++n) frame[n] = audio.samples[start + n] * window[n];
    }
    std::vector<double> mag = real_fft_magnitude(frame.data(), frame.size(),
                                                 static_cast<size_t>(out.fft_size));
    for (int k = 0; k < num_bins; ++k) out.magnitudes(t, k) = mag[k];
  }
  return out;
}

LogMelSpectrogram log_mel_spectrogram(const AudioBuffer &audio, const MelFilterbank &fb,
                                      const StftConfig &cfg) {
  const Stft spec = stft(audio, cfg);
  const int frames = spec.magnitudes.rows();
  const int num_bins = spec.magnitudes.cols();
  if (num_bins != fb.weights.cols())
    throw InvalidArgument("log_mel_spectrogram: filterbank built for a different FFT size");

  LogMelSpectrogram lm;
  lm.frame_shift_s = cfg.shift_ms * 1e-3;
  lm.band_centers_hz = fb.band_centers_hz;
  lm.values = Mat(fb.num_bands, frames);

  for (int t = 0; t < frames; ++t) {
    for (int band = 0; band < fb.num_bands; ++band) {
      double energy = 0.0;
      const double *w = fb.weights.row(band);
      const double *m = spec.magnitudes.row(t);
      for (int k = 0; k < num_bins; ++k) energy += w[k] * m[k] * m[k];
      lm.values(band, t) = std::log(std::max(energy, kLogMelFloorEnergy));
    }
  }
  return lm;
}

}  // namespace fade
