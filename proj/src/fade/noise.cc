// fade/noise.cc

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

#include "fade/noise.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "fade/fft.h"
#include "fade/rng.h"

namespace fade {

NoiseSource load_noise(const std::string &path, const std::string &label) {
  NoiseSource n;
  n.kind = NoiseKind::kFile;
  n.audio = read_wav(path);
  n.label = label;
  if (rms_level(n.audio) <= 0.0) throw LoadError("load_noise: " + path + " has zero RMS");
  return n;
}

AudioBuffer mix_at_snr(const AudioBuffer &speech, const NoiseSource &noise, SnrSpec snr,
                       uint64_t rng_seed) {
  validate_audio(speech, "mix_at_snr: speech");
  validate_audio(noise.audio, "mix_at_snr: noise");
  if (!std::isfinite(snr.snr_db)) throw InvalidArgument("mix_at_snr: non-finite SNR");
  if (speech.sample_rate != noise.audio.sample_rate)
    throw InvalidArgument("mix_at_snr: sample rate mismatch between speech and noise");
  const size_t ls = speech.samples.size();
  const size_t ln = noise.audio.samples.size();
  if (ln <= ls)
    throw InvalidArgument("mix_at_snr: noise (" + std::to_string(ln) +
                          " samples) must be strictly longer than speech (" +
                          std::to_string(ls) + ")");
  const double rms_speech = rms_level(speech);
  if (rms_speech <= 0.0) throw InvalidArgument("mix_at_snr: silent speech");

  Rng rng(rng_seed);
  const size_t offset = rng.uniform_int(ln - ls + 1);

  double acc = 0.0;
  for (size_t i = 0; i < ls; ++i) {
    const double v = noise.audio.samples[offset + i];
    acc += v * v;
  }
  const double rms_section = std::sqrt(acc / static_cast<double>(ls));
  if (rms_section <= 0.0)
    throw InvalidArgument("mix_at_snr: drawn noise section is silent");

  const double scale = (rms_speech / rms_section) * std::pow(10.0, -snr.snr_db / 20.0);

  AudioBuffer out;
  out.sample_rate = speech.sample_rate;
  out.samples.resize(ls);
  for (size_t i = 0; i < ls; ++i)
    out.samples[i] = speech.samples[i] + scale * noise.audio.samples[offset + i];
  return out;
}

std::vector<double> welch_power_spectrum(const AudioBuffer &a, int nfft) {
  validate_audio(a, "welch_power_spectrum");
  if (nfft < 2 || (nfft & (nfft - 1)) != 0)
    throw InvalidArgument("welch_power_spectrum: nfft must be a power of two >= 2");
  const int hop = nfft / 2;
  const int len = static_cast<int>(a.samples.size());

  std::vector<double> window(nfft);
  for (int i = 0; i < nfft; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (nfft - 1));

  std::vector<double> psd(nfft / 2 + 1, 0.0);
  std::vector<double> frame(nfft);
  int count = 0;
  for (int start = 0; start + nfft <= len; start += hop) {
    for (int i = 0; i < nfft; ++i) frame[i] = a.samples[start + i] * window[i];
    std::vector<double> mag = real_fft_magnitude(frame.data(), frame.size(), nfft);
    for (size_t k = 0; k < psd.size(); ++k) psd[k] += mag[k] * mag[k];
    ++count;
  }
  if (count == 0) {
    // Input shorter than one segment: single zero-padded frame.
    for (int i = 0; i < len; ++i) frame[i] = a.samples[i] * window[i];
    for (int i = len; i < nfft; ++i) frame[i] = 0.0;
    std::vector<double> mag = real_fft_magnitude(frame.data(), frame.size(), nfft);
    for (size_t k = 0; k < psd.size(); ++k) psd[k] = mag[k] * mag[k];
    return psd;
  }
  for (double &p : psd) p /= count;
  return psd;
}

NoiseSource gen_stationary_speech_shaped(const AudioBuffer &reference, double duration_s,
                                         uint64_t rng_seed) {
  validate_audio(reference, "gen_stationary_speech_shaped: reference");
  if (duration_s < 1.0)
    throw InvalidArgument("gen_stationary_speech_shaped: duration must be >= 1 s");

  const int fs = reference.sample_rate;
  const size_t out_len = static_cast<size_t>(std::llround(duration_s * fs));

  // Phase-scramble the reference's own spectrum: the magnitudes (and with
  // them the long-term power spectrum) are kept exactly, the random phases
  // spread the energy into a stationary Gaussian-like carrier.
  const size_t nfft = next_pow2(std::max(out_len, reference.samples.size()));
  std::vector<std::complex<double>> spec(nfft, {0.0, 0.0});
  for (size_t i = 0; i < reference.samples.size(); ++i) spec[i] = {reference.samples[i], 0.0};
  fft_inplace(spec, false);

  Rng rng(rng_seed);
  for (size_t k = 1; k < nfft / 2; ++k) {
    const double amp = std::abs(spec[k]);
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    spec[k] = std::polar(amp, phase);
    spec[nfft - k] = std::conj(spec[k]);
  }
  spec[0] = {0.0, 0.0};  // no DC offset
  spec[nfft / 2] = {std::abs(spec[nfft / 2]), 0.0};

  fft_inplace(spec, true);

  NoiseSource out;
  out.kind = NoiseKind::kStationarySurrogate;
  out.label = "stationary-surrogate";
  out.audio.sample_rate = fs;
  out.audio.samples.resize(out_len);
  for (size_t i = 0; i < out_len; ++i) out.audio.samples[i] = spec[i].real();

  const double target = rms_level(reference);
  const double actual = rms_level(out.audio);
  if (actual <= 0.0)
    throw InvalidArgument("gen_stationary_speech_shaped: reference spectrum is empty");
  const double g = target / actual;
  for (double &s : out.audio.samples) s *= g;
  return out;
}

NoiseSource gen_gated(const NoiseSource &base, double max_gap_ms, uint64_t rng_seed,
                      const GateConfig &cfg) {
  validate_audio(base.audio, "gen_gated: base");
  if (!(max_gap_ms > 0.0)) throw InvalidArgument("gen_gated: max_gap_ms must be > 0");
  if (!(cfg.on_min_ms > 0.0 && cfg.on_min_ms <= cfg.on_max_ms))
    throw InvalidArgument("gen_gated: invalid on-duration range");
  if (!(cfg.off_min_ms > 0.0 && cfg.off_min_ms <= cfg.off_max_ms))
    throw InvalidArgument("gen_gated: invalid off-duration range");

  const int fs = base.audio.sample_rate;
  const size_t len = base.audio.samples.size();
  const double off_hi_ms = std::min(cfg.off_max_ms, max_gap_ms);
  const double off_lo_ms = std::min(cfg.off_min_ms, off_hi_ms);
  const size_t ramp = static_cast<size_t>(std::llround(cfg.ramp_ms * 1e-3 * fs));

  Rng rng(rng_seed);
  // Build the envelope as a sequence of on/off segments; ramps are carved out
  // of the segment they lead into, so an off-interval never exceeds its drawn
  // duration.
  std::vector<double> env(len, 1.0);
  size_t pos = 0;
  bool on = rng.uniform() < 0.5;
  while (pos < len) {
    const double dur_ms =
        on ? rng.uniform(cfg.on_min_ms, cfg.on_max_ms) : rng.uniform(off_lo_ms, off_hi_ms);
    size_t seg = static_cast<size_t>(std::llround(dur_ms * 1e-3 * fs));
    if (seg == 0) seg = 1;
    seg = std::min(seg, len - pos);
    if (!on) {
      // Raised-cosine fall at the start of the gap and rise at its end; short
      // gaps take the larger of the two so the envelope stays continuous.
      for (size_t i = 0; i < seg; ++i) {
        double v = 0.0;
        if (ramp > 0) {
          const double fall =
              i < ramp ? 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(i + 1) / ramp)) : 0.0;
          const double rise =
              seg - 1 - i < ramp ? 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(seg - i) / ramp))
                                 : 0.0;
          v = std::max(fall, rise);
        }
        env[pos + i] = v;
      }
    }
    pos += seg;
    on = !on;
  }

  NoiseSource out;
  out.kind = NoiseKind::kGatedSurrogate;
  out.label = base.label + "-gated";
  out.audio.sample_rate = fs;
  out.audio.samples.resize(len);
  for (size_t i = 0; i < len; ++i) out.audio.samples[i] = base.audio.samples[i] * env[i];
  return out;
}

}  // namespace fade
