// fade/features.cc

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

#include "fade/features.h"

#include <algorithm>
#include <cmath>

#include "fade/fft.h"

namespace fade {

std::string feature_kind_name(FeatureKind kind) {
  return kind == FeatureKind::kMfcc ? "mfcc" : "sgbfb";
}

FeatureKind feature_kind_from_name(const std::string &name) {
  if (name == "mfcc") return FeatureKind::kMfcc;
  if (name == "sgbfb") return FeatureKind::kSgbfb;
  throw InvalidArgument("unknown feature kind: " + name);
}

Mat dct_matrix(int n, int k) {
  if (n < 1 || k < 1 || k > n)
    throw InvalidArgument("dct_matrix: need 1 <= k <= n");
  Mat m(k, n);
  const double scale0 = std::sqrt(1.0 / n);
  const double scale = std::sqrt(2.0 / n);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i)
      m(j, i) = (j == 0 ? scale0 : scale) * std::cos(M_PI * (i + 0.5) * j / n);
  return m;
}

FeatureMatrix mfcc(const LogMelSpectrogram &lm, const MfccConfig &cfg) {
  const int bands = lm.num_channels();
  const int frames = lm.num_frames();
  if (frames == 0) throw InvalidArgument("mfcc: empty spectrogram");
  if (cfg.num_ceps < 1 || cfg.num_ceps > bands)
    throw InvalidArgument("mfcc: num_ceps must be in [1, num mel bands]");
  if (!cfg.include_c0 && cfg.num_ceps + 1 > bands)
    throw InvalidArgument("mfcc: num_ceps + 1 exceeds band count with c0 dropped");
  if (cfg.delta_orders < 0 || cfg.delta_orders > 2)
    throw InvalidArgument("mfcc: delta_orders must be 0, 1 or 2");
  if (cfg.delta_window < 1) throw InvalidArgument("mfcc: delta_window must be >= 1");

  // Rows 0..num_ceps-1 of the DCT, or rows 1..num_ceps when c0 is dropped.
  const int rows_needed = cfg.include_c0 ? cfg.num_ceps : cfg.num_ceps + 1;
  const Mat dct = dct_matrix(bands, rows_needed);
  const int first_row = cfg.include_c0 ? 0 : 1;

  FeatureMatrix base;
  base.kind = FeatureKind::kMfcc;
  base.frame_shift_s = lm.frame_shift_s;
  base.values = Mat(frames, cfg.num_ceps);
  for (int t = 0; t < frames; ++t) {
    for (int j = 0; j < cfg.num_ceps; ++j) {
      double acc = 0.0;
      for (int b = 0; b < bands; ++b) acc += dct(first_row + j, b) * lm.values(b, t);
      base.values(t, j) = acc;
    }
  }
  if (cfg.delta_orders == 0) return base;

  FeatureMatrix d1 = delta(base, cfg.delta_window);
  FeatureMatrix d2;
  if (cfg.delta_orders == 2) d2 = delta(d1, cfg.delta_window);

  const int blocks = 1 + cfg.delta_orders;
  FeatureMatrix out;
  out.kind = FeatureKind::kMfcc;
  out.frame_shift_s = lm.frame_shift_s;
  out.values = Mat(frames, cfg.num_ceps * blocks);
  for (int t = 0; t < frames; ++t) {
    for (int j = 0; j < cfg.num_ceps; ++j) {
      out.values(t, j) = base.values(t, j);
      out.values(t, cfg.num_ceps + j) = d1.values(t, j);
      if (cfg.delta_orders == 2) out.values(t, 2 * cfg.num_ceps + j) = d2.values(t, j);
    }
  }
  return out;
}

FeatureMatrix delta(const FeatureMatrix &fm, int window) {
  if (fm.num_frames() == 0) throw InvalidArgument("delta: empty input");
  if (window < 1) throw InvalidArgument("delta: window must be >= 1");

  const int frames = fm.num_frames();
  const int dim = fm.dim();
  double norm = 0.0;
  for (int j = 1; j <= window; ++j) norm += 2.0 * j * j;

  FeatureMatrix out;
  out.kind = fm.kind;
  out.frame_shift_s = fm.frame_shift_s;
  out.values = Mat(frames, dim);
  for (int t = 0; t < frames; ++t) {
    for (int c = 0; c < dim; ++c) {
      double acc = 0.0;
      for (int j = 1; j <= window; ++j) {
        const int hi = std::min(t + j, frames - 1);
        const int lo = std::max(t - j, 0);
        acc += j * (fm.values(hi, c) - fm.values(lo, c));
      }
      out.values(t, c) = acc / norm;
    }
  }
  return out;
}

namespace {

// Hann window without zero endpoints, as used for Gabor envelopes.
std::vector<double> hann_envelope(int length) {
  std::vector<double> env(length);
  for (int i = 0; i < length; ++i)
    env[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * (i + 1) / (length + 1));
  return env;
}

double peak_magnitude_response(const std::vector<double> &coeffs) {
  const size_t nfft = std::max<size_t>(1024, next_pow2(4 * coeffs.size()));
  std::vector<double> mag = real_fft_magnitude(coeffs.data(), coeffs.size(), nfft);
  return *std::max_element(mag.begin(), mag.end());
}

// Mirror an index into [0, n-1] without repeating the edge sample; handles
// filters longer than the axis by folding repeatedly (period 2(n-1)).
inline int reflect_index(int idx, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  int m = idx % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

}  // namespace

GaborFilter1D gabor_filter_1d(double omega, double nu, int max_width) {
  if (!(omega >= 0.0 && omega < M_PI))
    throw InvalidArgument("gabor_filter_1d: omega must be in [0, pi)");
  if (!(nu > 0.0)) throw InvalidArgument("gabor_filter_1d: nu must be > 0");
  if (max_width < 1) throw InvalidArgument("gabor_filter_1d: max_width must be >= 1");

  GaborFilter1D f;
  f.modulation_freq = omega;

  int length;
  if (omega == 0.0) {
    length = max_width % 2 == 1 ? max_width : max_width - 1;
    if (length < 1) length = 1;
  } else {
    // The envelope spans nu half-waves of the carrier (half-wave = pi/omega).
    const double width = nu * M_PI / omega;
    length = 2 * static_cast<int>(std::floor(width / 2.0)) + 1;
    if (length < 1) length = 1;
  }
  f.center = (length - 1) / 2;

  std::vector<double> env = hann_envelope(length);
  f.coefficients.resize(length);
  if (omega == 0.0) {
    double sum = 0.0;
    for (double e : env) sum += e;
    for (int i = 0; i < length; ++i) f.coefficients[i] = env[i] / sum;
    return f;
  }

  double env_sum = 0.0, raw_sum = 0.0;
  for (int i = 0; i < length; ++i) {
    f.coefficients[i] = env[i] * std::cos(omega * (i - f.center));
    raw_sum += f.coefficients[i];
    env_sum += env[i];
  }
  // Remove the DC part by subtracting a scaled envelope, then normalize the
  // peak magnitude response to 1.
  const double correction = raw_sum / env_sum;
  for (int i = 0; i < length; ++i) f.coefficients[i] -= env[i] * correction;
  const double peak = peak_magnitude_response(f.coefficients);
  for (double &c : f.coefficients) c /= peak;
  return f;
}

std::vector<double> build_modulation_freqs(double omega_min, double omega_max, double growth) {
  if (!(omega_min > 0.0 && omega_min <= omega_max && omega_max < M_PI))
    throw InvalidArgument("build_modulation_freqs: need 0 < omega_min <= omega_max < pi");
  if (!(growth > 0.0 && growth < 1.0))
    throw InvalidArgument("build_modulation_freqs: growth factor must be in (0, 1)");

  const double ratio = (1.0 + growth) / (1.0 - growth);
  std::vector<double> freqs{0.0};
  for (double w = omega_min; w <= omega_max * (1.0 + 1e-9); w *= ratio) freqs.push_back(w);
  return freqs;
}

SgbfbConfig SgbfbConfig::defaults() {
  SgbfbConfig cfg;
  // Octave-spaced modulation frequencies: growth 1/3 gives ratio 2.
  cfg.spectral_mod_freqs = build_modulation_freqs(M_PI / 16.0, M_PI / 2.0, 1.0 / 3.0);
  cfg.temporal_mod_freqs = build_modulation_freqs(M_PI / 32.0, M_PI / 4.0, 1.0 / 3.0);
  return cfg;
}

namespace {

void validate_mod_freqs(const std::vector<double> &freqs, const char *axis) {
  if (freqs.empty() || freqs[0] != 0.0)
    throw InvalidArgument(std::string("sgbfb: ") + axis + " modulation list must start at 0");
  for (size_t i = 0; i < freqs.size(); ++i) {
    if (!(freqs[i] >= 0.0 && freqs[i] < M_PI))
      throw InvalidArgument(std::string("sgbfb: ") + axis + " modulation freq out of [0, pi)");
    if (i > 0 && freqs[i] <= freqs[i - 1])
      throw InvalidArgument(std::string("sgbfb: ") + axis + " modulation list must be strictly increasing");
  }
}

std::vector<int> retained_channels(int num_channels, int filter_width, double divisor) {
  const int k_factor =
      std::max(1, static_cast<int>(std::ceil(filter_width / divisor)));
  const int center = (num_channels - 1) / 2;
  std::vector<int> channels;
  for (int i = 0; i < num_channels; ++i)
    if (i % k_factor == center % k_factor) channels.push_back(i);
  return channels;
}

}  // namespace

int sgbfb_dim(const SgbfbConfig &cfg, int num_channels) {
  validate_mod_freqs(cfg.spectral_mod_freqs, "spectral");
  validate_mod_freqs(cfg.temporal_mod_freqs, "temporal");
  if (num_channels < 1) throw InvalidArgument("sgbfb_dim: need at least one channel");
  int dim = 0;
  for (double ws : cfg.spectral_mod_freqs) {
    GaborFilter1D sf = gabor_filter_1d(ws, cfg.envelope_halfwaves, cfg.max_spectral_width);
    dim += static_cast<int>(
        retained_channels(num_channels, sf.width(), cfg.channel_subsample_divisor).size() *
        cfg.temporal_mod_freqs.size());
  }
  return dim;
}

FeatureMatrix sgbfb(const LogMelSpectrogram &lm, const SgbfbConfig &cfg) {
  validate_mod_freqs(cfg.spectral_mod_freqs, "spectral");
  validate_mod_freqs(cfg.temporal_mod_freqs, "temporal");
  if (!(cfg.envelope_halfwaves > 0.0))
    throw InvalidArgument("sgbfb: envelope_halfwaves must be > 0");
  if (!(cfg.channel_subsample_divisor > 0.0))
    throw InvalidArgument("sgbfb: channel_subsample_divisor must be > 0");
  const int channels = lm.num_channels();
  const int frames = lm.num_frames();
  if (channels == 0 || frames == 0) throw InvalidArgument("sgbfb: empty spectrogram");

  std::vector<GaborFilter1D> temporal;
  temporal.reserve(cfg.temporal_mod_freqs.size());
  for (double wt : cfg.temporal_mod_freqs)
    temporal.push_back(gabor_filter_1d(wt, cfg.envelope_halfwaves, cfg.max_temporal_width));

  FeatureMatrix out;
  out.kind = FeatureKind::kSgbfb;
  out.frame_shift_s = lm.frame_shift_s;
  out.values = Mat(frames, sgbfb_dim(cfg, channels));

  int col = 0;
  std::vector<double> spectral_out(frames);
  std::vector<double> temporal_out(frames);
  for (double ws : cfg.spectral_mod_freqs) {
    const GaborFilter1D sf = gabor_filter_1d(ws, cfg.envelope_halfwaves, cfg.max_spectral_width);
    const std::vector<int> keep =
        retained_channels(channels, sf.width(), cfg.channel_subsample_divisor);
    for (const GaborFilter1D &tf : temporal) {
      for (int ch : keep) {
        // Spectral filtering of the retained channel only; subsampling and
        // per-channel temporal filtering commute.
        for (int t = 0; t < frames; ++t) {
          double acc = 0.0;
          for (int j = 0; j < sf.width(); ++j)
            acc += sf.coefficients[j] * lm.values(reflect_index(ch + j - sf.center, channels), t);
          spectral_out[t] = acc;
        }
        for (int t = 0; t < frames; ++t) {
          double acc = 0.0;
          for (int j = 0; j < tf.width(); ++j)
            acc += tf.coefficients[j] * spectral_out[reflect_index(t + j - tf.center, frames)];
          temporal_out[t] = acc;
        }
        for (int t = 0; t < frames; ++t) out.values(t, col) = temporal_out[t];
        ++col;
      }
    }
  }
  return out;
}

FeatureMatrix mean_variance_normalize(const FeatureMatrix &fm) {
  const int frames = fm.num_frames();
  const int dim = fm.dim();
  if (frames < 2)
    throw InvalidArgument("mean_variance_normalize: need at least 2 frames");

  FeatureMatrix out;
  out.kind = fm.kind;
  out.frame_shift_s = fm.frame_shift_s;
  out.values = Mat(frames, dim);
  for (int c = 0; c < dim; ++c) {
    double mean = 0.0;
    for (int t = 0; t < frames; ++t) mean += fm.values(t, c);
    mean /= frames;
    double var = 0.0;
    for (int t = 0; t < frames; ++t) {
      const double d = fm.values(t, c) - mean;
      var += d * d;
    }
    var /= frames;
    if (var <= 1e-24 * (1.0 + mean * mean)) {
      for (int t = 0; t < frames; ++t) out.values(t, c) = 0.0;
    } else {
      const double inv_std = 1.0 / std::sqrt(var);
      for (int t = 0; t < frames; ++t) out.values(t, c) = (fm.values(t, c) - mean) * inv_std;
    }
  }
  return out;
}

void dump_features_csv(const FeatureMatrix &fm, std::ostream &out) {
  for (int t = 0; t < fm.num_frames(); ++t) {
    for (int c = 0; c < fm.dim(); ++c) {
      if (c) out << ',';
      out << format_double(fm.values(t, c));
    }
    out << '\n';
  }
}

}  // namespace fade
