// fade/features.h

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

#ifndef FADE_FEATURES_H_
#define FADE_FEATURES_H_

#include <ostream>
#include <string>
#include <vector>

#include "fade/common.h"
#include "fade/dsp.h"

namespace fade {

enum class FeatureKind { kMfcc, kSgbfb };

std::string feature_kind_name(FeatureKind kind);
FeatureKind feature_kind_from_name(const std::string &name);

// Observation sequence fed to the recognizer: one row per frame.
struct FeatureMatrix {
  Mat values;  // frames x coefficients
  double frame_shift_s = 0.0;
  FeatureKind kind = FeatureKind::kMfcc;

  int num_frames() const { return values.rows(); }
  int dim() const { return values.cols(); }
};

// Orthonormal DCT-II matrix with k rows and n columns; row 0 is constant.
Mat dct_matrix(int n, int k);

struct MfccConfig {
  int num_ceps = 13;
  bool include_c0 = true;
  int delta_orders = 2;  // 0 = plain cepstra, 1 = +deltas, 2 = +delta-deltas
  int delta_window = 2;  // regression half-width in frames
};

FeatureMatrix mfcc(const LogMelSpectrogram &lm, const MfccConfig &cfg);

// Regression-slope deltas over +/- window frames with edge replication.
FeatureMatrix delta(const FeatureMatrix &fm, int window);

// One-dimensional Gabor filter: Hann envelope times a cosine carrier. The
// envelope spans nu half-waves of the carrier; for omega = 0 the width is
// capped at max_width samples and the filter is a normalized lowpass
// (coefficients sum to 1). For omega > 0 the coefficients are DC-corrected to
// sum to zero and scaled so the peak magnitude response is 1.
struct GaborFilter1D {
  std::vector<double> coefficients;  // odd length
  int center = 0;
  double modulation_freq = 0.0;

  int width() const { return static_cast<int>(coefficients.size()); }
};

GaborFilter1D gabor_filter_1d(double omega, double nu, int max_width = 40);

// {0} followed by the geometric sequence omega_min * ((1+c)/(1-c))^i capped
// at omega_max (values within a relative epsilon of omega_max are kept).
std::vector<double> build_modulation_freqs(double omega_min, double omega_max, double growth);

struct SgbfbConfig {
  std::vector<double> spectral_mod_freqs;  // rad/channel, starts at 0
  std::vector<double> temporal_mod_freqs;  // rad/frame, starts at 0
  double envelope_halfwaves = 3.5;
  double channel_subsample_divisor = 4.0;
  int max_spectral_width = 31;  // DC filter cap, channels
  int max_temporal_width = 40;  // DC filter cap, frames

  // Convenience constructor fields for the frequency lists.
  static SgbfbConfig defaults();
};

// Number of coefficients sgbfb() produces for a spectrogram with the given
// channel count; pure function of the config (shape determinism).
int sgbfb_dim(const SgbfbConfig &cfg, int num_channels);

// Separable spectro-temporal Gabor features: for every pair of spectral and
// temporal modulation frequencies, filter along the channel axis, then along
// the time axis (reflective padding on both), and keep every k-th channel
// (k from the spectral filter width), always retaining the center channel.
FeatureMatrix sgbfb(const LogMelSpectrogram &lm, const SgbfbConfig &cfg);

// Per-coefficient zero mean / unit variance over the utterance (population
// normalization). Zero-variance coefficients become all zeros.
FeatureMatrix mean_variance_normalize(const FeatureMatrix &fm);

// Debug dump: frame rows, coefficient columns.
void dump_features_csv(const FeatureMatrix &fm, std::ostream &out);

}  // namespace fade

#endif  // FADE_FEATURES_H_
