// tests/test_util.h

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

// Test-only oracles, independent of the implementation paths they check.

#ifndef FADE_TESTS_TEST_UTIL_H_
#define FADE_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fade/audio.h"
#include "fade/noise.h"

namespace fade::testutil {

// Third-octave smoothed long-term level (dB) at geometric band centers
// spanning [f_lo, f_hi].
struct SmoothedSpectrum {
  std::vector<double> centers_hz;
  std::vector<double> levels_db;
};

inline SmoothedSpectrum third_octave_spectrum(const AudioBuffer &a, double f_lo, double f_hi) {
  const int nfft = 1024;
  const std::vector<double> psd = welch_power_spectrum(a, nfft);
  const double bin_hz = static_cast<double>(a.sample_rate) / nfft;
  SmoothedSpectrum out;
  const double ratio = std::pow(2.0, 1.0 / 3.0);
  for (double fc = f_lo; fc <= f_hi * 1.0001; fc *= ratio) {
    const double lo = fc / std::pow(2.0, 1.0 / 6.0);
    const double hi = fc * std::pow(2.0, 1.0 / 6.0);
    double acc = 0.0;
    int count = 0;
    for (size_t k = 1; k < psd.size(); ++k) {
      const double f = k * bin_hz;
      if (f >= lo && f < hi) {
        acc += psd[k];
        ++count;
      }
    }
    if (count == 0) continue;
    out.centers_hz.push_back(fc);
    out.levels_db.push_back(10.0 * std::log10(std::max(acc / count, 1e-30)));
  }
  return out;
}

// Largest absolute band-level difference between two signals over the given
// range (both spectra measured with the same oracle).
inline double max_band_level_diff_db(const AudioBuffer &a, const AudioBuffer &b, double f_lo,
                                     double f_hi) {
  const SmoothedSpectrum sa = third_octave_spectrum(a, f_lo, f_hi);
  const SmoothedSpectrum sb = third_octave_spectrum(b, f_lo, f_hi);
  double worst = 0.0;
  const size_t n = std::min(sa.levels_db.size(), sb.levels_db.size());
  for (size_t i = 0; i < n; ++i)
    worst = std::max(worst, std::abs(sa.levels_db[i] - sb.levels_db[i]));
  return worst;
}

// Cosine distance between the band-power vectors of two signals (linear
// power domain).
inline double spectral_cosine_distance(const AudioBuffer &a, const AudioBuffer &b, double f_lo,
                                       double f_hi) {
  const SmoothedSpectrum sa = third_octave_spectrum(a, f_lo, f_hi);
  const SmoothedSpectrum sb = third_octave_spectrum(b, f_lo, f_hi);
  const size_t n = std::min(sa.levels_db.size(), sb.levels_db.size());
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double pa = std::pow(10.0, sa.levels_db[i] / 10.0);
    const double pb = std::pow(10.0, sb.levels_db[i] / 10.0);
    dot += pa * pb;
    na += pa * pa;
    nb += pb * pb;
  }
  return 1.0 - dot / std::sqrt(na * nb);
}

// Simple autocorrelation pitch tracker; returns one F0 estimate per 40 ms
// frame (0 for unvoiced/empty frames).
inline std::vector<double> pitch_track(const AudioBuffer &a, double f_min = 70.0,
                                       double f_max = 300.0) {
  const int fs = a.sample_rate;
  const int frame = fs * 40 / 1000;
  const int lag_min = static_cast<int>(fs / f_max);
  const int lag_max = static_cast<int>(fs / f_min);
  std::vector<double> f0s;
  for (size_t start = 0; start + frame <= a.samples.size(); start += frame) {
    const double *x = a.samples.data() + start;
    double energy = 0.0;
    for (int i = 0; i < frame; ++i) energy += x[i] * x[i];
    if (energy < 1e-8) {
      f0s.push_back(0.0);
      continue;
    }
    double best = 0.0;
    int best_lag = 0;
    for (int lag = lag_min; lag <= lag_max && lag < frame; ++lag) {
      double acc = 0.0;
      for (int i = 0; i + lag < frame; ++i) acc += x[i] * x[i + lag];
      if (acc > best) {
        best = acc;
        best_lag = lag;
      }
    }
    f0s.push_back(best_lag > 0 ? static_cast<double>(fs) / best_lag : 0.0);
  }
  return f0s;
}

// Longest run (seconds) during which |x| stays below threshold_db relative to
// the global RMS.
inline double longest_quiet_interval_s(const AudioBuffer &a, double threshold_db) {
  const double rms = rms_level(a);
  const double limit = rms * std::pow(10.0, threshold_db / 20.0);
  size_t longest = 0, run = 0;
  for (double s : a.samples) {
    if (std::abs(s) < limit) {
      ++run;
      longest = std::max(longest, run);
    } else {
      run = 0;
    }
  }
  return static_cast<double>(longest) / a.sample_rate;
}

// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double> &x, const std::vector<double> &y) {
  const size_t n = x.size();
  auto ranks = [&](const std::vector<double> &v) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * (i + j) + 1.0;
      for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace fade::testutil

#endif  // FADE_TESTS_TEST_UTIL_H_
