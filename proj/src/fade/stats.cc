// fade/stats.cc

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

#include "fade/stats.h"

#include <cmath>

namespace fade {

void PairedSeries::validate() const {
  const size_t n = sim_db.size();
  if (emp_db.size() != n || sigma_sim_db.size() != n || sigma_emp_db.size() != n)
    throw InvalidArgument("paired series: column lengths differ");
  for (size_t i = 0; i < n; ++i) {
    if (!std::isfinite(sim_db[i]) || !std::isfinite(emp_db[i]))
      throw InvalidArgument("paired series: non-finite value at item " + std::to_string(i));
    if (sigma_sim_db[i] < 0.0 || sigma_emp_db[i] < 0.0)
      throw InvalidArgument("paired series: negative sigma at item " + std::to_string(i));
  }
}

double sem(double sigma, int n) {
  if (n < 1) throw InvalidArgument("sem: n must be >= 1");
  if (sigma < 0.0) throw InvalidArgument("sem: sigma must be >= 0");
  return sigma / std::sqrt(static_cast<double>(n));
}

double chi2_per_dof(const PairedSeries &s, int nu) {
  s.validate();
  if (nu < 1) throw InvalidArgument("chi2_per_dof: nu must be >= 1");
  double chi2 = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    const double var = s.sigma_emp_db[i] * s.sigma_emp_db[i] +
                       s.sigma_sim_db[i] * s.sigma_sim_db[i];
    if (var <= 0.0)
      throw InvalidArgument("chi2_per_dof: zero combined variance at item " +
                            (i < s.labels.size() ? s.labels[i] : std::to_string(i)));
    const double diff = s.sim_db[i] - s.emp_db[i];
    chi2 += diff * diff / var;
  }
  return chi2 / static_cast<double>(nu);
}

double pearson_r(const PairedSeries &s) {
  s.validate();
  const size_t n = s.size();
  if (n < 2) throw InvalidArgument("pearson_r: need at least 2 items");
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += s.sim_db[i];
    my += s.emp_db[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = s.sim_db[i] - mx;
    const double dy = s.emp_db[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw InvalidArgument("pearson_r: undefined correlation, a series has zero variance");
  return sxy / std::sqrt(sxx * syy);
}

RmsBias rms_and_bias(const PairedSeries &s) {
  s.validate();
  if (s.size() < 1) throw InvalidArgument("rms_and_bias: empty series");
  double sum = 0.0, sumsq = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    const double d = s.sim_db[i] - s.emp_db[i];
    sum += d;
    sumsq += d * d;
  }
  const double n = static_cast<double>(s.size());
  return {std::sqrt(sumsq / n), sum / n};
}

double regression_intercept(const PairedSeries &s) {
  s.validate();
  const size_t n = s.size();
  if (n < 2) throw InvalidArgument("regression_intercept: need at least 2 items");
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += s.emp_db[i];
    my += s.sim_db[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (s.emp_db[i] - mx) * (s.sim_db[i] - my);
    sxx += (s.emp_db[i] - mx) * (s.emp_db[i] - mx);
  }
  if (sxx <= 0.0)
    throw InvalidArgument("regression_intercept: empirical series has zero variance");
  const double slope = sxy / sxx;
  return my - slope * mx;
}

double lombard_gain(double srt_plain_db, double srt_lombard_db) {
  if (!std::isfinite(srt_plain_db) || !std::isfinite(srt_lombard_db))
    throw InvalidArgument("lombard_gain: non-finite SRT");
  return srt_plain_db - srt_lombard_db;
}

GainEstimate listener_gain(const std::vector<double> &plain_srts_db,
                           const std::vector<double> &lombard_srts_db) {
  if (plain_srts_db.empty() || plain_srts_db.size() != lombard_srts_db.size())
    throw InvalidArgument("listener_gain: need matched per-listener SRT lists");
  const size_t n = plain_srts_db.size();
  std::vector<double> gains(n);
  double mean = 0.0;
  for (size_t i = 0; i < n; ++i) {
    gains[i] = lombard_gain(plain_srts_db[i], lombard_srts_db[i]);
    mean += gains[i];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double g : gains) var += (g - mean) * (g - mean);
  // Sample standard deviation across listeners.
  const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
  return {mean, sem(sd, static_cast<int>(n))};
}

EvalSummary evaluate_series(const PairedSeries &s, int nu) {
  EvalSummary out;
  out.pearson_r = pearson_r(s);
  const RmsBias rb = rms_and_bias(s);
  out.rms_db = rb.rms_db;
  out.bias_db = rb.bias_db;
  out.bias_regression_db = regression_intercept(s);
  out.chi2_per_dof = chi2_per_dof(s, nu);
  out.dof = nu;
  return out;
}

}  // namespace fade
