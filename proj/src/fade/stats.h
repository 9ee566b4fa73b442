// fade/stats.h

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

#ifndef FADE_STATS_H_
#define FADE_STATS_H_

#include <string>
#include <vector>

#include "fade/common.h"

namespace fade {

// Prediction/measurement pairs with their uncertainties, in dB.
struct PairedSeries {
  std::vector<double> sim_db;
  std::vector<double> emp_db;
  std::vector<double> sigma_sim_db;
  std::vector<double> sigma_emp_db;
  std::vector<std::string> labels;

  size_t size() const { return sim_db.size(); }
  void validate() const;
};

struct EvalSummary {
  double pearson_r = 0.0;
  double rms_db = 0.0;
  double bias_db = 0.0;             // mean(sim - emp)
  double bias_regression_db = 0.0;  // intercept of the sim-on-emp regression
  double chi2_per_dof = 0.0;
  int dof = 0;
};

// Standard error of the mean: sigma / sqrt(n).
double sem(double sigma, int n);

// Sum of (sim - emp)^2 / (sigma_emp^2 + sigma_sim^2) divided by nu. Every
// combined variance must be positive; nu is supplied by the caller (the gain
// panels halve the degrees of freedom).
double chi2_per_dof(const PairedSeries &s, int nu);

double pearson_r(const PairedSeries &s);

// rms = sqrt(mean((sim - emp)^2)); bias = mean(sim - emp). Population
// normalization throughout.
struct RmsBias {
  double rms_db = 0.0;
  double bias_db = 0.0;
};
RmsBias rms_and_bias(const PairedSeries &s);

// Intercept of the least-squares regression sim = slope * emp + intercept;
// the secondary reading of "bias" reported alongside the mean offset.
double regression_intercept(const PairedSeries &s);

// Positive when Lombard speech is easier (lower SRT) than plain speech.
double lombard_gain(double srt_plain_db, double srt_lombard_db);

// Per-listener gains averaged, with the standard error via sem().
struct GainEstimate {
  double mean_db = 0.0;
  double sem_db = 0.0;
};
GainEstimate listener_gain(const std::vector<double> &plain_srts_db,
                           const std::vector<double> &lombard_srts_db);

EvalSummary evaluate_series(const PairedSeries &s, int nu);

}  // namespace fade

#endif  // FADE_STATS_H_
