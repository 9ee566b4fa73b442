// tests/stats_test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fade/rng.h"
#include "fade/stats.h"

using namespace fade;

namespace {

PairedSeries make_series(std::vector<double> sim, std::vector<double> emp,
                         std::vector<double> ssim = {}, std::vector<double> semp = {}) {
  PairedSeries s;
  s.sim_db = std::move(sim);
  s.emp_db = std::move(emp);
  s.sigma_sim_db = ssim.empty() ? std::vector<double>(s.sim_db.size(), 1.0) : std::move(ssim);
  s.sigma_emp_db = semp.empty() ? std::vector<double>(s.sim_db.size(), 1.0) : std::move(semp);
  return s;
}

}  // namespace

TEST_CASE("sem evaluates sigma over root n") {
  CHECK(sem(4.0, 16) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sem(0.0, 5) == 0.0);
  CHECK(sem(2.5, 1) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK_THROWS_AS(sem(1.0, 0), InvalidArgument);
  CHECK_THROWS_AS(sem(-1.0, 4), InvalidArgument);
}

TEST_CASE("sem is homogeneous of degree 1 in sigma") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double sigma = rng.uniform(0.0, 10.0);
    const double k = rng.uniform(0.0, 5.0);
    const int n = 1 + static_cast<int>(rng.uniform_int(50));
    CHECK(sem(k * sigma, n) == doctest::Approx(k * sem(sigma, n)).epsilon(1e-12).scale(1e-12));
  }
}

TEST_CASE("chi2 per dof hand examples") {
  PairedSeries equal = make_series({-7.0, -9.5}, {-7.0, -9.5});
  CHECK(chi2_per_dof(equal, 2) == 0.0);

  PairedSeries one = make_series({2.0}, {0.0}, {std::sqrt(2.0)}, {std::sqrt(2.0)});
  CHECK(chi2_per_dof(one, 1) == doctest::Approx(1.0).epsilon(1e-12));

  PairedSeries scaled = one;
  scaled.sigma_sim_db[0] *= 2.0;
  scaled.sigma_emp_db[0] *= 2.0;
  CHECK(chi2_per_dof(scaled, 1) == doctest::Approx(0.25).epsilon(1e-12));

  PairedSeries zero_var = make_series({1.0}, {0.0}, {0.0}, {0.0});
  CHECK_THROWS_AS(chi2_per_dof(zero_var, 1), InvalidArgument);
  CHECK_THROWS_AS(chi2_per_dof(one, 0), InvalidArgument);
}

TEST_CASE("chi2 is symmetric in sim and emp") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    PairedSeries s;
    const int n = 2 + static_cast<int>(rng.uniform_int(10));
    for (int j = 0; j < n; ++j) {
      s.sim_db.push_back(rng.uniform(-20.0, 0.0));
      s.emp_db.push_back(rng.uniform(-20.0, 0.0));
      s.sigma_sim_db.push_back(rng.uniform(0.1, 2.0));
      s.sigma_emp_db.push_back(rng.uniform(0.1, 2.0));
    }
    PairedSeries swapped = s;
    std::swap(swapped.sim_db, swapped.emp_db);
    std::swap(swapped.sigma_sim_db, swapped.sigma_emp_db);
    CHECK(chi2_per_dof(s, n) == doctest::Approx(chi2_per_dof(swapped, n)).epsilon(1e-12));
  }
}

TEST_CASE("pearson correlation hand examples") {
  PairedSeries identical = make_series({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
  CHECK(pearson_r(identical) == doctest::Approx(1.0).epsilon(1e-12));

  PairedSeries inverted = make_series({1.0, 2.0, 3.0}, {4.0, 3.0, 2.0});
  CHECK(pearson_r(inverted) == doctest::Approx(-1.0).epsilon(1e-12));

  PairedSeries mixed = make_series({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0});
  CHECK(pearson_r(mixed) == doctest::Approx(0.5).epsilon(1e-12));

  PairedSeries flat = make_series({1.0, 1.0}, {0.0, 2.0});
  CHECK_THROWS_AS(pearson_r(flat), InvalidArgument);
}

TEST_CASE("pearson is invariant under positive affine transforms") {
  Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    PairedSeries s;
    const int n = 3 + static_cast<int>(rng.uniform_int(10));
    for (int j = 0; j < n; ++j) {
      s.sim_db.push_back(rng.uniform(-10.0, 10.0));
      s.emp_db.push_back(rng.uniform(-10.0, 10.0));
      s.sigma_sim_db.push_back(1.0);
      s.sigma_emp_db.push_back(1.0);
    }
    double r0;
    try {
      r0 = pearson_r(s);
    } catch (const InvalidArgument &) {
      continue;
    }
    PairedSeries t = s;
    const double a = rng.uniform(0.1, 5.0), b = rng.uniform(-20.0, 20.0);
    const double c = rng.uniform(0.1, 5.0), d = rng.uniform(-20.0, 20.0);
    for (int j = 0; j < n; ++j) {
      t.sim_db[j] = a * t.sim_db[j] + b;
      t.emp_db[j] = c * t.emp_db[j] + d;
    }
    CHECK(std::abs(pearson_r(t) - r0) < 1e-12);
  }
}

TEST_CASE("rms and bias hand examples") {
  PairedSeries identical = make_series({-3.0, -5.0, -8.0}, {-3.0, -5.0, -8.0});
  RmsBias rb = rms_and_bias(identical);
  CHECK(rb.rms_db == 0.0);
  CHECK(rb.bias_db == 0.0);

  PairedSeries offset = make_series({0.0, 2.0, 4.0}, {-2.0, 0.0, 2.0});
  rb = rms_and_bias(offset);
  CHECK(rb.rms_db == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rb.bias_db == doctest::Approx(2.0).epsilon(1e-12));

  PairedSeries balanced = make_series({1.0, -1.0}, {0.0, 0.0});
  rb = rms_and_bias(balanced);
  CHECK(rb.rms_db == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rb.bias_db == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("rms squared equals bias squared plus difference variance") {
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    PairedSeries s;
    const int n = 1 + static_cast<int>(rng.uniform_int(20));
    for (int j = 0; j < n; ++j) {
      s.sim_db.push_back(rng.uniform(-15.0, 5.0));
      s.emp_db.push_back(rng.uniform(-15.0, 5.0));
      s.sigma_sim_db.push_back(1.0);
      s.sigma_emp_db.push_back(1.0);
    }
    const RmsBias rb = rms_and_bias(s);
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = s.sim_db[j] - s.emp_db[j] - rb.bias_db;
      var += d * d;
    }
    var /= n;
    CHECK(rb.rms_db * rb.rms_db ==
          doctest::Approx(rb.bias_db * rb.bias_db + var).epsilon(1e-12).scale(1e-12));
  }
}

TEST_CASE("lombard gain definition and listener averaging") {
  CHECK(lombard_gain(-10.0, -13.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(lombard_gain(-7.0, -7.0) == 0.0);

  // Per-listener gains {2, 4}: mean 3, sd sqrt(2), sem = sqrt(2)/sqrt(2) = 1.
  GainEstimate g = listener_gain({-8.0, -6.0}, {-10.0, -10.0});
  CHECK(g.mean_db == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(g.sem_db == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(listener_gain({1.0}, {}), InvalidArgument);
}

TEST_CASE("regression intercept on an exact line") {
  // sim = 2 * emp + 5.
  PairedSeries s = make_series({5.0, 7.0, 9.0, 11.0}, {0.0, 1.0, 2.0, 3.0});
  CHECK(regression_intercept(s) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("evaluate_series bundles all measures") {
  PairedSeries s = make_series({-10.0, -12.0, -14.0}, {-9.0, -11.0, -13.0});
  EvalSummary summary = evaluate_series(s, 3);
  CHECK(summary.pearson_r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(summary.rms_db == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(summary.bias_db == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(summary.dof == 3);
  CHECK(summary.chi2_per_dof == doctest::Approx(0.5).epsilon(1e-12));
}
