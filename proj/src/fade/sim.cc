// fade/sim.cc

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

#include "fade/sim.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fade/fft.h"
#include "fade/rng.h"
#include "fade/threadpool.h"

namespace fade {

void SnrGrid::validate() const {
  if (train_snrs_db.empty() || test_snrs_db.empty())
    throw InvalidArgument("snr grid: train and test lists must be nonempty");
  for (size_t i = 1; i < train_snrs_db.size(); ++i)
    if (train_snrs_db[i] <= train_snrs_db[i - 1])
      throw InvalidArgument("snr grid: train SNRs must be strictly increasing");
  for (size_t i = 1; i < test_snrs_db.size(); ++i)
    if (test_snrs_db[i] <= test_snrs_db[i - 1])
      throw InvalidArgument("snr grid: test SNRs must be strictly increasing");
}

void save_matrix_csv(const RecognitionMatrix &m, const SnrGrid &grid, std::ostream &out) {
  out << "train_snr,test_snr,rate,count\n";
  for (int i = 0; i < m.rates.rows(); ++i)
    for (int j = 0; j < m.rates.cols(); ++j)
      out << format_double(grid.train_snrs_db[i]) << ',' << format_double(grid.test_snrs_db[j])
          << ',' << format_double(m.rates(i, j)) << ',' << format_double(m.counts(i, j)) << '\n';
}

RecognitionMatrix load_matrix_csv(std::istream &in, SnrGrid *grid) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("train_snr,", 0) != 0)
    throw LoadError("load_matrix_csv: missing header");
  std::vector<double> train, test, rate, count;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double a, b, c, d;
    char comma;
    if (!(ls >> a >> comma >> b >> comma >> c >> comma >> d))
      throw LoadError("load_matrix_csv: malformed row: " + line);
    train.push_back(a);
    test.push_back(b);
    rate.push_back(c);
    count.push_back(d);
  }
  SnrGrid g;
  for (double v : train)
    if (g.train_snrs_db.empty() || v > g.train_snrs_db.back()) g.train_snrs_db.push_back(v);
  for (double v : test)
    if (std::find(g.test_snrs_db.begin(), g.test_snrs_db.end(), v) == g.test_snrs_db.end())
      g.test_snrs_db.push_back(v);
  const int n = static_cast<int>(g.train_snrs_db.size());
  const int k = static_cast<int>(g.test_snrs_db.size());
  if (static_cast<size_t>(n) * k != rate.size())
    throw LoadError("load_matrix_csv: row count does not form a full grid");
  RecognitionMatrix m;
  m.rates = Mat(n, k);
  m.counts = Mat(n, k);
  for (size_t idx = 0; idx < rate.size(); ++idx) {
    const int i = static_cast<int>(idx) / k;
    const int j = static_cast<int>(idx) % k;
    m.rates(i, j) = rate[idx];
    m.counts(i, j) = count[idx];
  }
  if (grid) *grid = g;
  return m;
}

FeatureMatrix compute_features(const AudioBuffer &audio, const FrontendConfig &frontend,
                               const FeatureSetup &setup) {
  const double f_max = std::min(frontend.f_max_hz, audio.sample_rate / 2.0);
  const int win = static_cast<int>(std::lround(frontend.stft.window_ms * 1e-3 * audio.sample_rate));
  const int fft_size = static_cast<int>(next_pow2(static_cast<size_t>(std::max(win, 1))));
  const MelFilterbank fb =
      build_mel_filterbank(frontend.num_bands, frontend.f_min_hz, f_max, fft_size,
                           audio.sample_rate);
  const LogMelSpectrogram lm = log_mel_spectrogram(audio, fb, frontend.stft);
  FeatureMatrix fm = setup.kind == FeatureKind::kMfcc ? mfcc(lm, setup.mfcc)
                                                      : sgbfb(lm, setup.sgbfb);
  if (setup.mean_variance_norm) fm = mean_variance_normalize(fm);
  return fm;
}

namespace {

std::string checkpoint_path(const std::string &dir, double train_snr) {
  std::ostringstream name;
  name << "train_" << format_double(train_snr) << ".hmm";
  return (std::filesystem::path(dir) / name.str()).string();
}

}  // namespace

RecognitionMatrix run_sweep(const CorpusManifest &train_set, const CorpusManifest &test_set,
                            const MatrixGrammar &grammar, const NoiseSource &noise,
                            const SweepConfig &cfg) {
  cfg.grid.validate();
  grammar.validate();
  if (train_set.entries.empty() || test_set.entries.empty())
    throw InvalidArgument("run_sweep: empty train or test set");

  const int n_train_snrs = static_cast<int>(cfg.grid.train_snrs_db.size());
  const int n_test_snrs = static_cast<int>(cfg.grid.test_snrs_db.size());
  const size_t n_test = test_set.entries.size();
  const size_t n_train = train_set.entries.size();

  // Test features per (test SNR, utterance); the same mixed signals are
  // decoded by every trained model.
  std::vector<std::vector<FeatureMatrix>> test_features(n_test_snrs);
  for (int k = 0; k < n_test_snrs; ++k) {
    test_features[k].resize(n_test);
    const double snr = cfg.grid.test_snrs_db[k];
    parallel_for(n_test, cfg.workers, [&, k, snr](size_t i) {
      const uint64_t seed = derive_seed(cfg.seed, {fnv1a64("test-mix"),
                                                   static_cast<uint64_t>(k), i});
      const AudioBuffer mixed = mix_at_snr(test_set.entries[i].audio, noise, {snr}, seed);
      test_features[k][i] = compute_features(mixed, cfg.frontend, cfg.features);
    });
  }

  RecognitionMatrix out;
  out.rates = Mat(n_train_snrs, n_test_snrs);
  out.counts = Mat(n_train_snrs, n_test_snrs);

  for (int n = 0; n < n_train_snrs; ++n) {
    const double train_snr = cfg.grid.train_snrs_db[n];

    HmmModelSet models;
    bool loaded = false;
    std::string ckpt;
    if (!cfg.checkpoint_dir.empty()) {
      std::filesystem::create_directories(cfg.checkpoint_dir);
      ckpt = checkpoint_path(cfg.checkpoint_dir, train_snr);
      if (std::filesystem::exists(ckpt)) {
        models = load_models(ckpt);
        loaded = true;
      }
    }
    if (!loaded) {
      std::vector<TrainUtterance> utts(n_train);
      parallel_for(n_train, cfg.workers, [&](size_t i) {
        const uint64_t seed = derive_seed(cfg.seed, {fnv1a64("train-mix"),
                                                     static_cast<uint64_t>(n), i});
        const AudioBuffer mixed =
            mix_at_snr(train_set.entries[i].audio, noise, {train_snr}, seed);
        utts[i].features = compute_features(mixed, cfg.frontend, cfg.features);
        utts[i].label = train_set.entries[i].label;
      });
      models = init_models(utts, grammar, cfg.topology, cfg.gmm);
      TrainConfig tc = cfg.training;
      tc.workers = cfg.workers;
      train(models, utts, tc);
      if (!ckpt.empty()) save_models(models, ckpt);
    }

    const DecodingGraph graph = build_decoding_graph(models, grammar);
    for (int k = 0; k < n_test_snrs; ++k) {
      std::vector<double> correct(n_test, 0.0);
      parallel_for(n_test, cfg.workers, [&, k](size_t i) {
        const Transcript hyp = viterbi_decode(graph, test_features[k][i]);
        correct[i] = score_words(test_set.entries[i].label, hyp);
      });
      double total_correct = 0.0;
      for (double c : correct) total_correct += c;
      const double words = static_cast<double>(n_test * grammar.num_slots());
      out.rates(n, k) = total_correct * static_cast<double>(grammar.num_slots()) / words;
      out.counts(n, k) = words;
    }
  }
  return out;
}

namespace {

// First upward crossing of the criterion for one row, scanning from low SNR.
std::optional<double> row_crossing(const RecognitionMatrix &m, const SnrGrid &grid, int row,
                                   double criterion) {
  const int k_count = m.rates.cols();
  for (int k = 0; k < k_count; ++k) {
    const double rate = m.rates(row, k);
    if (rate < criterion) continue;
    if (rate == criterion || k == 0) return grid.test_snrs_db[k];
    const double r0 = m.rates(row, k - 1);
    const double x0 = grid.test_snrs_db[k - 1];
    const double x1 = grid.test_snrs_db[k];
    return x0 + (criterion - r0) * (x1 - x0) / (rate - r0);
  }
  return std::nullopt;
}

// The interpolation segment (lo, hi) that produced the row's crossing.
std::pair<int, int> crossing_segment(const RecognitionMatrix &m, int row, double criterion) {
  const int k_count = m.rates.cols();
  for (int k = 0; k < k_count; ++k) {
    if (m.rates(row, k) < criterion) continue;
    if (k == 0) return {0, std::min(1, k_count - 1)};
    return {k - 1, k};
  }
  throw NoSrtError("crossing_segment: row never reaches the criterion");
}

}  // namespace

SrtEstimate srt_from_matrix(const RecognitionMatrix &m, const SnrGrid &grid, double criterion) {
  grid.validate();
  if (m.rates.rows() != static_cast<int>(grid.train_snrs_db.size()) ||
      m.rates.cols() != static_cast<int>(grid.test_snrs_db.size()))
    throw InvalidArgument("srt_from_matrix: matrix shape does not match the grid");
  if (!(criterion > 0.0 && criterion < 1.0))
    throw InvalidArgument("srt_from_matrix: criterion must be inside (0, 1)");

  SrtEstimate best;
  bool found = false;
  for (int row = 0; row < m.rates.rows(); ++row) {
    const std::optional<double> x = row_crossing(m, grid, row, criterion);
    if (!x) continue;
    if (!found || *x < best.srt_db) {
      best.srt_db = *x;
      best.winning_row = row;
      best.winning_train_snr_db = grid.train_snrs_db[row];
      found = true;
    }
  }
  if (!found)
    throw NoSrtError("srt_from_matrix: no train row reaches a rate of " +
                     format_double(criterion) + "; condition unmeasurable");

  best.psychometric_row.resize(m.rates.cols());
  for (int k = 0; k < m.rates.cols(); ++k)
    best.psychometric_row[k] = m.rates(best.winning_row, k);
  best.sigma_sim_db = srt_uncertainty(m, grid, best, criterion);
  return best;
}

double srt_uncertainty(const RecognitionMatrix &m, const SnrGrid &grid, const SrtEstimate &est,
                       double criterion) {
  if (est.winning_row < 0 || est.winning_row >= m.rates.rows())
    throw InvalidArgument("srt_uncertainty: estimate does not belong to this matrix");
  const auto [lo, hi] = crossing_segment(m, est.winning_row, criterion);
  const double width = grid.test_snrs_db[hi] - grid.test_snrs_db[lo];
  if (hi == lo) return 0.0;  // single-column grid, no slope information
  const double slope =
      (m.rates(est.winning_row, hi) - m.rates(est.winning_row, lo)) / width;
  const double words = m.counts(est.winning_row, hi);
  if (words <= 0.0) throw InvalidArgument("srt_uncertainty: nonpositive word count");
  const double se = std::sqrt(criterion * (1.0 - criterion) / words);
  if (slope <= 0.0) return width;
  return se / slope;
}

}  // namespace fade
