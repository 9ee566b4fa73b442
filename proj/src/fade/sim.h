// fade/sim.h

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

#ifndef FADE_SIM_H_
#define FADE_SIM_H_

#include <iosfwd>
#include <optional>
#include <string>

#include "fade/corpus.h"
#include "fade/decode.h"
#include "fade/dsp.h"
#include "fade/features.h"
#include "fade/hmm.h"
#include "fade/noise.h"

namespace fade {

// Train/test SNR grids; both lists strictly increasing.
struct SnrGrid {
  std::vector<double> train_snrs_db;
  std::vector<double> test_snrs_db;

  void validate() const;
};

// Word-correct rate over (train SNR x test SNR), with the number of tested
// words per cell for uncertainty estimation.
struct RecognitionMatrix {
  Mat rates;   // N x K in [0, 1]
  Mat counts;  // N x K, words tested
};

void save_matrix_csv(const RecognitionMatrix &m, const SnrGrid &grid, std::ostream &out);
RecognitionMatrix load_matrix_csv(std::istream &in, SnrGrid *grid);

// Feature frontend selection shared by the sweep and the CLI.
struct FeatureSetup {
  FeatureKind kind = FeatureKind::kSgbfb;
  MfccConfig mfcc;
  SgbfbConfig sgbfb = SgbfbConfig::defaults();
  bool mean_variance_norm = true;
};

struct FrontendConfig {
  StftConfig stft;
  int num_bands = 31;
  double f_min_hz = 64.0;
  double f_max_hz = 8000.0;  // clipped to Nyquist
};

FeatureMatrix compute_features(const AudioBuffer &audio, const FrontendConfig &frontend,
                               const FeatureSetup &setup);

struct SweepConfig {
  SnrGrid grid;
  FrontendConfig frontend;
  FeatureSetup features;
  HmmTopology topology;
  GmmConfig gmm;
  TrainConfig training;
  uint64_t seed = 1;
  int workers = 1;
  // When set, per-train-SNR models are checkpointed here and reloaded on the
  // next run instead of being retrained.
  std::string checkpoint_dir;
};

// The full train-SNR x test-SNR sweep: for every train SNR, mix the training
// set with random sections of the masker at that SNR, train a model set, and
// decode the test set mixed at each test SNR. Rates are correct words over
// total words per cell. Fully deterministic given the master seed.
RecognitionMatrix run_sweep(const CorpusManifest &train_set, const CorpusManifest &test_set,
                            const MatrixGrammar &grammar, const NoiseSource &noise,
                            const SweepConfig &cfg);

// SRT with its simulation uncertainty.
struct SrtEstimate {
  double srt_db = 0.0;
  double sigma_sim_db = 0.0;
  double winning_train_snr_db = 0.0;
  int winning_row = -1;
  std::vector<double> psychometric_row;  // rates of the winning row
};

// The lowest crossing of the criterion over all train rows: per row, the
// first upward crossing scanning from low test SNR, linearly interpolated
// between the bracketing grid points (exact grid hits return the grid SNR;
// rows starting above the criterion clamp to the lowest test SNR). Rows that
// never reach the criterion contribute nothing; if no row does, NoSrtError.
SrtEstimate srt_from_matrix(const RecognitionMatrix &m, const SnrGrid &grid,
                            double criterion = 0.5);

// Binomial standard error of the rate at the crossing divided by the local
// psychometric slope of the interpolated segment; a zero slope falls back to
// the width of the bracketing segment.
double srt_uncertainty(const RecognitionMatrix &m, const SnrGrid &grid, const SrtEstimate &est,
                       double criterion = 0.5);

}  // namespace fade

#endif  // FADE_SIM_H_
