// fade/hmm.h

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

#ifndef FADE_HMM_H_
#define FADE_HMM_H_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fade/corpus.h"
#include "fade/features.h"

namespace fade {

// Whole-word left-to-right topology: every word gets states_per_word emitting
// states with self-loops and forward transitions only; one shared silence
// model is used at sentence start and end.
struct HmmTopology {
  int states_per_word = 16;
  int silence_states = 4;

  void validate() const;
};

struct GmmConfig {
  int num_components = 1;
  // Variance floor as a fraction of the global per-dimension variance.
  double variance_floor_fraction = 1e-3;
};

// Diagonal-covariance Gaussian mixture emission distribution.
struct GaussianState {
  std::vector<double> weights;
  std::vector<std::vector<double>> means;  // [component][dim]
  std::vector<std::vector<double>> vars;   // [component][dim]

  // Cached log weights and Gaussian normalization constants; call finalize()
  // after any parameter change.
  std::vector<double> log_weights;
  std::vector<double> log_consts;

  void finalize();
  double log_likelihood(const double *x, int dim) const;
};

struct WordHmm {
  std::string word;
  std::vector<GaussianState> states;
  std::vector<double> log_self;
  std::vector<double> log_next;
};

struct HmmModelSet {
  HmmTopology topology;
  GmmConfig gmm;
  int dim = 0;
  std::map<std::string, WordHmm> words;
  WordHmm silence;
  std::vector<double> variance_floor;
};

struct TrainUtterance {
  FeatureMatrix features;
  SentenceLabel label;
};

// Uniform time-segmentation initialization: each utterance's frames are split
// evenly across the states of its word path; state Gaussians come from the
// assigned frames and the silence model from utterance-edge frames.
// Utterances shorter than their state path are excluded with a warning;
// a word with no usable utterance raises TrainingDataError naming it.
HmmModelSet init_models(const std::vector<TrainUtterance> &data, const MatrixGrammar &grammar,
                        const HmmTopology &topo, const GmmConfig &gmm,
                        std::vector<std::string> *warnings = nullptr);

struct TrainConfig {
  int max_iterations = 12;
  double rel_improvement_tol = 1e-4;
  int workers = 1;
};

struct TrainStats {
  std::vector<double> aligned_log_likelihood;  // one entry per iteration
  int iterations = 0;
  std::vector<std::string> warnings;
};

// Viterbi-style re-estimation: force-align every utterance to its label path
// (edge silence optional), re-estimate Gaussians from the hard alignment and
// transitions from alignment counts with add-one smoothing. The total aligned
// log-likelihood is non-decreasing per iteration (within 1e-6 slack); stops
// at max_iterations or when the relative improvement drops below tolerance.
TrainStats train(HmmModelSet &models, const std::vector<TrainUtterance> &data,
                 const TrainConfig &cfg);

// Versioned text serialization (format "fadehmm 1"); values round-trip
// exactly, so checkpointed sweeps resume bit-identically.
void save_models(const HmmModelSet &models, std::ostream &out);
void save_models(const HmmModelSet &models, const std::string &path);
HmmModelSet load_models(std::istream &in);
HmmModelSet load_models(const std::string &path);

}  // namespace fade

#endif  // FADE_HMM_H_
