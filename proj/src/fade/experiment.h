// fade/experiment.h

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

#ifndef FADE_EXPERIMENT_H_
#define FADE_EXPERIMENT_H_

#include <string>
#include <vector>

#include "fade/sim.h"
#include "fade/stats.h"

namespace fade {

// Masker declaration; surrogates are generated from the corpus speech so a
// run needs no external noise assets.
struct NoiseSpec {
  std::string label = "stationary";
  std::string type = "stationary_surrogate";  // file | stationary_surrogate | gated_surrogate
  std::string path;                           // for type == file
  double duration_s = 12.0;                   // surrogates; extended to cover the corpus
  double max_gap_ms = 250.0;                  // gated surrogate
  GateConfig gate;
};

struct CorpusConfig {
  std::string type = "synthetic";  // synthetic | manifest
  std::string manifest_path;
  double train_fraction = 0.67;  // manifest corpora are split; synthetic ones
                                 // generate separate train/test sets
  bool tonal = false;
  int train_sentences = 96;
  int test_sentences = 48;
  int sample_rate = 16000;
  double edge_silence_s = 0.1;
};

struct ExperimentConfig {
  uint64_t seed = 1;  // no wall-clock seeding anywhere
  int workers = 1;
  std::string output_dir = "out";
  MatrixGrammar grammar;
  CorpusConfig corpus;
  std::vector<NoiseSpec> noises;
  SnrGrid grid;
  FrontendConfig frontend;
  std::vector<FeatureKind> feature_kinds{FeatureKind::kMfcc, FeatureKind::kSgbfb};
  MfccConfig mfcc;
  SgbfbConfig sgbfb = SgbfbConfig::defaults();
  bool mean_variance_norm = true;
  HmmTopology topology;
  GmmConfig gmm;
  TrainConfig training;
  bool checkpoint_models = false;

  void validate() const;
};

// The established matrix-test shape: five slots (name, verb, numeral,
// adjective, noun) with ten alternatives each.
MatrixGrammar default_matrix_grammar();

// Small grammar (3 slots x 4 alternatives) that keeps HMM training fast.
MatrixGrammar desk_grammar();

ExperimentConfig default_config();
// Desk-scale synthetic configuration used by the integration tests.
ExperimentConfig desk_config();

std::string config_to_json(const ExperimentConfig &cfg);
ExperimentConfig config_from_json(const std::string &json_text);
ExperimentConfig load_config(const std::string &path);

// FNV-1a hash of the canonical JSON dump; changes whenever any parameter
// changes.
std::string config_hash(const ExperimentConfig &cfg);

// One simulated cell of the experiment matrix.
struct Condition {
  FeatureKind kind = FeatureKind::kMfcc;
  std::string speaker;
  std::string language;
  std::string effort;
  std::string noise;

  std::string id() const;  // filesystem-safe slug
};

struct ConditionResult {
  Condition condition;
  bool ok = false;
  std::string failure_reason;
  RecognitionMatrix matrix;
  SrtEstimate srt;
};

struct GainResult {
  FeatureKind kind = FeatureKind::kMfcc;
  std::string speaker;
  std::string language;
  std::string noise;
  double gain_db = 0.0;
  double sigma_db = 0.0;
};

struct ResultBundle {
  ExperimentConfig config;
  std::vector<ConditionResult> conditions;
  std::vector<GainResult> gains;

  bool all_ok() const;
};

// Executes every condition (feature kind x corpus group x noise), extracts
// SRTs and Lombard gains, and writes matrices as it goes. With resume = true,
// previously written matrices are loaded instead of recomputed (the config
// hash must match the stored run manifest). Per-condition failures are
// recorded, not thrown.
ResultBundle run_experiment(const ExperimentConfig &cfg, bool resume = false);

// Writes summary.csv, gains.csv, per-feature scatter data files and the run
// manifest into out_dir; matrices/<id>.csv are produced during the run.
// Returns the paths written.
std::vector<std::string> emit_reports(const ResultBundle &bundle, const std::string &out_dir);

// Empirical SRT table: mean/listener data per measured condition.
struct EmpiricalRow {
  std::string speaker;
  std::string language;
  std::string effort;
  std::string noise;
  double srt_db = 0.0;
  double sem_db = 0.0;
  int n_listeners = 1;
  std::vector<double> listener_srts_db;  // optional, enables per-listener gains
};

struct EmpiricalTable {
  std::vector<EmpiricalRow> rows;

  const EmpiricalRow *find(const std::string &speaker, const std::string &language,
                           const std::string &effort, const std::string &noise) const;
};

EmpiricalTable load_empirical_table(const std::string &path);

// Fig-1-style panels: absolute SRT and Lombard gain per feature kind.
struct EvalPanel {
  std::string name;  // "srt" or "gain"
  FeatureKind kind = FeatureKind::kMfcc;
  PairedSeries series;
  EvalSummary summary;
  double regression_slope = 0.0;
  double regression_intercept = 0.0;
};

struct EvalResult {
  std::vector<EvalPanel> panels;
};

// Pairs the bundle's predictions with the empirical table. The SRT panels use
// nu = number of points; the gain panels consume two SRTs per point, so their
// nu is half of the corresponding SRT count. Unmatched conditions raise
// InvalidArgument listing every missing key.
EvalResult evaluate(const ResultBundle &bundle, const EmpiricalTable &emp);

// eval_summary.csv plus one scatter CSV per panel (identity and regression
// line coefficients included); returns the paths written.
std::vector<std::string> emit_evaluation(const EvalResult &eval, const std::string &out_dir);

}  // namespace fade

#endif  // FADE_EXPERIMENT_H_
