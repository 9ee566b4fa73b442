// fade/hmm.cc

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

#include "fade/hmm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fade/decode.h"
#include "fade/threadpool.h"

namespace fade {

void HmmTopology::validate() const {
  if (states_per_word < 1) throw InvalidArgument("topology: states_per_word must be >= 1");
  if (silence_states < 1) throw InvalidArgument("topology: silence_states must be >= 1");
}

void GaussianState::finalize() {
  const size_t nc = weights.size();
  if (nc == 0 || nc > 16 || means.size() != nc || vars.size() != nc)
    throw InvalidArgument("GaussianState: component count must be 1..16 and consistent");
  log_weights.resize(nc);
  log_consts.resize(nc);
  for (size_t k = 0; k < nc; ++k) {
    log_weights[k] = weights[k] > 0.0 ? std::log(weights[k])
                                      : -std::numeric_limits<double>::infinity();
    double c = 0.0;
    for (double v : vars[k]) c += std::log(2.0 * M_PI * v);
    log_consts[k] = -0.5 * c;
  }
}

double GaussianState::log_likelihood(const double *x, int dim) const {
  const size_t nc = weights.size();
  if (nc == 1) {
    const double *mu = means[0].data();
    const double *var = vars[0].data();
    double acc = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double diff = x[d] - mu[d];
      acc += diff * diff / var[d];
    }
    return log_consts[0] - 0.5 * acc;
  }
  double best = -std::numeric_limits<double>::infinity();
  double terms[16];
  for (size_t k = 0; k < nc; ++k) {
    const double *mu = means[k].data();
    const double *var = vars[k].data();
    double acc = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double diff = x[d] - mu[d];
      acc += diff * diff / var[d];
    }
    const double t = log_weights[k] + log_consts[k] - 0.5 * acc;
    terms[k] = t;
    if (t > best) best = t;
  }
  if (!std::isfinite(best)) return best;
  double sum = 0.0;
  for (size_t k = 0; k < nc; ++k) sum += std::exp(terms[k] - best);
  return best + std::log(sum);
}

namespace {

struct MomentAcc {
  std::vector<double> sum;
  std::vector<double> sumsq;
  double count = 0.0;

  void resize(int dim) {
    sum.assign(dim, 0.0);
    sumsq.assign(dim, 0.0);
    count = 0.0;
  }
  void add(const double *x, int dim) {
    for (int d = 0; d < dim; ++d) {
      sum[d] += x[d];
      sumsq[d] += x[d] * x[d];
    }
    count += 1.0;
  }
};

GaussianState state_from_moments(const MomentAcc &acc, int dim,
                                 const std::vector<double> &floor, int num_components) {
  GaussianState s;
  std::vector<double> mean(dim), var(dim);
  for (int d = 0; d < dim; ++d) {
    mean[d] = acc.sum[d] / acc.count;
    var[d] = std::max(acc.sumsq[d] / acc.count - mean[d] * mean[d], floor[d]);
  }
  if (num_components == 1) {
    s.weights = {1.0};
    s.means = {mean};
    s.vars = {var};
  } else {
    // Split the single Gaussian into symmetrically perturbed components.
    s.weights.assign(num_components, 1.0 / num_components);
    for (int k = 0; k < num_components; ++k) {
      std::vector<double> m(dim);
      const double offset = (k - 0.5 * (num_components - 1)) * 0.2;
      for (int d = 0; d < dim; ++d) m[d] = mean[d] + offset * std::sqrt(var[d]);
      s.means.push_back(std::move(m));
      s.vars.push_back(var);
    }
  }
  s.finalize();
  return s;
}

int word_path_states(const SentenceLabel &label, const HmmTopology &topo) {
  return static_cast<int>(label.words.size()) * topo.states_per_word;
}

}  // namespace

HmmModelSet init_models(const std::vector<TrainUtterance> &data, const MatrixGrammar &grammar,
                        const HmmTopology &topo, const GmmConfig &gmm,
                        std::vector<std::string> *warnings) {
  grammar.validate();
  topo.validate();
  if (gmm.num_components < 1 || gmm.num_components > 16)
    throw InvalidArgument("init_models: num_components must be in [1, 16]");
  if (data.empty()) throw TrainingDataError("init_models: no training utterances");

  const int dim = data[0].features.dim();
  for (const TrainUtterance &u : data) {
    validate_label(grammar, u.label);
    if (u.features.dim() != dim)
      throw InvalidArgument("init_models: inconsistent feature dimensions");
  }

  // Global per-dimension variance for the floor.
  MomentAcc global;
  global.resize(dim);
  for (const TrainUtterance &u : data)
    for (int t = 0; t < u.features.num_frames(); ++t) global.add(u.features.values.row(t), dim);
  std::vector<double> floor(dim);
  std::vector<double> global_mean(dim), global_var(dim);
  for (int d = 0; d < dim; ++d) {
    global_mean[d] = global.sum[d] / global.count;
    global_var[d] = std::max(global.sumsq[d] / global.count - global_mean[d] * global_mean[d],
                             1e-12);
    floor[d] = gmm.variance_floor_fraction * global_var[d];
  }

  // Uniform segmentation: frame t of an utterance with S word-path states
  // goes to path state floor(t * S / T).
  std::map<std::string, std::vector<MomentAcc>> word_acc;
  for (const auto &slot : grammar.slots)
    for (const std::string &w : slot.alternatives) {
      auto &accs = word_acc[w];
      if (accs.empty()) {
        accs.resize(topo.states_per_word);
        for (auto &a : accs) a.resize(dim);
      }
    }
  std::vector<MomentAcc> sil_acc(topo.silence_states);
  for (auto &a : sil_acc) a.resize(dim);

  for (const TrainUtterance &u : data) {
    const int T = u.features.num_frames();
    const int S = word_path_states(u.label, topo);
    if (T < S) {
      if (warnings)
        warnings->push_back("utterance '" + u.label.text() + "' has " + std::to_string(T) +
                            " frames < " + std::to_string(S) + " path states; excluded");
      continue;
    }
    for (int t = 0; t < T; ++t) {
      const int path_state = static_cast<int>(static_cast<int64_t>(t) * S / T);
      const int word_idx = path_state / topo.states_per_word;
      const int state_idx = path_state % topo.states_per_word;
      word_acc[u.label.words[word_idx]][state_idx].add(u.features.values.row(t), dim);
    }
    // Silence draws from the utterance edges (frames also stay with their words).
    const int edge = std::max(1, std::min(topo.silence_states, T / 4));
    for (int j = 0; j < edge; ++j) {
      const int state = j * topo.silence_states / edge;
      sil_acc[state].add(u.features.values.row(j), dim);
      sil_acc[state].add(u.features.values.row(T - 1 - j), dim);
    }
  }

  HmmModelSet models;
  models.topology = topo;
  models.gmm = gmm;
  models.dim = dim;
  models.variance_floor = floor;

  const double log_half = std::log(0.5);
  for (const auto &[word, accs] : word_acc) {
    WordHmm hmm;
    hmm.word = word;
    hmm.log_self.assign(topo.states_per_word, log_half);
    hmm.log_next.assign(topo.states_per_word, log_half);
    for (int i = 0; i < topo.states_per_word; ++i) {
      if (accs[i].count < 1.0)
        throw TrainingDataError("init_models: no usable training data for word '" + word + "'");
      hmm.states.push_back(state_from_moments(accs[i], dim, floor, gmm.num_components));
    }
    models.words.emplace(word, std::move(hmm));
  }

  models.silence.word = "<sil>";
  models.silence.log_self.assign(topo.silence_states, log_half);
  models.silence.log_next.assign(topo.silence_states, log_half);
  MomentAcc fallback = global;
  for (int i = 0; i < topo.silence_states; ++i) {
    const MomentAcc &acc = sil_acc[i].count >= 1.0 ? sil_acc[i] : fallback;
    models.silence.states.push_back(state_from_moments(acc, dim, floor, gmm.num_components));
  }
  return models;
}

namespace {

// Accumulators for one re-estimation pass, mirroring the model layout.
struct ReestAcc {
  // [state][component]
  std::vector<std::vector<MomentAcc>> comps;
  std::vector<double> self_count;
  std::vector<double> next_count;

  void init(int num_states, int num_components, int dim) {
    comps.assign(num_states, std::vector<MomentAcc>(num_components));
    for (auto &state : comps)
      for (auto &c : state) c.resize(dim);
    self_count.assign(num_states, 0.0);
    next_count.assign(num_states, 0.0);
  }
};

int best_component(const GaussianState &s, const double *x, int dim) {
  if (s.weights.size() == 1) return 0;
  int best_k = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < s.weights.size(); ++k) {
    double acc = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double diff = x[d] - s.means[k][d];
      acc += diff * diff / s.vars[k][d];
    }
    const double t = s.log_weights[k] + s.log_consts[k] - 0.5 * acc;
    if (t > best) {
      best = t;
      best_k = static_cast<int>(k);
    }
  }
  return best_k;
}

void reestimate_hmm(WordHmm &hmm, const ReestAcc &acc, const std::vector<double> &floor,
                    int dim) {
  for (size_t i = 0; i < hmm.states.size(); ++i) {
    GaussianState &state = hmm.states[i];
    double total = 0.0;
    for (const MomentAcc &c : acc.comps[i]) total += c.count;
    if (total < 1.0) continue;  // starved state keeps its parameters
    for (size_t k = 0; k < state.weights.size(); ++k) {
      const MomentAcc &c = acc.comps[i][k];
      state.weights[k] = c.count / total;
      if (c.count < 1.0) continue;
      for (int d = 0; d < dim; ++d) {
        state.means[k][d] = c.sum[d] / c.count;
        state.vars[k][d] =
            std::max(c.sumsq[d] / c.count - state.means[k][d] * state.means[k][d], floor[d]);
      }
    }
    state.finalize();
    // Add-one smoothing on the transition counts.
    hmm.log_self[i] = std::log((acc.self_count[i] + 1.0) / (acc.self_count[i] + acc.next_count[i] + 2.0));
    hmm.log_next[i] = std::log((acc.next_count[i] + 1.0) / (acc.self_count[i] + acc.next_count[i] + 2.0));
  }
}

}  // namespace

TrainStats train(HmmModelSet &models, const std::vector<TrainUtterance> &data,
                 const TrainConfig &cfg) {
  if (cfg.max_iterations < 1) throw InvalidArgument("train: max_iterations must be >= 1");
  if (data.empty()) throw TrainingDataError("train: no training utterances");

  TrainStats stats;

  // Utterances shorter than their word path can never align; skip them once.
  std::vector<size_t> usable;
  for (size_t i = 0; i < data.size(); ++i) {
    const int S = word_path_states(data[i].label, models.topology);
    if (data[i].features.num_frames() < S) {
      stats.warnings.push_back("utterance '" + data[i].label.text() + "' too short to align; skipped");
      continue;
    }
    usable.push_back(i);
  }
  if (usable.empty()) throw TrainingDataError("train: no alignable utterances");

  // Graphs reference the model states in place; parameters are re-estimated
  // without reallocating, so the graphs stay valid across iterations.
  std::vector<DecodingGraph> graphs(usable.size());
  for (size_t j = 0; j < usable.size(); ++j)
    graphs[j] = build_alignment_graph(models, data[usable[j]].label);

  const int dim = models.dim;
  std::vector<Alignment> alignments(usable.size());
  std::vector<std::vector<int>> prev_alignments;
  double prev_ll = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    parallel_for(usable.size(), cfg.workers, [&](size_t j) {
      alignments[j] = viterbi_align(graphs[j], data[usable[j]].features);
    });

    double total_ll = 0.0;
    for (const Alignment &a : alignments) total_ll += a.log_likelihood;
    stats.aligned_log_likelihood.push_back(total_ll);
    stats.iterations = iter + 1;

    // Exact fixed point: identical alignments reproduce identical parameters,
    // so re-estimation would be a no-op.
    if (iter > 0) {
      bool unchanged = true;
      for (size_t j = 0; j < usable.size() && unchanged; ++j)
        unchanged = alignments[j].nodes == prev_alignments[j];
      if (unchanged) break;
    }
    prev_alignments.resize(usable.size());
    for (size_t j = 0; j < usable.size(); ++j) prev_alignments[j] = alignments[j].nodes;

    // Accumulate in utterance order (deterministic reduction).
    std::map<std::string, ReestAcc> word_accs;
    for (const auto &[word, hmm] : models.words) {
      word_accs[word].init(static_cast<int>(hmm.states.size()), models.gmm.num_components, dim);
    }
    ReestAcc sil_acc;
    sil_acc.init(models.topology.silence_states, models.gmm.num_components, dim);

    for (size_t j = 0; j < usable.size(); ++j) {
      const TrainUtterance &u = data[usable[j]];
      const DecodingGraph &g = graphs[j];
      const Alignment &a = alignments[j];
      const int T = static_cast<int>(a.nodes.size());
      for (int t = 0; t < T; ++t) {
        const GraphNode &node = g.nodes[a.nodes[t]];
        ReestAcc &acc = node.slot < 0 ? sil_acc : word_accs[g.slot_words[node.slot][node.word_rank]];
        const double *x = u.features.values.row(t);
        const int k = best_component(*node.state, x, dim);
        acc.comps[node.state_index][k].add(x, dim);
        const bool advance = t + 1 >= T || a.nodes[t + 1] != a.nodes[t];
        (advance ? acc.next_count : acc.self_count)[node.state_index] += 1.0;
      }
    }

    for (auto &[word, hmm] : models.words)
      reestimate_hmm(hmm, word_accs[word], models.variance_floor, dim);
    reestimate_hmm(models.silence, sil_acc, models.variance_floor, dim);

    if (iter > 0) {
      const double rel = (total_ll - prev_ll) / std::max(1.0, std::abs(prev_ll));
      if (rel < cfg.rel_improvement_tol) break;
    }
    prev_ll = total_ll;
  }
  return stats;
}

namespace {

void save_hmm(const WordHmm &hmm, std::ostream &out) {
  out << "states " << hmm.states.size() << '\n';
  for (size_t i = 0; i < hmm.states.size(); ++i) {
    const GaussianState &s = hmm.states[i];
    out << "state " << i << ' ' << format_double(hmm.log_self[i]) << ' '
        << format_double(hmm.log_next[i]) << ' ' << s.weights.size() << '\n';
    for (size_t k = 0; k < s.weights.size(); ++k) {
      out << "weight " << format_double(s.weights[k]) << '\n';
      out << "mean";
      for (double v : s.means[k]) out << ' ' << format_double(v);
      out << "\nvar";
      for (double v : s.vars[k]) out << ' ' << format_double(v);
      out << '\n';
    }
  }
}

std::string expect_token(std::istream &in, const char *what) {
  std::string tok;
  if (!(in >> tok)) throw LoadError(std::string("load_models: unexpected end of file, wanted ") + what);
  return tok;
}

void require(bool ok, const std::string &msg) {
  if (!ok) throw LoadError("load_models: " + msg);
}

WordHmm load_hmm(std::istream &in, int dim) {
  WordHmm hmm;
  require(expect_token(in, "states") == "states", "expected 'states'");
  size_t num_states;
  in >> num_states;
  hmm.states.resize(num_states);
  hmm.log_self.resize(num_states);
  hmm.log_next.resize(num_states);
  for (size_t i = 0; i < num_states; ++i) {
    require(expect_token(in, "state") == "state", "expected 'state'");
    size_t idx;
    size_t num_comp;
    in >> idx >> hmm.log_self[i] >> hmm.log_next[i] >> num_comp;
    require(idx == i, "state index out of order");
    GaussianState &s = hmm.states[i];
    s.weights.resize(num_comp);
    s.means.assign(num_comp, std::vector<double>(dim));
    s.vars.assign(num_comp, std::vector<double>(dim));
    for (size_t k = 0; k < num_comp; ++k) {
      require(expect_token(in, "weight") == "weight", "expected 'weight'");
      in >> s.weights[k];
      require(expect_token(in, "mean") == "mean", "expected 'mean'");
      for (int d = 0; d < dim; ++d) in >> s.means[k][d];
      require(expect_token(in, "var") == "var", "expected 'var'");
      for (int d = 0; d < dim; ++d) in >> s.vars[k][d];
    }
    s.finalize();
  }
  return hmm;
}

}  // namespace

void save_models(const HmmModelSet &models, std::ostream &out) {
  out << "fadehmm 1\n";
  out << "dim " << models.dim << '\n';
  out << "topology " << models.topology.states_per_word << ' ' << models.topology.silence_states
      << '\n';
  out << "gmm " << models.gmm.num_components << ' '
      << format_double(models.gmm.variance_floor_fraction) << '\n';
  out << "floor";
  for (double v : models.variance_floor) out << ' ' << format_double(v);
  out << '\n';
  out << "silence\n";
  save_hmm(models.silence, out);
  out << "words " << models.words.size() << '\n';
  for (const auto &[word, hmm] : models.words) {
    out << "word " << word << '\n';
    save_hmm(hmm, out);
  }
}

void save_models(const HmmModelSet &models, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw LoadError("save_models: cannot open " + path);
  save_models(models, out);
  if (!out) throw LoadError("save_models: write failed for " + path);
}

HmmModelSet load_models(std::istream &in) {
  require(expect_token(in, "magic") == "fadehmm", "not a fadehmm file");
  int version;
  in >> version;
  require(version == 1, "unsupported fadehmm version");

  HmmModelSet models;
  require(expect_token(in, "dim") == "dim", "expected 'dim'");
  in >> models.dim;
  require(expect_token(in, "topology") == "topology", "expected 'topology'");
  in >> models.topology.states_per_word >> models.topology.silence_states;
  require(expect_token(in, "gmm") == "gmm", "expected 'gmm'");
  in >> models.gmm.num_components >> models.gmm.variance_floor_fraction;
  require(expect_token(in, "floor") == "floor", "expected 'floor'");
  models.variance_floor.resize(models.dim);
  for (int d = 0; d < models.dim; ++d) in >> models.variance_floor[d];
  require(expect_token(in, "silence") == "silence", "expected 'silence'");
  models.silence = load_hmm(in, models.dim);
  models.silence.word = "<sil>";
  require(expect_token(in, "words") == "words", "expected 'words'");
  size_t num_words;
  in >> num_words;
  for (size_t i = 0; i < num_words; ++i) {
    require(expect_token(in, "word") == "word", "expected 'word'");
    const std::string word = expect_token(in, "word name");
    WordHmm hmm = load_hmm(in, models.dim);
    hmm.word = word;
    models.words.emplace(word, std::move(hmm));
  }
  require(static_cast<bool>(in), "truncated model file");
  return models;
}

HmmModelSet load_models(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw LoadError("load_models: cannot open " + path);
  return load_models(in);
}

}  // namespace fade
