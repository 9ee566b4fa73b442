// fade/decode.cc

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

#include "fade/decode.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fade {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Appends one word bank (list of alternatives for a slot) or the silence
// model to the graph under construction.
struct Composer {
  DecodingGraph graph;
  std::vector<const GaussianState *> emissions;

  int emission_id(const GaussianState *s) {
    for (size_t i = 0; i < emissions.size(); ++i)
      if (emissions[i] == s) return static_cast<int>(i);
    emissions.push_back(s);
    return static_cast<int>(emissions.size()) - 1;
  }

  // Adds the chain of states for one HMM; returns (first node, last node).
  std::pair<int, int> add_chain(const WordHmm &hmm, int slot, int rank) {
    const int first = static_cast<int>(graph.nodes.size());
    for (size_t i = 0; i < hmm.states.size(); ++i) {
      GraphNode node;
      node.state = &hmm.states[i];
      node.log_self = hmm.log_self[i];
      node.log_next = hmm.log_next[i];
      node.slot = slot;
      node.word_rank = rank;
      node.state_index = static_cast<int>(i);
      node.emission_id = emission_id(&hmm.states[i]);
      graph.nodes.push_back(node);
      const int id = static_cast<int>(graph.nodes.size()) - 1;
      graph.arcs.push_back({id, id, node.log_self, false, 0});
      if (i > 0) graph.arcs.push_back({id - 1, id, hmm.log_next[i - 1], false, 0});
    }
    return {first, static_cast<int>(graph.nodes.size()) - 1};
  }
};

DecodingGraph compose(const HmmModelSet &models,
                      const std::vector<std::vector<std::string>> &slot_alternatives) {
  Composer c;
  c.graph.dim = models.dim;

  // Optional leading silence.
  const auto [sil_in_first, sil_in_last] = c.add_chain(models.silence, -1, -1);
  c.graph.initial.push_back({sil_in_first, 0.0, false, 0});

  // Word banks, slot by slot; the previous slot's last states (or the leading
  // silence) fan into every alternative of the next slot.
  std::vector<int> prev_last_nodes{sil_in_last};

  for (size_t slot = 0; slot < slot_alternatives.size(); ++slot) {
    std::vector<std::string> sorted = slot_alternatives[slot];
    std::sort(sorted.begin(), sorted.end());
    c.graph.slot_words.push_back(sorted);

    std::vector<int> bank_firsts, bank_lasts;
    for (size_t rank = 0; rank < sorted.size(); ++rank) {
      const auto it = models.words.find(sorted[rank]);
      if (it == models.words.end())
        throw InvalidArgument("decoding graph: no model for word '" + sorted[rank] + "'");
      const auto [first, last] =
          c.add_chain(it->second, static_cast<int>(slot), static_cast<int>(rank));
      bank_firsts.push_back(first);
      bank_lasts.push_back(last);
      if (slot == 0) {
        // Sentences may start directly at the first slot (no leading silence).
        c.graph.initial.push_back({first, 0.0, true, static_cast<int>(rank)});
        c.graph.arcs.push_back({sil_in_last, first, c.graph.nodes[sil_in_last].log_next, true,
                                static_cast<int>(rank)});
      } else {
        for (int prev : prev_last_nodes)
          c.graph.arcs.push_back({prev, first, c.graph.nodes[prev].log_next, true,
                                  static_cast<int>(rank)});
      }
    }
    prev_last_nodes = bank_lasts;
  }

  // Optional trailing silence.
  const auto [sil_out_first, sil_out_last] = c.add_chain(models.silence, -1, -1);
  for (int prev : prev_last_nodes) {
    c.graph.arcs.push_back({prev, sil_out_first, c.graph.nodes[prev].log_next, false, 0});
    c.graph.finals.push_back(prev);  // sentence may end without silence
  }
  c.graph.finals.push_back(sil_out_last);

  c.graph.num_emissions = static_cast<int>(c.emissions.size());
  return c.graph;
}

}  // namespace

DecodingGraph build_decoding_graph(const HmmModelSet &models, const MatrixGrammar &grammar) {
  grammar.validate();
  std::vector<std::vector<std::string>> alternatives;
  for (const auto &slot : grammar.slots) alternatives.push_back(slot.alternatives);
  return compose(models, alternatives);
}

DecodingGraph build_alignment_graph(const HmmModelSet &models, const SentenceLabel &label) {
  if (label.words.empty()) throw InvalidArgument("alignment graph: empty label");
  std::vector<std::vector<std::string>> alternatives;
  for (const std::string &w : label.words) alternatives.push_back({w});
  return compose(models, alternatives);
}

namespace {

std::vector<const GaussianState *> emission_states(const DecodingGraph &graph) {
  std::vector<const GaussianState *> states(graph.num_emissions, nullptr);
  for (const GraphNode &n : graph.nodes) states[n.emission_id] = n.state;
  return states;
}

// Emission log-likelihood cache for one frame: one value per distinct state.
void fill_emissions(const std::vector<const GaussianState *> &states, const FeatureMatrix &fm,
                    int t, std::vector<double> &out) {
  out.resize(states.size());
  const double *x = fm.values.row(t);
  for (size_t i = 0; i < states.size(); ++i) out[i] = states[i]->log_likelihood(x, fm.dim());
}

}  // namespace

Transcript viterbi_decode(const DecodingGraph &graph, const FeatureMatrix &fm) {
  if (fm.dim() != graph.dim)
    throw InvalidArgument("viterbi_decode: feature dim " + std::to_string(fm.dim()) +
                          " does not match model dim " + std::to_string(graph.dim));
  const int T = fm.num_frames();
  if (T < 1) throw DecodeError("viterbi_decode: empty feature matrix");
  const int N = static_cast<int>(graph.nodes.size());

  // The word-sequence prefix of the best path into each node is packed into a
  // uint64 (one byte per slot, outermost first), so "lexicographically
  // smaller word sequence" is a plain integer comparison. All paths meeting
  // at a node share the same slot position, hence the same packed depth.
  std::vector<double> score(N, kNegInf), best(N, kNegInf), next_score(N);
  std::vector<uint64_t> prefix(N, 0), best_prefix(N, 0), next_prefix(N);
  const std::vector<const GaussianState *> states = emission_states(graph);
  std::vector<double> emis;

  fill_emissions(states, fm, 0, emis);
  for (const auto &entry : graph.initial) {
    const double s = entry.weight + emis[graph.nodes[entry.node].emission_id];
    const uint64_t p = entry.word_entry ? static_cast<uint64_t>(entry.entry_rank) + 1 : 0;
    if (s > score[entry.node] || (s == score[entry.node] && p < prefix[entry.node])) {
      score[entry.node] = s;
      prefix[entry.node] = p;
    }
  }

  for (int t = 1; t < T; ++t) {
    std::fill(best.begin(), best.end(), kNegInf);
    for (const GraphArc &arc : graph.arcs) {
      if (score[arc.from] == kNegInf) continue;
      const double cand = score[arc.from] + arc.weight;
      const uint64_t p =
          arc.word_entry ? (prefix[arc.from] << 8) | (static_cast<uint64_t>(arc.entry_rank) + 1)
                         : prefix[arc.from];
      if (cand > best[arc.to] || (cand == best[arc.to] && p < best_prefix[arc.to])) {
        best[arc.to] = cand;
        best_prefix[arc.to] = p;
      }
    }
    fill_emissions(states, fm, t, emis);
    for (int i = 0; i < N; ++i) {
      next_score[i] = best[i] == kNegInf ? kNegInf : best[i] + emis[graph.nodes[i].emission_id];
      next_prefix[i] = best_prefix[i];
    }
    score.swap(next_score);
    prefix.swap(next_prefix);
  }

  double final_score = kNegInf;
  uint64_t final_prefix = 0;
  bool found = false;
  for (int node : graph.finals) {
    if (score[node] == kNegInf) continue;
    const double s = score[node] + graph.nodes[node].log_next;
    if (!found || s > final_score || (s == final_score && prefix[node] < final_prefix)) {
      final_score = s;
      final_prefix = prefix[node];
      found = true;
    }
  }
  if (!found)
    throw DecodeError("viterbi_decode: no complete path fits " + std::to_string(T) + " frames");

  const size_t slots = graph.slot_words.size();
  Transcript out;
  out.log_likelihood = final_score;
  out.words.resize(slots);
  for (size_t i = 0; i < slots; ++i) {
    const int rank = static_cast<int>((final_prefix >> (8 * (slots - 1 - i))) & 0xff) - 1;
    out.words[i] = graph.slot_words[i][rank];
  }
  return out;
}

Alignment viterbi_align(const DecodingGraph &graph, const FeatureMatrix &fm) {
  if (fm.dim() != graph.dim)
    throw InvalidArgument("viterbi_align: feature dim mismatch");
  const int T = fm.num_frames();
  if (T < 1) throw DecodeError("viterbi_align: empty feature matrix");
  const int N = static_cast<int>(graph.nodes.size());

  std::vector<double> score(N, kNegInf), best(N);
  std::vector<std::vector<int>> backptr(T, std::vector<int>(N, -1));
  const std::vector<const GaussianState *> states = emission_states(graph);
  std::vector<double> emis;

  fill_emissions(states, fm, 0, emis);
  for (const auto &entry : graph.initial) {
    const double s = entry.weight + emis[graph.nodes[entry.node].emission_id];
    if (s > score[entry.node]) score[entry.node] = s;
  }

  for (int t = 1; t < T; ++t) {
    std::fill(best.begin(), best.end(), kNegInf);
    auto &bp = backptr[t];
    for (const GraphArc &arc : graph.arcs) {
      if (score[arc.from] == kNegInf) continue;
      const double cand = score[arc.from] + arc.weight;
      if (cand > best[arc.to] || (cand == best[arc.to] && arc.from < bp[arc.to])) {
        best[arc.to] = cand;
        bp[arc.to] = arc.from;
      }
    }
    fill_emissions(states, fm, t, emis);
    for (int i = 0; i < N; ++i)
      score[i] = best[i] == kNegInf ? kNegInf : best[i] + emis[graph.nodes[i].emission_id];
  }

  int final_node = -1;
  double final_score = kNegInf;
  for (int node : graph.finals) {
    if (score[node] == kNegInf) continue;
    const double s = score[node] + graph.nodes[node].log_next;
    if (s > final_score || (s == final_score && node < final_node)) {
      final_score = s;
      final_node = node;
    }
  }
  if (final_node < 0)
    throw DecodeError("viterbi_align: no complete path fits " + std::to_string(T) + " frames");

  Alignment out;
  out.log_likelihood = final_score;
  out.nodes.resize(T);
  int node = final_node;
  for (int t = T - 1; t >= 0; --t) {
    out.nodes[t] = node;
    if (t > 0) node = backptr[t][node];
  }
  return out;
}

double score_words(const SentenceLabel &ref, const Transcript &hyp) {
  if (ref.words.empty() || ref.words.size() != hyp.words.size())
    throw InvalidArgument("score_words: reference has " + std::to_string(ref.words.size()) +
                          " slots, hypothesis has " + std::to_string(hyp.words.size()));
  int correct = 0;
  for (size_t i = 0; i < ref.words.size(); ++i)
    if (ref.words[i] == hyp.words[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(ref.words.size());
}

}  // namespace fade
