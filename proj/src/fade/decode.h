// fade/decode.h

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

#ifndef FADE_DECODE_H_
#define FADE_DECODE_H_

#include <string>
#include <vector>

#include "fade/hmm.h"

namespace fade {

// Grammar-composed state graph: optional silence, then one word bank per
// slot, then optional silence. Every path through the graph spells a
// grammar-valid sentence; cross-word arcs carry only the exiting state's
// forward probability, so the syntax adds no extra weighting.
struct GraphNode {
  const GaussianState *state = nullptr;
  double log_self = 0.0;
  double log_next = 0.0;  // weight of the forward/exit arc
  int slot = -1;          // -1 for silence
  int word_rank = -1;     // rank of the word within its slot (sorted order)
  int state_index = 0;    // index of the state within its word (or silence) HMM
  int emission_id = 0;    // index into the per-frame emission cache
};

struct GraphArc {
  int from = 0;
  int to = 0;
  double weight = 0.0;
  bool word_entry = false;  // arc enters the first state of a word
  int entry_rank = 0;       // rank pushed on word entry
};

struct DecodingGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphArc> arcs;  // includes self-loops
  struct Entry {
    int node = 0;
    double weight = 0.0;
    bool word_entry = false;
    int entry_rank = 0;
  };
  std::vector<Entry> initial;
  std::vector<int> finals;  // exit adds the node's log_next
  // Sorted word list per slot; word_rank indexes into these.
  std::vector<std::vector<std::string>> slot_words;
  int num_emissions = 0;
  int dim = 0;
};

// Full recognition graph over all grammar alternatives.
DecodingGraph build_decoding_graph(const HmmModelSet &models, const MatrixGrammar &grammar);

// Degenerate single-sentence graph used for forced alignment.
DecodingGraph build_alignment_graph(const HmmModelSet &models, const SentenceLabel &label);

struct Transcript {
  std::vector<std::string> words;  // one per slot, grammar-valid by construction
  double log_likelihood = 0.0;
};

// Exact max-log-likelihood word sequence over the composed graph. Ties are
// broken toward the lexicographically smaller word sequence (deterministic).
// Throws InvalidArgument on a feature-dimension mismatch and DecodeError when
// no complete path fits the frame count.
Transcript viterbi_decode(const DecodingGraph &graph, const FeatureMatrix &fm);

struct Alignment {
  std::vector<int> nodes;  // graph node per frame
  double log_likelihood = 0.0;
};

// State-level best path (backpointer Viterbi); used by training. Ties prefer
// the smaller predecessor node id.
Alignment viterbi_align(const DecodingGraph &graph, const FeatureMatrix &fm);

// Slot-wise fraction of correctly identified words, in [0, 1].
double score_words(const SentenceLabel &ref, const Transcript &hyp);

}  // namespace fade

#endif  // FADE_DECODE_H_
