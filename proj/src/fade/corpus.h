// fade/corpus.h

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

#ifndef FADE_CORPUS_H_
#define FADE_CORPUS_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fade/audio.h"

namespace fade {

// Closed-set matrix test syntax: one word per slot, drawn from a fixed list
// of alternatives.
struct MatrixGrammar {
  struct Slot {
    std::string name;
    std::vector<std::string> alternatives;
  };
  std::vector<Slot> slots;

  void validate() const;
  size_t num_slots() const { return slots.size(); }
};

// One word identifier per slot, in slot order.
struct SentenceLabel {
  std::vector<std::string> words;

  std::string text() const;
};

// Throws InvalidArgument naming the slot and word on the first mismatch.
void validate_label(const MatrixGrammar &g, const SentenceLabel &label);

struct CorpusEntry {
  std::string audio_path;  // "synthetic:<n>" for generated corpora
  AudioBuffer audio;
  SentenceLabel label;
  std::string speaker;
  std::string language;
  std::string effort;  // "plain" or "lombard"
};

struct CorpusManifest {
  std::vector<CorpusEntry> entries;
  int sample_rate = 0;

  // Distinct (speaker, language, effort) triples in first-seen order.
  std::vector<std::array<std::string, 3>> conditions() const;
};

// Line-oriented tab-separated manifest with a header line; see save_manifest
// for the exact layout. Audio is loaded eagerly and validated against the
// grammar; mixed sample rates, unresolvable paths and label mismatches all
// raise LoadError.
CorpusManifest load_manifest(const std::string &path, const MatrixGrammar &grammar);

// Writes the manifest TSV plus the referenced WAV files (32-bit float) into
// dir; returns the manifest path.
std::string save_manifest(const CorpusManifest &m, const std::string &dir,
                          const std::string &name);

// One uniformly random alternative per slot; deterministic given the seed.
SentenceLabel sample_sentence(const MatrixGrammar &g, uint64_t rng_seed);

// Synthetic token corpus: every word is a harmonic source at a fundamental-
// frequency contour, shaped by formant-like resonance targets, with a gentle
// aspiration floor. In tonal mode the words within a slot share resonances
// and differ only in their pitch contour.
struct Resonance {
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;
  double gain = 1.0;
};

struct TokenRecipe {
  double duration_s = 0.2;
  double f0_start_hz = 110.0;
  double f0_end_hz = 110.0;
  std::vector<Resonance> resonances;
  double aspiration_level = 0.01;  // relative to the harmonic RMS
};

struct SyntheticCorpusSpec {
  MatrixGrammar grammar;
  std::vector<std::vector<TokenRecipe>> recipes;  // [slot][alternative]
  int sample_rate = 16000;
  bool tonal_mode = false;
  double inter_word_silence_s = 0.05;
  double edge_silence_s = 0.0;
  std::string speaker = "synth";
  std::string language = "syn";
  std::string effort = "plain";

  void validate() const;
};

// Literature-shaped default recipes for the given grammar: distinct resonance
// targets per alternative, or (tonal mode) shared resonances with distinct
// pitch contours.
SyntheticCorpusSpec default_synthetic_spec(const MatrixGrammar &grammar, int sample_rate,
                                           bool tonal_mode);

// Deterministic token waveform for one recipe (pure function of the recipe
// and the token's slot/alternative position).
AudioBuffer synthesize_token(const TokenRecipe &recipe, int sample_rate, uint64_t token_tag);

// num_sentences random sentences; audio is the concatenation of the slot
// tokens with inter-word silence (and optional edge silence). Byte-identical
// across runs for a fixed (spec, seed).
CorpusManifest synthesize_corpus(const SyntheticCorpusSpec &spec, int num_sentences,
                                 uint64_t rng_seed);

// Disjoint partition by entry, stratified per (speaker, language, effort);
// each cell is split within one entry of the target fraction.
struct SplitResult {
  CorpusManifest train;
  CorpusManifest test;
};

SplitResult split_train_test(const CorpusManifest &m, double train_fraction,
                             uint64_t rng_seed);

}  // namespace fade

#endif  // FADE_CORPUS_H_
