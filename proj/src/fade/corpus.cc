// fade/corpus.cc

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

#include "fade/corpus.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fade/rng.h"

namespace fade {

void MatrixGrammar::validate() const {
  if (slots.empty()) throw InvalidArgument("grammar: needs at least one slot");
  for (const Slot &slot : slots) {
    if (slot.alternatives.size() < 2)
      throw InvalidArgument("grammar: slot '" + slot.name + "' needs at least 2 alternatives");
    std::vector<std::string> sorted = slot.alternatives;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw InvalidArgument("grammar: duplicate word in slot '" + slot.name + "'");
  }
}

std::string SentenceLabel::text() const {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

void validate_label(const MatrixGrammar &g, const SentenceLabel &label) {
  if (label.words.size() != g.slots.size())
    throw InvalidArgument("label '" + label.text() + "' has " +
                          std::to_string(label.words.size()) + " words, grammar has " +
                          std::to_string(g.slots.size()) + " slots");
  for (size_t i = 0; i < label.words.size(); ++i) {
    const auto &alts = g.slots[i].alternatives;
    if (std::find(alts.begin(), alts.end(), label.words[i]) == alts.end())
      throw InvalidArgument("label word '" + label.words[i] + "' is not an alternative of slot '" +
                            g.slots[i].name + "'");
  }
}

std::vector<std::array<std::string, 3>> CorpusManifest::conditions() const {
  std::vector<std::array<std::string, 3>> out;
  for (const CorpusEntry &e : entries) {
    std::array<std::string, 3> key{e.speaker, e.language, e.effort};
    if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
  }
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string &line, char sep) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<std::string> split_words(const std::string &s) {
  std::vector<std::string> words;
  std::istringstream in(s);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

constexpr const char *kManifestHeader = "# fade corpus manifest v1";
constexpr const char *kManifestColumns = "# path\twords\tspeaker\tlanguage\teffort";

}  // namespace

CorpusManifest load_manifest(const std::string &path, const MatrixGrammar &grammar) {
  grammar.validate();
  std::ifstream in(path);
  if (!in) throw LoadError("load_manifest: cannot open " + path);

  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  CorpusManifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = split_fields(line, '\t');
    if (fields.size() != 5)
      throw LoadError("load_manifest: " + path + ":" + std::to_string(lineno) +
                      ": expected 5 tab-separated fields, got " + std::to_string(fields.size()));
    CorpusEntry e;
    e.audio_path = fields[0];
    e.label.words = split_words(fields[1]);
    e.speaker = fields[2];
    e.language = fields[3];
    e.effort = fields[4];
    try {
      validate_label(grammar, e.label);
    } catch (const InvalidArgument &err) {
      throw LoadError("load_manifest: " + path + ":" + std::to_string(lineno) + ": " + err.what());
    }
    std::filesystem::path wav = e.audio_path;
    if (wav.is_relative()) wav = base / wav;
    e.audio = read_wav(wav.string());
    if (m.entries.empty()) {
      m.sample_rate = e.audio.sample_rate;
    } else if (e.audio.sample_rate != m.sample_rate) {
      throw LoadError("load_manifest: " + path + ":" + std::to_string(lineno) +
                      ": sample rate " + std::to_string(e.audio.sample_rate) +
                      " differs from manifest rate " + std::to_string(m.sample_rate));
    }
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) throw LoadError("load_manifest: empty corpus in " + path);
  return m;
}

std::string save_manifest(const CorpusManifest &m, const std::string &dir,
                          const std::string &name) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  const std::string manifest_path = (base / (name + ".tsv")).string();
  std::ofstream out(manifest_path);
  if (!out) throw LoadError("save_manifest: cannot open " + manifest_path);
  out << kManifestHeader << '\n' << kManifestColumns << '\n';
  for (size_t i = 0; i < m.entries.size(); ++i) {
    const CorpusEntry &e = m.entries[i];
    std::ostringstream wav_name;
    wav_name << name << "_" << i << ".wav";
    write_wav((base / wav_name.str()).string(), e.audio, WavFormat::kFloat32);
    out << wav_name.str() << '\t' << e.label.text() << '\t' << e.speaker << '\t' << e.language
        << '\t' << e.effort << '\n';
  }
  return manifest_path;
}

SentenceLabel sample_sentence(const MatrixGrammar &g, uint64_t rng_seed) {
  g.validate();
  Rng rng(rng_seed);
  SentenceLabel label;
  label.words.reserve(g.slots.size());
  for (const auto &slot : g.slots)
    label.words.push_back(slot.alternatives[rng.uniform_int(slot.alternatives.size())]);
  return label;
}

void SyntheticCorpusSpec::validate() const {
  grammar.validate();
  if (sample_rate <= 0) throw InvalidArgument("synthetic spec: sample rate must be positive");
  if (recipes.size() != grammar.slots.size())
    throw InvalidArgument("synthetic spec: recipe table does not match grammar slots");
  for (size_t s = 0; s < recipes.size(); ++s) {
    if (recipes[s].size() != grammar.slots[s].alternatives.size())
      throw InvalidArgument("synthetic spec: recipe count mismatch in slot '" +
                            grammar.slots[s].name + "'");
    for (const TokenRecipe &r : recipes[s]) {
      if (r.duration_s <= 0.1)
        throw InvalidArgument("synthetic spec: token durations must exceed 100 ms");
      if (r.f0_start_hz <= 0.0 || r.f0_end_hz <= 0.0)
        throw InvalidArgument("synthetic spec: F0 must be positive");
    }
  }
}

SyntheticCorpusSpec default_synthetic_spec(const MatrixGrammar &grammar, int sample_rate,
                                           bool tonal_mode) {
  grammar.validate();
  SyntheticCorpusSpec spec;
  spec.grammar = grammar;
  spec.sample_rate = sample_rate;
  spec.tonal_mode = tonal_mode;
  spec.recipes.resize(grammar.slots.size());
  for (size_t s = 0; s < grammar.slots.size(); ++s) {
    const size_t n_alt = grammar.slots[s].alternatives.size();
    spec.recipes[s].resize(n_alt);
    for (size_t a = 0; a < n_alt; ++a) {
      TokenRecipe &r = spec.recipes[s][a];
      r.duration_s = 0.18 + 0.03 * static_cast<double>((s + a) % 3);
      if (tonal_mode) {
        // Shared vocal-tract shape per slot; the alternatives differ only in
        // their pitch contour (level low/high, rising, falling). Broad
        // resonances keep the long-term spectrum insensitive to the harmonic
        // comb position.
        const double f1 = 420.0 + 35.0 * static_cast<double>(s);
        const double f2 = 1350.0 + 120.0 * static_cast<double>(s);
        const double f3 = 2500.0 + 90.0 * static_cast<double>(s);
        r.resonances = {{f1, 330.0, 1.0}, {f2, 400.0, 0.5}, {f3, 460.0, 0.25}};
        r.aspiration_level = 0.05;
        // Level tones carry a natural micro-drift; it also sweeps the
        // harmonic comb across the envelope.
        switch (a % 4) {
          case 0: r.f0_start_hz = 93.0;  r.f0_end_hz = 108.0; break;
          case 1: r.f0_start_hz = 156.0; r.f0_end_hz = 144.0; break;
          case 2: r.f0_start_hz = 95.0;  r.f0_end_hz = 160.0; break;
          default: r.f0_start_hz = 160.0; r.f0_end_hz = 95.0; break;
        }
      } else {
        const double f1 = 320.0 + 130.0 * static_cast<double>(a) + 35.0 * static_cast<double>(s);
        const double f2 = 950.0 + 260.0 * static_cast<double>((a * 3 + s) % 5) +
                          70.0 * static_cast<double>(a);
        const double f3 = 2300.0 + 180.0 * static_cast<double>((a + 2 * s) % 4);
        r.resonances = {{f1, 90.0, 1.0}, {f2, 120.0, 0.5}, {f3, 160.0, 0.25}};
        r.f0_start_hz = 105.0 + 6.0 * static_cast<double>(s);
        r.f0_end_hz = r.f0_start_hz * 0.92;
      }
    }
  }
  spec.validate();
  return spec;
}

AudioBuffer synthesize_token(const TokenRecipe &recipe, int sample_rate, uint64_t token_tag) {
  const int n = static_cast<int>(std::lround(recipe.duration_s * sample_rate));
  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.assign(n, 0.0);

  const double f0_max = std::max(recipe.f0_start_hz, recipe.f0_end_hz);
  const double f_cap = std::min(5000.0, 0.45 * sample_rate);
  const int num_harmonics = std::max(1, static_cast<int>(f_cap / f0_max));

  std::vector<double> phase(num_harmonics, 0.0);
  for (int i = 0; i < n; ++i) {
    const double frac = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
    const double f0 = recipe.f0_start_hz + (recipe.f0_end_hz - recipe.f0_start_hz) * frac;
    double v = 0.0;
    for (int h = 0; h < num_harmonics; ++h) {
      const double f = (h + 1) * f0;
      if (f >= f_cap) break;
      double amp = 0.0;
      for (const Resonance &r : recipe.resonances) {
        const double d = (f - r.center_hz) / (0.5 * r.bandwidth_hz);
        amp += r.gain / (1.0 + d * d);
      }
      amp /= 1.0 + (f / 3000.0) * (f / 3000.0);  // source roll-off
      phase[h] += 2.0 * M_PI * f / sample_rate;
      v += amp * std::sin(phase[h]);
    }
    out.samples[i] = v;
  }

  // Gentle aspiration floor keeps the long-term spectrum full-band.
  double acc = 0.0;
  for (double s : out.samples) acc += s * s;
  const double harmonic_rms = std::sqrt(acc / std::max(1, n));
  Rng rng(derive_seed(token_tag, {fnv1a64("aspiration")}));
  for (int i = 0; i < n; ++i)
    out.samples[i] += recipe.aspiration_level * harmonic_rms * rng.gaussian();

  // Normalize and apply 10 ms attack/release ramps.
  const double rms = rms_level(out);
  const double gain = rms > 0.0 ? 0.1 / rms : 0.0;
  const int ramp = std::min(n / 2, static_cast<int>(std::lround(0.010 * sample_rate)));
  for (int i = 0; i < n; ++i) {
    double w = 1.0;
    if (i < ramp) w = 0.5 * (1.0 - std::cos(M_PI * (i + 1) / ramp));
    if (n - 1 - i < ramp) w = std::min(w, 0.5 * (1.0 - std::cos(M_PI * (n - i) / ramp)));
    out.samples[i] *= gain * w;
  }
  return out;
}

CorpusManifest synthesize_corpus(const SyntheticCorpusSpec &spec, int num_sentences,
                                 uint64_t rng_seed) {
  spec.validate();
  if (num_sentences < 1) throw InvalidArgument("synthesize_corpus: need at least one sentence");

  // Token audio depends only on (slot, alternative); synthesize each once.
  std::vector<std::vector<AudioBuffer>> tokens(spec.grammar.slots.size());
  for (size_t s = 0; s < spec.grammar.slots.size(); ++s) {
    tokens[s].resize(spec.recipes[s].size());
    for (size_t a = 0; a < spec.recipes[s].size(); ++a)
      tokens[s][a] = synthesize_token(spec.recipes[s][a], spec.sample_rate,
                                      derive_seed(fnv1a64("token"), {s, a}));
  }

  const int gap = static_cast<int>(std::lround(spec.inter_word_silence_s * spec.sample_rate));
  const int edge = static_cast<int>(std::lround(spec.edge_silence_s * spec.sample_rate));

  CorpusManifest m;
  m.sample_rate = spec.sample_rate;
  for (int i = 0; i < num_sentences; ++i) {
    CorpusEntry e;
    e.label = sample_sentence(spec.grammar, derive_seed(rng_seed, {fnv1a64("sentence"),
                                                                   static_cast<uint64_t>(i)}));
    e.audio_path = "synthetic:" + std::to_string(i);
    e.speaker = spec.speaker;
    e.language = spec.language;
    e.effort = spec.effort;
    e.audio.sample_rate = spec.sample_rate;
    e.audio.samples.assign(edge, 0.0);
    for (size_t s = 0; s < e.label.words.size(); ++s) {
      const auto &alts = spec.grammar.slots[s].alternatives;
      const size_t a = std::find(alts.begin(), alts.end(), e.label.words[s]) - alts.begin();
      const AudioBuffer &tok = tokens[s][a];
      e.audio.samples.insert(e.audio.samples.end(), tok.samples.begin(), tok.samples.end());
      if (s + 1 < e.label.words.size())
        e.audio.samples.insert(e.audio.samples.end(), gap, 0.0);
    }
    e.audio.samples.insert(e.audio.samples.end(), edge, 0.0);
    m.entries.push_back(std::move(e));
  }
  return m;
}

SplitResult split_train_test(const CorpusManifest &m, double train_fraction, uint64_t rng_seed) {
  if (m.entries.size() < 2) throw InvalidArgument("split_train_test: need at least 2 entries");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("split_train_test: fraction must be inside (0, 1)");

  // Group indices per condition, shuffle each group deterministically, then
  // take the first round(fraction * n) for training.
  std::map<std::array<std::string, 3>, std::vector<size_t>> groups;
  for (size_t i = 0; i < m.entries.size(); ++i) {
    const CorpusEntry &e = m.entries[i];
    groups[{e.speaker, e.language, e.effort}].push_back(i);
  }

  std::vector<bool> in_train(m.entries.size(), false);
  size_t group_index = 0;
  for (auto &[key, idx] : groups) {
    Rng rng(derive_seed(rng_seed, {fnv1a64("split"), group_index++}));
    for (size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.uniform_int(i)]);
    const size_t n_train = static_cast<size_t>(std::llround(train_fraction * idx.size()));
    for (size_t i = 0; i < idx.size(); ++i) in_train[idx[i]] = i < n_train;
  }

  SplitResult out;
  out.train.sample_rate = m.sample_rate;
  out.test.sample_rate = m.sample_rate;
  for (size_t i = 0; i < m.entries.size(); ++i)
    (in_train[i] ? out.train : out.test).entries.push_back(m.entries[i]);
  return out;
}

}  // namespace fade
