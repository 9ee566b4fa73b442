// tests/corpus_test.cc

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
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "fade/corpus.h"
#include "fade/rng.h"
#include "test_util.h"

using namespace fade;

namespace {

MatrixGrammar small_grammar() {
  MatrixGrammar g;
  g.slots = {{"name", {"ann", "ben", "cy", "dot"}},
             {"verb", {"has", "sees"}},
             {"noun", {"cats", "dogs", "figs"}}};
  return g;
}

std::filesystem::path temp_dir(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fade_corpus_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("grammar validation") {
  MatrixGrammar g = small_grammar();
  g.validate();
  MatrixGrammar empty;
  CHECK_THROWS_AS(empty.validate(), InvalidArgument);
  MatrixGrammar dup = small_grammar();
  dup.slots[0].alternatives = {"ann", "ann"};
  CHECK_THROWS_AS(dup.validate(), InvalidArgument);
  MatrixGrammar single = small_grammar();
  single.slots[1].alternatives = {"has"};
  CHECK_THROWS_AS(single.validate(), InvalidArgument);
}

TEST_CASE("label validation names slot and word") {
  MatrixGrammar g = small_grammar();
  SentenceLabel good{{"ann", "sees", "figs"}};
  validate_label(g, good);
  SentenceLabel bad{{"ann", "eats", "figs"}};
  try {
    validate_label(g, bad);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument &e) {
    const std::string msg = e.what();
    CHECK(msg.find("eats") != std::string::npos);
    CHECK(msg.find("verb") != std::string::npos);
  }
  SentenceLabel wrong_len{{"ann", "sees"}};
  CHECK_THROWS_AS(validate_label(g, wrong_len), InvalidArgument);
}

TEST_CASE("sample_sentence with a single alternative per slot") {
  MatrixGrammar g;
  g.slots = {{"a", {"only", "pad"}}, {"b", {"word", "pad2"}}};
  g.slots[0].alternatives = {"only", "only2"};
  // Uniqueness case: restrict to one alternative by construction.
  MatrixGrammar unique;
  unique.slots = {{"a", {"x", "x2"}}};
  SentenceLabel s = sample_sentence(unique, 123);
  CHECK((s.words[0] == "x" || s.words[0] == "x2"));
}

TEST_CASE("two seeds almost surely differ on a 5x10 grammar") {
  MatrixGrammar g;
  for (int slot = 0; slot < 5; ++slot) {
    MatrixGrammar::Slot s;
    s.name = "slot" + std::to_string(slot);
    for (int a = 0; a < 10; ++a) s.alternatives.push_back("w" + std::to_string(slot) + "_" + std::to_string(a));
    g.slots.push_back(s);
  }
  int distinct = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    SentenceLabel a = sample_sentence(g, derive_seed(1, {seed}));
    SentenceLabel b = sample_sentence(g, derive_seed(2, {seed}));
    if (a.text() != b.text()) ++distinct;
  }
  CHECK(distinct >= 19);  // collision chance per pair is 1e-5
}

TEST_CASE("sample_sentence is uniform per slot (chi-square, alpha = 0.001)") {
  MatrixGrammar g = small_grammar();
  const int draws = 10000;
  std::vector<std::map<std::string, int>> counts(g.slots.size());
  for (int i = 0; i < draws; ++i) {
    SentenceLabel s = sample_sentence(g, derive_seed(777, {static_cast<uint64_t>(i)}));
    for (size_t slot = 0; slot < s.words.size(); ++slot) ++counts[slot][s.words[slot]];
  }
  // Critical values of the chi-square distribution at alpha = 0.001.
  const std::map<int, double> critical{{1, 10.828}, {2, 13.816}, {3, 16.266}};
  for (size_t slot = 0; slot < g.slots.size(); ++slot) {
    const int k = static_cast<int>(g.slots[slot].alternatives.size());
    const double expected = static_cast<double>(draws) / k;
    double chi2 = 0.0;
    for (const std::string &w : g.slots[slot].alternatives) {
      const double d = counts[slot][w] - expected;
      chi2 += d * d / expected;
    }
    CHECK(chi2 < critical.at(k - 1));
  }
}

TEST_CASE("synthetic corpus: non-tonal words differ spectrally") {
  MatrixGrammar g = small_grammar();
  SyntheticCorpusSpec spec = default_synthetic_spec(g, 16000, false);
  for (size_t a = 0; a < 4; ++a)
    for (size_t b = a + 1; b < 4; ++b) {
      AudioBuffer x = synthesize_token(spec.recipes[0][a], 16000, 1);
      AudioBuffer y = synthesize_token(spec.recipes[0][b], 16000, 2);
      CHECK(testutil::spectral_cosine_distance(x, y, 150.0, 5000.0) > 0.5);
    }
}

TEST_CASE("synthetic corpus: tonal words share spectra but differ in pitch") {
  MatrixGrammar g = small_grammar();
  SyntheticCorpusSpec spec = default_synthetic_spec(g, 16000, true);
  for (size_t a = 0; a < 4; ++a)
    for (size_t b = a + 1; b < 4; ++b) {
      AudioBuffer x = synthesize_token(spec.recipes[0][a], 16000, 1);
      AudioBuffer y = synthesize_token(spec.recipes[0][b], 16000, 2);
      CHECK(testutil::spectral_cosine_distance(x, y, 150.0, 5000.0) < 0.4);
    }
  // Alternatives 0 (level low F0) and 1 (level high F0) of slot 0.
  AudioBuffer a = synthesize_token(spec.recipes[0][0], 16000, 1);
  AudioBuffer b = synthesize_token(spec.recipes[0][1], 16000, 2);

  const std::vector<double> f0a = testutil::pitch_track(a);
  const std::vector<double> f0b = testutil::pitch_track(b);
  REQUIRE(!f0a.empty());
  REQUIRE(!f0b.empty());
  double mean_a = 0.0, mean_b = 0.0;
  for (double v : f0a) mean_a += v;
  for (double v : f0b) mean_b += v;
  mean_a /= f0a.size();
  mean_b /= f0b.size();
  CHECK(std::abs(mean_a - mean_b) > 10.0);
  CHECK(std::abs(mean_a - 100.0) < 15.0);
  CHECK(std::abs(mean_b - 150.0) < 15.0);
}

TEST_CASE("sentence duration is the sum of tokens plus inter-word gaps") {
  MatrixGrammar g;
  for (int slot = 0; slot < 5; ++slot) {
    MatrixGrammar::Slot s;
    s.name = "s" + std::to_string(slot);
    s.alternatives = {"a" + std::to_string(slot), "b" + std::to_string(slot)};
    g.slots.push_back(s);
  }
  SyntheticCorpusSpec spec = default_synthetic_spec(g, 16000, false);
  CorpusManifest m = synthesize_corpus(spec, 3, 5);
  for (const CorpusEntry &e : m.entries) {
    size_t expected = 4 * static_cast<size_t>(std::lround(0.05 * 16000));
    for (size_t slot = 0; slot < 5; ++slot) {
      const auto &alts = g.slots[slot].alternatives;
      const size_t a = std::find(alts.begin(), alts.end(), e.label.words[slot]) - alts.begin();
      expected += static_cast<size_t>(
          std::lround(spec.recipes[slot][a].duration_s * 16000));
    }
    CHECK(e.audio.samples.size() == expected);
  }
}

TEST_CASE("synthetic corpus is byte-identical for a fixed seed") {
  MatrixGrammar g = small_grammar();
  SyntheticCorpusSpec spec = default_synthetic_spec(g, 16000, false);
  CorpusManifest a = synthesize_corpus(spec, 6, 42);
  CorpusManifest b = synthesize_corpus(spec, 6, 42);
  REQUIRE(a.entries.size() == b.entries.size());
  for (size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].label.text() == b.entries[i].label.text());
    REQUIRE(a.entries[i].audio.samples.size() == b.entries[i].audio.samples.size());
    for (size_t j = 0; j < a.entries[i].audio.samples.size(); ++j)
      CHECK(a.entries[i].audio.samples[j] == b.entries[i].audio.samples[j]);
  }
}

TEST_CASE("manifest save/load round trip with validation errors") {
  MatrixGrammar g = small_grammar();
  SyntheticCorpusSpec spec = default_synthetic_spec(g, 16000, false);
  CorpusManifest m = synthesize_corpus(spec, 8, 31);
  const auto dir = temp_dir("roundtrip");
  const std::string path = save_manifest(m, dir.string(), "corpus");

  CorpusManifest loaded = load_manifest(path, g);
  REQUIRE(loaded.entries.size() == 8);
  CHECK(loaded.sample_rate == 16000);
  for (size_t i = 0; i < 8; ++i) {
    CHECK(loaded.entries[i].label.text() == m.entries[i].label.text());
    CHECK(loaded.entries[i].audio.samples.size() == m.entries[i].audio.samples.size());
  }
  CHECK(loaded.conditions().size() == 1);

  // Empty manifest.
  const auto empty_path = dir / "empty.tsv";
  std::ofstream(empty_path) << "# fade corpus manifest v1\n";
  CHECK_THROWS_WITH_AS(load_manifest(empty_path.string(), g),
                       doctest::Contains("empty corpus"), LoadError);

  // Label with an out-of-slot word.
  const auto bad_path = dir / "bad.tsv";
  std::ofstream(bad_path) << "corpus_0.wav\tann eats cats\tsynth\tsyn\tplain\n";
  try {
    load_manifest(bad_path.string(), g);
    FAIL("expected LoadError");
  } catch (const LoadError &e) {
    const std::string msg = e.what();
    CHECK(msg.find("eats") != std::string::npos);
    CHECK(msg.find("verb") != std::string::npos);
  }

  // Mixed sample rates.
  AudioBuffer other;
  other.sample_rate = 8000;
  other.samples.assign(800, 0.25);
  write_wav((dir / "other.wav").string(), other);
  const auto mixed_path = dir / "mixed.tsv";
  std::ofstream(mixed_path) << "corpus_0.wav\tann has cats\tsynth\tsyn\tplain\n"
                            << "other.wav\tben has dogs\tsynth\tsyn\tplain\n";
  CHECK_THROWS_WITH_AS(load_manifest(mixed_path.string(), g),
                       doctest::Contains("sample rate"), LoadError);

  std::filesystem::remove_all(dir);
}

TEST_CASE("manifest groups entries into declared conditions") {
  MatrixGrammar g = small_grammar();
  SyntheticCorpusSpec spec = default_synthetic_spec(g, 16000, false);
  CorpusManifest m = synthesize_corpus(spec, 8, 7);
  for (size_t i = 0; i < m.entries.size(); ++i) {
    m.entries[i].speaker = i < 4 ? "s1" : "s2";
    m.entries[i].effort = i % 2 == 0 ? "plain" : "lombard";
  }
  const auto conds = m.conditions();
  CHECK(conds.size() == 4);
}

TEST_CASE("split_train_test partitions and stratifies") {
  MatrixGrammar g = small_grammar();
  SyntheticCorpusSpec spec = default_synthetic_spec(g, 16000, false);
  CorpusManifest m = synthesize_corpus(spec, 10, 17);

  SplitResult half = split_train_test(m, 0.5, 3);
  CHECK(half.train.entries.size() == 5);
  CHECK(half.test.entries.size() == 5);

  // Union equals the original, intersection empty (by audio path identity).
  std::set<std::string> seen;
  for (const auto &e : half.train.entries) seen.insert(e.audio_path);
  for (const auto &e : half.test.entries) {
    CHECK(seen.count(e.audio_path) == 0);
    seen.insert(e.audio_path);
  }
  CHECK(seen.size() == 10);

  CHECK_THROWS_AS(split_train_test(m, 0.0, 1), InvalidArgument);
  CHECK_THROWS_AS(split_train_test(m, 1.0, 1), InvalidArgument);

  // Stratification: every (speaker, language, effort) cell within one entry
  // of the target fraction.
  CorpusManifest multi = synthesize_corpus(spec, 21, 19);
  for (size_t i = 0; i < multi.entries.size(); ++i) {
    multi.entries[i].speaker = "s" + std::to_string(i % 3);
    multi.entries[i].effort = i % 2 == 0 ? "plain" : "lombard";
  }
  const double fraction = 0.67;
  SplitResult split = split_train_test(multi, fraction, 5);
  std::map<std::string, std::pair<int, int>> cells;
  for (const auto &e : split.train.entries) cells[e.speaker + e.effort].first++;
  for (const auto &e : split.test.entries) cells[e.speaker + e.effort].second++;
  for (const auto &[key, counts] : cells) {
    const int total = counts.first + counts.second;
    CHECK(std::abs(counts.first - fraction * total) <= 1.0);
  }
}
