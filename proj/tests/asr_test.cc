// tests/asr_test.cc

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
#include <sstream>

#include "fade/decode.h"
#include "fade/hmm.h"
#include "fade/rng.h"

using namespace fade;

namespace {

GaussianState make_state(std::vector<double> mean, std::vector<double> var) {
  GaussianState s;
  s.weights = {1.0};
  s.means = {std::move(mean)};
  s.vars = {std::move(var)};
  s.finalize();
  return s;
}

WordHmm make_word(const std::string &name, const std::vector<std::vector<double>> &means,
                  double p_self = 0.5) {
  WordHmm hmm;
  hmm.word = name;
  for (const auto &mean : means) {
    hmm.states.push_back(make_state(mean, std::vector<double>(mean.size(), 1.0)));
    hmm.log_self.push_back(std::log(p_self));
    hmm.log_next.push_back(std::log(1.0 - p_self));
  }
  return hmm;
}

HmmModelSet make_models(const std::vector<WordHmm> &words, const WordHmm &silence, int dim) {
  HmmModelSet m;
  m.dim = dim;
  m.topology.states_per_word = static_cast<int>(words[0].states.size());
  m.topology.silence_states = static_cast<int>(silence.states.size());
  for (const WordHmm &w : words) m.words.emplace(w.word, w);
  m.silence = silence;
  m.variance_floor.assign(dim, 1e-6);
  return m;
}

FeatureMatrix random_features(int frames, int dim, Rng &rng) {
  FeatureMatrix fm;
  fm.values = Mat(frames, dim);
  for (int t = 0; t < frames; ++t)
    for (int d = 0; d < dim; ++d) fm.values(t, d) = rng.uniform(-2.0, 2.0);
  return fm;
}

// Generative sampling from a word HMM (enter state, emit, self-loop with the
// state's own probability).
void append_hmm_frames(const WordHmm &hmm, Rng &rng, std::vector<std::vector<double>> *frames) {
  for (size_t s = 0; s < hmm.states.size(); ++s) {
    const double p_self = std::exp(hmm.log_self[s]);
    for (;;) {
      const GaussianState &st = hmm.states[s];
      std::vector<double> x(st.means[0].size());
      for (size_t d = 0; d < x.size(); ++d)
        x[d] = st.means[0][d] + std::sqrt(st.vars[0][d]) * rng.gaussian();
      frames->push_back(std::move(x));
      if (!(rng.uniform() < p_self) || frames->size() > 400) break;
    }
  }
}

FeatureMatrix frames_to_features(const std::vector<std::vector<double>> &frames) {
  FeatureMatrix fm;
  fm.values = Mat(static_cast<int>(frames.size()), static_cast<int>(frames[0].size()));
  for (size_t t = 0; t < frames.size(); ++t)
    for (size_t d = 0; d < frames[t].size(); ++d)
      fm.values(static_cast<int>(t), static_cast<int>(d)) = frames[t][d];
  return fm;
}

FeatureMatrix sample_from_hmm(const WordHmm &hmm, Rng &rng) {
  std::vector<std::vector<double>> frames;
  append_hmm_frames(hmm, rng, &frames);
  return frames_to_features(frames);
}

// Full generative story of the recognizer: edge silence, word, edge silence.
FeatureMatrix sample_sentence_audio(const WordHmm &word, const WordHmm &silence, Rng &rng) {
  std::vector<std::vector<double>> frames;
  append_hmm_frames(silence, rng, &frames);
  append_hmm_frames(word, rng, &frames);
  append_hmm_frames(silence, rng, &frames);
  return frames_to_features(frames);
}

// Exhaustive path enumeration oracle, mirroring the DP's operation order so
// that ties are exact. Returns the best word sequence under the same
//"lexicographically smaller on equal score" rule.
struct OraclePath {
  double score = -std::numeric_limits<double>::infinity();
  std::vector<std::string> words;
  bool found = false;
};

void oracle_step(const DecodingGraph &g, const Mat &emis, int node, int t, double score,
                 std::vector<int> &ranks, OraclePath &best) {
  const int T = emis.rows();
  if (t == T - 1) {
    for (int final_node : g.finals) {
      if (final_node != node) continue;
      const double total = score + g.nodes[node].log_next;
      std::vector<std::string> words;
      for (size_t slot = 0; slot < g.slot_words.size(); ++slot)
        words.push_back(g.slot_words[slot][ranks[slot]]);
      if (!best.found || total > best.score || (total == best.score && words < best.words)) {
        best.found = true;
        best.score = total;
        best.words = words;
      }
    }
    return;
  }
  for (const GraphArc &arc : g.arcs) {
    if (arc.from != node) continue;
    const double next_score = (score + arc.weight) + emis(t + 1, g.nodes[arc.to].emission_id);
    if (arc.word_entry) {
      ranks[g.nodes[arc.to].slot] = arc.entry_rank;
      oracle_step(g, emis, arc.to, t + 1, next_score, ranks, best);
      ranks[g.nodes[arc.to].slot] = -1;
    } else {
      oracle_step(g, emis, arc.to, t + 1, next_score, ranks, best);
    }
  }
}

OraclePath oracle_decode(const DecodingGraph &g, const FeatureMatrix &fm) {
  Mat emis(fm.num_frames(), g.num_emissions);
  std::vector<const GaussianState *> states(g.num_emissions, nullptr);
  for (const GraphNode &n : g.nodes) states[n.emission_id] = n.state;
  for (int t = 0; t < fm.num_frames(); ++t)
    for (int e = 0; e < g.num_emissions; ++e)
      emis(t, e) = states[e]->log_likelihood(fm.values.row(t), fm.dim());

  OraclePath best;
  std::vector<int> ranks(g.slot_words.size(), -1);
  for (const auto &entry : g.initial) {
    const double score = entry.weight + emis(0, g.nodes[entry.node].emission_id);
    if (entry.word_entry) {
      ranks[g.nodes[entry.node].slot] = entry.entry_rank;
      oracle_step(g, emis, entry.node, 0, score, ranks, best);
      ranks[g.nodes[entry.node].slot] = -1;
    } else {
      oracle_step(g, emis, entry.node, 0, score, ranks, best);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("uniform init splits four frames across a two-state word") {
  // Utterances: word 'a' with frames 1,2,3,4 and word 'b' for coverage.
  MatrixGrammar g;
  g.slots = {{"slot", {"a", "b"}}};
  HmmTopology topo;
  topo.states_per_word = 2;
  topo.silence_states = 1;

  std::vector<TrainUtterance> data(2);
  data[0].label.words = {"a"};
  data[0].features.values = Mat(4, 1);
  for (int t = 0; t < 4; ++t) data[0].features.values(t, 0) = t + 1.0;
  data[1].label.words = {"b"};
  data[1].features.values = Mat(4, 1);
  for (int t = 0; t < 4; ++t) data[1].features.values(t, 0) = 10.0 + t;

  HmmModelSet models = init_models(data, g, topo, {});
  const WordHmm &a = models.words.at("a");
  CHECK(a.states[0].means[0][0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(a.states[1].means[0][0] == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("init: state mean equals the mean of assigned frames, floor engages") {
  MatrixGrammar g;
  g.slots = {{"slot", {"a", "b"}}};
  HmmTopology topo;
  topo.states_per_word = 1;
  topo.silence_states = 1;

  std::vector<TrainUtterance> data(2);
  data[0].label.words = {"a"};
  data[0].features.values = Mat(3, 1, 2.0);  // identical frames: zero variance
  data[1].label.words = {"b"};
  data[1].features.values = Mat(3, 1);
  for (int t = 0; t < 3; ++t) data[1].features.values(t, 0) = t * 4.0;

  GmmConfig gmm;
  HmmModelSet models = init_models(data, g, topo, gmm);
  const WordHmm &a = models.words.at("a");
  CHECK(a.states[0].means[0][0] == doctest::Approx(2.0).epsilon(1e-12));
  // Identical frames engage the variance floor.
  CHECK(a.states[0].vars[0][0] == doctest::Approx(models.variance_floor[0]).epsilon(1e-12));
  CHECK(models.variance_floor[0] > 0.0);
}

TEST_CASE("init skips short utterances and reports missing words") {
  MatrixGrammar g;
  g.slots = {{"slot", {"a", "b"}}};
  HmmTopology topo;
  topo.states_per_word = 4;
  topo.silence_states = 1;

  std::vector<TrainUtterance> data(2);
  data[0].label.words = {"a"};
  data[0].features.values = Mat(8, 1, 1.0);
  data[1].label.words = {"b"};
  data[1].features.values = Mat(2, 1, 5.0);  // shorter than 4 path states

  std::vector<std::string> warnings;
  CHECK_THROWS_WITH_AS(init_models(data, g, topo, {}, &warnings),
                       doctest::Contains("'b'"), TrainingDataError);
  CHECK(!warnings.empty());
}

TEST_CASE("training recovers a known two-state model and is monotone") {
  Rng rng(12345);
  const std::vector<std::vector<double>> means_a = {{-1.5, -1.0}, {1.5, 1.0}};
  const std::vector<std::vector<double>> means_b = {{2.5, -2.0}, {-2.0, 2.5}};
  WordHmm truth_a = make_word("a", means_a, 0.75);
  WordHmm truth_b = make_word("b", means_b, 0.75);
  // The recognizer's generative story includes edge silence; sample it too.
  WordHmm truth_sil = make_word("<sil>", {{4.0, 4.0}}, 0.6);

  std::vector<TrainUtterance> data;
  for (int i = 0; i < 200; ++i) {
    TrainUtterance u;
    u.label.words = {i % 2 == 0 ? "a" : "b"};
    u.features = sample_sentence_audio(i % 2 == 0 ? truth_a : truth_b, truth_sil, rng);
    data.push_back(std::move(u));
  }

  MatrixGrammar g;
  g.slots = {{"slot", {"a", "b"}}};
  HmmTopology topo;
  topo.states_per_word = 2;
  topo.silence_states = 1;

  HmmModelSet models = init_models(data, g, topo, {});
  TrainConfig tc;
  tc.max_iterations = 25;
  TrainStats stats = train(models, data, tc);

  for (size_t i = 1; i < stats.aligned_log_likelihood.size(); ++i)
    CHECK(stats.aligned_log_likelihood[i] >= stats.aligned_log_likelihood[i - 1] - 1e-6);

  for (int s = 0; s < 2; ++s)
    for (int d = 0; d < 2; ++d) {
      CHECK(std::abs(models.words.at("a").states[s].means[0][d] - means_a[s][d]) < 0.1);
      CHECK(std::abs(models.words.at("b").states[s].means[0][d] - means_b[s][d]) < 0.1);
    }
}

TEST_CASE("a converged model is a fixed point of train") {
  Rng rng(777);
  WordHmm truth_a = make_word("a", {{-1.5}, {1.5}}, 0.6);
  WordHmm truth_b = make_word("b", {{4.0}, {-4.0}}, 0.6);
  WordHmm truth_sil = make_word("<sil>", {{0.0}}, 0.5);
  std::vector<TrainUtterance> data;
  for (int i = 0; i < 60; ++i) {
    TrainUtterance u;
    u.label.words = {i % 2 == 0 ? "a" : "b"};
    u.features = sample_sentence_audio(i % 2 == 0 ? truth_a : truth_b, truth_sil, rng);
    data.push_back(std::move(u));
  }
  MatrixGrammar g;
  g.slots = {{"slot", {"a", "b"}}};
  HmmTopology topo;
  topo.states_per_word = 2;
  topo.silence_states = 1;

  HmmModelSet models = init_models(data, g, topo, {});
  // Train to the exact alignment fixed point.
  TrainConfig tc;
  tc.max_iterations = 100;
  tc.rel_improvement_tol = 0.0;
  TrainStats stats = train(models, data, tc);
  CHECK(stats.iterations < 100);

  std::ostringstream before;
  save_models(models, before);
  TrainConfig more;
  more.max_iterations = 3;
  more.rel_improvement_tol = 0.0;
  train(models, data, more);
  std::ostringstream after;
  save_models(models, after);
  CHECK(before.str() == after.str());
}

TEST_CASE("viterbi on a single-sentence graph returns that sentence") {
  WordHmm a = make_word("a", {{0.0}});
  WordHmm b = make_word("b", {{5.0}});
  WordHmm sil = make_word("<sil>", {{-5.0}});
  HmmModelSet models = make_models({a, b}, sil, 1);

  SentenceLabel label{{"a"}};
  DecodingGraph graph = build_alignment_graph(models, label);
  Rng rng(5);
  FeatureMatrix fm = random_features(6, 1, rng);
  Transcript t = viterbi_decode(graph, fm);
  CHECK(t.words == std::vector<std::string>{"a"});
}

TEST_CASE("viterbi equals exhaustive enumeration on randomized small graphs") {
  Rng rng(2025);
  int tie_cases = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const bool two_slots = rng.uniform() < 0.5;
    const int states_per_word = two_slots ? 1 : 1 + static_cast<int>(rng.uniform_int(2));
    const bool identical_words = rng.uniform() < 0.3;
    const int dim = 1 + static_cast<int>(rng.uniform_int(2));

    auto random_means = [&](int n) {
      std::vector<std::vector<double>> means;
      for (int s = 0; s < n; ++s) {
        std::vector<double> m(dim);
        for (int d = 0; d < dim; ++d) m[d] = rng.uniform(-2.0, 2.0);
        means.push_back(std::move(m));
      }
      return means;
    };

    MatrixGrammar g;
    std::vector<WordHmm> words;
    const int slots = two_slots ? 2 : 1;
    for (int slot = 0; slot < slots; ++slot) {
      const std::string wa = "a" + std::to_string(slot);
      const std::string wb = "b" + std::to_string(slot);
      g.slots.push_back({"s" + std::to_string(slot), {wa, wb}});
      const auto means_a = random_means(states_per_word);
      words.push_back(make_word(wa, means_a, 0.4 + rng.uniform(0.0, 0.2)));
      words.push_back(make_word(wb, identical_words ? means_a : random_means(states_per_word),
                                0.4 + rng.uniform(0.0, 0.2)));
      if (identical_words) {
        // Force exact ties: identical emissions AND identical transitions.
        words[words.size() - 1].log_self = words[words.size() - 2].log_self;
        words[words.size() - 1].log_next = words[words.size() - 2].log_next;
      }
    }
    WordHmm sil = make_word("<sil>", random_means(1), 0.5);
    HmmModelSet models = make_models(words, sil, dim);
    models.topology.states_per_word = states_per_word;
    models.topology.silence_states = 1;

    DecodingGraph graph = build_decoding_graph(models, g);
    if (graph.nodes.size() > 6) continue;  // stay within the small-graph regime

    const int min_frames = slots * states_per_word;
    const int frames = min_frames + static_cast<int>(rng.uniform_int(6 - min_frames + 1));
    FeatureMatrix fm = random_features(frames, dim, rng);

    const Transcript dp = viterbi_decode(graph, fm);
    const OraclePath oracle = oracle_decode(graph, fm);
    REQUIRE(oracle.found);
    CHECK(dp.words == oracle.words);
    CHECK(dp.log_likelihood == doctest::Approx(oracle.score).epsilon(1e-9));
    if (identical_words) ++tie_cases;
  }
  CHECK(tie_cases > 30);  // the tie rule was actually exercised
}

TEST_CASE("well-separated words decode correctly from sampled features") {
  Rng rng(31337);
  WordHmm a = make_word("a", {{-2.0, 0.0}, {0.0, 2.0}}, 0.7);
  WordHmm b = make_word("b", {{2.0, 0.0}, {0.0, -2.0}}, 0.7);
  WordHmm sil = make_word("<sil>", {{0.0, 0.0}});
  HmmModelSet models = make_models({a, b}, sil, 2);
  MatrixGrammar g;
  g.slots = {{"slot", {"a", "b"}}};
  DecodingGraph graph = build_decoding_graph(models, g);

  int correct = 0;
  for (int i = 0; i < 200; ++i) {
    FeatureMatrix fm = sample_from_hmm(a, rng);
    const Transcript t = viterbi_decode(graph, fm);
    if (t.words[0] == "a") ++correct;
  }
  CHECK(correct >= 190);
}

TEST_CASE("decoded transcripts are grammar-valid on arbitrary input") {
  Rng rng(404);
  WordHmm a = make_word("a", {{0.2}});
  WordHmm b = make_word("b", {{-0.2}});
  WordHmm c = make_word("c", {{0.5}});
  WordHmm d = make_word("d", {{-0.5}});
  WordHmm sil = make_word("<sil>", {{0.0}});
  HmmModelSet models = make_models({a, b, c, d}, sil, 1);
  MatrixGrammar g;
  g.slots = {{"s0", {"a", "b"}}, {"s1", {"c", "d"}}};
  DecodingGraph graph = build_decoding_graph(models, g);

  for (int i = 0; i < 50; ++i) {
    FeatureMatrix fm = random_features(2 + static_cast<int>(rng.uniform_int(20)), 1, rng);
    const Transcript t = viterbi_decode(graph, fm);
    REQUIRE(t.words.size() == 2);
    CHECK((t.words[0] == "a" || t.words[0] == "b"));
    CHECK((t.words[1] == "c" || t.words[1] == "d"));
  }
}

TEST_CASE("decoded path log-likelihood dominates the reference path") {
  Rng rng(808);
  WordHmm a = make_word("a", {{0.3}});
  WordHmm b = make_word("b", {{-0.3}});
  WordHmm sil = make_word("<sil>", {{0.0}});
  HmmModelSet models = make_models({a, b}, sil, 1);
  MatrixGrammar g;
  g.slots = {{"slot", {"a", "b"}}};
  DecodingGraph decode_graph = build_decoding_graph(models, g);

  for (int i = 0; i < 50; ++i) {
    FeatureMatrix fm = random_features(3 + static_cast<int>(rng.uniform_int(8)), 1, rng);
    const Transcript best = viterbi_decode(decode_graph, fm);
    for (const std::string &word : {"a", "b"}) {
      SentenceLabel ref{{word}};
      DecodingGraph align_graph = build_alignment_graph(models, ref);
      const Alignment align = viterbi_align(align_graph, fm);
      CHECK(best.log_likelihood >= align.log_likelihood - 1e-9);
    }
  }
}

TEST_CASE("viterbi input validation") {
  WordHmm a = make_word("a", {{0.0}});
  WordHmm b = make_word("b", {{1.0}});
  WordHmm sil = make_word("<sil>", {{0.0}});
  HmmModelSet models = make_models({a, b}, sil, 1);
  MatrixGrammar g;
  g.slots = {{"s0", {"a", "b"}}, {"s1", {"a", "b"}}};
  DecodingGraph graph = build_decoding_graph(models, g);

  Rng rng(1);
  FeatureMatrix wrong_dim = random_features(5, 3, rng);
  CHECK_THROWS_AS(viterbi_decode(graph, wrong_dim), InvalidArgument);

  // One frame cannot cover a two-slot sentence.
  FeatureMatrix too_short = random_features(1, 1, rng);
  CHECK_THROWS_AS(viterbi_decode(graph, too_short), DecodeError);
}

TEST_CASE("score_words counts slotwise matches") {
  SentenceLabel ref{{"a", "b", "c", "d", "e"}};
  Transcript same{{"a", "b", "c", "d", "e"}, 0.0};
  Transcript three{{"a", "b", "c", "x", "y"}, 0.0};
  Transcript none{{"v", "w", "x", "y", "z"}, 0.0};
  CHECK(score_words(ref, same) == 1.0);
  CHECK(score_words(ref, three) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(score_words(ref, none) == 0.0);
  Transcript mismatch{{"a", "b"}, 0.0};
  CHECK_THROWS_AS(score_words(ref, mismatch), InvalidArgument);
}

TEST_CASE("model serialization round-trips exactly") {
  Rng rng(99);
  WordHmm truth_a = make_word("a", {{-1.0}, {1.0}}, 0.65);
  WordHmm truth_b = make_word("b", {{3.0}, {-3.0}}, 0.65);
  std::vector<TrainUtterance> data;
  for (int i = 0; i < 30; ++i) {
    TrainUtterance u;
    u.label.words = {i % 2 == 0 ? "a" : "b"};
    u.features = sample_from_hmm(i % 2 == 0 ? truth_a : truth_b, rng);
    data.push_back(std::move(u));
  }
  MatrixGrammar g;
  g.slots = {{"slot", {"a", "b"}}};
  HmmTopology topo;
  topo.states_per_word = 2;
  topo.silence_states = 2;
  HmmModelSet models = init_models(data, g, topo, {});
  TrainConfig tc;
  tc.max_iterations = 3;
  train(models, data, tc);

  std::ostringstream first;
  save_models(models, first);
  std::istringstream in(first.str());
  HmmModelSet loaded = load_models(in);
  std::ostringstream second;
  save_models(loaded, second);
  CHECK(first.str() == second.str());
  CHECK(loaded.dim == models.dim);
  CHECK(loaded.words.at("a").states[0].means[0][0] ==
        models.words.at("a").states[0].means[0][0]);
}

TEST_CASE("training is deterministic for fixed data order") {
  Rng rng(55);
  WordHmm truth_a = make_word("a", {{-1.0}}, 0.6);
  WordHmm truth_b = make_word("b", {{1.0}}, 0.6);
  std::vector<TrainUtterance> data;
  for (int i = 0; i < 24; ++i) {
    TrainUtterance u;
    u.label.words = {i % 2 == 0 ? "a" : "b"};
    u.features = sample_from_hmm(i % 2 == 0 ? truth_a : truth_b, rng);
    data.push_back(std::move(u));
  }
  MatrixGrammar g;
  g.slots = {{"slot", {"a", "b"}}};
  HmmTopology topo;
  topo.states_per_word = 1;
  topo.silence_states = 1;

  auto run = [&](int workers) {
    HmmModelSet models = init_models(data, g, topo, {});
    TrainConfig tc;
    tc.max_iterations = 5;
    tc.workers = workers;
    train(models, data, tc);
    std::ostringstream out;
    save_models(models, out);
    return out.str();
  };
  const std::string serial = run(1);
  CHECK(run(1) == serial);
  CHECK(run(3) == serial);  // worker count does not change numerics
}
