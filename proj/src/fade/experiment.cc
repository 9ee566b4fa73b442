// fade/experiment.cc

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

#include "fade/experiment.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "fade/rng.h"

namespace fade {

using nlohmann::json;

MatrixGrammar default_matrix_grammar() {
  MatrixGrammar g;
  g.slots = {
      {"name",
       {"alan", "bea", "carl", "dena", "egon", "fritz", "gwen", "hans", "ines", "jona"}},
      {"verb",
       {"got", "sees", "sold", "wants", "gives", "keeps", "lends", "buys", "wins", "holds"}},
      {"numeral",
       {"two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "twelve"}},
      {"adjective",
       {"big", "dark", "old", "green", "small", "red", "wet", "cheap", "new", "plain"}},
      {"noun",
       {"rings", "chairs", "shoes", "spoons", "boats", "cards", "hats", "toys", "mugs", "bikes"}},
  };
  return g;
}

MatrixGrammar desk_grammar() {
  MatrixGrammar g;
  g.slots = {
      {"name", {"alan", "bea", "carl", "dena"}},
      {"verb", {"got", "sees", "sold", "wants"}},
      {"noun", {"rings", "chairs", "shoes", "spoons"}},
  };
  return g;
}

void ExperimentConfig::validate() const {
  grammar.validate();
  grid.validate();
  topology.validate();
  if (workers < 1) throw InvalidArgument("config: workers must be >= 1");
  if (output_dir.empty()) throw InvalidArgument("config: output_dir must be set");
  if (feature_kinds.empty()) throw InvalidArgument("config: need at least one feature kind");
  if (noises.empty()) throw InvalidArgument("config: need at least one noise");
  for (const NoiseSpec &n : noises) {
    if (n.label.empty()) throw InvalidArgument("config: noise label must be nonempty");
    if (n.type != "file" && n.type != "stationary_surrogate" && n.type != "gated_surrogate")
      throw InvalidArgument("config: unknown noise type '" + n.type + "'");
    if (n.type == "file" && !std::filesystem::exists(n.path))
      throw InvalidArgument("config: noise file does not exist: " + n.path);
  }
  if (corpus.type == "manifest") {
    if (!std::filesystem::exists(corpus.manifest_path))
      throw InvalidArgument("config: corpus manifest does not exist: " + corpus.manifest_path);
    if (!(corpus.train_fraction > 0.0 && corpus.train_fraction < 1.0))
      throw InvalidArgument("config: train_fraction must be inside (0, 1)");
  } else if (corpus.type == "synthetic") {
    if (corpus.train_sentences < 1 || corpus.test_sentences < 1)
      throw InvalidArgument("config: synthetic corpus needs train and test sentences");
  } else {
    throw InvalidArgument("config: unknown corpus type '" + corpus.type + "'");
  }
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.grammar = default_matrix_grammar();
  cfg.grid.train_snrs_db = {-18, -15, -12, -9, -6, -3, 0, 3, 6};
  cfg.grid.test_snrs_db = {-30, -27, -24, -21, -18, -15, -12, -9, -6, -3, 0, 3, 6, 9};
  cfg.noises = {NoiseSpec{}};
  return cfg;
}

ExperimentConfig desk_config() {
  ExperimentConfig cfg = default_config();
  cfg.grammar = desk_grammar();
  cfg.corpus.train_sentences = 96;
  cfg.corpus.test_sentences = 48;
  cfg.grid.train_snrs_db = {-15, -12, -9, -6, -3, 0};
  cfg.grid.test_snrs_db = {-30, -27, -24, -21, -18, -15, -12, -9, -6, -3, 0, 3, 6, 9};
  NoiseSpec stationary;
  stationary.label = "stationary";
  stationary.type = "stationary_surrogate";
  NoiseSpec gated;
  gated.label = "gated";
  gated.type = "gated_surrogate";
  cfg.noises = {stationary, gated};
  return cfg;
}

namespace {

json grammar_to_json(const MatrixGrammar &g) {
  json slots = json::array();
  for (const auto &slot : g.slots)
    slots.push_back({{"name", slot.name}, {"alternatives", slot.alternatives}});
  return {{"slots", slots}};
}

MatrixGrammar grammar_from_json(const json &j) {
  MatrixGrammar g;
  for (const auto &slot : j.at("slots")) {
    MatrixGrammar::Slot s;
    s.name = slot.at("name").get<std::string>();
    s.alternatives = slot.at("alternatives").get<std::vector<std::string>>();
    g.slots.push_back(std::move(s));
  }
  return g;
}

json config_to_json_obj(const ExperimentConfig &cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["output_dir"] = cfg.output_dir;
  j["grammar"] = grammar_to_json(cfg.grammar);
  j["corpus"] = {{"type", cfg.corpus.type},
                 {"manifest_path", cfg.corpus.manifest_path},
                 {"train_fraction", cfg.corpus.train_fraction},
                 {"tonal", cfg.corpus.tonal},
                 {"train_sentences", cfg.corpus.train_sentences},
                 {"test_sentences", cfg.corpus.test_sentences},
                 {"sample_rate", cfg.corpus.sample_rate},
                 {"edge_silence_s", cfg.corpus.edge_silence_s}};
  json noises = json::array();
  for (const NoiseSpec &n : cfg.noises)
    noises.push_back({{"label", n.label},
                      {"type", n.type},
                      {"path", n.path},
                      {"duration_s", n.duration_s},
                      {"max_gap_ms", n.max_gap_ms},
                      {"gate",
                       {{"on_min_ms", n.gate.on_min_ms},
                        {"on_max_ms", n.gate.on_max_ms},
                        {"off_min_ms", n.gate.off_min_ms},
                        {"off_max_ms", n.gate.off_max_ms},
                        {"ramp_ms", n.gate.ramp_ms}}}});
  j["noises"] = noises;
  j["grid"] = {{"train_snrs_db", cfg.grid.train_snrs_db},
               {"test_snrs_db", cfg.grid.test_snrs_db}};
  j["frontend"] = {{"window_ms", cfg.frontend.stft.window_ms},
                   {"shift_ms", cfg.frontend.stft.shift_ms},
                   {"pre_emphasis", cfg.frontend.stft.pre_emphasis},
                   {"pre_emphasis_coeff", cfg.frontend.stft.pre_emphasis_coeff},
                   {"num_bands", cfg.frontend.num_bands},
                   {"f_min_hz", cfg.frontend.f_min_hz},
                   {"f_max_hz", cfg.frontend.f_max_hz}};
  json kinds = json::array();
  for (FeatureKind k : cfg.feature_kinds) kinds.push_back(feature_kind_name(k));
  j["feature_kinds"] = kinds;
  j["mfcc"] = {{"num_ceps", cfg.mfcc.num_ceps},
               {"include_c0", cfg.mfcc.include_c0},
               {"delta_orders", cfg.mfcc.delta_orders},
               {"delta_window", cfg.mfcc.delta_window}};
  j["sgbfb"] = {{"spectral_mod_freqs", cfg.sgbfb.spectral_mod_freqs},
                {"temporal_mod_freqs", cfg.sgbfb.temporal_mod_freqs},
                {"envelope_halfwaves", cfg.sgbfb.envelope_halfwaves},
                {"channel_subsample_divisor", cfg.sgbfb.channel_subsample_divisor},
                {"max_spectral_width", cfg.sgbfb.max_spectral_width},
                {"max_temporal_width", cfg.sgbfb.max_temporal_width}};
  j["mean_variance_norm"] = cfg.mean_variance_norm;
  j["topology"] = {{"states_per_word", cfg.topology.states_per_word},
                   {"silence_states", cfg.topology.silence_states}};
  j["gmm"] = {{"num_components", cfg.gmm.num_components},
              {"variance_floor_fraction", cfg.gmm.variance_floor_fraction}};
  j["training"] = {{"max_iterations", cfg.training.max_iterations},
                   {"rel_improvement_tol", cfg.training.rel_improvement_tol}};
  j["checkpoint_models"] = cfg.checkpoint_models;
  return j;
}

template <typename T>
void read_field(const json &j, const char *key, T &out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

ExperimentConfig config_from_json_obj(const json &j) {
  ExperimentConfig cfg = default_config();
  read_field(j, "seed", cfg.seed);
  read_field(j, "workers", cfg.workers);
  read_field(j, "output_dir", cfg.output_dir);
  if (j.contains("grammar")) cfg.grammar = grammar_from_json(j.at("grammar"));
  if (j.contains("corpus")) {
    const json &c = j.at("corpus");
    read_field(c, "type", cfg.corpus.type);
    read_field(c, "manifest_path", cfg.corpus.manifest_path);
    read_field(c, "train_fraction", cfg.corpus.train_fraction);
    read_field(c, "tonal", cfg.corpus.tonal);
    read_field(c, "train_sentences", cfg.corpus.train_sentences);
    read_field(c, "test_sentences", cfg.corpus.test_sentences);
    read_field(c, "sample_rate", cfg.corpus.sample_rate);
    read_field(c, "edge_silence_s", cfg.corpus.edge_silence_s);
  }
  if (j.contains("noises")) {
    cfg.noises.clear();
    for (const json &nj : j.at("noises")) {
      NoiseSpec n;
      read_field(nj, "label", n.label);
      read_field(nj, "type", n.type);
      read_field(nj, "path", n.path);
      read_field(nj, "duration_s", n.duration_s);
      read_field(nj, "max_gap_ms", n.max_gap_ms);
      if (nj.contains("gate")) {
        const json &g = nj.at("gate");
        read_field(g, "on_min_ms", n.gate.on_min_ms);
        read_field(g, "on_max_ms", n.gate.on_max_ms);
        read_field(g, "off_min_ms", n.gate.off_min_ms);
        read_field(g, "off_max_ms", n.gate.off_max_ms);
        read_field(g, "ramp_ms", n.gate.ramp_ms);
      }
      cfg.noises.push_back(std::move(n));
    }
  }
  if (j.contains("grid")) {
    read_field(j.at("grid"), "train_snrs_db", cfg.grid.train_snrs_db);
    read_field(j.at("grid"), "test_snrs_db", cfg.grid.test_snrs_db);
  }
  if (j.contains("frontend")) {
    const json &f = j.at("frontend");
    read_field(f, "window_ms", cfg.frontend.stft.window_ms);
    read_field(f, "shift_ms", cfg.frontend.stft.shift_ms);
    read_field(f, "pre_emphasis", cfg.frontend.stft.pre_emphasis);
    read_field(f, "pre_emphasis_coeff", cfg.frontend.stft.pre_emphasis_coeff);
    read_field(f, "num_bands", cfg.frontend.num_bands);
    read_field(f, "f_min_hz", cfg.frontend.f_min_hz);
    read_field(f, "f_max_hz", cfg.frontend.f_max_hz);
  }
  if (j.contains("feature_kinds")) {
    cfg.feature_kinds.clear();
    for (const json &k : j.at("feature_kinds"))
      cfg.feature_kinds.push_back(feature_kind_from_name(k.get<std::string>()));
  }
  if (j.contains("mfcc")) {
    const json &m = j.at("mfcc");
    read_field(m, "num_ceps", cfg.mfcc.num_ceps);
    read_field(m, "include_c0", cfg.mfcc.include_c0);
    read_field(m, "delta_orders", cfg.mfcc.delta_orders);
    read_field(m, "delta_window", cfg.mfcc.delta_window);
  }
  if (j.contains("sgbfb")) {
    const json &s = j.at("sgbfb");
    read_field(s, "spectral_mod_freqs", cfg.sgbfb.spectral_mod_freqs);
    read_field(s, "temporal_mod_freqs", cfg.sgbfb.temporal_mod_freqs);
    read_field(s, "envelope_halfwaves", cfg.sgbfb.envelope_halfwaves);
    read_field(s, "channel_subsample_divisor", cfg.sgbfb.channel_subsample_divisor);
    read_field(s, "max_spectral_width", cfg.sgbfb.max_spectral_width);
    read_field(s, "max_temporal_width", cfg.sgbfb.max_temporal_width);
  }
  read_field(j, "mean_variance_norm", cfg.mean_variance_norm);
  if (j.contains("topology")) {
    read_field(j.at("topology"), "states_per_word", cfg.topology.states_per_word);
    read_field(j.at("topology"), "silence_states", cfg.topology.silence_states);
  }
  if (j.contains("gmm")) {
    read_field(j.at("gmm"), "num_components", cfg.gmm.num_components);
    read_field(j.at("gmm"), "variance_floor_fraction", cfg.gmm.variance_floor_fraction);
  }
  if (j.contains("training")) {
    read_field(j.at("training"), "max_iterations", cfg.training.max_iterations);
    read_field(j.at("training"), "rel_improvement_tol", cfg.training.rel_improvement_tol);
  }
  read_field(j, "checkpoint_models", cfg.checkpoint_models);
  return cfg;
}

}  // namespace

std::string config_to_json(const ExperimentConfig &cfg) {
  return config_to_json_obj(cfg).dump(2);
}

ExperimentConfig config_from_json(const std::string &json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception &e) {
    throw LoadError(std::string("config: JSON parse error: ") + e.what());
  }
  try {
    return config_from_json_obj(j);
  } catch (const json::exception &e) {
    throw LoadError(std::string("config: schema error: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw LoadError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_hash(const ExperimentConfig &cfg) {
  const uint64_t h = fnv1a64(config_to_json_obj(cfg).dump());
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

std::string Condition::id() const {
  return feature_kind_name(kind) + "__" + speaker + "__" + language + "__" + effort + "__" +
         noise;
}

bool ResultBundle::all_ok() const {
  return std::all_of(conditions.begin(), conditions.end(),
                     [](const ConditionResult &c) { return c.ok; });
}

namespace {

struct CorpusGroup {
  std::string speaker, language, effort;
  CorpusManifest train;
  CorpusManifest test;
};

CorpusManifest filter_group(const CorpusManifest &m, const std::array<std::string, 3> &key) {
  CorpusManifest out;
  out.sample_rate = m.sample_rate;
  for (const CorpusEntry &e : m.entries)
    if (e.speaker == key[0] && e.language == key[1] && e.effort == key[2])
      out.entries.push_back(e);
  return out;
}

std::vector<CorpusGroup> prepare_corpus(const ExperimentConfig &cfg) {
  std::vector<CorpusGroup> groups;
  if (cfg.corpus.type == "manifest") {
    const CorpusManifest m = load_manifest(cfg.corpus.manifest_path, cfg.grammar);
    const SplitResult split = split_train_test(
        m, cfg.corpus.train_fraction, derive_seed(cfg.seed, {fnv1a64("corpus-split")}));
    for (const auto &key : m.conditions()) {
      CorpusGroup g;
      g.speaker = key[0];
      g.language = key[1];
      g.effort = key[2];
      g.train = filter_group(split.train, key);
      g.test = filter_group(split.test, key);
      if (g.train.entries.empty() || g.test.entries.empty())
        throw LoadError("corpus group " + key[0] + "/" + key[1] + "/" + key[2] +
                        " has an empty train or test split");
      groups.push_back(std::move(g));
    }
  } else {
    SyntheticCorpusSpec spec =
        default_synthetic_spec(cfg.grammar, cfg.corpus.sample_rate, cfg.corpus.tonal);
    spec.edge_silence_s = cfg.corpus.edge_silence_s;
    CorpusGroup g;
    g.speaker = spec.speaker;
    g.language = spec.language;
    g.effort = spec.effort;
    g.train = synthesize_corpus(spec, cfg.corpus.train_sentences,
                                derive_seed(cfg.seed, {fnv1a64("synth-train")}));
    g.test = synthesize_corpus(spec, cfg.corpus.test_sentences,
                               derive_seed(cfg.seed, {fnv1a64("synth-test")}));
    groups.push_back(std::move(g));
  }
  return groups;
}

// Concatenated training speech used as the spectral reference for surrogate
// maskers.
AudioBuffer build_reference(const std::vector<CorpusGroup> &groups, double max_seconds) {
  AudioBuffer ref;
  for (const CorpusGroup &g : groups) {
    for (const CorpusEntry &e : g.train.entries) {
      if (ref.sample_rate == 0) ref.sample_rate = e.audio.sample_rate;
      ref.samples.insert(ref.samples.end(), e.audio.samples.begin(), e.audio.samples.end());
      if (ref.duration_s() >= max_seconds) return ref;
    }
  }
  return ref;
}

double longest_sentence_s(const std::vector<CorpusGroup> &groups) {
  double longest = 0.0;
  for (const CorpusGroup &g : groups) {
    for (const CorpusEntry &e : g.train.entries) longest = std::max(longest, e.audio.duration_s());
    for (const CorpusEntry &e : g.test.entries) longest = std::max(longest, e.audio.duration_s());
  }
  return longest;
}

NoiseSource build_noise(const NoiseSpec &spec, const AudioBuffer &reference,
                        double min_duration_s, uint64_t seed) {
  if (spec.type == "file") {
    NoiseSource n = load_noise(spec.path, spec.label);
    if (n.audio.duration_s() <= min_duration_s)
      throw LoadError("noise file " + spec.path + " is shorter than the longest sentence");
    return n;
  }
  const double duration = std::max(spec.duration_s, min_duration_s * 1.5 + 1.0);
  NoiseSource stationary = gen_stationary_speech_shaped(
      reference, duration, derive_seed(seed, {fnv1a64("noise"), fnv1a64(spec.label)}));
  stationary.label = spec.label;
  if (spec.type == "stationary_surrogate") return stationary;
  NoiseSource gated = gen_gated(stationary, spec.max_gap_ms,
                                derive_seed(seed, {fnv1a64("gate"), fnv1a64(spec.label)}),
                                spec.gate);
  gated.label = spec.label;
  return gated;
}

constexpr const char *kRunManifestName = "run_manifest.json";

void write_run_manifest(const ExperimentConfig &cfg, const std::string &out_dir) {
  json j;
  j["format"] = "fadekit-run 1";
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["config"] = json::parse(config_to_json(cfg));
  std::ofstream out(std::filesystem::path(out_dir) / kRunManifestName);
  if (!out) throw LoadError("cannot write run manifest in " + out_dir);
  out << j.dump(2) << '\n';
}

}  // namespace

ResultBundle run_experiment(const ExperimentConfig &cfg, bool resume) {
  cfg.validate();
  const std::filesystem::path out_dir(cfg.output_dir);
  const std::filesystem::path matrix_dir = out_dir / "matrices";
  std::filesystem::create_directories(matrix_dir);

  // A reused output directory must belong to the same configuration.
  const std::filesystem::path manifest_path = out_dir / kRunManifestName;
  if (resume && std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    json j;
    in >> j;
    if (j.value("config_hash", std::string()) != config_hash(cfg))
      throw LoadError("resume: config hash mismatch with " + manifest_path.string());
  }
  write_run_manifest(cfg, cfg.output_dir);

  const std::vector<CorpusGroup> groups = prepare_corpus(cfg);
  const AudioBuffer reference = build_reference(groups, 30.0);
  const double longest = longest_sentence_s(groups);

  std::vector<NoiseSource> noises;
  noises.reserve(cfg.noises.size());
  for (const NoiseSpec &spec : cfg.noises)
    noises.push_back(build_noise(spec, reference, longest, cfg.seed));

  ResultBundle bundle;
  bundle.config = cfg;

  for (FeatureKind kind : cfg.feature_kinds) {
    for (const CorpusGroup &group : groups) {
      for (size_t ni = 0; ni < noises.size(); ++ni) {
        ConditionResult result;
        result.condition = {kind, group.speaker, group.language, group.effort,
                            cfg.noises[ni].label};
        const std::string id = result.condition.id();
        const std::filesystem::path matrix_path = matrix_dir / (id + ".csv");

        try {
          bool loaded = false;
          if (resume && std::filesystem::exists(matrix_path)) {
            std::ifstream in(matrix_path);
            SnrGrid stored;
            result.matrix = load_matrix_csv(in, &stored);
            loaded = true;
          }
          if (!loaded) {
            SweepConfig sweep;
            sweep.grid = cfg.grid;
            sweep.frontend = cfg.frontend;
            sweep.features.kind = kind;
            sweep.features.mfcc = cfg.mfcc;
            sweep.features.sgbfb = cfg.sgbfb;
            sweep.features.mean_variance_norm = cfg.mean_variance_norm;
            sweep.topology = cfg.topology;
            sweep.gmm = cfg.gmm;
            sweep.training = cfg.training;
            sweep.workers = cfg.workers;
            sweep.seed = derive_seed(cfg.seed, {fnv1a64("condition"), fnv1a64(id)});
            if (cfg.checkpoint_models)
              sweep.checkpoint_dir = (out_dir / "models" / id).string();
            result.matrix = run_sweep(group.train, group.test, cfg.grammar, noises[ni], sweep);
            std::ofstream out(matrix_path);
            save_matrix_csv(result.matrix, cfg.grid, out);
          }
          result.srt = srt_from_matrix(result.matrix, cfg.grid);
          result.ok = true;
        } catch (const Error &e) {
          result.ok = false;
          result.failure_reason = e.what();
        }
        bundle.conditions.push_back(std::move(result));
      }
    }
  }

  // Lombard gains wherever a (speaker, language, noise) pair has both efforts.
  for (const ConditionResult &plain : bundle.conditions) {
    if (!plain.ok || plain.condition.effort != "plain") continue;
    for (const ConditionResult &lombard : bundle.conditions) {
      if (!lombard.ok || lombard.condition.effort != "lombard") continue;
      if (plain.condition.kind != lombard.condition.kind ||
          plain.condition.speaker != lombard.condition.speaker ||
          plain.condition.language != lombard.condition.language ||
          plain.condition.noise != lombard.condition.noise)
        continue;
      GainResult g;
      g.kind = plain.condition.kind;
      g.speaker = plain.condition.speaker;
      g.language = plain.condition.language;
      g.noise = plain.condition.noise;
      g.gain_db = lombard_gain(plain.srt.srt_db, lombard.srt.srt_db);
      g.sigma_db = std::sqrt(plain.srt.sigma_sim_db * plain.srt.sigma_sim_db +
                             lombard.srt.sigma_sim_db * lombard.srt.sigma_sim_db);
      bundle.gains.push_back(std::move(g));
    }
  }

  emit_reports(bundle, cfg.output_dir);
  return bundle;
}

std::vector<std::string> emit_reports(const ResultBundle &bundle, const std::string &out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path base(out_dir);
  std::vector<std::string> written;

  {
    const std::string path = (base / "summary.csv").string();
    std::ofstream out(path);
    if (!out) throw LoadError("emit_reports: cannot write " + path);
    out << "feature,speaker,language,effort,noise,status,srt_db,sigma_sim_db,"
           "winning_train_snr_db,failure_reason\n";
    for (const ConditionResult &c : bundle.conditions) {
      out << feature_kind_name(c.condition.kind) << ',' << c.condition.speaker << ','
          << c.condition.language << ',' << c.condition.effort << ',' << c.condition.noise << ',';
      if (c.ok) {
        out << "ok," << format_double(c.srt.srt_db) << ',' << format_double(c.srt.sigma_sim_db)
            << ',' << format_double(c.srt.winning_train_snr_db) << ",\n";
      } else {
        std::string reason = c.failure_reason;
        std::replace(reason.begin(), reason.end(), ',', ';');
        out << "failed,,,," << reason << '\n';
      }
    }
    written.push_back(path);
  }

  {
    const std::string path = (base / "gains.csv").string();
    std::ofstream out(path);
    out << "feature,speaker,language,noise,gain_db,sigma_db\n";
    for (const GainResult &g : bundle.gains)
      out << feature_kind_name(g.kind) << ',' << g.speaker << ',' << g.language << ',' << g.noise
          << ',' << format_double(g.gain_db) << ',' << format_double(g.sigma_db) << '\n';
    written.push_back(path);
  }

  for (FeatureKind kind : bundle.config.feature_kinds) {
    const std::string path =
        (base / ("scatter_srt_" + feature_kind_name(kind) + ".csv")).string();
    std::ofstream out(path);
    out << "speaker,language,effort,noise,srt_db,sigma_sim_db\n";
    for (const ConditionResult &c : bundle.conditions) {
      if (!c.ok || c.condition.kind != kind) continue;
      out << c.condition.speaker << ',' << c.condition.language << ',' << c.condition.effort
          << ',' << c.condition.noise << ',' << format_double(c.srt.srt_db) << ','
          << format_double(c.srt.sigma_sim_db) << '\n';
    }
    written.push_back(path);

    const std::string gain_path =
        (base / ("scatter_gain_" + feature_kind_name(kind) + ".csv")).string();
    std::ofstream gout(gain_path);
    gout << "speaker,language,noise,gain_db,sigma_db\n";
    for (const GainResult &g : bundle.gains) {
      if (g.kind != kind) continue;
      gout << g.speaker << ',' << g.language << ',' << g.noise << ','
           << format_double(g.gain_db) << ',' << format_double(g.sigma_db) << '\n';
    }
    written.push_back(gain_path);
  }

  write_run_manifest(bundle.config, out_dir);
  written.push_back((base / kRunManifestName).string());
  return written;
}

const EmpiricalRow *EmpiricalTable::find(const std::string &speaker, const std::string &language,
                                         const std::string &effort,
                                         const std::string &noise) const {
  for (const EmpiricalRow &r : rows)
    if (r.speaker == speaker && r.language == language && r.effort == effort && r.noise == noise)
      return &r;
  return nullptr;
}

EmpiricalTable load_empirical_table(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw LoadError("load_empirical_table: cannot open " + path);
  EmpiricalTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    EmpiricalRow row;
    std::string listeners;
    if (!(ls >> row.speaker >> row.language >> row.effort >> row.noise >> row.srt_db >>
          row.sem_db >> row.n_listeners))
      throw LoadError("load_empirical_table: " + path + ":" + std::to_string(lineno) +
                      ": expected speaker language effort noise srt_db sem_db n_listeners");
    if (row.sem_db < 0.0 || row.n_listeners < 1)
      throw LoadError("load_empirical_table: " + path + ":" + std::to_string(lineno) +
                      ": sem must be >= 0 and n_listeners >= 1");
    if (ls >> listeners && listeners != "-") {
      std::istringstream vs(listeners);
      std::string tok;
      while (std::getline(vs, tok, ';')) row.listener_srts_db.push_back(std::stod(tok));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw LoadError("load_empirical_table: empty table in " + path);
  return table;
}

namespace {

void fit_regression(const PairedSeries &s, double *slope, double *intercept) {
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    mx += s.emp_db[i];
    my += s.sim_db[i];
  }
  mx /= static_cast<double>(s.size());
  my /= static_cast<double>(s.size());
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    sxy += (s.emp_db[i] - mx) * (s.sim_db[i] - my);
    sxx += (s.emp_db[i] - mx) * (s.emp_db[i] - mx);
  }
  *slope = sxy / sxx;
  *intercept = my - *slope * mx;
}

}  // namespace

EvalResult evaluate(const ResultBundle &bundle, const EmpiricalTable &emp) {
  EvalResult eval;
  std::vector<std::string> unmatched;

  for (FeatureKind kind : bundle.config.feature_kinds) {
    EvalPanel srt_panel;
    srt_panel.name = "srt";
    srt_panel.kind = kind;
    for (const ConditionResult &c : bundle.conditions) {
      if (!c.ok || c.condition.kind != kind) continue;
      const EmpiricalRow *row = emp.find(c.condition.speaker, c.condition.language,
                                         c.condition.effort, c.condition.noise);
      if (!row) {
        unmatched.push_back(c.condition.id());
        continue;
      }
      srt_panel.series.sim_db.push_back(c.srt.srt_db);
      srt_panel.series.emp_db.push_back(row->srt_db);
      srt_panel.series.sigma_sim_db.push_back(c.srt.sigma_sim_db);
      srt_panel.series.sigma_emp_db.push_back(row->sem_db);
      srt_panel.series.labels.push_back(c.condition.id());
    }

    EvalPanel gain_panel;
    gain_panel.name = "gain";
    gain_panel.kind = kind;
    for (const GainResult &g : bundle.gains) {
      if (g.kind != kind) continue;
      const EmpiricalRow *plain = emp.find(g.speaker, g.language, "plain", g.noise);
      const EmpiricalRow *lombard = emp.find(g.speaker, g.language, "lombard", g.noise);
      if (!plain || !lombard) {
        unmatched.push_back(feature_kind_name(kind) + "__" + g.speaker + "__" + g.language +
                            "__gain__" + g.noise);
        continue;
      }
      double emp_gain, emp_sigma;
      if (!plain->listener_srts_db.empty() &&
          plain->listener_srts_db.size() == lombard->listener_srts_db.size()) {
        // Per-listener gains first, then the mean across listeners.
        const GainEstimate ge = listener_gain(plain->listener_srts_db, lombard->listener_srts_db);
        emp_gain = ge.mean_db;
        emp_sigma = ge.sem_db;
      } else {
        emp_gain = lombard_gain(plain->srt_db, lombard->srt_db);
        emp_sigma = std::sqrt(plain->sem_db * plain->sem_db + lombard->sem_db * lombard->sem_db);
      }
      gain_panel.series.sim_db.push_back(g.gain_db);
      gain_panel.series.emp_db.push_back(emp_gain);
      gain_panel.series.sigma_sim_db.push_back(g.sigma_db);
      gain_panel.series.sigma_emp_db.push_back(emp_sigma);
      gain_panel.series.labels.push_back(g.speaker + "__" + g.language + "__" + g.noise);
    }

    if (!unmatched.empty()) continue;  // collect all mismatches before throwing

    if (srt_panel.series.size() >= 2) {
      srt_panel.summary = evaluate_series(srt_panel.series,
                                          static_cast<int>(srt_panel.series.size()));
      fit_regression(srt_panel.series, &srt_panel.regression_slope,
                     &srt_panel.regression_intercept);
      eval.panels.push_back(std::move(srt_panel));
    }
    if (gain_panel.series.size() >= 2) {
      gain_panel.summary = evaluate_series(gain_panel.series,
                                           static_cast<int>(gain_panel.series.size()));
      fit_regression(gain_panel.series, &gain_panel.regression_slope,
                     &gain_panel.regression_intercept);
      eval.panels.push_back(std::move(gain_panel));
    }
  }

  if (!unmatched.empty()) {
    std::string msg = "evaluate: no empirical data for:";
    for (const std::string &u : unmatched) msg += " " + u;
    throw InvalidArgument(msg);
  }
  return eval;
}

std::vector<std::string> emit_evaluation(const EvalResult &eval, const std::string &out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path base(out_dir);
  std::vector<std::string> written;

  const std::string summary_path = (base / "eval_summary.csv").string();
  {
    std::ofstream out(summary_path);
    out << "panel,feature,n_points,dof,pearson_r,rms_db,bias_mean_db,bias_regression_db,"
           "chi2_per_dof\n";
    for (const EvalPanel &p : eval.panels)
      out << p.name << ',' << feature_kind_name(p.kind) << ',' << p.series.size() << ','
          << p.summary.dof << ',' << format_double(p.summary.pearson_r) << ','
          << format_double(p.summary.rms_db) << ',' << format_double(p.summary.bias_db) << ','
          << format_double(p.summary.bias_regression_db) << ','
          << format_double(p.summary.chi2_per_dof) << '\n';
  }
  written.push_back(summary_path);

  for (const EvalPanel &p : eval.panels) {
    const std::string path =
        (base / ("eval_scatter_" + p.name + "_" + feature_kind_name(p.kind) + ".csv")).string();
    std::ofstream out(path);
    out << "# identity line: slope=1 intercept=0\n";
    out << "# regression line: slope=" << format_double(p.regression_slope)
        << " intercept=" << format_double(p.regression_intercept) << '\n';
    out << "label,sim_db,sigma_sim_db,emp_db,sigma_emp_db\n";
    for (size_t i = 0; i < p.series.size(); ++i)
      out << p.series.labels[i] << ',' << format_double(p.series.sim_db[i]) << ','
          << format_double(p.series.sigma_sim_db[i]) << ',' << format_double(p.series.emp_db[i])
          << ',' << format_double(p.series.sigma_emp_db[i]) << '\n';
    written.push_back(path);
  }
  return written;
}

}  // namespace fade
