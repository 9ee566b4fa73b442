// tools/fadekit_main.cc

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

#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "fade/experiment.h"
#include "fade/rng.h"

namespace {

// Exit codes: 0 success, 1 condition failure, 2 config/usage error.
constexpr int kExitOk = 0;
constexpr int kExitConditionFailed = 1;
constexpr int kExitConfigError = 2;

fade::ExperimentConfig load_effective_config(const std::string &config_path, uint64_t *seed,
                                             int *workers, const std::string &out_override) {
  fade::ExperimentConfig cfg =
      config_path.empty() ? fade::default_config() : fade::load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (workers) cfg.workers = *workers;
  if (!out_override.empty()) cfg.output_dir = out_override;
  return cfg;
}

void print_condition_table(const fade::ResultBundle &bundle) {
  for (const auto &c : bundle.conditions) {
    std::cout << c.condition.id() << ": ";
    if (c.ok) {
      std::cout << "SRT " << c.srt.srt_db << " dB  (sigma " << c.srt.sigma_sim_db
                << " dB, best train SNR " << c.srt.winning_train_snr_db << " dB)\n";
    } else {
      std::cout << "FAILED: " << c.failure_reason << '\n';
    }
  }
  for (const auto &g : bundle.gains)
    std::cout << "gain " << fade::feature_kind_name(g.kind) << " " << g.speaker << "/"
              << g.language << "/" << g.noise << ": " << g.gain_db << " dB (sigma " << g.sigma_db
              << ")\n";
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"fadekit: speech recognition threshold simulation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, empirical_path, results_dir, wav_path, kind_name = "mfcc";
  std::string condition_id, reference_path, noise_kind = "stationary", noise_out = "noise.wav";
  uint64_t seed = 0;
  bool have_seed = false, have_workers = false, resume = false;
  int workers = 0;
  double duration_s = 12.0, max_gap_ms = 250.0;

  auto add_common = [&](CLI::App *cmd) {
    cmd->add_option("--config", config_path, "configuration JSON file");
    cmd->add_option("--out", out_dir, "output directory override");
    cmd->add_option("--seed", seed, "master seed override")->each([&](const std::string &) {
      have_seed = true;
    });
    cmd->add_option("--workers", workers, "worker thread count override")
        ->each([&](const std::string &) { have_workers = true; });
  };

  CLI::App *run = app.add_subcommand("run", "execute the full experiment matrix");
  add_common(run);
  run->add_flag("--resume", resume, "reuse matrices already present in the output directory");

  CLI::App *evaluate = app.add_subcommand("evaluate", "compare a finished run with empirical data");
  add_common(evaluate);
  evaluate->add_option("--empirical", empirical_path, "empirical SRT table (TSV)")->required();
  evaluate->add_option("--results", results_dir,
                       "directory of a finished run (defaults to the config output_dir)");

  CLI::App *srt = app.add_subcommand("srt", "run a single condition and print its matrix and SRT");
  add_common(srt);
  srt->add_option("--condition", condition_id, "condition id (feature__speaker__language__effort__noise)")
      ->required();

  CLI::App *features = app.add_subcommand("features", "dump a feature matrix as CSV");
  add_common(features);
  features->add_option("--wav", wav_path, "input WAV file")->required();
  features->add_option("--kind", kind_name, "feature kind: mfcc or sgbfb");

  CLI::App *noise = app.add_subcommand("noise", "generate a surrogate masker WAV");
  add_common(noise);
  noise->add_option("--kind", noise_kind, "stationary or gated");
  noise->add_option("--reference", reference_path, "reference WAV for the target spectrum")
      ->required();
  noise->add_option("--duration", duration_s, "duration in seconds");
  noise->add_option("--max-gap-ms", max_gap_ms, "maximum gap for the gated surrogate");
  noise->add_option("--output", noise_out, "output WAV path");

  CLI::App *print_config = app.add_subcommand("print-config", "print the effective configuration");
  add_common(print_config);

  CLI11_PARSE(app, argc, argv);

  try {
    fade::ExperimentConfig cfg = load_effective_config(
        config_path, have_seed ? &seed : nullptr, have_workers ? &workers : nullptr, out_dir);

    if (print_config->parsed()) {
      std::cout << fade::config_to_json(cfg) << '\n';
      return kExitOk;
    }

    if (run->parsed()) {
      const fade::ResultBundle bundle = fade::run_experiment(cfg, resume);
      print_condition_table(bundle);
      std::cout << "reports written to " << cfg.output_dir << '\n';
      return bundle.all_ok() ? kExitOk : kExitConditionFailed;
    }

    if (evaluate->parsed()) {
      // Re-run with resume so a finished run is loaded, not recomputed.
      if (!results_dir.empty()) cfg.output_dir = results_dir;
      const fade::ResultBundle bundle = fade::run_experiment(cfg, true);
      const fade::EmpiricalTable table = fade::load_empirical_table(empirical_path);
      const fade::EvalResult eval = fade::evaluate(bundle, table);
      for (const auto &p : eval.panels)
        std::cout << p.name << " panel (" << fade::feature_kind_name(p.kind)
                  << "): R=" << p.summary.pearson_r << " rms=" << p.summary.rms_db
                  << " bias=" << p.summary.bias_db << " chi2/nu=" << p.summary.chi2_per_dof
                  << " (nu=" << p.summary.dof << ")\n";
      fade::emit_evaluation(eval, cfg.output_dir);
      return bundle.all_ok() ? kExitOk : kExitConditionFailed;
    }

    if (srt->parsed()) {
      fade::ExperimentConfig single = cfg;
      // Restrict the run to the requested feature kind and noise; the corpus
      // groups of other conditions are skipped by the id match below.
      const size_t first = condition_id.find("__");
      const size_t last = condition_id.rfind("__");
      if (first != std::string::npos && last != std::string::npos && last > first) {
        single.feature_kinds = {fade::feature_kind_from_name(condition_id.substr(0, first))};
        const std::string noise_label = condition_id.substr(last + 2);
        std::vector<fade::NoiseSpec> keep;
        for (const auto &n : single.noises)
          if (n.label == noise_label) keep.push_back(n);
        if (!keep.empty()) single.noises = keep;
      }
      single.output_dir = cfg.output_dir + "/single/" + condition_id;
      fade::ResultBundle bundle = fade::run_experiment(single, true);
      for (const auto &c : bundle.conditions) {
        if (c.condition.id() != condition_id) continue;
        if (!c.ok) {
          std::cout << condition_id << " FAILED: " << c.failure_reason << '\n';
          return kExitConditionFailed;
        }
        fade::save_matrix_csv(c.matrix, cfg.grid, std::cout);
        std::cout << "SRT " << c.srt.srt_db << " dB (sigma " << c.srt.sigma_sim_db
                  << " dB, best train SNR " << c.srt.winning_train_snr_db << " dB)\n";
        return kExitOk;
      }
      std::cerr << "no such condition: " << condition_id << "\navailable:\n";
      for (const auto &c : bundle.conditions) std::cerr << "  " << c.condition.id() << '\n';
      return kExitConfigError;
    }

    if (features->parsed()) {
      const fade::AudioBuffer audio = fade::read_wav(wav_path);
      fade::FeatureSetup setup;
      setup.kind = fade::feature_kind_from_name(kind_name);
      setup.mfcc = cfg.mfcc;
      setup.sgbfb = cfg.sgbfb;
      setup.mean_variance_norm = cfg.mean_variance_norm;
      const fade::FeatureMatrix fm = fade::compute_features(audio, cfg.frontend, setup);
      fade::dump_features_csv(fm, std::cout);
      return kExitOk;
    }

    if (noise->parsed()) {
      const fade::AudioBuffer ref = fade::read_wav(reference_path);
      fade::NoiseSource out = fade::gen_stationary_speech_shaped(ref, duration_s, cfg.seed);
      if (noise_kind == "gated") {
        out = fade::gen_gated(out, max_gap_ms, fade::derive_seed(cfg.seed, {fade::fnv1a64("gate")}));
      } else if (noise_kind != "stationary") {
        std::cerr << "unknown noise kind: " << noise_kind << '\n';
        return kExitConfigError;
      }
      fade::write_wav(noise_out, out.audio, fade::WavFormat::kFloat32);
      std::cout << "wrote " << noise_out << " (" << out.audio.duration_s() << " s)\n";
      return kExitOk;
    }
  } catch (const fade::LoadError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const fade::InvalidArgument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const fade::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConditionFailed;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConditionFailed;
  }
  return kExitOk;
}
