// tools/csrec-main.cc

// Copyright 2026  CSRec Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csrec/classify.h"
#include "csrec/eval.h"
#include "csrec/experiments.h"
#include "csrec/hpm.h"
#include "csrec/io.h"
#include "csrec/mlp.h"
#include "csrec/mshmm.h"
#include "csrec/resync.h"
#include "csrec/synth.h"
#include "json.hpp"

namespace {

using csrec::Corpus;
using Json = nlohmann::json;
namespace fs = std::filesystem;

void WriteRunConfig(const fs::path& out_dir, const Json& resolved) {
  fs::create_directories(out_dir);
  csrec::WriteTextFile(out_dir / "run-config.json", resolved.dump(2) + "\n");
}

Json ReportToJson(const csrec::ExperimentReport& r) {
  return Json{{"name", r.name},
              {"values", r.values},
              {"mean", r.mean},
              {"std", r.std_dev},
              {"seeds", r.seeds},
              {"config_fingerprint", r.config_fingerprint}};
}

std::vector<csrec::Modality> ParseStreams(const std::string& spec) {
  std::vector<csrec::Modality> streams;
  for (char c : spec) {
    switch (c) {
      case 'L': streams.push_back(csrec::Modality::kLips); break;
      case 'P': streams.push_back(csrec::Modality::kHandPos); break;
      case 'S': streams.push_back(csrec::Modality::kHandShape); break;
      default:
        throw csrec::ValidationError(
            "streams must be a combination of L, P, S");
    }
  }
  if (streams.empty()) {
    throw csrec::ValidationError("streams must not be empty");
  }
  return streams;
}

// Window samples for the classifier commands. Hand-position tasks label
// windows with the position class, hand-shape tasks with the shape class.
// MLP training adds 'rest' windows taken from silence intervals.
struct ClassifierData {
  std::vector<csrec::WindowSample> samples;
  int skipped = 0;
};

ClassifierData BuildClassifierSamples(const Corpus& corpus,
                                      const std::string& task,
                                      const std::string& segmentation,
                                      double window_ms, bool with_rest,
                                      const csrec::HpmModel* hpm_model) {
  const bool positions = task == "hand-position";
  csrec::SynthClassMap map = csrec::SynthClassMap::FromCorpus(corpus);
  const csrec::PhonemeKind kind = positions ? csrec::PhonemeKind::kVowel
                                            : csrec::PhonemeKind::kConsonant;
  auto label_of = [&](const std::string& symbol) {
    return positions ? std::to_string(map.PositionClass(symbol))
                     : std::to_string(map.ShapeClass(symbol));
  };

  ClassifierData out;
  for (const csrec::Sentence& s : corpus.sentences) {
    const csrec::FrameStream& stream =
        positions ? s.hand_pos : s.hand_shape;
    csrec::Segmentation seg;
    seg.tier = csrec::Tier::kAudio;
    if (segmentation == "audio") {
      for (const csrec::Interval& iv : s.audio_seg.intervals) {
        if (corpus.alphabet.KindOf(iv.label) == kind) {
          seg.intervals.push_back(
              csrec::Interval{iv.start_ms, iv.end_ms, label_of(iv.label)});
        }
      }
    } else if (segmentation == "truth") {
      if (!s.truth.has_value()) {
        throw csrec::ValidationError(
            "sentence " + s.id +
            " has no truth tiers; use --segmentation audio or hpm");
      }
      const csrec::Segmentation& tier =
          positions ? s.truth->hand_pos_seg : s.truth->hand_shape_seg;
      for (const csrec::Interval& iv : tier.intervals) {
        seg.intervals.push_back(
            csrec::Interval{iv.start_ms, iv.end_ms, label_of(iv.label)});
      }
    } else if (segmentation == "hpm") {
      csrec::Segmentation shifted = csrec::HpmShiftSegmentation(
          s.audio_seg, corpus.alphabet, *hpm_model,
          csrec::SentenceEndMs(s.audio_seg, corpus.alphabet));
      for (const csrec::Interval& iv : shifted.intervals) {
        if (corpus.alphabet.KindOf(iv.label) == kind) {
          seg.intervals.push_back(
              csrec::Interval{iv.start_ms, iv.end_ms, label_of(iv.label)});
        }
      }
    } else {
      throw csrec::ValidationError("unknown segmentation source '" +
                                   segmentation + "'");
    }
    if (with_rest) {
      for (const csrec::Interval& iv : s.audio_seg.intervals) {
        if (corpus.alphabet.KindOf(iv.label) == csrec::PhonemeKind::kSilence) {
          seg.intervals.push_back(
              csrec::Interval{iv.start_ms, iv.end_ms, "rest"});
        }
      }
      std::stable_sort(seg.intervals.begin(), seg.intervals.end(),
                       [](const csrec::Interval& a, const csrec::Interval& b) {
                         return a.start_ms < b.start_ms;
                       });
    }
    auto w = csrec::ExtractWindowFeatures(stream, seg, window_ms);
    out.samples.insert(out.samples.end(), w.samples.begin(), w.samples.end());
    out.skipped += w.skipped;
  }
  return out;
}

csrec::HpmModel FitHpmFromCorpus(const Corpus& corpus,
                                 const csrec::T0SearchGrid& grid) {
  csrec::HptMeasurements measured = csrec::MeasureEmpiricalHpt(corpus);
  return csrec::FitHpm(measured.vowels, grid);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "csrec: continuous Cued Speech recognition toolkit (synthetic corpora, "
      "hand-preceding models, stream re-synchronization, MSHMM decoding)"};
  app.require_subcommand(1);

  // --- synth -------------------------------------------------------------
  auto* cmd_synth = app.add_subcommand(
      "synth", "Generate a synthetic corpus with ground-truth hand lags");
  std::string synth_config_path, synth_out;
  std::optional<std::uint64_t> synth_seed;
  std::optional<int> synth_sentences;
  cmd_synth->add_option("--config", synth_config_path,
                        "Synth config JSON (defaults when omitted)")
      ->check(CLI::ExistingFile);
  cmd_synth->add_option("--out", synth_out, "Output corpus directory")
      ->required();
  cmd_synth->add_option("--seed", synth_seed, "Override the config seed");
  cmd_synth->add_option("--sentences", synth_sentences,
                        "Override the sentence count");

  // --- fit-hpm -----------------------------------------------------------
  auto* cmd_fit = app.add_subcommand(
      "fit-hpm", "Fit the hand-preceding model from a corpus' truth tiers");
  std::string fit_corpus, fit_out;
  csrec::T0SearchGrid fit_grid;
  cmd_fit->add_option("--corpus", fit_corpus, "Corpus manifest")->required();
  cmd_fit->add_option("--out", fit_out, "Output directory")->required();
  cmd_fit->add_option("--t0-min", fit_grid.min_ms, "Breakpoint grid start");
  cmd_fit->add_option("--t0-max", fit_grid.max_ms, "Breakpoint grid end");
  cmd_fit->add_option("--t0-step", fit_grid.step_ms, "Breakpoint grid step");

  // --- resync ------------------------------------------------------------
  auto* cmd_resync = app.add_subcommand(
      "resync", "Delay hand streams by their hand-preceding times");
  std::string resync_corpus, resync_out, resync_edge = "replicate";
  double resync_dv = csrec::kDefaultDeltaVStarMs;
  double resync_dc = csrec::kDefaultDeltaCStarMs;
  bool resync_fit = false;
  cmd_resync->add_option("--corpus", resync_corpus, "Corpus manifest")
      ->required();
  cmd_resync->add_option("--out", resync_out, "Output corpus directory")
      ->required();
  cmd_resync->add_option("--delta-v", resync_dv,
                         "Hand position lag in ms (default 140)");
  cmd_resync->add_option("--delta-c", resync_dc,
                         "Hand shape lag in ms (default 60)");
  cmd_resync
      ->add_option("--edge", resync_edge,
                   "Leading-frame fill: replicate or zeros")
      ->check(CLI::IsMember({"replicate", "zeros"}));
  cmd_resync->add_flag("--fit", resync_fit,
                       "Fit lags from the corpus truth tiers instead");

  // --- train-classifier ----------------------------------------------------
  auto* cmd_trainc = app.add_subcommand(
      "train-classifier", "Train a hand position/shape classifier");
  std::string trainc_corpus, trainc_out, trainc_task = "hand-position";
  std::string trainc_seg = "audio", trainc_type = "mg", trainc_hpm;
  double trainc_window = 60.0;
  int trainc_components = 1;
  std::uint64_t trainc_seed = 1;
  cmd_trainc->add_option("--corpus", trainc_corpus, "Corpus manifest")
      ->required();
  cmd_trainc->add_option("--out", trainc_out, "Output directory")->required();
  cmd_trainc->add_option("--task", trainc_task, "hand-position or hand-shape")
      ->check(CLI::IsMember({"hand-position", "hand-shape"}));
  cmd_trainc
      ->add_option("--segmentation", trainc_seg,
                   "Window placement: audio, hpm or truth")
      ->check(CLI::IsMember({"audio", "hpm", "truth"}));
  cmd_trainc->add_option("--type", trainc_type, "Classifier type: mg or mlp")
      ->check(CLI::IsMember({"mg", "mlp"}));
  cmd_trainc->add_option("--hpm-model", trainc_hpm,
                         "HPM JSON for --segmentation hpm (fitted from truth "
                         "when omitted)");
  cmd_trainc->add_option("--window-ms", trainc_window, "Feature window");
  cmd_trainc->add_option("--components", trainc_components,
                         "Gaussians per class (mg)");
  cmd_trainc->add_option("--seed", trainc_seed, "Training seed (mlp)");

  // --- eval-classifier -----------------------------------------------------
  auto* cmd_evalc = app.add_subcommand(
      "eval-classifier", "Evaluate a classifier on a corpus");
  std::string evalc_corpus, evalc_out, evalc_model, evalc_task =
      "hand-position";
  std::string evalc_seg = "audio", evalc_hpm;
  double evalc_window = 60.0;
  cmd_evalc->add_option("--corpus", evalc_corpus, "Corpus manifest")
      ->required();
  cmd_evalc->add_option("--model", evalc_model, "Classifier JSON")->required();
  cmd_evalc->add_option("--out", evalc_out, "Output directory")->required();
  cmd_evalc->add_option("--task", evalc_task, "hand-position or hand-shape")
      ->check(CLI::IsMember({"hand-position", "hand-shape"}));
  cmd_evalc
      ->add_option("--segmentation", evalc_seg,
                   "Window placement: audio, hpm or truth")
      ->check(CLI::IsMember({"audio", "hpm", "truth"}));
  cmd_evalc->add_option("--hpm-model", evalc_hpm, "HPM JSON for hpm windows");
  cmd_evalc->add_option("--window-ms", evalc_window, "Feature window");

  // --- train ---------------------------------------------------------------
  auto* cmd_train = app.add_subcommand(
      "train", "Train an MSHMM phonetic decoder on a corpus");
  std::string train_corpus, train_out, train_streams = "LPS";
  std::string train_context = "mono";
  std::vector<double> train_weights;
  std::vector<int> train_mixtures = {1, 2};
  int train_states = 3, train_iters = 10, train_minocc = 8, train_threads = 1;
  cmd_train->add_option("--corpus", train_corpus, "Corpus manifest")
      ->required();
  cmd_train->add_option("--out", train_out, "Output directory")->required();
  cmd_train->add_option("--streams", train_streams,
                        "Streams to fuse, e.g. LPS, LP, LS");
  cmd_train->add_option("--weights", train_weights,
                        "Stream weights (default 0.4 0.2 0.4 for LPS)");
  cmd_train->add_option("--states", train_states, "Emitting states per unit");
  cmd_train->add_option("--mixtures", train_mixtures,
                        "Mixture schedule, e.g. 1 2");
  cmd_train->add_option("--em-iters", train_iters, "EM iterations per stage");
  cmd_train->add_option("--context", train_context, "mono or tri")
      ->check(CLI::IsMember({"mono", "tri"}));
  cmd_train->add_option("--min-occupancy", train_minocc,
                        "Min trigram count for a triphone unit");
  cmd_train->add_option("--threads", train_threads, "E-step worker threads");

  // --- decode ----------------------------------------------------------------
  auto* cmd_decode = app.add_subcommand(
      "decode", "Decode a corpus with a trained MSHMM");
  std::string decode_corpus, decode_model, decode_out;
  cmd_decode->add_option("--corpus", decode_corpus, "Corpus manifest")
      ->required();
  cmd_decode->add_option("--model", decode_model, "MSHMM model JSON")
      ->required();
  cmd_decode->add_option("--out", decode_out, "Output directory")->required();

  // --- score -----------------------------------------------------------------
  auto* cmd_score = app.add_subcommand(
      "score", "Score decoded output against a reference corpus");
  std::string score_ref, score_hyp, score_out;
  bool score_keep_sil = false;
  cmd_score->add_option("--ref", score_ref, "Reference corpus manifest")
      ->required();
  cmd_score->add_option("--hyp", score_hyp, "decoded.json from decode")
      ->required();
  cmd_score->add_option("--out", score_out, "Output directory")->required();
  cmd_score->add_flag("--keep-silence", score_keep_sil,
                      "Score silence labels too");

  // --- sweep -----------------------------------------------------------------
  auto* cmd_sweep = app.add_subcommand(
      "sweep", "Hand-shape accuracy sweep over the consonant lag");
  std::string sweep_corpus, sweep_out;
  csrec::SweepConfig sweep_cfg;
  cmd_sweep->add_option("--corpus", sweep_corpus, "Corpus manifest")
      ->required();
  cmd_sweep->add_option("--out", sweep_out, "Output directory")->required();
  cmd_sweep->add_option("--min", sweep_cfg.min_ms, "Grid start (ms)");
  cmd_sweep->add_option("--max", sweep_cfg.max_ms, "Grid end (ms)");
  cmd_sweep->add_option("--step", sweep_cfg.step_ms, "Grid step (ms)");
  cmd_sweep->add_option("--repeats", sweep_cfg.repeats, "Split repeats");
  cmd_sweep->add_option("--train-frac", sweep_cfg.train_fraction,
                        "Training fraction");
  cmd_sweep->add_option("--window-ms", sweep_cfg.window_ms, "Feature window");
  cmd_sweep->add_option("--components", sweep_cfg.gmm.n_components,
                        "Gaussians per class");
  cmd_sweep->add_option("--seed", sweep_cfg.seed, "Root seed");

  // --- table2 ---------------------------------------------------------------
  auto* cmd_table2 = app.add_subcommand(
      "table2",
      "Hand-position recognition under audio/HPM/truth segmentations");
  std::string table2_corpus, table2_out;
  csrec::SegmentationComparisonConfig table2_cfg;
  cmd_table2->add_option("--corpus", table2_corpus, "Corpus manifest")
      ->required();
  cmd_table2->add_option("--out", table2_out, "Output directory")->required();
  cmd_table2->add_option("--repeats", table2_cfg.repeats, "Split repeats");
  cmd_table2->add_option("--train-frac", table2_cfg.train_fraction,
                         "Training fraction");
  cmd_table2->add_option("--window-ms", table2_cfg.window_ms,
                         "Feature window");
  cmd_table2->add_option("--components", table2_cfg.gmm.n_components,
                         "Gaussians per class");
  cmd_table2->add_option("--seed", table2_cfg.seed, "Root seed");

  // --- ablate ---------------------------------------------------------------
  auto* cmd_ablate = app.add_subcommand(
      "ablate", "Resync x context ablation of phoneme recognition");
  std::string ablate_corpus, ablate_out;
  csrec::AblationConfig ablate_cfg;
  bool ablate_explicit_lags = false;
  cmd_ablate->add_option("--corpus", ablate_corpus, "Corpus manifest")
      ->required();
  cmd_ablate->add_option("--out", ablate_out, "Output directory")->required();
  cmd_ablate->add_option("--repeats", ablate_cfg.repeats, "Repeats");
  cmd_ablate->add_option("--train-frac", ablate_cfg.train_fraction,
                         "Training fraction");
  cmd_ablate->add_flag("--explicit-lags", ablate_explicit_lags,
                       "Use --delta-v/--delta-c instead of fitted lags");
  cmd_ablate->add_option("--delta-v", ablate_cfg.delta_v_star_ms,
                         "Hand position lag (ms)");
  cmd_ablate->add_option("--delta-c", ablate_cfg.delta_c_star_ms,
                         "Hand shape lag (ms)");
  cmd_ablate->add_option("--states", ablate_cfg.train.n_states,
                         "Emitting states per unit");
  cmd_ablate->add_option("--mixtures", ablate_cfg.train.mixture_stages,
                         "Mixture schedule");
  cmd_ablate->add_option("--em-iters",
                         ablate_cfg.train.em_iterations_per_stage,
                         "EM iterations per stage");
  cmd_ablate->add_option("--min-occupancy",
                         ablate_cfg.min_triphone_occupancy,
                         "Min trigram count for a triphone unit");
  cmd_ablate->add_option("--threads", ablate_cfg.threads,
                         "Repeats run in parallel");
  cmd_ablate->add_option("--seed", ablate_cfg.seed, "Root seed");

  // --- table34 ----------------------------------------------------------------
  auto* cmd_table34 = app.add_subcommand(
      "table34", "Two-stream vowel and consonant recognition tables");
  std::string table34_corpus, table34_out;
  csrec::TwoStreamConfig table34_cfg;
  cmd_table34->add_option("--corpus", table34_corpus, "Corpus manifest")
      ->required();
  cmd_table34->add_option("--out", table34_out, "Output directory")
      ->required();
  cmd_table34->add_option("--repeats", table34_cfg.repeats, "Repeats");
  cmd_table34->add_option("--train-frac", table34_cfg.train_fraction,
                          "Training fraction");
  cmd_table34->add_option("--states", table34_cfg.train.n_states,
                          "Emitting states per unit");
  cmd_table34->add_option("--mixtures", table34_cfg.train.mixture_stages,
                          "Mixture schedule");
  cmd_table34->add_option("--em-iters",
                          table34_cfg.train.em_iterations_per_stage,
                          "EM iterations per stage");
  cmd_table34->add_option("--threads", table34_cfg.threads,
                          "Worker threads");
  cmd_table34->add_option("--seed", table34_cfg.seed, "Root seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*cmd_synth) {
      csrec::SynthConfig config;
      if (!synth_config_path.empty()) {
        config = csrec::LoadSynthConfig(synth_config_path);
      }
      if (synth_seed.has_value()) config.seed = *synth_seed;
      if (synth_sentences.has_value()) config.n_sentences = *synth_sentences;
      Corpus corpus = csrec::GenerateCorpus(config);
      csrec::SaveCorpus(corpus, synth_out);
      csrec::SaveSynthConfig(config, fs::path(synth_out) / "run-config.json");
      std::cerr << "csrec: wrote " << corpus.sentences.size()
                << " sentences to " << synth_out << "\n";
    } else if (*cmd_fit) {
      Corpus corpus = csrec::LoadCorpus(fit_corpus);
      csrec::HptMeasurements measured = csrec::MeasureEmpiricalHpt(corpus);
      csrec::HpmModel model = csrec::FitHpm(measured.vowels, fit_grid);
      fs::create_directories(fit_out);
      csrec::SaveHpmModel(model, fs::path(fit_out) / "hpm.json");
      std::ostringstream csv;
      csv << "u_ms,delta_v_ms,sentence_id,label\n";
      for (const csrec::HptObservation& o : measured.vowels) {
        csv << csrec::FormatDouble(o.u_ms) << ','
            << csrec::FormatDouble(o.delta_ms) << ',' << o.sentence_id << ','
            << o.label << '\n';
      }
      csrec::WriteTextFile(fs::path(fit_out) / "hpt_scatter.csv", csv.str());
      double dc = 0.0;
      for (const csrec::HptObservation& o : measured.consonants) {
        dc += o.delta_ms;
      }
      if (!measured.consonants.empty()) {
        dc /= static_cast<double>(measured.consonants.size());
      }
      WriteRunConfig(fit_out,
                     Json{{"subcommand", "fit-hpm"},
                          {"corpus", fit_corpus},
                          {"t0_grid",
                           {{"min_ms", fit_grid.min_ms},
                            {"max_ms", fit_grid.max_ms},
                            {"step_ms", fit_grid.step_ms}}},
                          {"fitted",
                           {{"mean_ms", model.mean_ms},
                            {"t0_ms", model.t0_ms},
                            {"a", model.a},
                            {"b", model.b},
                            {"mean_delta_c_ms", dc},
                            {"n_obs", model.n_obs}}}});
      std::cerr << "csrec: fitted HPM mean=" << model.mean_ms
                << "ms t0=" << model.t0_ms << "ms\n";
    } else if (*cmd_resync) {
      Corpus corpus = csrec::LoadCorpus(resync_corpus);
      csrec::ResyncConfig rc;
      rc.delta_v_star_ms = resync_dv;
      rc.delta_c_star_ms = resync_dc;
      rc.edge_policy = resync_edge == "zeros"
                           ? csrec::EdgePolicy::kZeros
                           : csrec::EdgePolicy::kReplicateFirstFrame;
      if (resync_fit) {
        csrec::HptMeasurements measured = csrec::MeasureEmpiricalHpt(corpus);
        csrec::HpmModel model = csrec::FitHpm(measured.vowels);
        rc.delta_v_star_ms = std::max(0.0, model.mean_ms);
        double dc = 0.0;
        for (const csrec::HptObservation& o : measured.consonants) {
          dc += o.delta_ms;
        }
        rc.delta_c_star_ms =
            measured.consonants.empty()
                ? 0.0
                : std::max(0.0,
                           dc / static_cast<double>(
                                    measured.consonants.size()));
      }
      Corpus shifted = csrec::ResyncCorpus(corpus, rc);
      csrec::SaveCorpus(shifted, resync_out);
      WriteRunConfig(resync_out,
                     Json{{"subcommand", "resync"},
                          {"corpus", resync_corpus},
                          {"delta_v_star_ms", rc.delta_v_star_ms},
                          {"delta_c_star_ms", rc.delta_c_star_ms},
                          {"edge", resync_edge},
                          {"fit", resync_fit}});
      std::cerr << "csrec: re-synchronized with delta_v="
                << rc.delta_v_star_ms << "ms delta_c=" << rc.delta_c_star_ms
                << "ms\n";
    } else if (*cmd_trainc) {
      Corpus corpus = csrec::LoadCorpus(trainc_corpus);
      csrec::HpmModel hpm_model;
      if (trainc_seg == "hpm") {
        hpm_model = trainc_hpm.empty()
                        ? FitHpmFromCorpus(corpus, csrec::T0SearchGrid{})
                        : csrec::LoadHpmModel(trainc_hpm);
      }
      const bool is_mlp = trainc_type == "mlp";
      ClassifierData data = BuildClassifierSamples(
          corpus, trainc_task, trainc_seg, trainc_window, is_mlp, &hpm_model);
      fs::create_directories(trainc_out);
      if (is_mlp) {
        csrec::MlpTrainOptions options;
        options.seed = trainc_seed;
        csrec::MlpTrainResult trained = csrec::TrainMlp(data.samples, options);
        csrec::SaveMlpModel(trained.model,
                            fs::path(trainc_out) / "classifier.json");
      } else {
        csrec::GmmTrainOptions options;
        options.n_components = trainc_components;
        csrec::MultiGaussianModel model =
            csrec::TrainMultiGaussian(data.samples, options);
        csrec::SaveMultiGaussianModel(
            model, fs::path(trainc_out) / "classifier.json");
      }
      WriteRunConfig(trainc_out, Json{{"subcommand", "train-classifier"},
                                      {"corpus", trainc_corpus},
                                      {"task", trainc_task},
                                      {"segmentation", trainc_seg},
                                      {"type", trainc_type},
                                      {"window_ms", trainc_window},
                                      {"components", trainc_components},
                                      {"seed", trainc_seed},
                                      {"samples", data.samples.size()},
                                      {"skipped_windows", data.skipped}});
      std::cerr << "csrec: trained " << trainc_type << " classifier on "
                << data.samples.size() << " windows\n";
    } else if (*cmd_evalc) {
      Corpus corpus = csrec::LoadCorpus(evalc_corpus);
      csrec::HpmModel hpm_model;
      if (evalc_seg == "hpm") {
        hpm_model = evalc_hpm.empty()
                        ? FitHpmFromCorpus(corpus, csrec::T0SearchGrid{})
                        : csrec::LoadHpmModel(evalc_hpm);
      }
      Json model_doc = Json::parse(csrec::ReadTextFile(evalc_model));
      const bool is_mlp = model_doc.contains("layer_sizes");
      ClassifierData data = BuildClassifierSamples(
          corpus, evalc_task, evalc_seg, evalc_window, is_mlp, &hpm_model);
      double accuracy = 0.0;
      if (is_mlp) {
        csrec::MlpModel model = csrec::LoadMlpModel(evalc_model);
        std::size_t hits = 0;
        for (const csrec::WindowSample& s : data.samples) {
          std::vector<double> p = csrec::MlpPosteriors(model, s.features);
          std::size_t best = 0;
          for (std::size_t k = 1; k < p.size(); ++k) {
            if (p[k] > p[best]) best = k;
          }
          if (model.labels[best] == s.label) ++hits;
        }
        accuracy = static_cast<double>(hits) /
                   static_cast<double>(data.samples.size());
      } else {
        csrec::MultiGaussianModel model =
            csrec::LoadMultiGaussianModel(evalc_model);
        accuracy = csrec::MgAccuracy(model, data.samples);
      }
      fs::create_directories(evalc_out);
      csrec::WriteTextFile(
          fs::path(evalc_out) / "report.json",
          Json{{"accuracy", accuracy}, {"samples", data.samples.size()}}
                  .dump(2) +
              "\n");
      WriteRunConfig(evalc_out, Json{{"subcommand", "eval-classifier"},
                                     {"corpus", evalc_corpus},
                                     {"model", evalc_model},
                                     {"task", evalc_task},
                                     {"segmentation", evalc_seg},
                                     {"window_ms", evalc_window}});
      std::cerr << "csrec: accuracy " << accuracy << " on "
                << data.samples.size() << " windows\n";
    } else if (*cmd_train) {
      Corpus corpus = csrec::LoadCorpus(train_corpus);
      csrec::MsHmmTrainConfig config;
      config.streams = ParseStreams(train_streams);
      config.stream_weights = train_weights;
      config.n_states = train_states;
      config.mixture_stages = train_mixtures;
      config.em_iterations_per_stage = train_iters;
      config.threads = train_threads;
      csrec::MsHmmModel model = csrec::TrainMsHmm(corpus, config);
      if (train_context == "tri") {
        model = csrec::ExpandTriphones(model, corpus, train_minocc, config);
      }
      fs::create_directories(train_out);
      csrec::SaveMsHmmModel(model, fs::path(train_out) / "mshmm.json");
      WriteRunConfig(train_out, Json{{"subcommand", "train"},
                                     {"corpus", train_corpus},
                                     {"streams", train_streams},
                                     {"weights", model.weights.lambda},
                                     {"states", train_states},
                                     {"mixtures", train_mixtures},
                                     {"em_iters", train_iters},
                                     {"context", train_context},
                                     {"min_occupancy", train_minocc}});
      std::cerr << "csrec: trained " << model.units.size() << " units\n";
    } else if (*cmd_decode) {
      Corpus corpus = csrec::LoadCorpus(decode_corpus);
      csrec::MsHmmModel model = csrec::LoadMsHmmModel(decode_model);
      Json sentences = Json::array();
      for (const csrec::Sentence& s : corpus.sentences) {
        csrec::DecodeResult r = csrec::ViterbiDecode(model, s);
        sentences.push_back(Json{{"id", s.id},
                                 {"labels", r.labels},
                                 {"units", r.units},
                                 {"log_score", r.log_score}});
      }
      fs::create_directories(decode_out);
      csrec::WriteTextFile(
          fs::path(decode_out) / "decoded.json",
          Json{{"version", 1}, {"sentences", std::move(sentences)}}.dump(2) +
              "\n");
      WriteRunConfig(decode_out, Json{{"subcommand", "decode"},
                                      {"corpus", decode_corpus},
                                      {"model", decode_model}});
      std::cerr << "csrec: decoded " << corpus.sentences.size()
                << " sentences\n";
    } else if (*cmd_score) {
      Corpus corpus = csrec::LoadCorpus(score_ref);
      Json hyp_doc = Json::parse(csrec::ReadTextFile(score_hyp));
      std::map<std::string, std::vector<std::string>> hyps;
      for (const Json& s : hyp_doc.at("sentences")) {
        hyps[s.at("id").get<std::string>()] =
            s.at("labels").get<std::vector<std::string>>();
      }
      std::size_t n = 0, hits = 0, dels = 0, subs = 0, ins = 0;
      Json per_sentence = Json::array();
      for (const csrec::Sentence& s : corpus.sentences) {
        auto it = hyps.find(s.id);
        if (it == hyps.end()) {
          throw csrec::ValidationError("no hypothesis for sentence " + s.id);
        }
        std::vector<std::string> ref, hyp;
        for (const csrec::Interval& iv : s.audio_seg.intervals) {
          if (score_keep_sil ||
              corpus.alphabet.KindOf(iv.label) !=
                  csrec::PhonemeKind::kSilence) {
            ref.push_back(iv.label);
          }
        }
        for (const std::string& lab : it->second) {
          if (score_keep_sil ||
              corpus.alphabet.KindOf(lab) != csrec::PhonemeKind::kSilence) {
            hyp.push_back(lab);
          }
        }
        csrec::AlignmentResult a = csrec::AlignLabels(ref, hyp);
        n += a.n;
        hits += a.hits;
        dels += a.deletions;
        subs += a.substitutions;
        ins += a.insertions;
        per_sentence.push_back(Json{{"id", s.id},
                                    {"n", a.n},
                                    {"hits", a.hits},
                                    {"deletions", a.deletions},
                                    {"substitutions", a.substitutions},
                                    {"insertions", a.insertions}});
      }
      const double t_corr =
          static_cast<double>(n - dels - subs) / static_cast<double>(n);
      const double accuracy =
          (static_cast<double>(n) - static_cast<double>(dels) -
           static_cast<double>(subs) - static_cast<double>(ins)) /
          static_cast<double>(n);
      fs::create_directories(score_out);
      csrec::WriteTextFile(fs::path(score_out) / "score.json",
                           Json{{"t_corr", t_corr},
                                {"accuracy", accuracy},
                                {"n", n},
                                {"hits", hits},
                                {"deletions", dels},
                                {"substitutions", subs},
                                {"insertions", ins},
                                {"sentences", std::move(per_sentence)}}
                                   .dump(2) +
                               "\n");
      WriteRunConfig(score_out, Json{{"subcommand", "score"},
                                     {"ref", score_ref},
                                     {"hyp", score_hyp},
                                     {"keep_silence", score_keep_sil}});
      std::cout << "t_corr " << t_corr << "\n";
    } else if (*cmd_sweep) {
      Corpus corpus = csrec::LoadCorpus(sweep_corpus);
      csrec::SweepResult result = csrec::SweepDeltaC(corpus, sweep_cfg);
      fs::create_directories(sweep_out);
      std::ostringstream csv;
      csv << "delta_c_ms,mean_accuracy,std\n";
      Json points = Json::array();
      for (const csrec::SweepPoint& p : result.curve) {
        csv << csrec::FormatDouble(p.delta_c_ms) << ','
            << csrec::FormatDouble(p.mean_accuracy) << ','
            << csrec::FormatDouble(p.std_dev) << '\n';
        points.push_back(Json{{"delta_c_ms", p.delta_c_ms},
                              {"mean_accuracy", p.mean_accuracy},
                              {"std", p.std_dev}});
      }
      csrec::WriteTextFile(fs::path(sweep_out) / "sweep.csv", csv.str());
      csrec::WriteTextFile(
          fs::path(sweep_out) / "sweep.json",
          Json{{"curve", std::move(points)},
               {"best_delta_c_ms", result.best_delta_c_ms},
               {"config_fingerprint", result.config_fingerprint}}
                  .dump(2) +
              "\n");
      WriteRunConfig(sweep_out, Json{{"subcommand", "sweep"},
                                     {"corpus", sweep_corpus},
                                     {"min_ms", sweep_cfg.min_ms},
                                     {"max_ms", sweep_cfg.max_ms},
                                     {"step_ms", sweep_cfg.step_ms},
                                     {"repeats", sweep_cfg.repeats},
                                     {"train_fraction",
                                      sweep_cfg.train_fraction},
                                     {"window_ms", sweep_cfg.window_ms},
                                     {"seed", sweep_cfg.seed}});
      std::cout << "best_delta_c_ms " << result.best_delta_c_ms << "\n";
    } else if (*cmd_table2) {
      Corpus corpus = csrec::LoadCorpus(table2_corpus);
      csrec::SegmentationComparison cmp =
          csrec::CompareSegmentations(corpus, table2_cfg);
      fs::create_directories(table2_out);
      std::ostringstream csv;
      csv << "segmentation,mean_accuracy,std\n";
      for (const csrec::ExperimentReport* r :
           {&cmp.audio, &cmp.hpm, &cmp.truth}) {
        csv << r->name << ',' << csrec::FormatDouble(r->mean) << ','
            << csrec::FormatDouble(r->std_dev) << '\n';
      }
      csrec::WriteTextFile(fs::path(table2_out) / "table2.csv", csv.str());
      csrec::WriteTextFile(fs::path(table2_out) / "table2.json",
                           Json{{"audio", ReportToJson(cmp.audio)},
                                {"hpm", ReportToJson(cmp.hpm)},
                                {"truth", ReportToJson(cmp.truth)}}
                                   .dump(2) +
                               "\n");
      WriteRunConfig(table2_out,
                     Json{{"subcommand", "table2"},
                          {"corpus", table2_corpus},
                          {"repeats", table2_cfg.repeats},
                          {"train_fraction", table2_cfg.train_fraction},
                          {"window_ms", table2_cfg.window_ms},
                          {"seed", table2_cfg.seed}});
      std::cout << "audio " << cmp.audio.mean << " hpm " << cmp.hpm.mean
                << " truth " << cmp.truth.mean << "\n";
    } else if (*cmd_ablate) {
      Corpus corpus = csrec::LoadCorpus(ablate_corpus);
      ablate_cfg.fit_lags = !ablate_explicit_lags;
      csrec::AblationResult result = csrec::RunAblation(corpus, ablate_cfg);
      fs::create_directories(ablate_out);
      std::ostringstream csv;
      csv << "cell,mean_t_corr,std\n";
      Json cells = Json::array();
      for (const csrec::ExperimentReport& r : result.cells) {
        csv << r.name << ',' << csrec::FormatDouble(r.mean) << ','
            << csrec::FormatDouble(r.std_dev) << '\n';
        cells.push_back(ReportToJson(r));
      }
      const double gap_mono = result.cells[1].mean - result.cells[0].mean;
      const double gap_tri = result.cells[3].mean - result.cells[2].mean;
      csrec::WriteTextFile(fs::path(ablate_out) / "ablation.csv", csv.str());
      csrec::WriteTextFile(
          fs::path(ablate_out) / "ablation.json",
          Json{{"cells", std::move(cells)},
               {"resync_gap_monophone", gap_mono},
               {"resync_gap_triphone", gap_tri},
               {"pooled_std_monophone",
                csrec::PooledStd(result.cells[0], result.cells[1])},
               {"pooled_std_triphone",
                csrec::PooledStd(result.cells[2], result.cells[3])}}
                  .dump(2) +
              "\n");
      WriteRunConfig(ablate_out,
                     Json{{"subcommand", "ablate"},
                          {"corpus", ablate_corpus},
                          {"repeats", ablate_cfg.repeats},
                          {"train_fraction", ablate_cfg.train_fraction},
                          {"fit_lags", ablate_cfg.fit_lags},
                          {"seed", ablate_cfg.seed}});
      for (const csrec::ExperimentReport& r : result.cells) {
        std::cout << r.name << " " << r.mean << " +- " << r.std_dev << "\n";
      }
    } else if (*cmd_table34) {
      Corpus corpus = csrec::LoadCorpus(table34_corpus);
      csrec::TwoStreamResult result =
          csrec::RunTwoStreamExperiments(corpus, table34_cfg);
      fs::create_directories(table34_out);
      std::ostringstream csv;
      csv << "task,arm,mean_t_corr,std\n";
      auto emit = [&](const char* task,
                      const csrec::TwoStreamTaskResult& t) {
        for (const csrec::ExperimentReport* r :
             {&t.only_lips, &t.only_hand, &t.fused_non_resync,
              &t.fused_resync}) {
          csv << task << ',' << r->name << ','
              << csrec::FormatDouble(r->mean) << ','
              << csrec::FormatDouble(r->std_dev) << '\n';
        }
      };
      emit("vowels", result.vowels);
      emit("consonants", result.consonants);
      auto task_json = [&](const csrec::TwoStreamTaskResult& t) {
        return Json{{"only_lips", ReportToJson(t.only_lips)},
                    {"only_hand", ReportToJson(t.only_hand)},
                    {"fused_non_resync", ReportToJson(t.fused_non_resync)},
                    {"fused_resync", ReportToJson(t.fused_resync)}};
      };
      csrec::WriteTextFile(fs::path(table34_out) / "table34.csv", csv.str());
      csrec::WriteTextFile(fs::path(table34_out) / "table34.json",
                           Json{{"vowels", task_json(result.vowels)},
                                {"consonants", task_json(result.consonants)}}
                                   .dump(2) +
                               "\n");
      WriteRunConfig(table34_out,
                     Json{{"subcommand", "table34"},
                          {"corpus", table34_corpus},
                          {"repeats", table34_cfg.repeats},
                          {"train_fraction", table34_cfg.train_fraction},
                          {"seed", table34_cfg.seed}});
      std::cout << "vowels fused resyn " << result.vowels.fused_resync.mean
                << " non-resyn " << result.vowels.fused_non_resync.mean
                << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "csrec: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
