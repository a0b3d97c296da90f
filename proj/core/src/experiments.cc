// core/src/experiments.cc

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

#include "csrec/experiments.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <iomanip>
#include <sstream>

#include "csrec/hpm.h"
#include "csrec/rng.h"
#include "json-util.h"

namespace csrec {

namespace {

using internal::Json;

std::string Fingerprint(const Json& config) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0')
      << Fnv1a64(config.dump());
  return out.str();
}

// Intervals of one kind, shifted earlier by a fixed lag, relabeled through
// label_of. Collapsed intervals are dropped.
Segmentation ShiftedKindSegmentation(
    const Sentence& sentence, const Alphabet& alphabet, PhonemeKind kind,
    double lag_ms, const std::function<std::string(const std::string&)>& label_of) {
  Segmentation out;
  out.tier = Tier::kAudio;
  const TimeMs shift = static_cast<TimeMs>(std::llround(lag_ms));
  for (const Interval& iv : sentence.audio_seg.intervals) {
    if (alphabet.KindOf(iv.label) != kind) continue;
    Interval moved{std::max<TimeMs>(0, iv.start_ms - shift),
                   iv.end_ms - shift, label_of(iv.label)};
    if (moved.end_ms <= moved.start_ms) continue;
    if (!out.intervals.empty() &&
        out.intervals.back().end_ms > moved.start_ms) {
      out.intervals.back().end_ms = moved.start_ms;
      if (out.intervals.back().end_ms <= out.intervals.back().start_ms) {
        out.intervals.pop_back();
      }
    }
    out.intervals.push_back(moved);
  }
  return out;
}

std::vector<std::string> NonSilenceLabels(const Segmentation& seg,
                                          const Alphabet& alphabet) {
  std::vector<std::string> labels;
  for (const Interval& iv : seg.intervals) {
    if (alphabet.KindOf(iv.label) != PhonemeKind::kSilence) {
      labels.push_back(iv.label);
    }
  }
  return labels;
}

}  // namespace

ExperimentReport MakeReport(const std::string& name,
                            const std::vector<double>& values,
                            const std::vector<std::uint64_t>& seeds,
                            const std::string& fingerprint) {
  ExperimentReport report;
  report.name = name;
  report.values = values;
  report.mean = Mean(values);
  report.std_dev = SampleStd(values);
  report.seeds = seeds;
  report.config_fingerprint = fingerprint;
  return report;
}

double PooledStd(const ExperimentReport& a, const ExperimentReport& b) {
  return std::sqrt((a.std_dev * a.std_dev + b.std_dev * b.std_dev) / 2.0);
}

SweepResult SweepDeltaC(const Corpus& corpus, const SweepConfig& config) {
  if (config.step_ms <= 0 || config.max_ms < config.min_ms) {
    throw ValidationError("SweepDeltaC: bad grid");
  }
  SynthClassMap map = SynthClassMap::FromCorpus(corpus);
  auto shape_label = [&](const std::string& symbol) {
    return std::to_string(map.ShapeClass(symbol));
  };

  std::vector<std::uint64_t> split_seeds;
  for (int r = 0; r < config.repeats; ++r) {
    split_seeds.push_back(DeriveSeed(config.seed, "sweep.split", r));
  }
  // Group membership per repeat, fixed across the lag grid so the curve
  // points are paired.
  std::vector<CorpusSplit> splits;
  splits.reserve(split_seeds.size());
  for (std::uint64_t s : split_seeds) {
    splits.push_back(SplitCorpus(corpus, config.train_fraction, s));
  }

  Json fp;
  fp["op"] = "sweep_delta_c";
  fp["min_ms"] = config.min_ms;
  fp["max_ms"] = config.max_ms;
  fp["step_ms"] = config.step_ms;
  fp["repeats"] = config.repeats;
  fp["train_fraction"] = config.train_fraction;
  fp["window_ms"] = config.window_ms;
  fp["n_components"] = config.gmm.n_components;
  fp["seed"] = config.seed;

  SweepResult result;
  result.config_fingerprint = Fingerprint(fp);
  double best_mean = -1.0;
  for (TimeMs lag = config.min_ms; lag <= config.max_ms;
       lag += config.step_ms) {
    std::vector<double> accs;
    for (int r = 0; r < config.repeats; ++r) {
      std::vector<WindowSample> train_samples, test_samples;
      for (const Sentence& s : splits[r].train.sentences) {
        Segmentation seg = ShiftedKindSegmentation(
            s, corpus.alphabet, PhonemeKind::kConsonant,
            static_cast<double>(lag), shape_label);
        auto w = ExtractWindowFeatures(s.hand_shape, seg, config.window_ms);
        train_samples.insert(train_samples.end(), w.samples.begin(),
                             w.samples.end());
      }
      for (const Sentence& s : splits[r].test.sentences) {
        Segmentation seg = ShiftedKindSegmentation(
            s, corpus.alphabet, PhonemeKind::kConsonant,
            static_cast<double>(lag), shape_label);
        auto w = ExtractWindowFeatures(s.hand_shape, seg, config.window_ms);
        test_samples.insert(test_samples.end(), w.samples.begin(),
                            w.samples.end());
      }
      MultiGaussianModel model = TrainMultiGaussian(train_samples, config.gmm);
      accs.push_back(MgAccuracy(model, test_samples));
    }
    SweepPoint point{static_cast<double>(lag), Mean(accs), SampleStd(accs)};
    if (point.mean_accuracy > best_mean) {
      best_mean = point.mean_accuracy;
      result.best_delta_c_ms = point.delta_c_ms;
    }
    result.curve.push_back(point);
  }
  return result;
}

SegmentationComparison CompareSegmentations(
    const Corpus& corpus, const SegmentationComparisonConfig& config) {
  if (!corpus.HasTruth()) {
    throw ValidationError(
        "CompareSegmentations: corpus has no truth tiers; generate one with "
        "the synth subcommand");
  }
  SynthClassMap map = SynthClassMap::FromCorpus(corpus);
  auto position_label = [&](const std::string& symbol) {
    return std::to_string(map.PositionClass(symbol));
  };

  Json fp;
  fp["op"] = "compare_segmentations";
  fp["repeats"] = config.repeats;
  fp["train_fraction"] = config.train_fraction;
  fp["window_ms"] = config.window_ms;
  fp["n_components"] = config.gmm.n_components;
  fp["seed"] = config.seed;
  const std::string fingerprint = Fingerprint(fp);

  // Vowel windows under one segmentation source.
  enum class Source { kAudio, kHpm, kTruth };
  auto windows_for = [&](const Sentence& s, Source source,
                         const HpmModel* hpm_model, double consonant_lag) {
    Segmentation seg;
    seg.tier = Tier::kAudio;
    switch (source) {
      case Source::kAudio:
        for (const Interval& iv : s.audio_seg.intervals) {
          if (corpus.alphabet.KindOf(iv.label) == PhonemeKind::kVowel) {
            seg.intervals.push_back(
                Interval{iv.start_ms, iv.end_ms, position_label(iv.label)});
          }
        }
        break;
      case Source::kTruth:
        for (const Interval& iv : s.truth->hand_pos_seg.intervals) {
          seg.intervals.push_back(
              Interval{iv.start_ms, iv.end_ms, position_label(iv.label)});
        }
        break;
      case Source::kHpm: {
        Segmentation shifted = HpmShiftSegmentation(
            s.audio_seg, corpus.alphabet, *hpm_model,
            SentenceEndMs(s.audio_seg, corpus.alphabet), consonant_lag);
        for (const Interval& iv : shifted.intervals) {
          if (corpus.alphabet.KindOf(iv.label) == PhonemeKind::kVowel) {
            seg.intervals.push_back(
                Interval{iv.start_ms, iv.end_ms, position_label(iv.label)});
          }
        }
        break;
      }
    }
    return ExtractWindowFeatures(s.hand_pos, seg, config.window_ms).samples;
  };

  std::vector<double> acc_audio, acc_hpm, acc_truth;
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < config.repeats; ++r) {
    std::uint64_t seed = DeriveSeed(config.seed, "table2.split", r);
    seeds.push_back(seed);
    CorpusSplit split = SplitCorpus(corpus, config.train_fraction, seed);

    // The HPM is fitted on the training half's truth only.
    HptMeasurements measured = MeasureEmpiricalHpt(split.train);
    HpmModel hpm_model = FitHpm(measured.vowels, config.t0_grid);
    double consonant_lag = 0.0;
    for (const HptObservation& o : measured.consonants) {
      consonant_lag += o.delta_ms;
    }
    if (!measured.consonants.empty()) {
      consonant_lag /= static_cast<double>(measured.consonants.size());
    }
    consonant_lag = std::max(0.0, consonant_lag);

    for (Source source : {Source::kAudio, Source::kHpm, Source::kTruth}) {
      std::vector<WindowSample> train_samples, test_samples;
      for (const Sentence& s : split.train.sentences) {
        auto w = windows_for(s, source, &hpm_model, consonant_lag);
        train_samples.insert(train_samples.end(), w.begin(), w.end());
      }
      for (const Sentence& s : split.test.sentences) {
        auto w = windows_for(s, source, &hpm_model, consonant_lag);
        test_samples.insert(test_samples.end(), w.begin(), w.end());
      }
      MultiGaussianModel model = TrainMultiGaussian(train_samples, config.gmm);
      double acc = MgAccuracy(model, test_samples);
      switch (source) {
        case Source::kAudio: acc_audio.push_back(acc); break;
        case Source::kHpm: acc_hpm.push_back(acc); break;
        case Source::kTruth: acc_truth.push_back(acc); break;
      }
    }
  }

  SegmentationComparison out;
  out.audio = MakeReport("audio", acc_audio, seeds, fingerprint);
  out.hpm = MakeReport("hpm", acc_hpm, seeds, fingerprint);
  out.truth = MakeReport("truth", acc_truth, seeds, fingerprint);
  return out;
}

namespace {

struct FittedLags {
  double delta_v_star_ms = 0.0;
  double delta_c_star_ms = 0.0;
};

// Operating lags measured on a training corpus: HPM constant mean for the
// hand position stream, average consonant lag for the hand shape stream.
FittedLags FitLagsFromTruth(const Corpus& train) {
  HptMeasurements measured = MeasureEmpiricalHpt(train);
  FittedLags lags;
  try {
    HpmModel model = FitHpm(measured.vowels);
    lags.delta_v_star_ms = model.mean_ms;
  } catch (const ValidationError&) {
    // Too few observations for a breakpoint fit: fall back to the mean.
    double sum = 0.0;
    for (const HptObservation& o : measured.vowels) sum += o.delta_ms;
    lags.delta_v_star_ms =
        measured.vowels.empty()
            ? 0.0
            : sum / static_cast<double>(measured.vowels.size());
  }
  double sum = 0.0;
  for (const HptObservation& o : measured.consonants) sum += o.delta_ms;
  lags.delta_c_star_ms =
      measured.consonants.empty()
          ? 0.0
          : sum / static_cast<double>(measured.consonants.size());
  lags.delta_v_star_ms = std::max(0.0, lags.delta_v_star_ms);
  lags.delta_c_star_ms = std::max(0.0, lags.delta_c_star_ms);
  return lags;
}

double CorpusCorrectness(const MsHmmModel& model, const Corpus& test) {
  std::size_t n = 0, errors = 0;
  for (const Sentence& s : test.sentences) {
    std::vector<std::string> ref =
        NonSilenceLabels(s.audio_seg, test.alphabet);
    if (ref.empty()) continue;
    DecodeResult decoded = ViterbiDecode(model, s);
    std::vector<std::string> hyp;
    for (const std::string& lab : decoded.labels) {
      if (test.alphabet.KindOf(lab) != PhonemeKind::kSilence) {
        hyp.push_back(lab);
      }
    }
    AlignmentResult a = AlignLabels(ref, hyp);
    n += a.n;
    errors += a.deletions + a.substitutions;
  }
  if (n == 0) {
    throw ValidationError("CorpusCorrectness: test corpus has no phonemes");
  }
  return static_cast<double>(n - errors) / static_cast<double>(n);
}

}  // namespace

double RunRecognition(const Corpus& train, const Corpus& test,
                      const RecognitionConfig& config) {
  Corpus train_used = train;
  Corpus test_used = test;
  if (config.resync) {
    ResyncConfig rc;
    if (config.fit_lags) {
      FittedLags lags = FitLagsFromTruth(train);
      rc.delta_v_star_ms = lags.delta_v_star_ms;
      rc.delta_c_star_ms = lags.delta_c_star_ms;
    } else {
      rc.delta_v_star_ms = config.delta_v_star_ms;
      rc.delta_c_star_ms = config.delta_c_star_ms;
    }
    rc.edge_policy = config.edge_policy;
    train_used = ResyncCorpus(train, rc);
    test_used = ResyncCorpus(test, rc);
  }
  MsHmmModel model = TrainMsHmm(train_used, config.train);
  if (config.unit_mode == UnitMode::kTriphone) {
    MsHmmTrainConfig retrain = config.train;
    retrain.mixture_stages = {1};  // unused by RunEmbeddedEm
    retrain.em_iterations_per_stage = config.triphone_em_iterations;
    model = ExpandTriphones(model, train_used,
                            config.min_triphone_occupancy, retrain);
  }
  return CorpusCorrectness(model, test_used);
}

AblationResult RunAblation(const Corpus& corpus,
                           const AblationConfig& config) {
  if (config.repeats < 1) throw ValidationError("RunAblation: repeats < 1");

  Json fp;
  fp["op"] = "run_ablation";
  fp["repeats"] = config.repeats;
  fp["train_fraction"] = config.train_fraction;
  fp["fit_lags"] = config.fit_lags;
  fp["delta_v_star_ms"] = config.delta_v_star_ms;
  fp["delta_c_star_ms"] = config.delta_c_star_ms;
  fp["min_triphone_occupancy"] = config.min_triphone_occupancy;
  fp["n_states"] = config.train.n_states;
  fp["mixture_stages"] = config.train.mixture_stages;
  fp["seed"] = config.seed;
  const std::string fingerprint = Fingerprint(fp);

  // Cell order: non-resync/mono, resync/mono, non-resync/tri, resync/tri.
  const std::array<std::pair<bool, UnitMode>, 4> cells = {
      std::make_pair(false, UnitMode::kMonophone),
      std::make_pair(true, UnitMode::kMonophone),
      std::make_pair(false, UnitMode::kTriphone),
      std::make_pair(true, UnitMode::kTriphone)};
  static const char* kCellNames[4] = {"non_resync_monophone",
                                      "resync_monophone",
                                      "non_resync_triphone",
                                      "resync_triphone"};

  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < config.repeats; ++r) {
    seeds.push_back(DeriveSeed(config.seed, "ablate.repeat", r));
  }

  std::vector<std::array<double, 4>> values(config.repeats);
  auto run_repeat = [&](int r) {
    CorpusSplit split =
        SplitCorpus(corpus, config.train_fraction, seeds[r]);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      RecognitionConfig rc;
      rc.train = config.train;
      if (config.threads > 1) rc.train.threads = 1;
      rc.resync = cells[c].first;
      rc.fit_lags = config.fit_lags;
      rc.delta_v_star_ms = config.delta_v_star_ms;
      rc.delta_c_star_ms = config.delta_c_star_ms;
      rc.unit_mode = cells[c].second;
      rc.min_triphone_occupancy = config.min_triphone_occupancy;
      rc.triphone_em_iterations = config.triphone_em_iterations;
      values[r][c] = RunRecognition(split.train, split.test, rc);
    }
  };

  const int threads = std::max(1, std::min(config.threads, config.repeats));
  if (threads == 1) {
    for (int r = 0; r < config.repeats; ++r) run_repeat(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::future<void>> jobs;
    for (int w = 0; w < threads; ++w) {
      jobs.push_back(std::async(std::launch::async, [&]() {
        for (int r = next.fetch_add(1); r < config.repeats;
             r = next.fetch_add(1)) {
          run_repeat(r);
        }
      }));
    }
    for (auto& j : jobs) j.get();
  }

  AblationResult result;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> cell_values;
    for (int r = 0; r < config.repeats; ++r) {
      cell_values.push_back(values[r][c]);
    }
    result.cells.push_back(
        MakeReport(kCellNames[c], cell_values, seeds, fingerprint));
  }
  return result;
}

Corpus MapKindToSilence(const Corpus& corpus, PhonemeKind kind) {
  if (kind == PhonemeKind::kSilence) {
    throw ValidationError("MapKindToSilence: cannot map silence to silence");
  }
  Corpus out = corpus;
  for (Sentence& s : out.sentences) {
    for (Interval& iv : s.audio_seg.intervals) {
      if (corpus.alphabet.KindOf(iv.label) == kind) iv.label = "sil";
    }
  }
  return out;
}

TwoStreamResult RunTwoStreamExperiments(const Corpus& corpus,
                                        const TwoStreamConfig& config) {
  Json fp;
  fp["op"] = "two_stream_experiments";
  fp["repeats"] = config.repeats;
  fp["train_fraction"] = config.train_fraction;
  fp["fit_lags"] = config.fit_lags;
  fp["seed"] = config.seed;
  const std::string fingerprint = Fingerprint(fp);

  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < config.repeats; ++r) {
    seeds.push_back(DeriveSeed(config.seed, "table34.split", r));
  }

  auto run_task = [&](PhonemeKind drop, Modality hand_stream) {
    Corpus task_corpus = MapKindToSilence(corpus, drop);
    struct Arm {
      const char* name;
      std::vector<Modality> streams;
      bool resync;
    };
    const std::vector<Arm> arms = {
        {"only_lips", {Modality::kLips}, false},
        {"only_hand", {hand_stream}, false},
        {"fused_non_resync", {Modality::kLips, hand_stream}, false},
        {"fused_resync", {Modality::kLips, hand_stream}, true},
    };
    std::array<std::vector<double>, 4> values;
    for (int r = 0; r < config.repeats; ++r) {
      CorpusSplit split =
          SplitCorpus(task_corpus, config.train_fraction, seeds[r]);
      // Lags come from the unmapped corpus: truth tiers pair with the
      // original audio kinds.
      CorpusSplit lag_split =
          SplitCorpus(corpus, config.train_fraction, seeds[r]);
      FittedLags lags{config.delta_v_star_ms, config.delta_c_star_ms};
      if (config.fit_lags) lags = FitLagsFromTruth(lag_split.train);
      for (std::size_t a = 0; a < arms.size(); ++a) {
        RecognitionConfig rc;
        rc.train = config.train;
        rc.train.streams = arms[a].streams;
        rc.train.stream_weights.clear();
        if (config.threads > 1) rc.train.threads = 1;
        rc.resync = arms[a].resync;
        rc.fit_lags = false;
        rc.delta_v_star_ms = lags.delta_v_star_ms;
        rc.delta_c_star_ms = lags.delta_c_star_ms;
        rc.unit_mode = config.unit_mode;
        rc.min_triphone_occupancy = config.min_triphone_occupancy;
        rc.triphone_em_iterations = config.triphone_em_iterations;
        values[a].push_back(RunRecognition(split.train, split.test, rc));
      }
    }
    TwoStreamTaskResult task;
    task.only_lips = MakeReport(arms[0].name, values[0], seeds, fingerprint);
    task.only_hand = MakeReport(arms[1].name, values[1], seeds, fingerprint);
    task.fused_non_resync =
        MakeReport(arms[2].name, values[2], seeds, fingerprint);
    task.fused_resync = MakeReport(arms[3].name, values[3], seeds, fingerprint);
    return task;
  };

  TwoStreamResult result;
  result.vowels = run_task(PhonemeKind::kConsonant, Modality::kHandPos);
  result.consonants = run_task(PhonemeKind::kVowel, Modality::kHandShape);
  return result;
}

}  // namespace csrec
