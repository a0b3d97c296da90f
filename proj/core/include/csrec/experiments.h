// core/include/csrec/experiments.h

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

#ifndef CSREC_EXPERIMENTS_H_
#define CSREC_EXPERIMENTS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "csrec/classify.h"
#include "csrec/eval.h"
#include "csrec/mshmm.h"
#include "csrec/resync.h"
#include "csrec/synth.h"
#include "csrec/types.h"

namespace csrec {

// Experiment harnesses: repeated train/test protocols over random splits,
// reported with per-run values so significance can be judged. Every harness
// is reproducible from (config, seed).

struct ExperimentReport {
  std::string name;
  std::vector<double> values;  // one per repeat
  double mean = 0.0;
  double std_dev = 0.0;
  std::vector<std::uint64_t> seeds;
  std::string config_fingerprint;
};

ExperimentReport MakeReport(const std::string& name,
                            const std::vector<double>& values,
                            const std::vector<std::uint64_t>& seeds,
                            const std::string& fingerprint);

// Sqrt of the average variance of two cells; the yardstick for gaps.
double PooledStd(const ExperimentReport& a, const ExperimentReport& b);

// ---------------------------------------------------------------------------
// Hand-shape lag sweep: classifier accuracy as a function of the consonant
// segmentation shift, peaking near the true hand preceding time.

struct SweepConfig {
  TimeMs min_ms = 0;
  TimeMs max_ms = 160;
  TimeMs step_ms = 10;
  int repeats = 5;
  double train_fraction = 0.8;
  double window_ms = 60.0;
  GmmTrainOptions gmm;
  std::uint64_t seed = 1;
};

struct SweepPoint {
  double delta_c_ms = 0.0;
  double mean_accuracy = 0.0;
  double std_dev = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> curve;
  double best_delta_c_ms = 0.0;
  std::string config_fingerprint;
};

SweepResult SweepDeltaC(const Corpus& corpus, const SweepConfig& config);

// ---------------------------------------------------------------------------
// Hand-position recognition under audio-based, HPM-based and ground-truth
// segmentations of the same corpus.

struct SegmentationComparisonConfig {
  int repeats = 5;
  double train_fraction = 0.8;
  double window_ms = 60.0;
  GmmTrainOptions gmm;
  T0SearchGrid t0_grid;
  std::uint64_t seed = 1;
};

struct SegmentationComparison {
  ExperimentReport audio;
  ExperimentReport hpm;
  ExperimentReport truth;
};

SegmentationComparison CompareSegmentations(
    const Corpus& corpus, const SegmentationComparisonConfig& config);

// ---------------------------------------------------------------------------
// Phoneme recognition pipelines.

struct RecognitionConfig {
  MsHmmTrainConfig train;
  bool resync = false;
  // When fit_lags is set the resync lags come from the training split's
  // truth tiers (HPM mean for the hand position stream, mean consonant lag
  // for hand shape); otherwise the explicit values below apply.
  bool fit_lags = true;
  double delta_v_star_ms = kDefaultDeltaVStarMs;
  double delta_c_star_ms = kDefaultDeltaCStarMs;
  EdgePolicy edge_policy = EdgePolicy::kReplicateFirstFrame;
  UnitMode unit_mode = UnitMode::kMonophone;
  int min_triphone_occupancy = 8;
  // Context clones see little data each; a short re-estimation adapts them
  // without losing the monophone's statistics.
  int triphone_em_iterations = 3;
};

// Trains on `train`, decodes `test`, returns corpus-level correctness over
// non-silence phonemes.
double RunRecognition(const Corpus& train, const Corpus& test,
                      const RecognitionConfig& config);

struct AblationConfig {
  int repeats = 10;
  double train_fraction = 0.8;
  MsHmmTrainConfig train;
  bool fit_lags = true;
  double delta_v_star_ms = kDefaultDeltaVStarMs;
  double delta_c_star_ms = kDefaultDeltaCStarMs;
  int min_triphone_occupancy = 8;
  int triphone_em_iterations = 3;
  int threads = 1;
  std::uint64_t seed = 1;
};

// Four cells in order: non-resync/monophone, resync/monophone,
// non-resync/triphone, resync/triphone, with shared splits per repeat.
struct AblationResult {
  std::vector<ExperimentReport> cells;
};

AblationResult RunAblation(const Corpus& corpus, const AblationConfig& config);

// ---------------------------------------------------------------------------
// Two-stream tasks: vowels from lips + hand position, consonants from
// lips + hand shape, each with single-stream baselines.

struct TwoStreamConfig {
  int repeats = 5;
  double train_fraction = 0.8;
  MsHmmTrainConfig train;  // stream set is overridden per task
  bool fit_lags = true;
  double delta_v_star_ms = kDefaultDeltaVStarMs;
  double delta_c_star_ms = kDefaultDeltaCStarMs;
  UnitMode unit_mode = UnitMode::kMonophone;
  int min_triphone_occupancy = 8;
  int triphone_em_iterations = 3;
  int threads = 1;
  std::uint64_t seed = 1;
};

struct TwoStreamTaskResult {
  ExperimentReport only_lips;
  ExperimentReport only_hand;
  ExperimentReport fused_non_resync;
  ExperimentReport fused_resync;
};

struct TwoStreamResult {
  TwoStreamTaskResult vowels;      // lips + hand position
  TwoStreamTaskResult consonants;  // lips + hand shape
};

TwoStreamResult RunTwoStreamExperiments(const Corpus& corpus,
                                        const TwoStreamConfig& config);

// Relabels intervals of one kind to silence (both reference and training
// transcription), leaving streams untouched.
Corpus MapKindToSilence(const Corpus& corpus, PhonemeKind kind);

}  // namespace csrec

#endif  // CSREC_EXPERIMENTS_H_
