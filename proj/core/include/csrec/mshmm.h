// core/include/csrec/mshmm.h

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

#ifndef CSREC_MSHMM_H_
#define CSREC_MSHMM_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "csrec/gmm.h"
#include "csrec/types.h"

namespace csrec {

// Multi-stream HMM-GMM phonetic decoder: per-phoneme left-to-right units
// whose states hold one diagonal GMM per feature stream; the emission is the
// weighted product of per-stream likelihoods,
//   log b_j(o_t) = sum_s lambda_s * log sum_m c_jsm N(o_st; mu_jsm, Sigma_jsm).

struct StreamWeights {
  std::vector<double> lambda;

  // Paper operating point in observation order (lips, hand position, hand
  // shape): 0.4 / 0.2 / 0.4 for three streams, uniform otherwise.
  static StreamWeights Defaults(std::size_t n_streams);
  void Validate() const;
};

// Per-frame per-stream feature vectors with appended first derivatives
// (central differences, clamped edges). Streams stay separate so the
// emission can weight them individually.
struct ObservationSequence {
  std::vector<FrameStream> streams;

  std::size_t NumFrames() const {
    return streams.empty() ? 0 : streams.front().NumFrames();
  }
};

ObservationSequence AssembleObservations(const Sentence& sentence,
                                         std::span<const Modality> streams);

struct HmmState {
  double self_loop_prob = 0.5;
  std::vector<DiagGmm> stream_gmms;  // one per stream
};

// Left-to-right unit, self loop plus advance, no skips.
struct HmmUnit {
  std::string name;    // monophone symbol or "left-center+right"
  std::string center;  // phoneme this unit emits when decoded
  std::vector<HmmState> states;
};

enum class UnitMode { kMonophone, kTriphone };

struct MsHmmModel {
  UnitMode unit_mode = UnitMode::kMonophone;
  std::vector<Modality> streams;
  std::vector<int> stream_dims;  // including derivative halves
  StreamWeights weights;
  Alphabet alphabet;
  std::vector<HmmUnit> units;

  // Training metadata: per-stage embedded-EM log-likelihood traces.
  std::vector<std::vector<double>> ll_stages;
  std::uint64_t seed = 0;

  int UnitIndex(const std::string& name) const;  // -1 when absent
  void RebuildIndex();
  void Validate() const;

 private:
  std::unordered_map<std::string, int> unit_index_;
};

// log b for one state of one unit under the given weights.
double EmissionLogProb(const HmmState& state,
                       const ObservationSequence& obs, std::size_t frame,
                       const StreamWeights& weights);

struct DecodeResult {
  std::vector<std::string> labels;  // decoded center phonemes, in order
  std::vector<std::string> units;  // full unit names
  Segmentation segmentation;       // one interval per decoded unit instance
  std::vector<int> state_path;     // per frame: state index within its unit
  double log_score = 0.0;
};

// Best path through freely connected units (uniform unit bigram, no
// language model); every traversed unit must complete its states. Ties
// break toward the lower unit index.
DecodeResult ViterbiDecode(const MsHmmModel& model, const Sentence& sentence);
DecodeResult ViterbiDecodeObs(const MsHmmModel& model,
                              const ObservationSequence& obs);

// Total likelihood over all paths of the same graph.
double ForwardLogLikelihood(const MsHmmModel& model,
                            const ObservationSequence& obs);

struct MsHmmTrainConfig {
  std::vector<Modality> streams = {Modality::kLips, Modality::kHandPos,
                                   Modality::kHandShape};
  std::vector<double> stream_weights;  // empty: StreamWeights::Defaults
  int n_states = 3;
  // Mixture size per training stage, e.g. {1, 2}: flat start at 1 Gaussian,
  // split, then re-estimate at 2.
  std::vector<int> mixture_stages = {1, 2};
  int em_iterations_per_stage = 10;
  double min_rel_gain = 1e-5;
  double variance_floor_factor = 1e-4;
  double split_perturbation = 0.2;
  // Components whose occupancy falls below this many frames are pruned.
  double min_component_occupancy = 2.0;
  int threads = 1;

  void Validate() const;
};

// Flat start from the audio segmentation, then embedded Baum-Welch per the
// mixture schedule. The per-stage log-likelihood traces land in ll_stages.
MsHmmModel TrainMsHmm(const Corpus& corpus, const MsHmmTrainConfig& config);

// Re-estimates an existing model on a corpus (no mixture changes).
void RunEmbeddedEm(MsHmmModel* model, const Corpus& corpus,
                   const MsHmmTrainConfig& config);

// Clones context-dependent units for trigrams seen at least min_occupancy
// times; rarer contexts keep backing off to the monophone. The expanded
// model is re-estimated with the given config. Silence stays context free.
MsHmmModel ExpandTriphones(const MsHmmModel& monophone_model,
                           const Corpus& corpus, int min_occupancy,
                           const MsHmmTrainConfig& retrain_config);

// Exhaustive simplex grid with the given step over the model's stream
// count; returns the weights maximizing phoneme correctness on the dev
// corpus. Ties prefer more uniform weights.
StreamWeights OptimizeWeights(const MsHmmModel& model, const Corpus& dev,
                              double grid_step = 0.1);

MsHmmModel LoadMsHmmModel(const std::filesystem::path& path);
void SaveMsHmmModel(const MsHmmModel& model,
                    const std::filesystem::path& path);

}  // namespace csrec

#endif  // CSREC_MSHMM_H_
