// core/include/csrec/synth.h

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

#ifndef CSREC_SYNTH_H_
#define CSREC_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "csrec/hpm.h"
#include "csrec/types.h"

namespace csrec {

// Synthetic Cued Speech corpora: sentences of CV syllables whose hand
// streams precede the audio/lips timeline by lags drawn from a configurable
// hand-preceding model. Every sentence carries ground-truth hand tiers and
// the sampled lags, so alignment behavior is verifiable downstream.
//
// The synthetic alphabet is 'sil', vowels v0..v{n-1} and consonants
// c0..c{m-1}. Vowel i is cued at hand position i % n_positions with lips
// viseme i / n_positions; consonant j uses hand shape j % n_shapes and
// viseme j / n_shapes. With more vowels than positions no single stream
// identifies a phoneme, mirroring the viseme-level ambiguity of real CS.

struct DurationRangeMs {
  TimeMs min_ms = 0;
  TimeMs max_ms = 0;
};

struct SynthFeatureModel {
  int lips_dim = 2;
  int hand_pos_dim = 2;
  int hand_shape_dim = 2;
  // Distance scale between class means; per-frame noise is isotropic.
  double separation = 10.0;
  double lips_noise_std = 0.5;
  double hand_pos_noise_std = 0.5;
  double hand_shape_noise_std = 0.5;
  // Shifts the lips emitter mean by this much in a direction keyed to the
  // previous phoneme. Nonzero values make context-dependent units pay off.
  double coarticulation_scale = 0.0;
};

struct SynthConfig {
  int n_sentences = 50;
  // Each sentence is rendered this many times with fresh timing and noise;
  // renditions share a repetition group and never straddle a corpus split.
  int repetitions = 1;
  int min_syllables = 4;
  int max_syllables = 10;

  int n_vowels = 6;
  int n_consonants = 8;
  int n_positions = 5;
  int n_shapes = 8;

  // True hand-preceding behavior the generator realizes.
  HpmModel hpm_true{.mean_ms = 140.0, .t0_ms = 880.0, .a = 0.159, .b = 0.0};
  double delta_c_true_ms = 60.0;
  double hpt_noise_std_ms = 10.0;

  // Dwell lengths of the hand at a position target / in a completed shape.
  double d_v_ms = 60.0;
  double d_c_ms = 60.0;

  DurationRangeMs consonant_dur_ms{90, 140};
  DurationRangeMs vowel_dur_ms{130, 200};
  DurationRangeMs edge_silence_ms{260, 400};
  DurationRangeMs gap_silence_ms{80, 160};
  double gap_probability = 0.15;

  int period_ms = kDefaultPeriodMs;
  SynthFeatureModel features;
  std::uint64_t seed = 1;

  void Validate() const;
};

SynthConfig LoadSynthConfig(const std::filesystem::path& path);
void SaveSynthConfig(const SynthConfig& config,
                     const std::filesystem::path& path);

// Deterministic in the seed: equal configs produce byte-identical corpora.
// Throws ValidationError when sampled lags would reorder a hand tier
// (hpt_noise_std_ms too large for the syllable spacing).
Corpus GenerateCorpus(const SynthConfig& config);

struct HptMeasurements {
  std::vector<HptObservation> vowels;      // delta_v against time-to-end
  std::vector<HptObservation> consonants;  // delta_c, same coordinates
};

// Reads the lags back off the truth tiers: delta = audio midpoint minus
// target-interval midpoint, u = sentence end minus audio midpoint. Requires
// a corpus with truth tiers (see GenerateCorpus).
HptMeasurements MeasureEmpiricalHpt(const Corpus& corpus);

// Cued Speech class structure of a synthetic corpus, recovered from corpus
// metadata. Position/shape/viseme ids group phonemes the way hand position,
// hand shape and lips genuinely distinguish them.
struct SynthClassMap {
  int n_vowels = 0;
  int n_consonants = 0;
  int n_positions = 0;
  int n_shapes = 0;

  static SynthClassMap FromCorpus(const Corpus& corpus);

  int PositionClass(const std::string& vowel_symbol) const;
  int ShapeClass(const std::string& consonant_symbol) const;
};

}  // namespace csrec

#endif  // CSREC_SYNTH_H_
