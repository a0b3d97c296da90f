// tests/synth-test.cc

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

#include <cmath>

#include "csrec/eval.h"
#include "csrec/io.h"
#include "csrec/synth.h"
#include "doctest.h"
#include "test-util.h"

using namespace csrec;

namespace {

SynthConfig ConstantLagConfig(double mean_ms, double delta_c_ms,
                              double noise_ms) {
  SynthConfig config;
  config.hpm_true.mean_ms = mean_ms;
  config.hpm_true.a = 0.0;
  config.hpm_true.b = mean_ms;  // constant lag on both branches
  config.delta_c_true_ms = delta_c_ms;
  config.hpt_noise_std_ms = noise_ms;
  return config;
}

}  // namespace

TEST_CASE("equal seeds give identical corpora, different seeds differ") {
  SynthConfig config;
  config.n_sentences = 6;
  config.seed = 123;
  Corpus a = GenerateCorpus(config);
  Corpus b = GenerateCorpus(config);
  CHECK(a == b);

  config.seed = 124;
  Corpus c = GenerateCorpus(config);
  CHECK_FALSE(a == c);
}

TEST_CASE("zero-noise constant lag is realized exactly") {
  SynthConfig config = ConstantLagConfig(140.0, 60.0, 0.0);
  config.n_sentences = 8;
  Corpus corpus = GenerateCorpus(config);
  for (const Sentence& s : corpus.sentences) {
    REQUIRE(s.truth.has_value());
    for (double d : s.truth->delta_v_ms) CHECK(d == 140.0);
    for (double d : s.truth->delta_c_ms) CHECK(d == 60.0);
  }
  CHECK(corpus.metadata.at("clamped_intervals") == "0");
}

TEST_CASE("zero lags reproduce the audio tier on the hand tiers") {
  SynthConfig config = ConstantLagConfig(0.0, 0.0, 0.0);
  config.n_sentences = 5;
  Corpus corpus = GenerateCorpus(config);
  for (const Sentence& s : corpus.sentences) {
    std::vector<Interval> vowels, consonants;
    for (const Interval& iv : s.audio_seg.intervals) {
      PhonemeKind kind = corpus.alphabet.KindOf(iv.label);
      if (kind == PhonemeKind::kVowel) vowels.push_back(iv);
      if (kind == PhonemeKind::kConsonant) consonants.push_back(iv);
    }
    CHECK(s.truth->hand_pos_seg.intervals == vowels);
    CHECK(s.truth->hand_shape_seg.intervals == consonants);
  }
}

TEST_CASE("measured lags read the truth tiers back") {
  // One handmade sentence: vowel at audio midpoint 500, target midpoint 360.
  Alphabet alphabet({{"sil", PhonemeKind::kSilence},
                     {"v0", PhonemeKind::kVowel},
                     {"c0", PhonemeKind::kConsonant}});
  Sentence s;
  s.id = "manual";
  s.group = "manual";
  s.lips = test::RandomStream(Modality::kLips, 2, 40, 1);
  s.hand_pos = test::RandomStream(Modality::kHandPos, 2, 40, 2);
  s.hand_shape = test::RandomStream(Modality::kHandShape, 2, 40, 3);
  s.audio_seg.intervals = {{0, 300, "sil"},
                           {300, 400, "c0"},
                           {400, 600, "v0"},
                           {600, 800, "sil"}};
  SentenceTruth truth;
  truth.hand_pos_seg.tier = Tier::kHandPosTier;
  truth.hand_pos_seg.intervals = {{260, 460, "v0"}};
  truth.hand_shape_seg.tier = Tier::kHandShapeTier;
  truth.hand_shape_seg.intervals = {{240, 340, "c0"}};
  truth.delta_v_ms = {140.0};
  truth.delta_c_ms = {60.0};
  s.truth = truth;

  Corpus corpus;
  corpus.alphabet = alphabet;
  corpus.sentences = {s};

  HptMeasurements m = MeasureEmpiricalHpt(corpus);
  REQUIRE(m.vowels.size() == 1);
  REQUIRE(m.consonants.size() == 1);
  CHECK(m.vowels[0].delta_ms == 140.0);     // 500 - 360
  CHECK(m.vowels[0].u_ms == 100.0);         // speech end 600 - 500
  CHECK(m.consonants[0].delta_ms == 60.0);  // 350 - 290
  CHECK(m.vowels[0].label == "v0");

  SUBCASE("missing truth tier is an error pointing at the generator") {
    corpus.sentences[0].truth.reset();
    CHECK_THROWS_WITH_AS(MeasureEmpiricalHpt(corpus),
                         doctest::Contains("GenerateCorpus"),
                         ValidationError);
  }
}

TEST_CASE("lag noise shows up with the configured spread") {
  SynthConfig config = ConstantLagConfig(140.0, 60.0, 15.0);
  config.n_sentences = 120;  // about a thousand vowels
  config.seed = 5;
  Corpus corpus = GenerateCorpus(config);
  HptMeasurements m = MeasureEmpiricalHpt(corpus);
  REQUIRE(m.vowels.size() >= 800);

  std::vector<double> deltas;
  for (const HptObservation& o : m.vowels) deltas.push_back(o.delta_ms);
  const double mean = Mean(deltas);
  const double std_dev = SampleStd(deltas);
  CHECK(std_dev > 12.0);
  CHECK(std_dev < 18.0);
  // Gaussian sanity: sample mean within 3 sigma / sqrt(n) of the target.
  CHECK(std::abs(mean - 140.0) <
        3.0 * 15.0 / std::sqrt(static_cast<double>(deltas.size())));
}

TEST_CASE("hand tiers preserve audio order, infeasible noise is rejected") {
  SynthConfig config;
  config.n_sentences = 10;
  config.seed = 9;
  Corpus corpus = GenerateCorpus(config);
  for (const Sentence& s : corpus.sentences) {
    CHECK_NOTHROW(s.truth->hand_pos_seg.Validate(&corpus.alphabet));
    CHECK_NOTHROW(s.truth->hand_shape_seg.Validate(&corpus.alphabet));
  }

  SynthConfig wild = config;
  wild.hpt_noise_std_ms = 400.0;  // 3 sigma swamps the syllable spacing
  CHECK_THROWS_WITH_AS(GenerateCorpus(wild), doctest::Contains("reorder"),
                       ValidationError);
}

TEST_CASE("sentence-initial clamping is recorded in metadata") {
  SynthConfig config = ConstantLagConfig(140.0, 60.0, 0.0);
  config.n_sentences = 4;
  config.edge_silence_ms = {1, 2};  // first target would land before zero
  Corpus corpus = GenerateCorpus(config);
  CHECK(std::stoi(corpus.metadata.at("clamped_intervals")) > 0);
}

TEST_CASE("repetitions share text but not realizations") {
  SynthConfig config;
  config.n_sentences = 4;
  config.repetitions = 2;
  config.seed = 31;
  Corpus corpus = GenerateCorpus(config);
  REQUIRE(corpus.sentences.size() == 8);
  for (int base = 0; base < 4; ++base) {
    const Sentence& first = corpus.sentences[2 * base];
    const Sentence& second = corpus.sentences[2 * base + 1];
    CHECK(first.group == second.group);
    // Same phoneme sequence...
    std::vector<std::string> a, b;
    for (const Interval& iv : first.audio_seg.intervals) {
      if (corpus.alphabet.KindOf(iv.label) != PhonemeKind::kSilence) {
        a.push_back(iv.label);
      }
    }
    for (const Interval& iv : second.audio_seg.intervals) {
      if (corpus.alphabet.KindOf(iv.label) != PhonemeKind::kSilence) {
        b.push_back(iv.label);
      }
    }
    CHECK(a == b);
    // ...different realization.
    CHECK_FALSE(first.lips == second.lips);
  }
}

TEST_CASE("synth config round-trips through JSON") {
  test::TempDir tmp("synthcfg");
  SynthConfig config;
  config.n_sentences = 17;
  config.hpt_noise_std_ms = 12.5;
  config.features.coarticulation_scale = 3.0;
  config.seed = 77;
  SaveSynthConfig(config, tmp.path() / "c.json");
  SynthConfig loaded = LoadSynthConfig(tmp.path() / "c.json");
  CHECK(loaded.n_sentences == 17);
  CHECK(loaded.hpt_noise_std_ms == 12.5);
  CHECK(loaded.features.coarticulation_scale == 3.0);
  CHECK(loaded.seed == 77);
  CHECK(GenerateCorpus(loaded) == GenerateCorpus(config));
}

TEST_CASE("class map recovers position and shape groups") {
  SynthConfig config;
  config.n_vowels = 6;
  config.n_positions = 5;
  config.n_sentences = 2;
  Corpus corpus = GenerateCorpus(config);
  SynthClassMap map = SynthClassMap::FromCorpus(corpus);
  CHECK(map.PositionClass("v0") == 0);
  CHECK(map.PositionClass("v5") == 0);  // wraps onto the first position
  CHECK(map.PositionClass("v4") == 4);
  CHECK(map.ShapeClass("c7") == 7);
}
