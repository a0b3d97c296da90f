// tests/hpm-test.cc

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
#include <random>

#include "csrec/hpm.h"
#include "csrec/io.h"
#include "csrec/synth.h"
#include "doctest.h"
#include "test-util.h"

using namespace csrec;

namespace {

HpmModel Model(double mean, double t0, double a, double b) {
  HpmModel m;
  m.mean_ms = mean;
  m.t0_ms = t0;
  m.a = a;
  m.b = b;
  return m;
}

std::vector<HptObservation> Obs(
    std::initializer_list<std::pair<double, double>> points) {
  std::vector<HptObservation> out;
  for (const auto& [u, d] : points) {
    out.push_back(HptObservation{u, d, "s", "v0"});
  }
  return out;
}

}  // namespace

TEST_CASE("prediction is piecewise") {
  HpmModel m = Model(140.0, 880.0, 0.1, 20.0);
  CHECK(PredictDelta(m, 881.0) == 140.0);  // constant branch
  CHECK(PredictDelta(m, 400.0) == doctest::Approx(60.0));
  CHECK(PredictDelta(m, 0.0) == 20.0);  // intercept at the sentence end
  CHECK_THROWS_AS(PredictDelta(m, -1.0), ValidationError);

  SUBCASE("exactly constant beyond t0, exactly affine below") {
    for (double u : {900.0, 1200.0, 5000.0}) {
      CHECK(PredictDelta(m, u) == m.mean_ms);
    }
    double d1 = PredictDelta(m, 100.0);
    double d2 = PredictDelta(m, 200.0);
    double d3 = PredictDelta(m, 300.0);
    CHECK(d3 - d2 == doctest::Approx(d2 - d1));  // collinear
  }
}

TEST_CASE("constant observations fit a flat model") {
  std::vector<HptObservation> obs;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(50.0, 2500.0);
  for (int i = 0; i < 200; ++i) {
    obs.push_back(HptObservation{u(rng), 140.0, "s", "v"});
  }
  HpmModel m = FitHpm(obs);
  CHECK(m.mean_ms == doctest::Approx(140.0));
  CHECK(m.a == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(m.b == doctest::Approx(140.0));
  CHECK(m.n_obs == 200);
  CHECK(m.sse_constant + m.sse_linear == doctest::Approx(0.0));
}

TEST_CASE("adding a constant shifts mean and intercept, not slope") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 2400.0);
  std::normal_distribution<double> noise(0.0, 8.0);
  HpmModel truth = Model(140.0, 880.0, 0.159, 0.0);
  std::vector<HptObservation> obs;
  for (int i = 0; i < 600; ++i) {
    double ui = u(rng);
    obs.push_back(
        HptObservation{ui, PredictDelta(truth, ui) + noise(rng), "s", "v"});
  }
  HpmModel base = FitHpm(obs);
  std::vector<HptObservation> shifted = obs;
  for (HptObservation& o : shifted) o.delta_ms += 25.0;
  HpmModel moved = FitHpm(shifted);
  CHECK(moved.mean_ms - base.mean_ms == doctest::Approx(25.0).epsilon(1e-9));
  CHECK(moved.b - base.b == doctest::Approx(25.0).epsilon(1e-6));
  CHECK(moved.a == doctest::Approx(base.a).epsilon(1e-9));
  CHECK(moved.t0_ms == base.t0_ms);
}

TEST_CASE("parameters are recovered from a generated corpus") {
  SynthConfig config;
  config.n_sentences = 110;
  config.min_syllables = 5;
  config.max_syllables = 12;
  config.hpt_noise_std_ms = 10.0;
  config.seed = 17;
  Corpus corpus = GenerateCorpus(config);
  HptMeasurements m = MeasureEmpiricalHpt(corpus);
  REQUIRE(m.vowels.size() >= 800);
  HpmModel fit = FitHpm(m.vowels);
  CHECK(std::abs(fit.mean_ms - 140.0) <= 5.0);
  CHECK(std::abs(fit.t0_ms - 880.0) <= 60.0);
  CHECK(std::abs(fit.a - 0.159) <= 0.03);
}

TEST_CASE("degenerate inputs are refused") {
  CHECK_THROWS_AS(FitHpm(Obs({{100, 1}, {200, 2}})), ValidationError);

  SUBCASE("no candidate with both sides populated") {
    std::vector<HptObservation> obs;
    for (int i = 0; i < 30; ++i) {
      obs.push_back(HptObservation{2000.0 + i, 140.0, "s", "v"});
    }
    // Decay side stays empty over the whole default grid.
    CHECK_THROWS_AS(FitHpm(obs), ValidationError);
  }

  SUBCASE("no spread in the decay region falls back to slope zero") {
    std::vector<HptObservation> obs;
    for (int i = 0; i < 40; ++i) {
      obs.push_back(HptObservation{1600.0 + 10 * i, 140.0, "s", "v"});
    }
    obs.push_back(HptObservation{400.0, 60.0, "s", "v"});
    obs.push_back(HptObservation{400.0, 80.0, "s", "v"});
    HpmModel m = FitHpm(obs);
    CHECK(m.degenerate_slope);
    CHECK(m.a == 0.0);
    CHECK(m.b == doctest::Approx(70.0));
  }
}

TEST_CASE("segmentation shifting follows the model") {
  Alphabet alphabet({{"sil", PhonemeKind::kSilence},
                     {"v0", PhonemeKind::kVowel},
                     {"c0", PhonemeKind::kConsonant}});
  Segmentation audio;
  audio.intervals = {{0, 300, "sil"},  {300, 400, "c0"}, {400, 560, "v0"},
                     {560, 660, "c0"}, {660, 820, "v0"}, {820, 1100, "sil"}};

  SUBCASE("zero model with zero consonant lag is the identity") {
    Segmentation out =
        HpmShiftSegmentation(audio, alphabet, Model(0, 880, 0, 0), 820, 0.0);
    CHECK(out == audio);
  }

  SUBCASE("constant-region vowels move earlier by the mean") {
    // Sentence end far away: both vowels in the constant region.
    Segmentation out = HpmShiftSegmentation(audio, alphabet,
                                            Model(140, 880, 0, 140), 5000,
                                            60.0);
    const Interval* v = nullptr;
    for (const Interval& iv : out.intervals) {
      if (iv.label == "v0") {
        v = &iv;
        break;
      }
    }
    REQUIRE(v != nullptr);
    CHECK(v->start_ms == 400 - 140);
    CHECK(v->end_ms == 560 - 140);
  }

  SUBCASE("negative starts clamp and collapsed intervals drop") {
    Segmentation tight;
    tight.intervals = {{0, 100, "c0"}, {100, 200, "v0"}};
    ShiftReport report;
    Segmentation out = HpmShiftSegmentation(
        tight, alphabet, Model(500, 880, 0, 500), 200, 400.0, &report);
    CHECK(report.clamped + static_cast<int>(report.dropped.size()) > 0);
    CHECK_NOTHROW(out.Validate(&alphabet));
  }

  SUBCASE("fitted model reproduces the truth tiers within one frame") {
    SynthConfig config;
    config.n_sentences = 60;
    config.hpt_noise_std_ms = 0.0;
    config.seed = 23;
    Corpus corpus = GenerateCorpus(config);
    HptMeasurements m = MeasureEmpiricalHpt(corpus);
    HpmModel fit = FitHpm(m.vowels);
    for (const Sentence& s : corpus.sentences) {
      Segmentation shifted = HpmShiftSegmentation(
          s.audio_seg, corpus.alphabet, fit,
          SentenceEndMs(s.audio_seg, corpus.alphabet),
          config.delta_c_true_ms);
      std::vector<const Interval*> vowels, consonants;
      for (const Interval& iv : shifted.intervals) {
        PhonemeKind kind = corpus.alphabet.KindOf(iv.label);
        if (kind == PhonemeKind::kVowel) vowels.push_back(&iv);
        if (kind == PhonemeKind::kConsonant) consonants.push_back(&iv);
      }
      REQUIRE(vowels.size() == s.truth->hand_pos_seg.intervals.size());
      for (std::size_t k = 0; k < vowels.size(); ++k) {
        CHECK(std::abs(vowels[k]->MidpointMs() -
                       s.truth->hand_pos_seg.intervals[k].MidpointMs()) <=
              corpus.period_ms);
      }
      // Consonant ends can be truncated when the shifted vowel moves into
      // them, so compare the starts, which shifting alone determines.
      REQUIRE(consonants.size() == s.truth->hand_shape_seg.intervals.size());
      for (std::size_t k = 0; k < consonants.size(); ++k) {
        CHECK(std::abs(consonants[k]->start_ms -
                       s.truth->hand_shape_seg.intervals[k].start_ms) <=
              corpus.period_ms);
      }
    }
  }
}

TEST_CASE("consonant-vowel spacing statistics") {
  SUBCASE("single pair arithmetic") {
    Alphabet alphabet({{"sil", PhonemeKind::kSilence},
                       {"v0", PhonemeKind::kVowel},
                       {"c0", PhonemeKind::kConsonant}});
    Sentence s;
    s.id = "x";
    s.group = "x";
    s.lips = test::RandomStream(Modality::kLips, 1, 40, 1);
    s.hand_pos = test::RandomStream(Modality::kHandPos, 1, 40, 2);
    s.hand_shape = test::RandomStream(Modality::kHandShape, 1, 40, 3);
    s.audio_seg.intervals = {{340, 440, "c0"}, {440, 560, "v0"}};
    Corpus corpus;
    corpus.alphabet = alphabet;
    corpus.sentences = {s};
    DeltaCvStats stats = ComputeDeltaCvStats(corpus);
    CHECK(stats.n == 1);
    CHECK(stats.mean_ms == 110.0);  // midpoints 500 and 390

    corpus.sentences[0].audio_seg.intervals = {{0, 100, "v0"}};
    CHECK_THROWS_AS(ComputeDeltaCvStats(corpus), ValidationError);
  }

  SUBCASE("fixed syllable geometry gives zero spread") {
    SynthConfig config;
    config.n_sentences = 10;
    config.consonant_dur_ms = {100, 100};
    config.vowel_dur_ms = {160, 160};
    config.gap_probability = 0.0;
    Corpus corpus = GenerateCorpus(config);
    DeltaCvStats stats = ComputeDeltaCvStats(corpus);
    CHECK(stats.mean_ms == doctest::Approx(130.0));  // (100 + 160) / 2
    CHECK(stats.std_ms == doctest::Approx(0.0));
  }
}

TEST_CASE("theoretical consonant lag") {
  CHECK(TheoreticalDeltaC(140, 110, 60) == doctest::Approx(60.0));
  CHECK(TheoreticalDeltaC(140, 140, 0) == doctest::Approx(0.0));
  CHECK(TheoreticalDeltaC(100, 60, 40) == doctest::Approx(60.0));
  CHECK(TheoreticalDeltaC(10, 100, 20) < 0);  // returned as-is
  CHECK_THROWS_AS(TheoreticalDeltaC(-1, 0, 0), ValidationError);
}

TEST_CASE("model JSON round-trips") {
  test::TempDir tmp("hpm");
  HpmModel m = Model(139.5, 900, 0.1575, -2.25);
  m.n_obs = 1234;
  m.sse_constant = 10.5;
  m.sse_linear = 20.25;
  SaveHpmModel(m, tmp.path() / "hpm.json");
  HpmModel loaded = LoadHpmModel(tmp.path() / "hpm.json");
  CHECK(loaded.mean_ms == m.mean_ms);
  CHECK(loaded.t0_ms == m.t0_ms);
  CHECK(loaded.a == m.a);
  CHECK(loaded.b == m.b);
  CHECK(loaded.n_obs == m.n_obs);
  CHECK(loaded.sse_linear == m.sse_linear);
}
