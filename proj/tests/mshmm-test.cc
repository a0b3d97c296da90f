// tests/mshmm-test.cc

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
#include <numbers>
#include <random>

#include "csrec/eval.h"
#include "csrec/gmm.h"
#include "csrec/io.h"
#include "csrec/mshmm.h"
#include "csrec/synth.h"
#include "doctest.h"
#include "oracle-util.h"
#include "test-util.h"

using namespace csrec;

TEST_CASE("observation assembly appends central-difference derivatives") {
  Sentence s;
  s.lips = test::MakeStream(Modality::kLips, 20, 2,
                            {0, 0, 1, 10, 2, 20, 3, 30});
  s.hand_pos = test::MakeStream(Modality::kHandPos, 20, 1, {5, 5, 5, 5});
  s.hand_shape = test::MakeStream(Modality::kHandShape, 20, 3,
                                  {0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3});

  const std::vector<Modality> all = {Modality::kLips, Modality::kHandPos,
                                     Modality::kHandShape};
  ObservationSequence obs = AssembleObservations(s, all);
  REQUIRE(obs.streams.size() == 3);
  CHECK(obs.streams[0].dim == 4);  // dims double
  CHECK(obs.streams[1].dim == 2);
  CHECK(obs.streams[2].dim == 6);

  // Constant stream: derivative identically zero.
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(obs.streams[1].Frame(t)[1] == 0.0);
  }
  // Ramp: interior derivative is one unit per frame, edges half.
  CHECK(obs.streams[0].Frame(1)[2] == doctest::Approx(1.0));
  CHECK(obs.streams[0].Frame(2)[3] == doctest::Approx(10.0));
  CHECK(obs.streams[0].Frame(0)[2] == doctest::Approx(0.5));
  CHECK(obs.streams[0].Frame(3)[2] == doctest::Approx(0.5));

  SUBCASE("fewer than three frames is an error") {
    Sentence tiny = s;
    tiny.lips = test::MakeStream(Modality::kLips, 20, 1, {1, 2});
    CHECK_THROWS_AS(AssembleObservations(tiny, all), ValidationError);
  }
}

TEST_CASE("emission collapses to a single stream under a one-hot weight") {
  MsHmmModel model = test::RandomTinyModel(3, 2, 2, 3, 2);
  ObservationSequence obs = test::RandomTinyObs(model, 4, 5);
  const HmmState& state = model.units[0].states[0];

  StreamWeights one_hot;
  one_hot.lambda = {0.0, 1.0, 0.0};
  double emission = EmissionLogProb(state, obs, 2, one_hot);
  double direct = state.stream_gmms[1].LogDensity(obs.streams[1].Frame(2));
  CHECK(emission == doctest::Approx(direct).epsilon(1e-12));

  SUBCASE("closed-form single Gaussian check") {
    DiagGmm g;
    g.dim = 2;
    g.weights = {1.0};
    g.means = {1.0, -1.0};
    g.vars = {1.0, 1.0};
    std::vector<double> x = {2.0, 0.5};
    double expected = -std::log(2.0 * std::numbers::pi) -
                      0.5 * ((2.0 - 1.0) * (2.0 - 1.0) +
                             (0.5 + 1.0) * (0.5 + 1.0));
    CHECK(g.LogDensity(x) == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("weighted product matches long-double reference arithmetic") {
    StreamWeights w;
    w.lambda = {0.5, 0.3, 0.2};
    for (std::size_t t = 0; t < obs.NumFrames(); ++t) {
      long double ref = 0.0L;
      for (std::size_t s = 0; s < 3; ++s) {
        const DiagGmm& gmm = state.stream_gmms[s];
        auto x = obs.streams[s].Frame(t);
        long double density = 0.0L;
        for (int m = 0; m < gmm.NumComponents(); ++m) {
          long double term = gmm.weights[m];
          for (int d = 0; d < gmm.dim; ++d) {
            long double var = gmm.vars[m * gmm.dim + d];
            long double diff = x[d] - gmm.means[m * gmm.dim + d];
            term *= std::exp(-diff * diff / (2.0L * var)) /
                    std::sqrt(2.0L * std::numbers::pi_v<long double> * var);
          }
          density += term;
        }
        ref += w.lambda[s] * std::log(density);
      }
      double got = EmissionLogProb(state, obs, t, w);
      CHECK(std::abs(got - static_cast<double>(ref)) /
                std::max(1.0, std::abs(static_cast<double>(ref))) <
            1e-10);
    }
  }

  SUBCASE("argmax over states survives a common weight scale") {
    // Scaling every stream log-likelihood by c > 0 rescales all state
    // emissions alike, so the per-frame ranking cannot change.
    StreamWeights w;
    w.lambda = {0.5, 0.3, 0.2};
    for (std::size_t t = 0; t < obs.NumFrames(); ++t) {
      int best = -1, best_scaled = -1;
      double hi = -1e300, hi_scaled = -1e300;
      int q = 0;
      for (const HmmUnit& unit : model.units) {
        for (const HmmState& st : unit.states) {
          double e = EmissionLogProb(st, obs, t, w);
          if (e > hi) {
            hi = e;
            best = q;
          }
          if (2.7 * e > hi_scaled) {
            hi_scaled = 2.7 * e;
            best_scaled = q;
          }
          ++q;
        }
      }
      CHECK(best == best_scaled);
    }
  }
}

TEST_CASE("viterbi and forward match exhaustive enumeration") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    std::mt19937_64 rng(seed * 977);
    std::uniform_int_distribution<int> units(1, 3);
    std::uniform_int_distribution<int> states(1, 3);
    std::uniform_int_distribution<std::size_t> frames(3, 6);
    MsHmmModel model =
        test::RandomTinyModel(seed, units(rng), states(rng), 2, 2);
    ObservationSequence obs =
        test::RandomTinyObs(model, frames(rng), seed + 100);

    test::BruteForceDecode oracle = test::BruteForceDecodeObs(model, obs);
    if (!std::isfinite(oracle.viterbi_log_score)) continue;  // path too short

    DecodeResult got = ViterbiDecodeObs(model, obs);
    CHECK(std::abs(got.log_score - oracle.viterbi_log_score) /
              std::abs(oracle.viterbi_log_score) <
          1e-10);
    CHECK(got.labels == oracle.best_labels);

    double forward = ForwardLogLikelihood(model, obs);
    CHECK(std::abs(forward - oracle.forward_log_likelihood) /
              std::abs(oracle.forward_log_likelihood) <
          1e-10);
    // The best path is one of the summands.
    CHECK(forward >= got.log_score - 1e-9);
  }
}

TEST_CASE("decoded score equals its recomputed path sum") {
  MsHmmModel model = test::RandomTinyModel(21, 3, 3, 2, 2);
  ObservationSequence obs = test::RandomTinyObs(model, 24, 9);
  DecodeResult r = ViterbiDecodeObs(model, obs);

  // Rebuild the score from the reported segmentation and state path.
  double score = -std::log(static_cast<double>(model.units.size()));
  std::size_t frame = 0;
  for (std::size_t inst = 0; inst < r.units.size(); ++inst) {
    int u = model.UnitIndex(r.units[inst]);
    REQUIRE(u >= 0);
    const HmmUnit& unit = model.units[static_cast<std::size_t>(u)];
    const std::size_t end_frame =
        static_cast<std::size_t>(r.segmentation.intervals[inst].end_ms / 20);
    int prev_state = -1;
    for (; frame < end_frame; ++frame) {
      int state = r.state_path[frame];
      if (prev_state >= 0) {
        if (state == prev_state) {
          score += std::log(unit.states[state].self_loop_prob);
        } else {
          REQUIRE(state == prev_state + 1);
          score += std::log(1.0 - unit.states[prev_state].self_loop_prob);
        }
      } else if (inst > 0) {
        // Entry edge: exit probability of the previous unit plus the
        // uniform bigram.
        int pu = model.UnitIndex(r.units[inst - 1]);
        const HmmUnit& prev_unit = model.units[static_cast<std::size_t>(pu)];
        score += std::log(1.0 - prev_unit.states.back().self_loop_prob) -
                 std::log(static_cast<double>(model.units.size()));
      }
      score += EmissionLogProb(unit.states[state], obs, frame, model.weights);
      prev_state = state;
    }
  }
  const HmmUnit& last = model.units[model.UnitIndex(r.units.back())];
  score += std::log(1.0 - last.states.back().self_loop_prob);
  CHECK(score == doctest::Approx(r.log_score).epsilon(1e-10));

  SUBCASE("decoding twice gives identical output") {
    DecodeResult again = ViterbiDecodeObs(model, obs);
    CHECK(again.labels == r.labels);
    CHECK(again.state_path == r.state_path);
    CHECK(again.log_score == r.log_score);
  }

  SUBCASE("empty sentences are refused") {
    ObservationSequence empty;
    for (const FrameStream& fs : obs.streams) {
      FrameStream e = fs;
      e.data.clear();
      empty.streams.push_back(e);
    }
    CHECK_THROWS_AS(ViterbiDecodeObs(model, empty), ValidationError);
  }
}

TEST_CASE("single-state single-Gaussian training reduces to moments") {
  Alphabet alphabet({{"x", PhonemeKind::kVowel}});
  Sentence s;
  s.id = "s";
  s.group = "g1";
  s.lips = test::RandomStream(Modality::kLips, 2, 50, 3);
  s.hand_pos = test::RandomStream(Modality::kHandPos, 1, 50, 4);
  s.hand_shape = test::RandomStream(Modality::kHandShape, 1, 50, 5);
  s.audio_seg.intervals = {{0, 1000, "x"}};
  Sentence s2 = s;
  s2.id = "s2";
  s2.group = "g2";
  s2.lips = test::RandomStream(Modality::kLips, 2, 50, 6);
  s2.hand_pos = test::RandomStream(Modality::kHandPos, 1, 50, 7);
  s2.hand_shape = test::RandomStream(Modality::kHandShape, 1, 50, 8);

  Corpus corpus;
  corpus.alphabet = alphabet;
  corpus.sentences = {s, s2};

  MsHmmTrainConfig config;
  config.n_states = 1;
  config.mixture_stages = {1};
  config.em_iterations_per_stage = 3;
  MsHmmModel model = TrainMsHmm(corpus, config);

  // With one unit and one state the occupancy is everywhere one, so the
  // stream Gaussian is the plain sample mean and variance.
  ObservationSequence o1 = AssembleObservations(s, config.streams);
  ObservationSequence o2 = AssembleObservations(s2, config.streams);
  for (std::size_t st = 0; st < 3; ++st) {
    const int dim = o1.streams[st].dim;
    std::vector<double> mean(dim, 0.0);
    double n = 0.0;
    for (const ObservationSequence* o : {&o1, &o2}) {
      for (std::size_t t = 0; t < o->streams[st].NumFrames(); ++t) {
        auto x = o->streams[st].Frame(t);
        for (int d = 0; d < dim; ++d) mean[d] += x[d];
        n += 1.0;
      }
    }
    for (double& v : mean) v /= n;
    const DiagGmm& gmm = model.units[0].states[0].stream_gmms[st];
    for (int d = 0; d < dim; ++d) {
      CHECK(gmm.means[d] == doctest::Approx(mean[d]).epsilon(1e-9));
    }
  }
}

TEST_CASE("embedded EM log-likelihood never decreases within a stage") {
  SynthConfig sc;
  sc.n_sentences = 12;
  sc.seed = 41;
  Corpus corpus = GenerateCorpus(sc);
  MsHmmTrainConfig config;
  config.mixture_stages = {1, 2};
  config.em_iterations_per_stage = 10;
  MsHmmModel model = TrainMsHmm(corpus, config);
  REQUIRE(model.ll_stages.size() == 2);
  for (const std::vector<double>& stage : model.ll_stages) {
    for (std::size_t i = 1; i < stage.size(); ++i) {
      CHECK(stage[i] >= stage[i - 1] - 1e-6);
    }
  }

  SUBCASE("training twice is bit-identical") {
    MsHmmModel again = TrainMsHmm(corpus, config);
    test::TempDir tmp("det");
    SaveMsHmmModel(model, tmp.path() / "a.json");
    SaveMsHmmModel(again, tmp.path() / "b.json");
    CHECK(ReadTextFile(tmp.path() / "a.json") ==
          ReadTextFile(tmp.path() / "b.json"));
  }

  SUBCASE("threaded E-step matches the serial one") {
    MsHmmTrainConfig threaded = config;
    threaded.threads = 2;
    MsHmmModel parallel = TrainMsHmm(corpus, threaded);
    test::TempDir tmp("thr");
    SaveMsHmmModel(model, tmp.path() / "serial.json");
    SaveMsHmmModel(parallel, tmp.path() / "parallel.json");
    CHECK(ReadTextFile(tmp.path() / "serial.json") ==
          ReadTextFile(tmp.path() / "parallel.json"));
  }
}

TEST_CASE("a zero-noise corpus decodes its own training sentences exactly") {
  SynthConfig sc;
  sc.n_sentences = 14;
  sc.min_syllables = 3;
  sc.max_syllables = 6;
  sc.hpm_true = {.mean_ms = 0.0, .t0_ms = 880.0, .a = 0.0, .b = 0.0};
  sc.delta_c_true_ms = 0.0;
  sc.hpt_noise_std_ms = 0.0;
  sc.features.lips_noise_std = 0.02;
  sc.features.hand_pos_noise_std = 0.02;
  sc.features.hand_shape_noise_std = 0.02;
  sc.seed = 77;
  Corpus corpus = GenerateCorpus(sc);

  MsHmmTrainConfig config;
  config.mixture_stages = {1};
  config.em_iterations_per_stage = 8;
  MsHmmModel model = TrainMsHmm(corpus, config);
  for (const Sentence& s : corpus.sentences) {
    DecodeResult r = ViterbiDecode(model, s);
    std::vector<std::string> ref, hyp;
    for (const Interval& iv : s.audio_seg.intervals) {
      if (corpus.alphabet.KindOf(iv.label) != PhonemeKind::kSilence) {
        ref.push_back(iv.label);
      }
    }
    for (const std::string& lab : r.labels) {
      if (corpus.alphabet.KindOf(lab) != PhonemeKind::kSilence) {
        hyp.push_back(lab);
      }
    }
    CHECK(hyp == ref);
  }
}

TEST_CASE("triphone expansion") {
  SynthConfig sc;
  sc.n_sentences = 10;
  sc.seed = 55;
  Corpus corpus = GenerateCorpus(sc);
  MsHmmTrainConfig config;
  config.em_iterations_per_stage = 4;
  MsHmmModel mono = TrainMsHmm(corpus, config);

  SUBCASE("an unreachable occupancy keeps the model unchanged") {
    MsHmmModel same =
        ExpandTriphones(mono, corpus, 1000000, config);
    CHECK(same.units.size() == mono.units.size());
    CHECK(same.unit_mode == UnitMode::kMonophone);
  }

  SUBCASE("exactly the repeated trigram becomes a unit") {
    // Handmade corpus with one trigram occurring twice.
    Alphabet alphabet({{"sil", PhonemeKind::kSilence},
                       {"a", PhonemeKind::kConsonant},
                       {"b", PhonemeKind::kVowel}});
    auto make_sentence = [&](const std::string& id, std::uint64_t seed) {
      Sentence s;
      s.id = id;
      s.group = id;
      s.lips = test::RandomStream(Modality::kLips, 1, 60, seed);
      s.hand_pos = test::RandomStream(Modality::kHandPos, 1, 60, seed + 1);
      s.hand_shape = test::RandomStream(Modality::kHandShape, 1, 60, seed + 2);
      s.audio_seg.intervals = {{0, 300, "sil"},
                               {300, 500, "a"},
                               {500, 700, "b"},
                               {700, 900, "a"},
                               {900, 1200, "sil"}};
      return s;
    };
    Corpus tiny;
    tiny.alphabet = alphabet;
    tiny.sentences = {make_sentence("t1", 10), make_sentence("t2", 20)};

    MsHmmTrainConfig tc;
    tc.mixture_stages = {1};
    tc.em_iterations_per_stage = 2;
    MsHmmModel tiny_mono = TrainMsHmm(tiny, tc);
    // Trigram counts: sil-a+b x2, a-b+a x2, b-a+sil x2. Threshold 2 keeps
    // all three; threshold 3 keeps none.
    MsHmmModel expanded = ExpandTriphones(tiny_mono, tiny, 2, tc);
    CHECK(expanded.units.size() == tiny_mono.units.size() + 3);
    CHECK(expanded.unit_mode == UnitMode::kTriphone);
    CHECK(expanded.UnitIndex("a-b+a") >= 0);
    MsHmmModel none = ExpandTriphones(tiny_mono, tiny, 3, tc);
    CHECK(none.units.size() == tiny_mono.units.size());
  }

  SUBCASE("context-dependent emissions reward triphone units") {
    // Identity carried by lips alone, strongly coarticulated: monophone
    // lips mixtures blur across contexts, triphone clones separate them.
    SynthConfig ctx = sc;
    ctx.n_sentences = 60;
    ctx.min_syllables = 3;
    ctx.max_syllables = 6;
    ctx.n_vowels = 2;
    ctx.n_consonants = 2;
    ctx.n_positions = 1;
    ctx.n_shapes = 1;
    ctx.features.coarticulation_scale = 7.0;
    ctx.features.lips_noise_std = 0.8;
    ctx.hpt_noise_std_ms = 5.0;
    ctx.seed = 71;
    Corpus shifted = GenerateCorpus(ctx);
    MsHmmTrainConfig tc;
    tc.em_iterations_per_stage = 6;
    MsHmmModel base = TrainMsHmm(shifted, tc);
    MsHmmModel tri = ExpandTriphones(base, shifted, 6, tc);
    REQUIRE(tri.units.size() > base.units.size());

    auto t_corr = [&](const MsHmmModel& m) {
      std::size_t n = 0, errs = 0;
      for (const Sentence& s : shifted.sentences) {
        std::vector<std::string> ref, hyp;
        for (const Interval& iv : s.audio_seg.intervals) {
          if (shifted.alphabet.KindOf(iv.label) != PhonemeKind::kSilence) {
            ref.push_back(iv.label);
          }
        }
        DecodeResult r = ViterbiDecode(m, s);
        for (const std::string& lab : r.labels) {
          if (shifted.alphabet.KindOf(lab) != PhonemeKind::kSilence) {
            hyp.push_back(lab);
          }
        }
        AlignmentResult a = AlignLabels(ref, hyp);
        n += a.n;
        errs += a.deletions + a.substitutions;
      }
      return 1.0 - static_cast<double>(errs) / static_cast<double>(n);
    };
    CHECK(t_corr(tri) >= t_corr(base));
  }
}

TEST_CASE("weight optimization on the simplex grid") {
  SUBCASE("the informative stream wins") {
    // Lips carries every phoneme identity (one position class, one shape
    // class). Training sees hand streams that mirror the lips stream, so
    // the per-state hand models are sharp; on the dev set both hand
    // streams are pure noise, and any weight on them randomizes decisions.
    SynthConfig sc;
    sc.n_sentences = 16;
    sc.min_syllables = 3;
    sc.max_syllables = 5;
    sc.n_vowels = 4;
    sc.n_consonants = 4;
    sc.n_positions = 1;
    sc.n_shapes = 1;
    sc.hpt_noise_std_ms = 5.0;
    sc.seed = 13;
    Corpus corpus = GenerateCorpus(sc);
    for (Sentence& s : corpus.sentences) {
      s.hand_pos = s.lips;
      s.hand_pos.modality = Modality::kHandPos;
      s.hand_shape = s.lips;
      s.hand_shape.modality = Modality::kHandShape;
    }
    MsHmmTrainConfig config;
    config.em_iterations_per_stage = 5;
    MsHmmModel model = TrainMsHmm(corpus, config);

    Corpus dev = corpus;
    dev.sentences.assign(corpus.sentences.begin(),
                         corpus.sentences.begin() + 6);
    std::mt19937_64 noise_rng(99);
    std::normal_distribution<double> wild(0.0, 8.0);
    for (Sentence& s : dev.sentences) {
      for (double& v : s.hand_pos.data) v = wild(noise_rng);
      for (double& v : s.hand_shape.data) v = wild(noise_rng);
    }
    StreamWeights best = OptimizeWeights(model, dev, 0.1);
    CHECK(best.lambda[0] >= 0.8);  // lips stream
  }

  SUBCASE("identical streams tie toward uniform weights") {
    SynthConfig sc;
    sc.n_sentences = 6;
    sc.min_syllables = 2;
    sc.max_syllables = 4;
    sc.seed = 3;
    Corpus corpus = GenerateCorpus(sc);
    for (Sentence& s : corpus.sentences) {
      s.hand_pos = s.lips;
      s.hand_pos.modality = Modality::kHandPos;
      s.hand_shape = s.lips;
      s.hand_shape.modality = Modality::kHandShape;
    }
    MsHmmTrainConfig config;
    config.em_iterations_per_stage = 3;
    config.mixture_stages = {1};
    MsHmmModel model = TrainMsHmm(corpus, config);
    // Make the three stream models literally identical.
    for (HmmUnit& unit : model.units) {
      for (HmmState& state : unit.states) {
        state.stream_gmms[1] = state.stream_gmms[0];
        state.stream_gmms[2] = state.stream_gmms[0];
      }
    }
    StreamWeights best = OptimizeWeights(model, corpus, 0.1);
    for (double l : best.lambda) {
      CHECK(l >= 0.3 - 1e-12);
      CHECK(l <= 0.4 + 1e-12);
    }
  }

  SUBCASE("the paper operating point is a valid weight vector") {
    StreamWeights w;
    w.lambda = {0.4, 0.2, 0.4};  // lips, hand position, hand shape
    CHECK_NOTHROW(w.Validate());
    CHECK(StreamWeights::Defaults(3).lambda == w.lambda);
  }
}

TEST_CASE("mshmm model JSON round-trips") {
  SynthConfig sc;
  sc.n_sentences = 6;
  sc.seed = 2;
  Corpus corpus = GenerateCorpus(sc);
  MsHmmTrainConfig config;
  config.em_iterations_per_stage = 3;
  MsHmmModel model = TrainMsHmm(corpus, config);

  test::TempDir tmp("mshmm");
  SaveMsHmmModel(model, tmp.path() / "m.json");
  MsHmmModel loaded = LoadMsHmmModel(tmp.path() / "m.json");
  SaveMsHmmModel(loaded, tmp.path() / "m2.json");
  CHECK(ReadTextFile(tmp.path() / "m.json") ==
        ReadTextFile(tmp.path() / "m2.json"));

  DecodeResult a = ViterbiDecode(model, corpus.sentences[0]);
  DecodeResult b = ViterbiDecode(loaded, corpus.sentences[0]);
  CHECK(a.labels == b.labels);
  CHECK(a.log_score == doctest::Approx(b.log_score).epsilon(1e-12));
}
