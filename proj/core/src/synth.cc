// core/src/synth.cc

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

#include "csrec/synth.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "csrec/rng.h"
#include "json-util.h"

namespace csrec {

namespace {

// Hand travel time budget between a rest pose and the first/last target.
constexpr TimeMs kHandTransitMs = 240;

void CheckRange(const DurationRangeMs& r, const char* name) {
  if (r.min_ms <= 0 || r.max_ms < r.min_ms) {
    throw ValidationError(std::string("SynthConfig: bad range for ") + name);
  }
}

}  // namespace

void SynthConfig::Validate() const {
  if (n_sentences < 1) throw ValidationError("SynthConfig: n_sentences < 1");
  if (repetitions < 1) throw ValidationError("SynthConfig: repetitions < 1");
  if (min_syllables < 1 || max_syllables < min_syllables) {
    throw ValidationError("SynthConfig: bad syllable range");
  }
  if (n_vowels < 1 || n_consonants < 1) {
    throw ValidationError("SynthConfig: empty phoneme inventory");
  }
  if (n_positions < 1 || n_positions > 5) {
    throw ValidationError("SynthConfig: n_positions must be in 1..5");
  }
  if (n_shapes < 1 || n_shapes > 8) {
    throw ValidationError("SynthConfig: n_shapes must be in 1..8");
  }
  if (hpm_true.t0_ms <= 0) throw ValidationError("SynthConfig: t0 <= 0");
  if (delta_c_true_ms < 0 || hpt_noise_std_ms < 0) {
    throw ValidationError("SynthConfig: negative lag or noise");
  }
  if (d_v_ms <= 0 || d_c_ms <= 0) {
    throw ValidationError("SynthConfig: dwell lengths must be > 0");
  }
  CheckRange(consonant_dur_ms, "consonant_dur_ms");
  CheckRange(vowel_dur_ms, "vowel_dur_ms");
  CheckRange(edge_silence_ms, "edge_silence_ms");
  CheckRange(gap_silence_ms, "gap_silence_ms");
  if (gap_probability < 0 || gap_probability > 1) {
    throw ValidationError("SynthConfig: gap_probability outside [0,1]");
  }
  if (period_ms <= 0) throw ValidationError("SynthConfig: period <= 0");
  if (features.lips_dim < 1 || features.hand_pos_dim < 1 ||
      features.hand_shape_dim < 1) {
    throw ValidationError("SynthConfig: feature dims must be >= 1");
  }
  if (features.separation <= 0) {
    throw ValidationError("SynthConfig: separation must be > 0");
  }
  if (features.lips_noise_std < 0 || features.hand_pos_noise_std < 0 ||
      features.hand_shape_noise_std < 0) {
    throw ValidationError("SynthConfig: negative feature noise");
  }
}

namespace {

using internal::Json;

Json RangeToJson(const DurationRangeMs& r) {
  return Json::array({r.min_ms, r.max_ms});
}

DurationRangeMs RangeFromJson(const Json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw FormatError("synth config: range must be [min_ms, max_ms]");
  }
  return DurationRangeMs{j[0].get<TimeMs>(), j[1].get<TimeMs>()};
}

Json ConfigToJson(const SynthConfig& c) {
  Json j;
  j["n_sentences"] = c.n_sentences;
  j["repetitions"] = c.repetitions;
  j["min_syllables"] = c.min_syllables;
  j["max_syllables"] = c.max_syllables;
  j["n_vowels"] = c.n_vowels;
  j["n_consonants"] = c.n_consonants;
  j["n_positions"] = c.n_positions;
  j["n_shapes"] = c.n_shapes;
  j["hpm_true"] = {{"mean_ms", c.hpm_true.mean_ms},
                   {"t0_ms", c.hpm_true.t0_ms},
                   {"a", c.hpm_true.a},
                   {"b", c.hpm_true.b}};
  j["delta_c_true_ms"] = c.delta_c_true_ms;
  j["hpt_noise_std_ms"] = c.hpt_noise_std_ms;
  j["d_v_ms"] = c.d_v_ms;
  j["d_c_ms"] = c.d_c_ms;
  j["consonant_dur_ms"] = RangeToJson(c.consonant_dur_ms);
  j["vowel_dur_ms"] = RangeToJson(c.vowel_dur_ms);
  j["edge_silence_ms"] = RangeToJson(c.edge_silence_ms);
  j["gap_silence_ms"] = RangeToJson(c.gap_silence_ms);
  j["gap_probability"] = c.gap_probability;
  j["period_ms"] = c.period_ms;
  j["features"] = {{"lips_dim", c.features.lips_dim},
                   {"hand_pos_dim", c.features.hand_pos_dim},
                   {"hand_shape_dim", c.features.hand_shape_dim},
                   {"separation", c.features.separation},
                   {"lips_noise_std", c.features.lips_noise_std},
                   {"hand_pos_noise_std", c.features.hand_pos_noise_std},
                   {"hand_shape_noise_std", c.features.hand_shape_noise_std},
                   {"coarticulation_scale", c.features.coarticulation_scale}};
  j["seed"] = c.seed;
  return j;
}

SynthConfig ConfigFromJson(const Json& j) {
  internal::RequireKeys(
      j,
      {"n_sentences", "repetitions", "min_syllables", "max_syllables",
       "n_vowels", "n_consonants", "n_positions", "n_shapes", "hpm_true",
       "delta_c_true_ms", "hpt_noise_std_ms", "d_v_ms", "d_c_ms",
       "consonant_dur_ms", "vowel_dur_ms", "edge_silence_ms",
       "gap_silence_ms", "gap_probability", "period_ms", "features", "seed"},
      "synth config");
  SynthConfig c;
  c.n_sentences = j.value("n_sentences", c.n_sentences);
  c.repetitions = j.value("repetitions", c.repetitions);
  c.min_syllables = j.value("min_syllables", c.min_syllables);
  c.max_syllables = j.value("max_syllables", c.max_syllables);
  c.n_vowels = j.value("n_vowels", c.n_vowels);
  c.n_consonants = j.value("n_consonants", c.n_consonants);
  c.n_positions = j.value("n_positions", c.n_positions);
  c.n_shapes = j.value("n_shapes", c.n_shapes);
  if (j.contains("hpm_true")) {
    const Json& h = j.at("hpm_true");
    internal::RequireKeys(h, {"mean_ms", "t0_ms", "a", "b"}, "hpm_true");
    c.hpm_true.mean_ms = h.value("mean_ms", c.hpm_true.mean_ms);
    c.hpm_true.t0_ms = h.value("t0_ms", c.hpm_true.t0_ms);
    c.hpm_true.a = h.value("a", c.hpm_true.a);
    c.hpm_true.b = h.value("b", c.hpm_true.b);
  }
  c.delta_c_true_ms = j.value("delta_c_true_ms", c.delta_c_true_ms);
  c.hpt_noise_std_ms = j.value("hpt_noise_std_ms", c.hpt_noise_std_ms);
  c.d_v_ms = j.value("d_v_ms", c.d_v_ms);
  c.d_c_ms = j.value("d_c_ms", c.d_c_ms);
  if (j.contains("consonant_dur_ms")) {
    c.consonant_dur_ms = RangeFromJson(j.at("consonant_dur_ms"));
  }
  if (j.contains("vowel_dur_ms")) {
    c.vowel_dur_ms = RangeFromJson(j.at("vowel_dur_ms"));
  }
  if (j.contains("edge_silence_ms")) {
    c.edge_silence_ms = RangeFromJson(j.at("edge_silence_ms"));
  }
  if (j.contains("gap_silence_ms")) {
    c.gap_silence_ms = RangeFromJson(j.at("gap_silence_ms"));
  }
  c.gap_probability = j.value("gap_probability", c.gap_probability);
  c.period_ms = j.value("period_ms", c.period_ms);
  if (j.contains("features")) {
    const Json& f = j.at("features");
    internal::RequireKeys(f,
                          {"lips_dim", "hand_pos_dim", "hand_shape_dim",
                           "separation", "lips_noise_std",
                           "hand_pos_noise_std", "hand_shape_noise_std",
                           "coarticulation_scale"},
                          "synth features");
    c.features.lips_dim = f.value("lips_dim", c.features.lips_dim);
    c.features.hand_pos_dim = f.value("hand_pos_dim", c.features.hand_pos_dim);
    c.features.hand_shape_dim =
        f.value("hand_shape_dim", c.features.hand_shape_dim);
    c.features.separation = f.value("separation", c.features.separation);
    c.features.lips_noise_std =
        f.value("lips_noise_std", c.features.lips_noise_std);
    c.features.hand_pos_noise_std =
        f.value("hand_pos_noise_std", c.features.hand_pos_noise_std);
    c.features.hand_shape_noise_std =
        f.value("hand_shape_noise_std", c.features.hand_shape_noise_std);
    c.features.coarticulation_scale =
        f.value("coarticulation_scale", c.features.coarticulation_scale);
  }
  c.seed = j.value("seed", c.seed);
  c.Validate();
  return c;
}

}  // namespace

SynthConfig LoadSynthConfig(const std::filesystem::path& path) {
  return ConfigFromJson(internal::ReadJsonFile(path));
}

void SaveSynthConfig(const SynthConfig& config,
                     const std::filesystem::path& path) {
  internal::WriteJsonFile(path, ConfigToJson(config));
}

namespace {

int SymbolIndex(const std::string& symbol) {
  return std::stoi(symbol.substr(1));
}

// Distinct, well separated class means: one scaled coordinate per class,
// sign alternating with the level so classes spread both ways.
std::vector<double> LatticeMean(int class_index, int dim, double separation) {
  std::vector<double> m(dim, 0.0);
  int axis = class_index % dim;
  int level = class_index / dim + 1;
  double v = separation * level;
  m[axis] = (level % 2 == 0) ? -v : v;
  return m;
}

std::vector<double> CircleMean(int class_index, int n_classes, int dim,
                               double separation) {
  std::vector<double> m(dim, 0.0);
  double angle =
      2.0 * std::numbers::pi * class_index / std::max(1, n_classes);
  m[0] = separation * std::cos(angle);
  if (dim > 1) m[1] = separation * std::sin(angle);
  return m;
}

// Emitter geometry shared by the three modalities.
struct EmitterBank {
  int n_positions = 0;
  int n_shapes = 0;
  std::vector<std::vector<double>> position_means;  // + rest at index n
  std::vector<std::vector<double>> shape_means;     // + rest at index n
  std::vector<std::vector<double>> lips_means;      // viseme id -> mean
  std::vector<double> lips_sil_mean;
  int n_vowel_visemes = 0;

  explicit EmitterBank(const SynthConfig& c) {
    n_positions = c.n_positions;
    n_shapes = c.n_shapes;
    const SynthFeatureModel& f = c.features;
    for (int k = 0; k < c.n_positions; ++k) {
      position_means.push_back(f.hand_pos_dim >= 2
                                   ? CircleMean(k, c.n_positions,
                                                f.hand_pos_dim, f.separation)
                                   : LatticeMean(k, f.hand_pos_dim,
                                                 f.separation));
    }
    position_means.push_back(std::vector<double>(f.hand_pos_dim, 0.0));
    for (int k = 0; k < c.n_shapes; ++k) {
      shape_means.push_back(LatticeMean(k, f.hand_shape_dim, f.separation));
    }
    shape_means.push_back(std::vector<double>(f.hand_shape_dim, 0.0));

    n_vowel_visemes = (c.n_vowels + c.n_positions - 1) / c.n_positions;
    int n_consonant_visemes = (c.n_consonants + c.n_shapes - 1) / c.n_shapes;
    for (int k = 0; k < n_vowel_visemes + n_consonant_visemes; ++k) {
      lips_means.push_back(LatticeMean(k, f.lips_dim, f.separation));
    }
    lips_sil_mean.assign(f.lips_dim, 0.0);
  }

  const std::vector<double>& LipsMean(const Alphabet& alphabet,
                                      const std::string& symbol) const {
    switch (alphabet.KindOf(symbol)) {
      case PhonemeKind::kSilence:
        return lips_sil_mean;
      case PhonemeKind::kVowel:
        return lips_means[SymbolIndex(symbol) / n_positions];
      case PhonemeKind::kConsonant:
        return lips_means[n_vowel_visemes + SymbolIndex(symbol) / n_shapes];
    }
    return lips_sil_mean;
  }
};

struct HandAnchor {
  TimeMs dwell_start_ms = 0;
  TimeMs dwell_end_ms = 0;
  const std::vector<double>* mean = nullptr;
};

// Piecewise hand path: class mean inside a dwell, linear travel between
// consecutive dwells.
std::vector<double> HandPathValue(const std::vector<HandAnchor>& anchors,
                                  TimeMs t, int dim) {
  std::size_t k = 0;
  while (k + 1 < anchors.size() && anchors[k + 1].dwell_start_ms <= t) ++k;
  const HandAnchor& cur = anchors[k];
  if (t <= cur.dwell_end_ms || k + 1 == anchors.size()) {
    return *cur.mean;
  }
  const HandAnchor& next = anchors[k + 1];
  double span =
      static_cast<double>(next.dwell_start_ms - cur.dwell_end_ms);
  if (span <= 0) return *next.mean;
  double w = static_cast<double>(t - cur.dwell_end_ms) / span;
  std::vector<double> v(dim);
  for (int d = 0; d < dim; ++d) {
    v[d] = (1.0 - w) * (*cur.mean)[d] + w * (*next.mean)[d];
  }
  return v;
}

struct ShiftOutcome {
  Segmentation seg;
  std::vector<double> deltas;  // realized lag per interval, audio order
  int clamped = 0;
  int truncated = 0;
};

// Moves same-kind audio intervals earlier by their sampled lags, keeping the
// tier well formed. Throws when lags would reorder targets.
ShiftOutcome BuildTruthTier(const std::vector<Interval>& audio_intervals,
                            const std::vector<double>& lags, Tier tier,
                            const std::string& sentence_id) {
  ShiftOutcome out;
  out.seg.tier = tier;
  for (std::size_t k = 0; k < audio_intervals.size(); ++k) {
    TimeMs shift = static_cast<TimeMs>(std::llround(lags[k]));
    Interval iv{audio_intervals[k].start_ms - shift,
                audio_intervals[k].end_ms - shift, audio_intervals[k].label};
    if (iv.start_ms < 0) {
      iv.start_ms = 0;
      ++out.clamped;
      if (iv.end_ms <= iv.start_ms) iv.end_ms = iv.start_ms + 1;
    }
    if (!out.seg.intervals.empty()) {
      Interval& prev = out.seg.intervals.back();
      if (iv.start_ms < prev.start_ms) {
        throw ValidationError(
            "GenerateCorpus: sampled lags reorder hand targets in sentence " +
            sentence_id + "; lower hpt_noise_std_ms or spread syllables");
      }
      if (prev.end_ms > iv.start_ms) {
        prev.end_ms = iv.start_ms;
        ++out.truncated;
        if (prev.end_ms <= prev.start_ms) {
          throw ValidationError(
              "GenerateCorpus: hand target interval collapsed in sentence " +
              sentence_id);
        }
      }
    }
    out.seg.intervals.push_back(iv);
  }
  // Realized lag = audio midpoint minus final target midpoint, so clamping
  // and truncation are reflected in the stored truth.
  for (std::size_t k = 0; k < audio_intervals.size(); ++k) {
    out.deltas.push_back(static_cast<double>(
        audio_intervals[k].MidpointMs() - out.seg.intervals[k].MidpointMs()));
  }
  return out;
}

TimeMs SampleDuration(std::mt19937_64& rng, const DurationRangeMs& r) {
  std::uniform_int_distribution<TimeMs> d(r.min_ms, r.max_ms);
  return d(rng);
}

double SampleLagNoise(std::mt19937_64& rng, double std_dev) {
  if (std_dev <= 0) return 0.0;
  std::normal_distribution<double> n(0.0, std_dev);
  return std::clamp(n(rng), -3.0 * std_dev, 3.0 * std_dev);
}

struct SentenceCounters {
  int clamped = 0;
  int truncated = 0;
};

Sentence GenerateSentence(const SynthConfig& c, const Alphabet& alphabet,
                          const EmitterBank& bank, int index,
                          SentenceCounters* counters) {
  const int base = index / c.repetitions;
  std::mt19937_64 text_rng = MakeRng(c.seed, "synth.text", base);
  std::mt19937_64 rng = MakeRng(c.seed, "synth.sentence", index);

  // Shared text across renditions of one repetition group.
  std::uniform_int_distribution<int> syll_count(c.min_syllables,
                                                c.max_syllables);
  const int n_syllables = syll_count(text_rng);
  std::uniform_int_distribution<int> pick_c(0, c.n_consonants - 1);
  std::uniform_int_distribution<int> pick_v(0, c.n_vowels - 1);
  std::vector<std::pair<int, int>> syllables;
  for (int k = 0; k < n_syllables; ++k) {
    syllables.emplace_back(pick_c(text_rng), pick_v(text_rng));
  }

  Sentence s;
  {
    std::ostringstream sid, gid;
    sid << "s" << std::setw(5) << std::setfill('0') << index;
    gid << "g" << std::setw(5) << std::setfill('0') << base;
    s.id = sid.str();
    s.group = gid.str();
  }

  // Audio timeline: silence, CV syllables with occasional gaps, silence.
  std::bernoulli_distribution gap(c.gap_probability);
  TimeMs t = 0;
  s.audio_seg.tier = Tier::kAudio;
  auto push = [&](TimeMs dur, const std::string& label) {
    s.audio_seg.intervals.push_back(Interval{t, t + dur, label});
    t += dur;
  };
  push(SampleDuration(rng, c.edge_silence_ms), "sil");
  for (int k = 0; k < n_syllables; ++k) {
    push(SampleDuration(rng, c.consonant_dur_ms),
         "c" + std::to_string(syllables[k].first));
    push(SampleDuration(rng, c.vowel_dur_ms),
         "v" + std::to_string(syllables[k].second));
    if (k + 1 < n_syllables && gap(rng)) {
      push(SampleDuration(rng, c.gap_silence_ms), "sil");
    }
  }
  push(SampleDuration(rng, c.edge_silence_ms), "sil");
  const TimeMs total_ms = t;
  const TimeMs speech_end_ms = SentenceEndMs(s.audio_seg, alphabet);

  // Sampled hand preceding times.
  std::vector<Interval> vowel_ivs, consonant_ivs;
  for (const Interval& iv : s.audio_seg.intervals) {
    PhonemeKind kind = alphabet.KindOf(iv.label);
    if (kind == PhonemeKind::kVowel) vowel_ivs.push_back(iv);
    if (kind == PhonemeKind::kConsonant) consonant_ivs.push_back(iv);
  }
  std::vector<double> vowel_lags, consonant_lags;
  for (const Interval& iv : vowel_ivs) {
    double u = static_cast<double>(speech_end_ms - iv.MidpointMs());
    vowel_lags.push_back(PredictDelta(c.hpm_true, std::max(0.0, u)) +
                         SampleLagNoise(rng, c.hpt_noise_std_ms));
  }
  for (std::size_t k = 0; k < consonant_ivs.size(); ++k) {
    consonant_lags.push_back(c.delta_c_true_ms +
                             SampleLagNoise(rng, c.hpt_noise_std_ms));
  }

  SentenceTruth truth;
  ShiftOutcome pos = BuildTruthTier(vowel_ivs, vowel_lags,
                                    Tier::kHandPosTier, s.id);
  ShiftOutcome shp = BuildTruthTier(consonant_ivs, consonant_lags,
                                    Tier::kHandShapeTier, s.id);
  truth.hand_pos_seg = pos.seg;
  truth.hand_shape_seg = shp.seg;
  truth.delta_v_ms = pos.deltas;
  truth.delta_c_ms = shp.deltas;
  counters->clamped += pos.clamped + shp.clamped;
  counters->truncated += pos.truncated + shp.truncated;
  s.truth = std::move(truth);

  const std::size_t n_frames =
      static_cast<std::size_t>((total_ms + c.period_ms - 1) / c.period_ms);

  // Lips: synchronous with the audio tier, viseme-level classes, optional
  // left-context shift.
  {
    const SynthFeatureModel& f = c.features;
    std::normal_distribution<double> noise(0.0, 1.0);
    FrameStream lips;
    lips.modality = Modality::kLips;
    lips.period_ms = c.period_ms;
    lips.dim = f.lips_dim;
    std::size_t seg_pos = 0;
    for (std::size_t i = 0; i < n_frames; ++i) {
      TimeMs ft = static_cast<TimeMs>(i) * c.period_ms;
      while (seg_pos + 1 < s.audio_seg.intervals.size() &&
             ft >= s.audio_seg.intervals[seg_pos].end_ms) {
        ++seg_pos;
      }
      const std::string& label = s.audio_seg.intervals[seg_pos].label;
      const std::vector<double>& mean = bank.LipsMean(alphabet, label);
      double ctx_shift = 0.0;
      int ctx_axis = 0;
      if (f.coarticulation_scale != 0.0 && seg_pos > 0 &&
          alphabet.KindOf(label) != PhonemeKind::kSilence) {
        int left = alphabet.IndexOf(s.audio_seg.intervals[seg_pos - 1].label);
        ctx_axis = left % f.lips_dim;
        ctx_shift = ((left / f.lips_dim) % 2 == 0)
                        ? f.coarticulation_scale
                        : -f.coarticulation_scale;
      }
      for (int d = 0; d < f.lips_dim; ++d) {
        double v = mean[d] + f.lips_noise_std * noise(rng);
        if (d == ctx_axis) v += ctx_shift;
        lips.data.push_back(v);
      }
    }
    s.lips = std::move(lips);
  }

  // Hand streams: dwell at each target, linear travel in between.
  auto render_hand = [&](const Segmentation& tier, double dwell_ms,
                         const std::vector<std::vector<double>>& means,
                         auto&& class_of, int dim, double noise_std,
                         Modality modality) {
    std::vector<HandAnchor> anchors;
    const std::vector<double>& rest = means.back();
    TimeMs first_target =
        tier.intervals.empty() ? total_ms : tier.intervals.front().MidpointMs();
    anchors.push_back(HandAnchor{
        0, std::max<TimeMs>(0, first_target - static_cast<TimeMs>(dwell_ms) / 2 -
                                   kHandTransitMs),
        &rest});
    for (const Interval& iv : tier.intervals) {
      TimeMs mid = iv.MidpointMs();
      TimeMs half = static_cast<TimeMs>(dwell_ms) / 2;
      anchors.push_back(HandAnchor{std::max<TimeMs>(0, mid - half), mid + half,
                                   &means[class_of(iv.label)]});
    }
    TimeMs last_end = anchors.back().dwell_end_ms;
    anchors.push_back(HandAnchor{
        std::min(total_ms, last_end + kHandTransitMs), total_ms, &rest});

    std::normal_distribution<double> noise(0.0, 1.0);
    FrameStream stream;
    stream.modality = modality;
    stream.period_ms = c.period_ms;
    stream.dim = dim;
    for (std::size_t i = 0; i < n_frames; ++i) {
      TimeMs ft = static_cast<TimeMs>(i) * c.period_ms;
      std::vector<double> v = HandPathValue(anchors, ft, dim);
      for (int d = 0; d < dim; ++d) {
        stream.data.push_back(v[d] + noise_std * noise(rng));
      }
    }
    return stream;
  };

  SynthClassMap map{c.n_vowels, c.n_consonants, c.n_positions, c.n_shapes};
  s.hand_pos = render_hand(
      s.truth->hand_pos_seg, c.d_v_ms, bank.position_means,
      [&](const std::string& sym) { return map.PositionClass(sym); },
      c.features.hand_pos_dim, c.features.hand_pos_noise_std,
      Modality::kHandPos);
  s.hand_shape = render_hand(
      s.truth->hand_shape_seg, c.d_c_ms, bank.shape_means,
      [&](const std::string& sym) { return map.ShapeClass(sym); },
      c.features.hand_shape_dim, c.features.hand_shape_noise_std,
      Modality::kHandShape);
  return s;
}

}  // namespace

Corpus GenerateCorpus(const SynthConfig& config) {
  config.Validate();

  std::vector<PhonemeInfo> entries;
  entries.push_back(PhonemeInfo{"sil", PhonemeKind::kSilence});
  for (int i = 0; i < config.n_vowels; ++i) {
    entries.push_back(
        PhonemeInfo{"v" + std::to_string(i), PhonemeKind::kVowel});
  }
  for (int j = 0; j < config.n_consonants; ++j) {
    entries.push_back(
        PhonemeInfo{"c" + std::to_string(j), PhonemeKind::kConsonant});
  }

  Corpus corpus;
  corpus.alphabet = Alphabet(std::move(entries));
  corpus.period_ms = config.period_ms;

  EmitterBank bank(config);
  SentenceCounters counters;
  const int total = config.n_sentences * config.repetitions;
  for (int i = 0; i < total; ++i) {
    corpus.sentences.push_back(
        GenerateSentence(config, corpus.alphabet, bank, i, &counters));
  }

  corpus.metadata["generator"] = "synth";
  corpus.metadata["synth_config"] = ConfigToJson(config).dump();
  corpus.metadata["clamped_intervals"] = std::to_string(counters.clamped);
  corpus.metadata["truncated_intervals"] = std::to_string(counters.truncated);
  corpus.metadata["n_vowels"] = std::to_string(config.n_vowels);
  corpus.metadata["n_consonants"] = std::to_string(config.n_consonants);
  corpus.metadata["n_positions"] = std::to_string(config.n_positions);
  corpus.metadata["n_shapes"] = std::to_string(config.n_shapes);

  corpus.Validate();
  return corpus;
}

HptMeasurements MeasureEmpiricalHpt(const Corpus& corpus) {
  HptMeasurements out;
  for (const Sentence& s : corpus.sentences) {
    if (!s.truth.has_value()) {
      throw ValidationError(
          "MeasureEmpiricalHpt: sentence " + s.id +
          " has no truth tiers; use a corpus produced by GenerateCorpus");
    }
    const TimeMs end = SentenceEndMs(s.audio_seg, corpus.alphabet);
    std::vector<const Interval*> vowels, consonants;
    for (const Interval& iv : s.audio_seg.intervals) {
      PhonemeKind kind = corpus.alphabet.KindOf(iv.label);
      if (kind == PhonemeKind::kVowel) vowels.push_back(&iv);
      if (kind == PhonemeKind::kConsonant) consonants.push_back(&iv);
    }
    if (vowels.size() != s.truth->hand_pos_seg.intervals.size() ||
        consonants.size() != s.truth->hand_shape_seg.intervals.size()) {
      throw ValidationError("MeasureEmpiricalHpt: truth tiers of sentence " +
                            s.id + " do not match the audio tier");
    }
    for (std::size_t k = 0; k < vowels.size(); ++k) {
      const Interval& target = s.truth->hand_pos_seg.intervals[k];
      out.vowels.push_back(HptObservation{
          static_cast<double>(end - vowels[k]->MidpointMs()),
          static_cast<double>(vowels[k]->MidpointMs() - target.MidpointMs()),
          s.id, vowels[k]->label});
    }
    for (std::size_t k = 0; k < consonants.size(); ++k) {
      const Interval& target = s.truth->hand_shape_seg.intervals[k];
      out.consonants.push_back(HptObservation{
          static_cast<double>(end - consonants[k]->MidpointMs()),
          static_cast<double>(consonants[k]->MidpointMs() -
                              target.MidpointMs()),
          s.id, consonants[k]->label});
    }
  }
  return out;
}

SynthClassMap SynthClassMap::FromCorpus(const Corpus& corpus) {
  SynthClassMap map;
  auto get = [&](const char* key) {
    auto it = corpus.metadata.find(key);
    if (it == corpus.metadata.end()) {
      throw ValidationError(
          std::string("SynthClassMap: corpus metadata lacks ") + key);
    }
    return std::stoi(it->second);
  };
  map.n_vowels = get("n_vowels");
  map.n_consonants = get("n_consonants");
  map.n_positions = get("n_positions");
  map.n_shapes = get("n_shapes");
  return map;
}

int SynthClassMap::PositionClass(const std::string& vowel_symbol) const {
  return SymbolIndex(vowel_symbol) % n_positions;
}

int SynthClassMap::ShapeClass(const std::string& consonant_symbol) const {
  return SymbolIndex(consonant_symbol) % n_shapes;
}

}  // namespace csrec
