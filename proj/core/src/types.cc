// core/src/types.cc

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

#include "csrec/types.h"

#include <cmath>
#include <sstream>

namespace csrec {

std::string ModalityName(Modality m) {
  switch (m) {
    case Modality::kLips: return "L";
    case Modality::kHandPos: return "P";
    case Modality::kHandShape: return "S";
    case Modality::kMerged: return "LPS";
  }
  return "?";
}

std::string TierName(Tier t) {
  switch (t) {
    case Tier::kAudio: return "audio";
    case Tier::kHandPosTier: return "hand_pos";
    case Tier::kHandShapeTier: return "hand_shape";
  }
  return "?";
}

std::string PhonemeKindName(PhonemeKind k) {
  switch (k) {
    case PhonemeKind::kVowel: return "vowel";
    case PhonemeKind::kConsonant: return "consonant";
    case PhonemeKind::kSilence: return "silence";
  }
  return "?";
}

PhonemeKind PhonemeKindFromName(const std::string& name) {
  if (name == "vowel") return PhonemeKind::kVowel;
  if (name == "consonant") return PhonemeKind::kConsonant;
  if (name == "silence") return PhonemeKind::kSilence;
  throw ValidationError("unknown phoneme kind: " + name);
}

std::int64_t FrameIndex(TimeMs t, int period_ms) {
  if (t < 0) throw ValidationError("FrameIndex: negative time");
  if (period_ms <= 0) throw ValidationError("FrameIndex: period must be > 0");
  return t / period_ms;
}

void FrameStream::AppendFrame(std::span<const double> values) {
  if (dim == 0) dim = static_cast<int>(values.size());
  if (static_cast<int>(values.size()) != dim) {
    throw ValidationError("AppendFrame: expected dim " + std::to_string(dim) +
                          ", got " + std::to_string(values.size()));
  }
  data.insert(data.end(), values.begin(), values.end());
}

void FrameStream::Validate() const {
  if (dim < 1) throw ValidationError("stream: dim must be >= 1");
  if (period_ms <= 0) throw ValidationError("stream: period must be > 0");
  if (data.empty()) throw ValidationError("stream: no frames");
  if (data.size() % static_cast<std::size_t>(dim) != 0) {
    throw ValidationError("stream: data size not a multiple of dim");
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw ValidationError("stream: non-finite value");
  }
}

Alphabet::Alphabet(std::vector<PhonemeInfo> entries)
    : entries_(std::move(entries)) {
  for (int i = 0; i < static_cast<int>(entries_.size()); ++i) {
    auto [it, inserted] = index_.emplace(entries_[i].symbol, i);
    if (!inserted) {
      throw ValidationError("alphabet: duplicate symbol '" +
                            entries_[i].symbol + "'");
    }
  }
}

int Alphabet::IndexOf(const std::string& symbol) const {
  auto it = index_.find(symbol);
  return it == index_.end() ? -1 : it->second;
}

PhonemeKind Alphabet::KindOf(const std::string& symbol) const {
  int i = IndexOf(symbol);
  if (i < 0) {
    throw ValidationError("alphabet: unknown symbol '" + symbol + "'");
  }
  return entries_[static_cast<std::size_t>(i)].kind;
}

void Segmentation::Validate(const Alphabet* alphabet) const {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const Interval& iv = intervals[i];
    std::ostringstream at;
    at << TierName(tier) << " interval " << i;
    if (iv.start_ms < 0) {
      throw ValidationError(at.str() + ": negative start");
    }
    if (iv.end_ms <= iv.start_ms) {
      throw ValidationError(at.str() + ": end must be > start");
    }
    if (i > 0 && iv.start_ms < intervals[i - 1].start_ms) {
      throw ValidationError(at.str() + ": intervals not sorted by start");
    }
    if (i > 0 && iv.start_ms < intervals[i - 1].end_ms) {
      throw ValidationError(at.str() + ": overlaps previous interval");
    }
    if (alphabet != nullptr && !alphabet->Contains(iv.label)) {
      throw ValidationError(at.str() + ": unknown label '" + iv.label + "'");
    }
  }
}

TimeMs SentenceEndMs(const Segmentation& audio_seg, const Alphabet& alphabet) {
  TimeMs end = 0;
  for (const Interval& iv : audio_seg.intervals) {
    if (alphabet.KindOf(iv.label) != PhonemeKind::kSilence) {
      end = std::max(end, iv.end_ms);
    }
  }
  if (end == 0 && !audio_seg.intervals.empty()) {
    end = audio_seg.intervals.back().end_ms;
  }
  return end;
}

void Sentence::Validate(const Alphabet* alphabet) const {
  lips.Validate();
  hand_pos.Validate();
  hand_shape.Validate();
  if (lips.period_ms != hand_pos.period_ms ||
      lips.period_ms != hand_shape.period_ms) {
    throw ValidationError("sentence " + id + ": streams disagree on period");
  }
  audio_seg.Validate(alphabet);
  TimeMs duration = lips.DurationMs();
  for (const Interval& iv : audio_seg.intervals) {
    if (iv.end_ms > duration) {
      throw ValidationError("sentence " + id +
                            ": audio segmentation exceeds stream duration");
    }
  }
  if (truth.has_value()) {
    truth->hand_pos_seg.Validate(alphabet);
    truth->hand_shape_seg.Validate(alphabet);
  }
}

void Corpus::Validate() const {
  for (const Sentence& s : sentences) {
    s.Validate(&alphabet);
    if (s.lips.period_ms != period_ms) {
      throw ValidationError("sentence " + s.id +
                            ": period differs from corpus period");
    }
  }
}

bool Corpus::HasTruth() const {
  if (sentences.empty()) return false;
  for (const Sentence& s : sentences) {
    if (!s.truth.has_value()) return false;
  }
  return true;
}

}  // namespace csrec
