// core/include/csrec/types.h

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

#ifndef CSREC_TYPES_H_
#define CSREC_TYPES_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace csrec {

// Integer milliseconds from sentence start. All boundaries and durations in
// the toolkit live on this axis; frames are sampled at a fixed period.
using TimeMs = std::int64_t;

// 50 fps video.
constexpr int kDefaultPeriodMs = 20;

// Raised on malformed input files (bad header, ragged rows, ...).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a value violates a structural invariant (interval overlap,
// inconsistent dimensions, invalid config, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Modality { kLips, kHandPos, kHandShape, kMerged };

enum class PhonemeKind { kVowel, kConsonant, kSilence };

enum class Tier { kAudio, kHandPosTier, kHandShapeTier };

std::string ModalityName(Modality m);
std::string TierName(Tier t);
std::string PhonemeKindName(PhonemeKind k);
PhonemeKind PhonemeKindFromName(const std::string& name);

// Index of the frame containing instant t. Requires t >= 0 and period > 0.
std::int64_t FrameIndex(TimeMs t, int period_ms);

// Fixed-rate sequence of feature vectors for one modality. Frames are stored
// row-major; all rows share dimension dim.
struct FrameStream {
  Modality modality = Modality::kLips;
  int period_ms = kDefaultPeriodMs;
  int dim = 0;
  std::vector<double> data;

  std::size_t NumFrames() const {
    return dim > 0 ? data.size() / static_cast<std::size_t>(dim) : 0;
  }
  std::span<const double> Frame(std::size_t i) const {
    return {data.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  std::span<double> Frame(std::size_t i) {
    return {data.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  void AppendFrame(std::span<const double> values);
  TimeMs DurationMs() const {
    return static_cast<TimeMs>(NumFrames()) * period_ms;
  }

  // Non-empty, consistent row length, every component finite.
  void Validate() const;

  bool operator==(const FrameStream&) const = default;
};

struct PhonemeInfo {
  std::string symbol;
  PhonemeKind kind = PhonemeKind::kSilence;

  bool operator==(const PhonemeInfo&) const = default;
};

// Declared phoneme inventory of a corpus. Symbol order is significant: it is
// the deterministic tie-break order used by classifiers and decoders.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<PhonemeInfo> entries);

  bool Contains(const std::string& symbol) const {
    return index_.count(symbol) > 0;
  }
  // -1 when absent.
  int IndexOf(const std::string& symbol) const;
  // Throws ValidationError when absent.
  PhonemeKind KindOf(const std::string& symbol) const;
  const std::vector<PhonemeInfo>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool operator==(const Alphabet& other) const {
    return entries_ == other.entries_;
  }

 private:
  std::vector<PhonemeInfo> entries_;
  std::unordered_map<std::string, int> index_;
};

struct Interval {
  TimeMs start_ms = 0;
  TimeMs end_ms = 0;
  std::string label;

  TimeMs MidpointMs() const { return (start_ms + end_ms) / 2; }
  TimeMs DurationMs() const { return end_ms - start_ms; }

  bool operator==(const Interval&) const = default;
};

// Ordered, labeled, non-overlapping intervals on one tier. Gaps between
// intervals are allowed (silence need not be annotated).
struct Segmentation {
  Tier tier = Tier::kAudio;
  std::vector<Interval> intervals;

  // Sorted starts, end > start, no overlap. With an alphabet, also checks
  // every label is declared. Throws ValidationError citing the interval
  // index of the first violation.
  void Validate(const Alphabet* alphabet = nullptr) const;

  bool operator==(const Segmentation&) const = default;
};

// End of the last non-silence interval; the origin for time-to-end
// coordinates. Falls back to the last interval when everything is silence.
TimeMs SentenceEndMs(const Segmentation& audio_seg, const Alphabet& alphabet);

// Ground-truth annotations a synthetic corpus carries. The hand tiers hold
// only their own kind: vowel target intervals on the hand-position tier,
// consonant target intervals on the hand-shape tier. Lags are listed in
// audio order of the matching kind.
struct SentenceTruth {
  Segmentation hand_pos_seg;
  Segmentation hand_shape_seg;
  std::vector<double> delta_v_ms;
  std::vector<double> delta_c_ms;

  bool operator==(const SentenceTruth&) const = default;
};

struct Sentence {
  std::string id;
  // Repetition group: split_corpus never separates sentences of one group.
  std::string group;
  FrameStream lips;
  FrameStream hand_pos;
  FrameStream hand_shape;
  Segmentation audio_seg;
  std::optional<SentenceTruth> truth;

  // Streams share a period, audio_seg within stream duration, truth tiers
  // valid when present.
  void Validate(const Alphabet* alphabet = nullptr) const;

  bool operator==(const Sentence&) const = default;
};

struct Corpus {
  Alphabet alphabet;
  int period_ms = kDefaultPeriodMs;
  std::vector<Sentence> sentences;
  std::map<std::string, std::string> metadata;

  void Validate() const;
  bool HasTruth() const;

  bool operator==(const Corpus&) const = default;
};

}  // namespace csrec

#endif  // CSREC_TYPES_H_
