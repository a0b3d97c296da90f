// core/src/resync.cc

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

#include "csrec/resync.h"

#include <cmath>

namespace csrec {

FrameStream ShiftStream(const FrameStream& stream, double lag_ms,
                        EdgePolicy edge_policy) {
  stream.Validate();
  if (lag_ms < 0) throw ValidationError("ShiftStream: lag must be >= 0");
  const std::size_t n =
      static_cast<std::size_t>(std::llround(lag_ms / stream.period_ms));
  const std::size_t frames = stream.NumFrames();
  if (n >= frames) {
    throw ValidationError("ShiftStream: lag of " + std::to_string(n) +
                          " frames spans the whole stream (" +
                          std::to_string(frames) + " frames)");
  }
  if (n == 0) return stream;

  FrameStream out;
  out.modality = stream.modality;
  out.period_ms = stream.period_ms;
  out.dim = stream.dim;
  out.data.reserve(stream.data.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (edge_policy == EdgePolicy::kReplicateFirstFrame) {
      out.AppendFrame(stream.Frame(0));
    } else {
      out.data.insert(out.data.end(), static_cast<std::size_t>(stream.dim),
                      0.0);
    }
  }
  for (std::size_t i = n; i < frames; ++i) {
    out.AppendFrame(stream.Frame(i - n));
  }
  return out;
}

Sentence ResyncSentence(const Sentence& sentence, const ResyncConfig& config) {
  if (config.delta_v_star_ms < 0 || config.delta_c_star_ms < 0) {
    throw ValidationError("ResyncSentence: lags must be >= 0");
  }
  Sentence out = sentence;
  out.hand_pos =
      ShiftStream(sentence.hand_pos, config.delta_v_star_ms,
                  config.edge_policy);
  out.hand_shape =
      ShiftStream(sentence.hand_shape, config.delta_c_star_ms,
                  config.edge_policy);
  return out;
}

Corpus ResyncCorpus(const Corpus& corpus, const ResyncConfig& config) {
  Corpus out = corpus;
  for (Sentence& s : out.sentences) {
    s = ResyncSentence(s, config);
  }
  return out;
}

FrameStream MergeStreams(const Sentence& sentence) {
  sentence.lips.Validate();
  sentence.hand_pos.Validate();
  sentence.hand_shape.Validate();
  const std::size_t frames = sentence.lips.NumFrames();
  if (sentence.hand_pos.NumFrames() != frames ||
      sentence.hand_shape.NumFrames() != frames) {
    throw ValidationError("MergeStreams: streams disagree on length");
  }
  if (sentence.hand_pos.period_ms != sentence.lips.period_ms ||
      sentence.hand_shape.period_ms != sentence.lips.period_ms) {
    throw ValidationError("MergeStreams: streams disagree on period");
  }
  FrameStream out;
  out.modality = Modality::kMerged;
  out.period_ms = sentence.lips.period_ms;
  out.dim = sentence.lips.dim + sentence.hand_pos.dim + sentence.hand_shape.dim;
  out.data.reserve(frames * static_cast<std::size_t>(out.dim));
  for (std::size_t i = 0; i < frames; ++i) {
    auto l = sentence.lips.Frame(i);
    auto p = sentence.hand_pos.Frame(i);
    auto h = sentence.hand_shape.Frame(i);
    out.data.insert(out.data.end(), l.begin(), l.end());
    out.data.insert(out.data.end(), p.begin(), p.end());
    out.data.insert(out.data.end(), h.begin(), h.end());
  }
  return out;
}

}  // namespace csrec
