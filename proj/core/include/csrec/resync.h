// core/include/csrec/resync.h

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

#ifndef CSREC_RESYNC_H_
#define CSREC_RESYNC_H_

#include "csrec/hpm.h"
#include "csrec/types.h"

namespace csrec {

// Re-synchronization: the hand leads the voice, so delaying the hand
// position stream by delta_v* and the hand shape stream by delta_c* makes
// all three streams statistically synchronous before fusion.

enum class EdgePolicy { kReplicateFirstFrame, kZeros };

struct ResyncConfig {
  double delta_v_star_ms = kDefaultDeltaVStarMs;
  double delta_c_star_ms = kDefaultDeltaCStarMs;
  EdgePolicy edge_policy = EdgePolicy::kReplicateFirstFrame;
};

// Delays a stream by lag_ms rounded to whole frames: output[i] = input[i-n],
// the leading n frames filled per edge policy, length preserved (the last n
// input frames fall off the end). Errors when the lag spans the stream.
FrameStream ShiftStream(const FrameStream& stream, double lag_ms,
                        EdgePolicy edge_policy = EdgePolicy::kReplicateFirstFrame);

// Applies ShiftStream to hand position (delta_v*) and hand shape (delta_c*);
// lips and all segmentations stay put.
Sentence ResyncSentence(const Sentence& sentence, const ResyncConfig& config);

Corpus ResyncCorpus(const Corpus& corpus, const ResyncConfig& config);

// Frame-wise concatenation [lips; hand_pos; hand_shape]. Streams must agree
// on length and period.
FrameStream MergeStreams(const Sentence& sentence);

}  // namespace csrec

#endif  // CSREC_RESYNC_H_
