// core/src/mshmm-internal.h

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

#ifndef CSREC_SRC_MSHMM_INTERNAL_H_
#define CSREC_SRC_MSHMM_INTERNAL_H_

#include <span>
#include <vector>

#include "csrec/mshmm.h"

namespace csrec {
namespace internal {

// Flattening of (unit, state) pairs into one global state index space.
struct StateLayout {
  explicit StateLayout(const MsHmmModel& model);
  int n_states = 0;
  std::vector<int> offsets;   // per unit: first global state
  std::vector<int> unit_of;   // per global state
  std::vector<int> state_of;  // per global state
};

// Per-stream log-densities for every (frame, global state); weights enter
// only when scores are combined, so one table serves any lambda.
struct StreamScores {
  std::size_t n_frames = 0;
  std::size_t n_states = 0;
  int period_ms = kDefaultPeriodMs;
  std::vector<std::vector<double>> per_stream;  // s -> frame * n_states + gs
};

StreamScores BuildStreamScores(const MsHmmModel& model,
                               const ObservationSequence& obs);

void CombineScores(const StreamScores& scores, std::span<const double> lambda,
                   std::size_t frame, std::vector<double>* out);

DecodeResult DecodeFromScores(const MsHmmModel& model,
                              const StreamScores& scores,
                              std::span<const double> lambda);

double ForwardFromScores(const MsHmmModel& model, const StreamScores& scores,
                         std::span<const double> lambda);

}  // namespace internal
}  // namespace csrec

#endif  // CSREC_SRC_MSHMM_INTERNAL_H_
