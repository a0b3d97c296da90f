// core/include/csrec/eval.h

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

#ifndef CSREC_EVAL_H_
#define CSREC_EVAL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "csrec/types.h"

namespace csrec {

// Alignment counts against a reference label sequence. Correctness ignores
// insertions (the paper's metric); accuracy subtracts them too.
struct AlignmentResult {
  std::size_t n = 0;  // reference length
  std::size_t hits = 0;
  std::size_t deletions = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  // (ref index or -1, hyp index or -1) per alignment step.
  std::vector<std::pair<int, int>> pairs;

  double Correctness() const {
    return static_cast<double>(n - deletions - substitutions) /
           static_cast<double>(n);
  }
  double Accuracy() const {
    return (static_cast<double>(n) - static_cast<double>(deletions) -
            static_cast<double>(substitutions) -
            static_cast<double>(insertions)) /
           static_cast<double>(n);
  }
};

// Minimum-edit-distance alignment with unit costs. Among optimal alignments
// the traceback prefers, from the sequence end backwards, match over
// substitution over deletion over insertion. Reference must be non-empty.
AlignmentResult AlignLabels(const std::vector<std::string>& reference,
                            const std::vector<std::string>& hypothesis);

struct CorpusSplit {
  Corpus train;
  Corpus test;
};

// Random split at repetition-group granularity: a sentence and its
// repetitions land on the same side. Deterministic per seed.
CorpusSplit SplitCorpus(const Corpus& corpus, double train_fraction,
                        std::uint64_t seed);

double Mean(const std::vector<double>& values);
double SampleStd(const std::vector<double>& values);

}  // namespace csrec

#endif  // CSREC_EVAL_H_
