// core/src/eval.cc

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

#include "csrec/eval.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "csrec/rng.h"

namespace csrec {

AlignmentResult AlignLabels(const std::vector<std::string>& reference,
                            const std::vector<std::string>& hypothesis) {
  if (reference.empty()) {
    throw ValidationError("AlignLabels: empty reference");
  }
  const std::size_t n = reference.size();
  const std::size_t m = hypothesis.size();

  // d[i][j]: edit distance between ref[0..i) and hyp[0..j).
  std::vector<std::vector<std::size_t>> d(n + 1,
                                          std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub =
          d[i - 1][j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }

  AlignmentResult result;
  result.n = n;
  std::size_t i = n, j = m;
  std::vector<std::pair<int, int>> rpairs;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && reference[i - 1] == hypothesis[j - 1] &&
        d[i][j] == d[i - 1][j - 1]) {
      ++result.hits;
      rpairs.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
      --i;
      --j;
    } else if (i > 0 && j > 0 && reference[i - 1] != hypothesis[j - 1] &&
               d[i][j] == d[i - 1][j - 1] + 1) {
      ++result.substitutions;
      rpairs.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++result.deletions;
      rpairs.emplace_back(static_cast<int>(i - 1), -1);
      --i;
    } else {
      ++result.insertions;
      rpairs.emplace_back(-1, static_cast<int>(j - 1));
      --j;
    }
  }
  result.pairs.assign(rpairs.rbegin(), rpairs.rend());
  return result;
}

CorpusSplit SplitCorpus(const Corpus& corpus, double train_fraction,
                        std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("SplitCorpus: train fraction must be in (0,1)");
  }
  std::vector<std::string> groups;
  std::unordered_set<std::string> seen;
  for (const Sentence& s : corpus.sentences) {
    if (seen.insert(s.group).second) groups.push_back(s.group);
  }
  if (groups.size() < 2) {
    throw ValidationError("SplitCorpus: need at least 2 repetition groups");
  }
  std::mt19937_64 rng = MakeRng(seed, "split");
  std::shuffle(groups.begin(), groups.end(), rng);
  std::size_t n_train = static_cast<std::size_t>(std::lround(
      train_fraction * static_cast<double>(groups.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, groups.size() - 1);
  std::unordered_set<std::string> train_groups(groups.begin(),
                                               groups.begin() + n_train);

  CorpusSplit split;
  split.train.alphabet = corpus.alphabet;
  split.train.period_ms = corpus.period_ms;
  split.train.metadata = corpus.metadata;
  split.test.alphabet = corpus.alphabet;
  split.test.period_ms = corpus.period_ms;
  split.test.metadata = corpus.metadata;
  for (const Sentence& s : corpus.sentences) {
    if (train_groups.count(s.group) > 0) {
      split.train.sentences.push_back(s);
    } else {
      split.test.sentences.push_back(s);
    }
  }
  return split;
}

double Mean(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("Mean: no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double SampleStd(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double mean = Mean(values);
  double ss = 0.0;
  for (double v : values) {
    double r = v - mean;
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace csrec
