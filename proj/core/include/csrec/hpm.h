// core/include/csrec/hpm.h

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

#ifndef CSREC_HPM_H_
#define CSREC_HPM_H_

#include <filesystem>
#include <string>
#include <vector>

#include "csrec/types.h"

namespace csrec {

// In Cued Speech the hand reaches its target before the corresponding sound
// is audible. The hand preceding model (HPM) describes that lag for vowels
// as a function of u, the time remaining until sentence end: a constant mean
// far from the end, then a linear decay inside the final stretch.

// Operating points for whole-stream re-synchronization.
constexpr double kDefaultDeltaVStarMs = 140.0;
constexpr double kDefaultDeltaCStarMs = 60.0;

// Piecewise hand-preceding model in time-to-end coordinates:
//   delta(u) = mean_ms          for u > t0_ms
//   delta(u) = a * u + b        for 0 <= u <= t0_ms
struct HpmModel {
  double mean_ms = 0.0;
  double t0_ms = 1.0;
  double a = 0.0;
  double b = 0.0;

  // Fit diagnostics.
  std::int64_t n_obs = 0;
  double sse_constant = 0.0;
  double sse_linear = 0.0;
  // Decay region had no spread in u; slope was forced to 0.
  bool degenerate_slope = false;
};

// One measured vowel lag: u is the time to sentence end of the vowel's
// audio midpoint, delta the hand preceding time.
struct HptObservation {
  double u_ms = 0.0;
  double delta_ms = 0.0;
  std::string sentence_id;
  std::string label;
};

struct T0SearchGrid {
  TimeMs min_ms = 300;
  TimeMs max_ms = 1500;
  TimeMs step_ms = 20;
};

// Lag predicted at time-to-end u (>= 0).
double PredictDelta(const HpmModel& model, double u_ms);

// Two-segment fit: for every candidate breakpoint on the grid, the constant
// side takes the mean of observations with u > t0 and the decay side an
// ordinary least-squares line over u <= t0; the t0 with the smallest total
// SSE wins (first grid point on ties). Requires >= 10 observations and at
// least one candidate with two points on each side. A decay region with no
// spread in u falls back to slope 0 and sets degenerate_slope.
HpmModel FitHpm(const std::vector<HptObservation>& observations,
                const T0SearchGrid& grid = T0SearchGrid{});

struct ShiftReport {
  int clamped = 0;
  std::vector<Interval> dropped;
};

// Shifts an audio-based segmentation onto the hand timeline: vowel intervals
// move earlier by delta(u) evaluated at their midpoint, consonant intervals
// by the fixed consonant lag, silence stays. Negative starts are clamped to
// 0 and overlaps are resolved by truncating the earlier interval; intervals
// that collapse are dropped and reported.
Segmentation HpmShiftSegmentation(const Segmentation& audio_seg,
                                  const Alphabet& alphabet,
                                  const HpmModel& model,
                                  TimeMs sentence_end_ms,
                                  double consonant_lag_ms = kDefaultDeltaCStarMs,
                                  ShiftReport* report = nullptr);

struct DeltaCvStats {
  double mean_ms = 0.0;
  double std_ms = 0.0;
  std::size_t n = 0;
};

// Midpoint spacing t_v - t_c over consonant-vowel pairs that are adjacent in
// the audio segmentation. Errors when the corpus has no CV pair.
DeltaCvStats ComputeDeltaCvStats(const Corpus& corpus);

// (delta_v_star - mean_delta_cv) + d_c / 2. May be negative for unusual
// inputs; callers decide whether to warn.
double TheoreticalDeltaC(double delta_v_star_ms, double mean_delta_cv_ms,
                         double d_c_ms);

HpmModel LoadHpmModel(const std::filesystem::path& path);
void SaveHpmModel(const HpmModel& model, const std::filesystem::path& path);

}  // namespace csrec

#endif  // CSREC_HPM_H_
