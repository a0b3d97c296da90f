// core/src/hpm.cc

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

#include "csrec/hpm.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json-util.h"

namespace csrec {

double PredictDelta(const HpmModel& model, double u_ms) {
  if (u_ms < 0) throw ValidationError("PredictDelta: u must be >= 0");
  if (u_ms > model.t0_ms) return model.mean_ms;
  return model.a * u_ms + model.b;
}

namespace {

struct SegmentFit {
  double mean = 0.0;
  double sse_constant = 0.0;
  double a = 0.0;
  double b = 0.0;
  double sse_linear = 0.0;
  bool degenerate = false;
};

// Constant fit on {u > t0}, OLS line on {u <= t0}.
bool FitAtBreakpoint(const std::vector<HptObservation>& obs, double t0,
                     SegmentFit* fit) {
  double const_sum = 0.0;
  std::size_t const_n = 0;
  double su = 0.0, sd = 0.0, suu = 0.0, sud = 0.0;
  std::size_t lin_n = 0;
  for (const HptObservation& o : obs) {
    if (o.u_ms > t0) {
      const_sum += o.delta_ms;
      ++const_n;
    } else {
      su += o.u_ms;
      sd += o.delta_ms;
      suu += o.u_ms * o.u_ms;
      sud += o.u_ms * o.delta_ms;
      ++lin_n;
    }
  }
  if (const_n < 2 || lin_n < 2) return false;

  fit->mean = const_sum / static_cast<double>(const_n);
  fit->sse_constant = 0.0;
  for (const HptObservation& o : obs) {
    if (o.u_ms > t0) {
      double r = o.delta_ms - fit->mean;
      fit->sse_constant += r * r;
    }
  }

  const double n = static_cast<double>(lin_n);
  const double var_u = suu - su * su / n;
  if (var_u <= 1e-9 * std::max(1.0, suu)) {
    fit->a = 0.0;
    fit->b = sd / n;
    fit->degenerate = true;
  } else {
    fit->a = (sud - su * sd / n) / var_u;
    fit->b = (sd - fit->a * su) / n;
    fit->degenerate = false;
  }
  fit->sse_linear = 0.0;
  for (const HptObservation& o : obs) {
    if (o.u_ms <= t0) {
      double r = o.delta_ms - (fit->a * o.u_ms + fit->b);
      fit->sse_linear += r * r;
    }
  }
  return true;
}

}  // namespace

HpmModel FitHpm(const std::vector<HptObservation>& observations,
                const T0SearchGrid& grid) {
  if (observations.size() < 10) {
    throw ValidationError("FitHpm: need at least 10 observations, got " +
                          std::to_string(observations.size()));
  }
  if (grid.step_ms <= 0 || grid.max_ms < grid.min_ms) {
    throw ValidationError("FitHpm: bad t0 search grid");
  }

  HpmModel best;
  double best_sse = std::numeric_limits<double>::infinity();
  bool found = false;
  for (TimeMs t0 = grid.min_ms; t0 <= grid.max_ms; t0 += grid.step_ms) {
    SegmentFit fit;
    if (!FitAtBreakpoint(observations, static_cast<double>(t0), &fit)) {
      continue;
    }
    double total = fit.sse_constant + fit.sse_linear;
    if (total < best_sse) {
      best_sse = total;
      best.mean_ms = fit.mean;
      best.t0_ms = static_cast<double>(t0);
      best.a = fit.a;
      best.b = fit.b;
      best.sse_constant = fit.sse_constant;
      best.sse_linear = fit.sse_linear;
      best.degenerate_slope = fit.degenerate;
      found = true;
    }
  }
  if (!found) {
    throw ValidationError(
        "FitHpm: degenerate fit, no candidate breakpoint has two "
        "observations on each side");
  }
  best.n_obs = static_cast<std::int64_t>(observations.size());
  return best;
}

Segmentation HpmShiftSegmentation(const Segmentation& audio_seg,
                                  const Alphabet& alphabet,
                                  const HpmModel& model,
                                  TimeMs sentence_end_ms,
                                  double consonant_lag_ms,
                                  ShiftReport* report) {
  if (audio_seg.tier != Tier::kAudio) {
    throw ValidationError("HpmShiftSegmentation: expected an audio tier");
  }
  ShiftReport local;
  ShiftReport& rep = report != nullptr ? *report : local;

  std::vector<Interval> shifted;
  shifted.reserve(audio_seg.intervals.size());
  for (const Interval& iv : audio_seg.intervals) {
    double lag = 0.0;
    switch (alphabet.KindOf(iv.label)) {
      case PhonemeKind::kVowel: {
        double u = static_cast<double>(sentence_end_ms - iv.MidpointMs());
        lag = PredictDelta(model, std::max(0.0, u));
        break;
      }
      case PhonemeKind::kConsonant:
        lag = consonant_lag_ms;
        break;
      case PhonemeKind::kSilence:
        lag = 0.0;
        break;
    }
    TimeMs shift = static_cast<TimeMs>(std::llround(lag));
    Interval out{iv.start_ms - shift, iv.end_ms - shift, iv.label};
    if (out.start_ms < 0) {
      out.start_ms = 0;
      ++rep.clamped;
    }
    if (out.end_ms <= out.start_ms) {
      rep.dropped.push_back(iv);
      continue;
    }
    shifted.push_back(out);
  }

  // Shifting with unequal lags can reorder; restore order before resolving
  // overlaps by truncating the earlier interval.
  std::stable_sort(shifted.begin(), shifted.end(),
                   [](const Interval& x, const Interval& y) {
                     return x.start_ms < y.start_ms;
                   });
  Segmentation out;
  out.tier = audio_seg.tier;
  for (const Interval& iv : shifted) {
    while (!out.intervals.empty() &&
           out.intervals.back().end_ms > iv.start_ms) {
      out.intervals.back().end_ms = iv.start_ms;
      if (out.intervals.back().end_ms <= out.intervals.back().start_ms) {
        rep.dropped.push_back(out.intervals.back());
        out.intervals.pop_back();
      } else {
        break;
      }
    }
    out.intervals.push_back(iv);
  }
  out.Validate(&alphabet);
  return out;
}

DeltaCvStats ComputeDeltaCvStats(const Corpus& corpus) {
  std::vector<double> deltas;
  for (const Sentence& s : corpus.sentences) {
    const auto& ivs = s.audio_seg.intervals;
    for (std::size_t i = 0; i + 1 < ivs.size(); ++i) {
      if (corpus.alphabet.KindOf(ivs[i].label) == PhonemeKind::kConsonant &&
          corpus.alphabet.KindOf(ivs[i + 1].label) == PhonemeKind::kVowel) {
        deltas.push_back(static_cast<double>(ivs[i + 1].MidpointMs() -
                                             ivs[i].MidpointMs()));
      }
    }
  }
  if (deltas.empty()) {
    throw ValidationError("ComputeDeltaCvStats: corpus has no CV pair");
  }
  DeltaCvStats stats;
  stats.n = deltas.size();
  double sum = 0.0;
  for (double d : deltas) sum += d;
  stats.mean_ms = sum / static_cast<double>(deltas.size());
  if (deltas.size() > 1) {
    double ss = 0.0;
    for (double d : deltas) {
      double r = d - stats.mean_ms;
      ss += r * r;
    }
    stats.std_ms = std::sqrt(ss / static_cast<double>(deltas.size() - 1));
  }
  return stats;
}

double TheoreticalDeltaC(double delta_v_star_ms, double mean_delta_cv_ms,
                         double d_c_ms) {
  if (delta_v_star_ms < 0 || mean_delta_cv_ms < 0 || d_c_ms < 0) {
    throw ValidationError("TheoreticalDeltaC: inputs must be >= 0");
  }
  return (delta_v_star_ms - mean_delta_cv_ms) + d_c_ms / 2.0;
}

namespace {
constexpr int kHpmModelVersion = 1;
}  // namespace

HpmModel LoadHpmModel(const std::filesystem::path& path) {
  internal::Json doc = internal::ReadJsonFile(path);
  internal::RequireVersion(doc, kHpmModelVersion, "hpm model");
  internal::RequireKeys(doc, {"version", "mean_ms", "t0_ms", "a", "b",
                              "diagnostics"},
                        "hpm model");
  HpmModel model;
  model.mean_ms = doc.at("mean_ms").get<double>();
  model.t0_ms = doc.at("t0_ms").get<double>();
  model.a = doc.at("a").get<double>();
  model.b = doc.at("b").get<double>();
  if (doc.contains("diagnostics")) {
    const internal::Json& d = doc.at("diagnostics");
    internal::RequireKeys(
        d, {"n_obs", "sse_constant", "sse_linear", "degenerate_slope"},
        "hpm diagnostics");
    model.n_obs = d.value("n_obs", std::int64_t{0});
    model.sse_constant = d.value("sse_constant", 0.0);
    model.sse_linear = d.value("sse_linear", 0.0);
    model.degenerate_slope = d.value("degenerate_slope", false);
  }
  if (model.t0_ms <= 0 || !std::isfinite(model.mean_ms)) {
    throw ValidationError("hpm model: invalid parameters in " + path.string());
  }
  return model;
}

void SaveHpmModel(const HpmModel& model, const std::filesystem::path& path) {
  internal::Json doc;
  doc["version"] = kHpmModelVersion;
  doc["mean_ms"] = model.mean_ms;
  doc["t0_ms"] = model.t0_ms;
  doc["a"] = model.a;
  doc["b"] = model.b;
  doc["diagnostics"] = {{"n_obs", model.n_obs},
                        {"sse_constant", model.sse_constant},
                        {"sse_linear", model.sse_linear},
                        {"degenerate_slope", model.degenerate_slope}};
  internal::WriteJsonFile(path, doc);
}

}  // namespace csrec
