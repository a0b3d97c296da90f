// core/src/mshmm.cc

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

#include "csrec/mshmm.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "csrec/eval.h"
#include "json-util.h"
#include "mshmm-internal.h"

namespace csrec {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

StreamWeights StreamWeights::Defaults(std::size_t n_streams) {
  StreamWeights w;
  if (n_streams == 3) {
    w.lambda = {0.4, 0.2, 0.4};
  } else if (n_streams > 0) {
    w.lambda.assign(n_streams, 1.0 / static_cast<double>(n_streams));
  }
  return w;
}

void StreamWeights::Validate() const {
  if (lambda.empty()) throw ValidationError("StreamWeights: empty");
  double sum = 0.0;
  for (double l : lambda) {
    if (l < 0.0 || l > 1.0) {
      throw ValidationError("StreamWeights: weight outside [0,1]");
    }
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("StreamWeights: weights must sum to 1");
  }
}

ObservationSequence AssembleObservations(const Sentence& sentence,
                                         std::span<const Modality> streams) {
  ObservationSequence obs;
  for (Modality m : streams) {
    const FrameStream* src = nullptr;
    switch (m) {
      case Modality::kLips: src = &sentence.lips; break;
      case Modality::kHandPos: src = &sentence.hand_pos; break;
      case Modality::kHandShape: src = &sentence.hand_shape; break;
      case Modality::kMerged:
        throw ValidationError("AssembleObservations: merged is not a source");
    }
    src->Validate();
    const std::size_t n = src->NumFrames();
    if (n < 3) {
      throw ValidationError(
          "AssembleObservations: stream shorter than 3 frames");
    }
    FrameStream out;
    out.modality = m;
    out.period_ms = src->period_ms;
    out.dim = 2 * src->dim;
    out.data.reserve(n * out.dim);
    for (std::size_t t = 0; t < n; ++t) {
      auto x = src->Frame(t);
      auto prev = src->Frame(t > 0 ? t - 1 : 0);
      auto next = src->Frame(t + 1 < n ? t + 1 : n - 1);
      for (int d = 0; d < src->dim; ++d) out.data.push_back(x[d]);
      for (int d = 0; d < src->dim; ++d) {
        out.data.push_back((next[d] - prev[d]) / 2.0);
      }
    }
    obs.streams.push_back(std::move(out));
  }
  return obs;
}

int MsHmmModel::UnitIndex(const std::string& name) const {
  auto it = unit_index_.find(name);
  return it == unit_index_.end() ? -1 : it->second;
}

void MsHmmModel::RebuildIndex() {
  unit_index_.clear();
  for (int i = 0; i < static_cast<int>(units.size()); ++i) {
    unit_index_.emplace(units[i].name, i);
  }
}

void MsHmmModel::Validate() const {
  weights.Validate();
  if (weights.lambda.size() != streams.size()) {
    throw ValidationError("MsHmmModel: weight count != stream count");
  }
  if (units.empty()) throw ValidationError("MsHmmModel: no units");
  for (const HmmUnit& u : units) {
    if (u.states.empty()) {
      throw ValidationError("MsHmmModel: unit " + u.name + " has no states");
    }
    for (const HmmState& st : u.states) {
      if (!(st.self_loop_prob > 0.0 && st.self_loop_prob < 1.0)) {
        throw ValidationError("MsHmmModel: self loop outside (0,1) in " +
                              u.name);
      }
      if (st.stream_gmms.size() != streams.size()) {
        throw ValidationError("MsHmmModel: stream GMM count mismatch in " +
                              u.name);
      }
      for (std::size_t s = 0; s < st.stream_gmms.size(); ++s) {
        st.stream_gmms[s].Validate();
        if (st.stream_gmms[s].dim != stream_dims[s]) {
          throw ValidationError("MsHmmModel: GMM dim mismatch in " + u.name);
        }
      }
    }
  }
}

double EmissionLogProb(const HmmState& state, const ObservationSequence& obs,
                       std::size_t frame, const StreamWeights& weights) {
  weights.Validate();
  if (state.stream_gmms.size() != obs.streams.size() ||
      weights.lambda.size() != obs.streams.size()) {
    throw ValidationError("EmissionLogProb: stream count mismatch");
  }
  double acc = 0.0;
  for (std::size_t s = 0; s < obs.streams.size(); ++s) {
    acc += weights.lambda[s] *
           state.stream_gmms[s].LogDensity(obs.streams[s].Frame(frame));
  }
  return acc;
}

namespace internal {

StateLayout::StateLayout(const MsHmmModel& model) {
  for (int u = 0; u < static_cast<int>(model.units.size()); ++u) {
    offsets.push_back(n_states);
    const int s_count = static_cast<int>(model.units[u].states.size());
    for (int s = 0; s < s_count; ++s) {
      unit_of.push_back(u);
      state_of.push_back(s);
    }
    n_states += s_count;
  }
}

StreamScores BuildStreamScores(const MsHmmModel& model,
                               const ObservationSequence& obs) {
  if (obs.streams.size() != model.streams.size()) {
    throw ValidationError("BuildStreamScores: stream count mismatch");
  }
  for (std::size_t s = 0; s < obs.streams.size(); ++s) {
    if (obs.streams[s].dim != model.stream_dims[s]) {
      throw ValidationError("BuildStreamScores: observation dim mismatch");
    }
  }
  StateLayout layout(model);
  StreamScores scores;
  scores.n_frames = obs.NumFrames();
  scores.n_states = layout.n_states;
  scores.period_ms = obs.streams.front().period_ms;
  if (scores.n_frames == 0) {
    throw ValidationError("BuildStreamScores: empty sentence");
  }
  scores.per_stream.assign(
      obs.streams.size(),
      std::vector<double>(scores.n_frames * layout.n_states));
  for (std::size_t s = 0; s < obs.streams.size(); ++s) {
    std::vector<double>& table = scores.per_stream[s];
    for (std::size_t t = 0; t < scores.n_frames; ++t) {
      auto x = obs.streams[s].Frame(t);
      for (int gs = 0; gs < layout.n_states; ++gs) {
        const HmmUnit& unit = model.units[layout.unit_of[gs]];
        const HmmState& st = unit.states[layout.state_of[gs]];
        table[t * layout.n_states + gs] = st.stream_gmms[s].LogDensity(x);
      }
    }
  }
  return scores;
}

void CombineScores(const StreamScores& scores,
                   std::span<const double> lambda, std::size_t frame,
                   std::vector<double>* out) {
  out->assign(scores.n_states, 0.0);
  for (std::size_t s = 0; s < scores.per_stream.size(); ++s) {
    const double w = lambda[s];
    const double* row = scores.per_stream[s].data() + frame * scores.n_states;
    for (std::size_t gs = 0; gs < scores.n_states; ++gs) {
      (*out)[gs] += w * row[gs];
    }
  }
}

// Decoding graph: uniform entry over units, left-to-right inside a unit,
// exits feed back into every unit entry with probability 1/U, and the path
// must exit its final unit after the last frame.
DecodeResult DecodeFromScores(const MsHmmModel& model,
                              const StreamScores& scores,
                              std::span<const double> lambda) {
  const StateLayout layout(model);
  const std::size_t n_frames = scores.n_frames;
  const int n = layout.n_states;
  const double log_entry = -std::log(static_cast<double>(model.units.size()));

  std::vector<double> log_self(n), log_adv(n);
  std::vector<bool> is_last(n), is_first(n);
  for (int gs = 0; gs < n; ++gs) {
    const HmmUnit& unit = model.units[layout.unit_of[gs]];
    const int s = layout.state_of[gs];
    log_self[gs] = std::log(unit.states[s].self_loop_prob);
    log_adv[gs] = std::log(1.0 - unit.states[s].self_loop_prob);
    is_first[gs] = s == 0;
    is_last[gs] = s + 1 == static_cast<int>(unit.states.size());
  }

  std::vector<double> emission;
  std::vector<double> delta(n, kNegInf), next(n, kNegInf);
  // Backpointers: predecessor global state, plus whether the step re-entered
  // through a unit boundary (distinguishes self loop from exit-and-re-enter
  // for single-state units).
  std::vector<std::vector<int>> back(n_frames, std::vector<int>(n, -1));
  std::vector<std::vector<unsigned char>> entered(
      n_frames, std::vector<unsigned char>(n, 0));

  CombineScores(scores, lambda, 0, &emission);
  for (int gs = 0; gs < n; ++gs) {
    if (is_first[gs]) delta[gs] = log_entry + emission[gs];
  }

  for (std::size_t t = 1; t < n_frames; ++t) {
    CombineScores(scores, lambda, t, &emission);
    // Best exit among last states, lowest unit index wins ties.
    int best_exit = -1;
    double best_exit_score = kNegInf;
    for (int gs = 0; gs < n; ++gs) {
      if (!is_last[gs]) continue;
      double v = delta[gs] + log_adv[gs];
      if (v > best_exit_score) {
        best_exit_score = v;
        best_exit = gs;
      }
    }
    for (int gs = 0; gs < n; ++gs) {
      double best = delta[gs] + log_self[gs];
      int from = delta[gs] == kNegInf ? -1 : gs;
      bool via_entry = false;
      if (!is_first[gs]) {
        double v = delta[gs - 1] + log_adv[gs - 1];
        if (v > best) {
          best = v;
          from = gs - 1;
          via_entry = false;
        }
      } else if (best_exit >= 0) {
        double v = best_exit_score + log_entry;
        if (v > best) {
          best = v;
          from = best_exit;
          via_entry = true;
        }
      }
      next[gs] = best == kNegInf ? kNegInf : best + emission[gs];
      back[t][gs] = from;
      entered[t][gs] = via_entry ? 1 : 0;
    }
    std::swap(delta, next);
  }

  int final_state = -1;
  double final_score = kNegInf;
  for (int gs = 0; gs < n; ++gs) {
    if (!is_last[gs]) continue;
    double v = delta[gs] + log_adv[gs];
    if (v > final_score) {
      final_score = v;
      final_state = gs;
    }
  }
  if (final_state < 0 || final_score == kNegInf) {
    throw ValidationError(
        "ViterbiDecode: no valid path (sentence shorter than the unit "
        "topology)");
  }

  // Trace back global states, then cut into unit instances.
  std::vector<int> path(n_frames);
  std::vector<unsigned char> was_entry(n_frames, 0);
  int cur = final_state;
  for (std::size_t t = n_frames; t-- > 0;) {
    path[t] = cur;
    if (t > 0) {
      was_entry[t] = entered[t][cur];
      cur = back[t][cur];
    }
  }

  DecodeResult result;
  result.log_score = final_score;
  result.state_path.resize(n_frames);
  result.segmentation.tier = Tier::kAudio;
  const int period = scores.period_ms;
  std::size_t instance_start = 0;
  for (std::size_t t = 0; t < n_frames; ++t) {
    result.state_path[t] = layout.state_of[path[t]];
    const bool boundary = t > 0 && was_entry[t];
    if (boundary) {
      const HmmUnit& unit = model.units[layout.unit_of[path[t - 1]]];
      result.units.push_back(unit.name);
      result.labels.push_back(unit.center);
      result.segmentation.intervals.push_back(
          Interval{static_cast<TimeMs>(instance_start) * period,
                   static_cast<TimeMs>(t) * period, unit.center});
      instance_start = t;
    }
  }
  const HmmUnit& last_unit = model.units[layout.unit_of[path.back()]];
  result.units.push_back(last_unit.name);
  result.labels.push_back(last_unit.center);
  result.segmentation.intervals.push_back(
      Interval{static_cast<TimeMs>(instance_start) * period,
               static_cast<TimeMs>(n_frames) * period, last_unit.center});
  return result;
}

double ForwardFromScores(const MsHmmModel& model, const StreamScores& scores,
                         std::span<const double> lambda) {
  const StateLayout layout(model);
  const std::size_t n_frames = scores.n_frames;
  const int n = layout.n_states;
  const double log_entry = -std::log(static_cast<double>(model.units.size()));

  std::vector<double> log_self(n), log_adv(n);
  std::vector<bool> is_last(n), is_first(n);
  for (int gs = 0; gs < n; ++gs) {
    const HmmUnit& unit = model.units[layout.unit_of[gs]];
    const int s = layout.state_of[gs];
    log_self[gs] = std::log(unit.states[s].self_loop_prob);
    log_adv[gs] = std::log(1.0 - unit.states[s].self_loop_prob);
    is_first[gs] = s == 0;
    is_last[gs] = s + 1 == static_cast<int>(unit.states.size());
  }

  auto log_add = [](double x, double y) {
    if (x == kNegInf) return y;
    if (y == kNegInf) return x;
    double hi = std::max(x, y);
    return hi + std::log1p(std::exp(std::min(x, y) - hi));
  };

  std::vector<double> emission;
  std::vector<double> alpha(n, kNegInf), next(n, kNegInf);
  CombineScores(scores, lambda, 0, &emission);
  for (int gs = 0; gs < n; ++gs) {
    if (is_first[gs]) alpha[gs] = log_entry + emission[gs];
  }
  for (std::size_t t = 1; t < n_frames; ++t) {
    CombineScores(scores, lambda, t, &emission);
    double exit_sum = kNegInf;
    for (int gs = 0; gs < n; ++gs) {
      if (is_last[gs]) exit_sum = log_add(exit_sum, alpha[gs] + log_adv[gs]);
    }
    for (int gs = 0; gs < n; ++gs) {
      double acc = alpha[gs] + log_self[gs];
      if (!is_first[gs]) {
        acc = log_add(acc, alpha[gs - 1] + log_adv[gs - 1]);
      } else {
        acc = log_add(acc, exit_sum + log_entry);
      }
      next[gs] = acc == kNegInf ? kNegInf : acc + emission[gs];
    }
    std::swap(alpha, next);
  }
  double total = kNegInf;
  for (int gs = 0; gs < n; ++gs) {
    if (is_last[gs]) total = log_add(total, alpha[gs] + log_adv[gs]);
  }
  return total;
}

}  // namespace internal

DecodeResult ViterbiDecodeObs(const MsHmmModel& model,
                              const ObservationSequence& obs) {
  if (obs.NumFrames() == 0) {
    throw ValidationError("ViterbiDecode: empty sentence");
  }
  internal::StreamScores scores = internal::BuildStreamScores(model, obs);
  return internal::DecodeFromScores(model, scores, model.weights.lambda);
}

DecodeResult ViterbiDecode(const MsHmmModel& model, const Sentence& sentence) {
  return ViterbiDecodeObs(
      model, AssembleObservations(sentence, model.streams));
}

double ForwardLogLikelihood(const MsHmmModel& model,
                            const ObservationSequence& obs) {
  if (obs.NumFrames() == 0) {
    throw ValidationError("ForwardLogLikelihood: empty sentence");
  }
  internal::StreamScores scores = internal::BuildStreamScores(model, obs);
  return internal::ForwardFromScores(model, scores, model.weights.lambda);
}

StreamWeights OptimizeWeights(const MsHmmModel& model, const Corpus& dev,
                              double grid_step) {
  if (grid_step <= 0 || grid_step > 1) {
    throw ValidationError("OptimizeWeights: bad grid step");
  }
  const int steps = static_cast<int>(std::lround(1.0 / grid_step));
  const std::size_t n_streams = model.streams.size();

  // All weight vectors on the simplex grid, lexicographic order.
  std::vector<std::vector<double>> grid;
  std::vector<int> counts(n_streams, 0);
  std::function<void(std::size_t, int)> enumerate = [&](std::size_t pos,
                                                        int remaining) {
    if (pos + 1 == n_streams) {
      counts[pos] = remaining;
      std::vector<double> lambda(n_streams);
      for (std::size_t s = 0; s < n_streams; ++s) {
        lambda[s] = static_cast<double>(counts[s]) / steps;
      }
      grid.push_back(std::move(lambda));
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      counts[pos] = k;
      enumerate(pos + 1, remaining - k);
    }
  };
  enumerate(0, steps);

  std::vector<double> scores_per_grid(grid.size(), 0.0);
  std::size_t total_ref = 0;
  std::vector<std::size_t> correct_terms(grid.size(), 0);
  std::vector<double> tcorr_num(grid.size(), 0.0);

  // Stream log-densities do not depend on the weights, so each sentence is
  // scored once and re-decoded per grid point.
  std::vector<std::vector<std::vector<std::string>>> hyps(
      grid.size(),
      std::vector<std::vector<std::string>>(dev.sentences.size()));
  for (std::size_t i = 0; i < dev.sentences.size(); ++i) {
    ObservationSequence obs =
        AssembleObservations(dev.sentences[i], model.streams);
    internal::StreamScores table = internal::BuildStreamScores(model, obs);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      DecodeResult r = internal::DecodeFromScores(model, table, grid[g]);
      for (const std::string& lab : r.labels) {
        if (dev.alphabet.KindOf(lab) != PhonemeKind::kSilence) {
          hyps[g][i].push_back(lab);
        }
      }
    }
  }

  std::vector<std::vector<std::string>> refs(dev.sentences.size());
  for (std::size_t i = 0; i < dev.sentences.size(); ++i) {
    for (const Interval& iv : dev.sentences[i].audio_seg.intervals) {
      if (dev.alphabet.KindOf(iv.label) != PhonemeKind::kSilence) {
        refs[i].push_back(iv.label);
      }
    }
    total_ref += refs[i].size();
  }
  if (total_ref == 0) {
    throw ValidationError("OptimizeWeights: dev corpus has no phonemes");
  }

  double best_tcorr = -1.0;
  double best_dist = std::numeric_limits<double>::infinity();
  std::size_t best_g = 0;
  const double uniform = 1.0 / static_cast<double>(n_streams);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::size_t n = 0, errors = 0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      AlignmentResult a = AlignLabels(refs[i], hyps[g][i]);
      n += a.n;
      errors += a.deletions + a.substitutions;
    }
    double tcorr = static_cast<double>(n - errors) / static_cast<double>(n);
    double dist = 0.0;
    for (double l : grid[g]) dist += (l - uniform) * (l - uniform);
    if (tcorr > best_tcorr + 1e-12 ||
        (std::abs(tcorr - best_tcorr) <= 1e-12 && dist < best_dist - 1e-15)) {
      best_tcorr = tcorr;
      best_dist = dist;
      best_g = g;
    }
  }
  StreamWeights w;
  w.lambda = grid[best_g];
  return w;
}

namespace {

constexpr int kMsHmmModelVersion = 1;

using internal::Json;

Json GmmToJson(const DiagGmm& g) {
  return Json{{"weights", g.weights}, {"means", g.means}, {"vars", g.vars}};
}

DiagGmm GmmFromJson(const Json& j, int dim) {
  internal::RequireKeys(j, {"weights", "means", "vars"}, "diag gmm");
  DiagGmm g;
  g.dim = dim;
  g.weights = j.at("weights").get<std::vector<double>>();
  g.means = j.at("means").get<std::vector<double>>();
  g.vars = j.at("vars").get<std::vector<double>>();
  g.Validate();
  return g;
}

std::string ModalityKey(Modality m) { return ModalityName(m); }

Modality ModalityFromKey(const std::string& key) {
  if (key == "L") return Modality::kLips;
  if (key == "P") return Modality::kHandPos;
  if (key == "S") return Modality::kHandShape;
  throw FormatError("mshmm model: unknown stream '" + key + "'");
}

}  // namespace

MsHmmModel LoadMsHmmModel(const std::filesystem::path& path) {
  Json doc = internal::ReadJsonFile(path);
  internal::RequireVersion(doc, kMsHmmModelVersion, "mshmm model");
  internal::RequireKeys(doc,
                        {"version", "unit_mode", "streams", "stream_dims",
                         "weights", "alphabet", "units", "ll_stages", "seed"},
                        "mshmm model");
  MsHmmModel model;
  model.unit_mode = doc.at("unit_mode").get<std::string>() == "triphone"
                        ? UnitMode::kTriphone
                        : UnitMode::kMonophone;
  for (const Json& s : doc.at("streams")) {
    model.streams.push_back(ModalityFromKey(s.get<std::string>()));
  }
  model.stream_dims = doc.at("stream_dims").get<std::vector<int>>();
  model.weights.lambda = doc.at("weights").get<std::vector<double>>();
  std::vector<PhonemeInfo> entries;
  for (const Json& e : doc.at("alphabet")) {
    entries.push_back(PhonemeInfo{
        e.at("symbol").get<std::string>(),
        PhonemeKindFromName(e.at("kind").get<std::string>())});
  }
  model.alphabet = Alphabet(std::move(entries));
  for (const Json& uj : doc.at("units")) {
    internal::RequireKeys(uj, {"name", "center", "states"}, "hmm unit");
    HmmUnit unit;
    unit.name = uj.at("name").get<std::string>();
    unit.center = uj.at("center").get<std::string>();
    for (const Json& sj : uj.at("states")) {
      internal::RequireKeys(sj, {"self_loop", "streams"}, "hmm state");
      HmmState state;
      state.self_loop_prob = sj.at("self_loop").get<double>();
      std::size_t s = 0;
      for (const Json& gj : sj.at("streams")) {
        state.stream_gmms.push_back(GmmFromJson(gj, model.stream_dims[s++]));
      }
      unit.states.push_back(std::move(state));
    }
    model.units.push_back(std::move(unit));
  }
  if (doc.contains("ll_stages")) {
    model.ll_stages =
        doc.at("ll_stages").get<std::vector<std::vector<double>>>();
  }
  model.seed = doc.value("seed", std::uint64_t{0});
  model.RebuildIndex();
  model.Validate();
  return model;
}

void SaveMsHmmModel(const MsHmmModel& model,
                    const std::filesystem::path& path) {
  Json doc;
  doc["version"] = kMsHmmModelVersion;
  doc["unit_mode"] =
      model.unit_mode == UnitMode::kTriphone ? "triphone" : "monophone";
  Json streams = Json::array();
  for (Modality m : model.streams) streams.push_back(ModalityKey(m));
  doc["streams"] = std::move(streams);
  doc["stream_dims"] = model.stream_dims;
  doc["weights"] = model.weights.lambda;
  Json alphabet = Json::array();
  for (const PhonemeInfo& p : model.alphabet.entries()) {
    alphabet.push_back(
        Json{{"symbol", p.symbol}, {"kind", PhonemeKindName(p.kind)}});
  }
  doc["alphabet"] = std::move(alphabet);
  Json units = Json::array();
  for (const HmmUnit& u : model.units) {
    Json states = Json::array();
    for (const HmmState& st : u.states) {
      Json gmms = Json::array();
      for (const DiagGmm& g : st.stream_gmms) gmms.push_back(GmmToJson(g));
      states.push_back(
          Json{{"self_loop", st.self_loop_prob}, {"streams", std::move(gmms)}});
    }
    units.push_back(Json{{"name", u.name},
                         {"center", u.center},
                         {"states", std::move(states)}});
  }
  doc["units"] = std::move(units);
  doc["ll_stages"] = model.ll_stages;
  doc["seed"] = model.seed;
  internal::WriteJsonFile(path, doc);
}

}  // namespace csrec
