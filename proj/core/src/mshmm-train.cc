// core/src/mshmm-train.cc

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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <iostream>
#include <limits>
#include <map>
#include <set>

#include "csrec/mshmm.h"

namespace csrec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMinSelfLoop = 1e-3;

double LogAdd(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

// Sufficient statistics for one (unit, state): per stream and component
// occupancy with first and second moments, plus transition counts.
struct StateAccum {
  std::vector<std::vector<double>> occ;     // [stream][component]
  std::vector<std::vector<double>> sum;     // [stream][component * dim]
  std::vector<std::vector<double>> sumsq;   // [stream][component * dim]
  double self_count = 0.0;
  double adv_count = 0.0;

  void Resize(const HmmState& state, const std::vector<int>& dims) {
    occ.resize(state.stream_gmms.size());
    sum.resize(state.stream_gmms.size());
    sumsq.resize(state.stream_gmms.size());
    for (std::size_t s = 0; s < state.stream_gmms.size(); ++s) {
      const int m = state.stream_gmms[s].NumComponents();
      occ[s].assign(m, 0.0);
      sum[s].assign(static_cast<std::size_t>(m) * dims[s], 0.0);
      sumsq[s].assign(static_cast<std::size_t>(m) * dims[s], 0.0);
    }
  }

  void MergeFrom(const StateAccum& other) {
    for (std::size_t s = 0; s < occ.size(); ++s) {
      for (std::size_t k = 0; k < occ[s].size(); ++k) {
        occ[s][k] += other.occ[s][k];
      }
      for (std::size_t k = 0; k < sum[s].size(); ++k) {
        sum[s][k] += other.sum[s][k];
        sumsq[s][k] += other.sumsq[s][k];
      }
    }
    self_count += other.self_count;
    adv_count += other.adv_count;
  }
};

struct SentenceAccum {
  double log_likelihood = 0.0;
  // unit id -> per-state statistics; ordered so merging is deterministic.
  std::map<int, std::vector<StateAccum>> units;
};

// Unit sequence of a sentence: one unit instance per audio interval. A
// triphone unit is used when the model has one for the interval's context,
// otherwise the monophone. Silence stays context independent.
std::vector<int> TranscriptionUnits(const MsHmmModel& model,
                                    const Sentence& sentence) {
  const auto& ivs = sentence.audio_seg.intervals;
  if (ivs.empty()) {
    throw ValidationError("TranscriptionUnits: sentence " + sentence.id +
                          " has an empty audio segmentation");
  }
  std::vector<int> units;
  for (std::size_t k = 0; k < ivs.size(); ++k) {
    const std::string& center = ivs[k].label;
    int idx = -1;
    if (model.alphabet.KindOf(center) != PhonemeKind::kSilence) {
      const std::string left = k > 0 ? ivs[k - 1].label : "sil";
      const std::string right = k + 1 < ivs.size() ? ivs[k + 1].label : "sil";
      idx = model.UnitIndex(left + "-" + center + "+" + right);
    }
    if (idx < 0) idx = model.UnitIndex(center);
    if (idx < 0) {
      throw ValidationError("TranscriptionUnits: no unit for label '" +
                            center + "'");
    }
    units.push_back(idx);
  }
  return units;
}

// Forward-backward over the fixed left-to-right chain of one sentence's
// transcription; fills the per-unit statistics.
void AccumulateSentence(const MsHmmModel& model,
                        const ObservationSequence& obs,
                        const std::vector<int>& transcription,
                        SentenceAccum* accum) {
  const std::size_t n_streams = model.streams.size();
  const std::size_t T = obs.NumFrames();

  // Chain states.
  struct ChainState {
    int unit;
    int state;
    double log_self;
    double log_adv;
  };
  std::vector<ChainState> chain;
  for (int u : transcription) {
    const HmmUnit& unit = model.units[u];
    for (int s = 0; s < static_cast<int>(unit.states.size()); ++s) {
      chain.push_back(ChainState{
          u, s, std::log(unit.states[s].self_loop_prob),
          std::log(1.0 - unit.states[s].self_loop_prob)});
    }
  }
  const std::size_t R = chain.size();
  if (T < R) {
    throw ValidationError(
        "AccumulateSentence: sentence shorter than its transcription chain (" +
        std::to_string(T) + " frames for " + std::to_string(R) + " states)");
  }

  // Emission table over distinct (unit, state) pairs.
  std::map<std::pair<int, int>, int> distinct;
  std::vector<const HmmState*> distinct_states;
  std::vector<int> chain_row(R);
  for (std::size_t r = 0; r < R; ++r) {
    auto key = std::make_pair(chain[r].unit, chain[r].state);
    auto it = distinct.find(key);
    if (it == distinct.end()) {
      it = distinct.emplace(key, static_cast<int>(distinct_states.size()))
               .first;
      distinct_states.push_back(
          &model.units[chain[r].unit].states[chain[r].state]);
    }
    chain_row[r] = it->second;
  }
  const std::size_t D = distinct_states.size();

  // Per-stream log densities per distinct state, then the weighted sum.
  std::vector<double> stream_ll(T * D * n_streams);
  std::vector<double> emit(T * D);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t d = 0; d < D; ++d) {
      double b = 0.0;
      for (std::size_t s = 0; s < n_streams; ++s) {
        double ll = distinct_states[d]->stream_gmms[s].LogDensity(
            obs.streams[s].Frame(t));
        stream_ll[(t * D + d) * n_streams + s] = ll;
        b += model.weights.lambda[s] * ll;
      }
      emit[t * D + d] = b;
    }
  }
  auto b_of = [&](std::size_t t, std::size_t r) {
    return emit[t * D + chain_row[r]];
  };

  std::vector<double> alpha(T * R, kNegInf), beta(T * R, kNegInf);
  alpha[0] = b_of(0, 0);
  for (std::size_t t = 1; t < T; ++t) {
    // The chain cannot outrun the frames nor stall past its length.
    std::size_t lo = R > T - t ? R - (T - t) : 0;
    std::size_t hi = std::min(R - 1, t);
    for (std::size_t r = lo; r <= hi; ++r) {
      double acc = alpha[(t - 1) * R + r] + chain[r].log_self;
      if (r > 0) {
        acc = LogAdd(acc,
                     alpha[(t - 1) * R + r - 1] + chain[r - 1].log_adv);
      }
      alpha[t * R + r] = acc == kNegInf ? kNegInf : acc + b_of(t, r);
    }
  }
  const double ll = alpha[(T - 1) * R + R - 1] + chain[R - 1].log_adv;
  if (!std::isfinite(ll)) {
    throw ValidationError("AccumulateSentence: zero-probability sentence");
  }
  accum->log_likelihood = ll;

  beta[(T - 1) * R + R - 1] = chain[R - 1].log_adv;
  for (std::size_t t = T - 1; t-- > 0;) {
    std::size_t lo = R > T - t ? R - (T - t) : 0;
    std::size_t hi = std::min(R - 1, t);
    for (std::size_t r = lo; r <= hi; ++r) {
      double acc = chain[r].log_self + b_of(t + 1, r) + beta[(t + 1) * R + r];
      if (r + 1 < R) {
        acc = LogAdd(acc, chain[r].log_adv + b_of(t + 1, r + 1) +
                              beta[(t + 1) * R + r + 1]);
      }
      beta[t * R + r] = acc;
    }
  }

  // Lazily sized per-unit accumulators.
  auto unit_accum = [&](int u) -> std::vector<StateAccum>& {
    auto it = accum->units.find(u);
    if (it == accum->units.end()) {
      it = accum->units.emplace(u, std::vector<StateAccum>()).first;
      it->second.resize(model.units[u].states.size());
      for (std::size_t s = 0; s < model.units[u].states.size(); ++s) {
        it->second[s].Resize(model.units[u].states[s], model.stream_dims);
      }
    }
    return it->second;
  };

  std::vector<double> comp_terms;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t r = 0; r < R; ++r) {
      double log_gamma = alpha[t * R + r] + beta[t * R + r] - ll;
      if (log_gamma < -18.0) continue;  // below ~1e-8 occupancy
      double gamma = std::exp(log_gamma);
      StateAccum& sa = unit_accum(chain[r].unit)[chain[r].state];
      const HmmState& hs = *distinct_states[chain_row[r]];
      for (std::size_t s = 0; s < n_streams; ++s) {
        const DiagGmm& gmm = hs.stream_gmms[s];
        auto x = obs.streams[s].Frame(t);
        const int m_count = gmm.NumComponents();
        if (m_count == 1) {
          sa.occ[s][0] += gamma;
          for (int d = 0; d < gmm.dim; ++d) {
            sa.sum[s][d] += gamma * x[d];
            sa.sumsq[s][d] += gamma * x[d] * x[d];
          }
          continue;
        }
        comp_terms.resize(m_count);
        for (int m = 0; m < m_count; ++m) {
          comp_terms[m] =
              std::log(gmm.weights[m]) + gmm.ComponentLogDensity(m, x);
        }
        double lse = LogSumExp(comp_terms);
        for (int m = 0; m < m_count; ++m) {
          double g = gamma * std::exp(comp_terms[m] - lse);
          sa.occ[s][m] += g;
          for (int d = 0; d < gmm.dim; ++d) {
            sa.sum[s][m * gmm.dim + d] += g * x[d];
            sa.sumsq[s][m * gmm.dim + d] += g * x[d] * x[d];
          }
        }
      }

      // Transition posteriors out of (t, r).
      if (t + 1 < T) {
        double self_post = alpha[t * R + r] + chain[r].log_self +
                           b_of(t + 1, r) + beta[(t + 1) * R + r] - ll;
        if (self_post > -18.0) sa.self_count += std::exp(self_post);
        if (r + 1 < R) {
          double adv_post = alpha[t * R + r] + chain[r].log_adv +
                            b_of(t + 1, r + 1) + beta[(t + 1) * R + r + 1] -
                            ll;
          if (adv_post > -18.0) sa.adv_count += std::exp(adv_post);
        }
      } else if (r + 1 == R) {
        sa.adv_count += std::exp(alpha[t * R + r] + chain[r].log_adv - ll);
      }
    }
  }
}

// Per-stream diagonal variance floors from the pooled training data.
std::vector<std::vector<double>> ComputeVarianceFloors(
    const std::vector<ObservationSequence>& observations,
    const std::vector<int>& dims, double factor) {
  std::vector<std::vector<double>> floors(dims.size());
  for (std::size_t s = 0; s < dims.size(); ++s) {
    std::vector<double> sum(dims[s], 0.0), sumsq(dims[s], 0.0);
    double n = 0.0;
    for (const ObservationSequence& obs : observations) {
      const FrameStream& st = obs.streams[s];
      for (std::size_t t = 0; t < st.NumFrames(); ++t) {
        auto x = st.Frame(t);
        for (int d = 0; d < dims[s]; ++d) {
          sum[d] += x[d];
          sumsq[d] += x[d] * x[d];
        }
      }
      n += static_cast<double>(st.NumFrames());
    }
    floors[s].assign(dims[s], 1e-12);
    for (int d = 0; d < dims[s]; ++d) {
      double mean = sum[d] / n;
      double var = std::max(sumsq[d] / n - mean * mean, 1e-12);
      floors[s][d] = std::max(factor * var, 1e-12);
    }
  }
  return floors;
}

struct EmContext {
  const std::vector<ObservationSequence>* observations;
  std::vector<std::vector<int>> transcriptions;
  std::vector<std::vector<double>> floors;  // per stream, per dim
};

// One Baum-Welch pass; returns the total log-likelihood under the entering
// parameters. E-steps run per sentence (optionally in parallel) and are
// merged in sentence order, so results do not depend on the thread count.
// Starved components keep their parameters so the pass stays a proper
// EM step; pruning happens between stages. The final occupancies land in
// *occupancies when given.
double EmIteration(MsHmmModel* model, const EmContext& ctx,
                   const MsHmmTrainConfig& config,
                   std::map<int, std::vector<StateAccum>>* occupancies) {
  const std::size_t n_sentences = ctx.observations->size();
  std::vector<SentenceAccum> per_sentence(n_sentences);

  const int threads =
      std::max(1, std::min<int>(config.threads,
                                static_cast<int>(n_sentences)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n_sentences; ++i) {
      AccumulateSentence(*model, (*ctx.observations)[i],
                         ctx.transcriptions[i], &per_sentence[i]);
    }
  } else {
    std::vector<std::future<void>> jobs;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < threads; ++w) {
      jobs.push_back(std::async(std::launch::async, [&]() {
        for (std::size_t i = next.fetch_add(1); i < n_sentences;
             i = next.fetch_add(1)) {
          AccumulateSentence(*model, (*ctx.observations)[i],
                             ctx.transcriptions[i], &per_sentence[i]);
        }
      }));
    }
    for (auto& j : jobs) j.get();
  }

  double total_ll = 0.0;
  std::map<int, std::vector<StateAccum>> global;
  for (std::size_t i = 0; i < n_sentences; ++i) {
    total_ll += per_sentence[i].log_likelihood;
    for (auto& [u, states] : per_sentence[i].units) {
      auto it = global.find(u);
      if (it == global.end()) {
        global.emplace(u, std::move(states));
      } else {
        for (std::size_t s = 0; s < states.size(); ++s) {
          it->second[s].MergeFrom(states[s]);
        }
      }
    }
  }

  // M-step.
  for (auto& [u, states] : global) {
    HmmUnit& unit = model->units[u];
    for (std::size_t s = 0; s < states.size(); ++s) {
      StateAccum& sa = states[s];
      HmmState& hs = unit.states[s];

      double state_occ = 0.0;
      for (double o : sa.occ[0]) state_occ += o;
      if (state_occ < 1e-6) continue;  // starved state keeps its parameters

      for (std::size_t st = 0; st < hs.stream_gmms.size(); ++st) {
        DiagGmm& gmm = hs.stream_gmms[st];
        const int dim = gmm.dim;
        double occ_total = 0.0;
        for (int m = 0; m < gmm.NumComponents(); ++m) {
          occ_total += sa.occ[st][m];
        }
        for (int m = 0; m < gmm.NumComponents(); ++m) {
          gmm.weights[m] = sa.occ[st][m] / occ_total;
          if (sa.occ[st][m] < 1e-8) continue;  // keep old shape, zero weight
          for (int d = 0; d < dim; ++d) {
            double mean = sa.sum[st][m * dim + d] / sa.occ[st][m];
            double var =
                sa.sumsq[st][m * dim + d] / sa.occ[st][m] - mean * mean;
            gmm.means[m * dim + d] = mean;
            gmm.vars[m * dim + d] = std::max(var, ctx.floors[st][d]);
          }
        }
      }

      double denom = sa.self_count + sa.adv_count;
      if (denom > 0) {
        hs.self_loop_prob = std::clamp(sa.self_count / denom, kMinSelfLoop,
                                       1.0 - kMinSelfLoop);
      }
    }
  }
  if (occupancies != nullptr) *occupancies = std::move(global);
  return total_ll;
}

// Drops mixture components whose occupancy fell below the configured
// threshold, keeping at least the best-fed one per (state, stream).
void PruneStarved(MsHmmModel* model,
                  const std::map<int, std::vector<StateAccum>>& occupancies,
                  double min_occupancy) {
  for (const auto& [u, states] : occupancies) {
    HmmUnit& unit = model->units[u];
    for (std::size_t s = 0; s < states.size(); ++s) {
      const StateAccum& sa = states[s];
      HmmState& hs = unit.states[s];
      for (std::size_t st = 0; st < hs.stream_gmms.size(); ++st) {
        DiagGmm& gmm = hs.stream_gmms[st];
        std::vector<int> kept;
        for (int m = 0; m < gmm.NumComponents(); ++m) {
          if (sa.occ[st][m] >= min_occupancy) kept.push_back(m);
        }
        if (kept.empty()) {
          int best = 0;
          for (int m = 1; m < gmm.NumComponents(); ++m) {
            if (sa.occ[st][m] > sa.occ[st][best]) best = m;
          }
          kept.push_back(best);
        }
        if (static_cast<int>(kept.size()) == gmm.NumComponents()) continue;
        std::cerr << "csrec: pruned "
                  << gmm.NumComponents() - static_cast<int>(kept.size())
                  << " starved component(s) in unit " << unit.name
                  << " state " << s << " stream " << st << "\n";
        DiagGmm updated;
        updated.dim = gmm.dim;
        double total = 0.0;
        for (int m : kept) total += gmm.weights[m];
        for (int m : kept) {
          updated.weights.push_back(gmm.weights[m] / total);
          for (int d = 0; d < gmm.dim; ++d) {
            updated.means.push_back(gmm.means[m * gmm.dim + d]);
            updated.vars.push_back(gmm.vars[m * gmm.dim + d]);
          }
        }
        gmm = std::move(updated);
      }
    }
  }
}

void SplitToTarget(MsHmmModel* model, int target,
                   const MsHmmTrainConfig& config) {
  for (HmmUnit& unit : model->units) {
    for (HmmState& state : unit.states) {
      for (DiagGmm& gmm : state.stream_gmms) {
        while (gmm.NumComponents() < target) {
          // Split the heaviest component, first index on ties.
          int heaviest = 0;
          for (int m = 1; m < gmm.NumComponents(); ++m) {
            if (gmm.weights[m] > gmm.weights[heaviest]) heaviest = m;
          }
          const int dim = gmm.dim;
          std::vector<double> mean_lo(dim), mean_hi(dim), var(dim);
          for (int d = 0; d < dim; ++d) {
            double sigma = std::sqrt(gmm.vars[heaviest * dim + d]);
            double offset = config.split_perturbation * sigma;
            mean_lo[d] = gmm.means[heaviest * dim + d] - offset;
            mean_hi[d] = gmm.means[heaviest * dim + d] + offset;
            var[d] = gmm.vars[heaviest * dim + d];
          }
          double w = gmm.weights[heaviest] / 2.0;
          gmm.weights[heaviest] = w;
          for (int d = 0; d < dim; ++d) {
            gmm.means[heaviest * dim + d] = mean_lo[d];
          }
          gmm.weights.push_back(w);
          gmm.means.insert(gmm.means.end(), mean_hi.begin(), mean_hi.end());
          gmm.vars.insert(gmm.vars.end(), var.begin(), var.end());
        }
      }
    }
  }
}

std::vector<double> RunEmStage(MsHmmModel* model, const EmContext& ctx,
                               const MsHmmTrainConfig& config,
                               std::map<int, std::vector<StateAccum>>*
                                   occupancies) {
  std::vector<double> trace;
  for (int iter = 0; iter < config.em_iterations_per_stage; ++iter) {
    double ll = EmIteration(model, ctx, config, occupancies);
    trace.push_back(ll);
    if (iter > 0) {
      double prev = trace[trace.size() - 2];
      if (ll - prev < config.min_rel_gain * std::abs(prev)) break;
    }
  }
  return trace;
}

MsHmmModel FlatStart(const Corpus& corpus,
                     const std::vector<ObservationSequence>& observations,
                     const MsHmmTrainConfig& config,
                     const std::vector<std::vector<double>>& floors) {
  MsHmmModel model;
  model.unit_mode = UnitMode::kMonophone;
  model.streams = config.streams;
  for (const FrameStream& s : observations.front().streams) {
    model.stream_dims.push_back(s.dim);
  }
  model.weights.lambda = config.stream_weights.empty()
                             ? StreamWeights::Defaults(config.streams.size())
                                   .lambda
                             : config.stream_weights;
  model.weights.Validate();
  if (model.weights.lambda.size() != model.streams.size()) {
    throw ValidationError("TrainMsHmm: weight count != stream count");
  }
  model.alphabet = corpus.alphabet;

  const std::size_t n_streams = model.streams.size();
  const int n_states = config.n_states;

  // Global and per-(unit,state) moment statistics from a uniform split of
  // each labeled interval across the unit's states.
  struct Moments {
    double n = 0.0;
    std::vector<std::vector<double>> sum, sumsq;  // [stream][dim]
    void Init(const std::vector<int>& dims) {
      sum.resize(dims.size());
      sumsq.resize(dims.size());
      for (std::size_t s = 0; s < dims.size(); ++s) {
        sum[s].assign(dims[s], 0.0);
        sumsq[s].assign(dims[s], 0.0);
      }
    }
    void Add(const ObservationSequence& obs, std::size_t t) {
      n += 1.0;
      for (std::size_t s = 0; s < sum.size(); ++s) {
        auto x = obs.streams[s].Frame(t);
        for (std::size_t d = 0; d < sum[s].size(); ++d) {
          sum[s][d] += x[d];
          sumsq[s][d] += x[d] * x[d];
        }
      }
    }
  };

  Moments global;
  global.Init(model.stream_dims);
  std::map<std::string, std::vector<Moments>> per_unit;
  for (const PhonemeInfo& p : corpus.alphabet.entries()) {
    auto& v = per_unit[p.symbol];
    v.resize(n_states);
    for (Moments& m : v) m.Init(model.stream_dims);
  }

  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    const Sentence& sentence = corpus.sentences[i];
    const ObservationSequence& obs = observations[i];
    const std::size_t T = obs.NumFrames();
    for (std::size_t t = 0; t < T; ++t) global.Add(obs, t);
    for (const Interval& iv : sentence.audio_seg.intervals) {
      // Frame f carries the instant f * period; the interval owns [start, end).
      const TimeMs p = corpus.period_ms;
      std::size_t f0 = static_cast<std::size_t>((iv.start_ms + p - 1) / p);
      std::size_t f1 = std::min<std::size_t>(
          T, static_cast<std::size_t>((iv.end_ms + p - 1) / p));
      if (f0 >= f1) continue;
      auto& states = per_unit.at(iv.label);
      const std::size_t len = f1 - f0;
      for (std::size_t k = 0; k < len; ++k) {
        int s = static_cast<int>(k * n_states / len);
        states[s].Add(obs, f0 + k);
      }
    }
  }

  auto moment_gmm = [&](const Moments& m, const Moments& fallback,
                        std::size_t stream) {
    const Moments& src = m.n >= 2.0 ? m : fallback;
    DiagGmm gmm;
    gmm.dim = model.stream_dims[stream];
    gmm.weights = {1.0};
    for (int d = 0; d < gmm.dim; ++d) {
      double mean = src.sum[stream][d] / src.n;
      double var = src.sumsq[stream][d] / src.n - mean * mean;
      gmm.means.push_back(mean);
      gmm.vars.push_back(std::max(var, floors[stream][d]));
    }
    return gmm;
  };

  for (const PhonemeInfo& p : corpus.alphabet.entries()) {
    HmmUnit unit;
    unit.name = p.symbol;
    unit.center = p.symbol;
    const auto& moments = per_unit.at(p.symbol);
    for (int s = 0; s < n_states; ++s) {
      HmmState state;
      state.self_loop_prob = 0.5;
      for (std::size_t st = 0; st < n_streams; ++st) {
        state.stream_gmms.push_back(moment_gmm(moments[s], global, st));
      }
      unit.states.push_back(std::move(state));
    }
    model.units.push_back(std::move(unit));
  }
  model.RebuildIndex();
  return model;
}

EmContext MakeContext(const MsHmmModel& model, const Corpus& corpus,
                      const std::vector<ObservationSequence>& observations,
                      double floor_factor) {
  EmContext ctx;
  ctx.observations = &observations;
  for (const Sentence& s : corpus.sentences) {
    ctx.transcriptions.push_back(TranscriptionUnits(model, s));
  }
  ctx.floors = ComputeVarianceFloors(observations, model.stream_dims,
                                     floor_factor);
  return ctx;
}

std::vector<ObservationSequence> AssembleAll(
    const Corpus& corpus, const std::vector<Modality>& streams) {
  std::vector<ObservationSequence> observations;
  observations.reserve(corpus.sentences.size());
  for (const Sentence& s : corpus.sentences) {
    observations.push_back(AssembleObservations(s, streams));
  }
  return observations;
}

}  // namespace

void MsHmmTrainConfig::Validate() const {
  if (streams.empty()) throw ValidationError("MsHmmTrainConfig: no streams");
  if (n_states < 1) throw ValidationError("MsHmmTrainConfig: n_states < 1");
  if (mixture_stages.empty()) {
    throw ValidationError("MsHmmTrainConfig: empty mixture schedule");
  }
  int prev = 0;
  for (int m : mixture_stages) {
    if (m <= prev) {
      throw ValidationError(
          "MsHmmTrainConfig: mixture schedule must increase");
    }
    prev = m;
  }
  if (em_iterations_per_stage < 1) {
    throw ValidationError("MsHmmTrainConfig: em_iterations_per_stage < 1");
  }
  if (variance_floor_factor <= 0) {
    throw ValidationError("MsHmmTrainConfig: variance floor must be > 0");
  }
}

MsHmmModel TrainMsHmm(const Corpus& corpus, const MsHmmTrainConfig& config) {
  config.Validate();
  if (corpus.sentences.empty()) {
    throw ValidationError("TrainMsHmm: empty corpus");
  }
  std::vector<ObservationSequence> observations =
      AssembleAll(corpus, config.streams);
  std::vector<int> dims;
  for (const FrameStream& s : observations.front().streams) {
    dims.push_back(s.dim);
  }
  std::vector<std::vector<double>> floors = ComputeVarianceFloors(
      observations, dims, config.variance_floor_factor);

  MsHmmModel model = FlatStart(corpus, observations, config, floors);
  EmContext ctx;
  ctx.observations = &observations;
  for (const Sentence& s : corpus.sentences) {
    ctx.transcriptions.push_back(TranscriptionUnits(model, s));
  }
  ctx.floors = floors;

  std::map<int, std::vector<StateAccum>> occupancies;
  for (std::size_t stage = 0; stage < config.mixture_stages.size(); ++stage) {
    if (!occupancies.empty()) {
      PruneStarved(&model, occupancies, config.min_component_occupancy);
    }
    SplitToTarget(&model, config.mixture_stages[stage], config);
    model.ll_stages.push_back(RunEmStage(&model, ctx, config, &occupancies));
  }
  PruneStarved(&model, occupancies, config.min_component_occupancy);
  model.Validate();
  return model;
}

void RunEmbeddedEm(MsHmmModel* model, const Corpus& corpus,
                   const MsHmmTrainConfig& config) {
  config.Validate();
  std::vector<ObservationSequence> observations =
      AssembleAll(corpus, model->streams);
  EmContext ctx = MakeContext(*model, corpus, observations,
                              config.variance_floor_factor);
  std::map<int, std::vector<StateAccum>> occupancies;
  model->ll_stages.push_back(RunEmStage(model, ctx, config, &occupancies));
  PruneStarved(model, occupancies, config.min_component_occupancy);
  model->Validate();
}

MsHmmModel ExpandTriphones(const MsHmmModel& monophone_model,
                           const Corpus& corpus, int min_occupancy,
                           const MsHmmTrainConfig& retrain_config) {
  if (min_occupancy < 1) {
    throw ValidationError("ExpandTriphones: min_occupancy < 1");
  }
  // Trigram counts over audio transcriptions; silence is never expanded.
  std::map<std::string, std::pair<std::string, int>> trigrams;
  for (const Sentence& s : corpus.sentences) {
    const auto& ivs = s.audio_seg.intervals;
    for (std::size_t k = 0; k < ivs.size(); ++k) {
      const std::string& center = ivs[k].label;
      if (corpus.alphabet.KindOf(center) == PhonemeKind::kSilence) continue;
      const std::string left = k > 0 ? ivs[k - 1].label : "sil";
      const std::string right = k + 1 < ivs.size() ? ivs[k + 1].label : "sil";
      auto& entry = trigrams[left + "-" + center + "+" + right];
      entry.first = center;
      ++entry.second;
    }
  }

  MsHmmModel model = monophone_model;
  bool any = false;
  for (const auto& [name, info] : trigrams) {
    if (info.second < min_occupancy) continue;
    int mono = model.UnitIndex(info.first);
    if (mono < 0) {
      throw ValidationError("ExpandTriphones: no monophone for '" +
                            info.first + "'");
    }
    HmmUnit clone = model.units[mono];
    clone.name = name;
    clone.center = info.first;
    model.units.push_back(std::move(clone));
    any = true;
  }
  if (!any) return monophone_model;

  model.unit_mode = UnitMode::kTriphone;
  model.RebuildIndex();
  RunEmbeddedEm(&model, corpus, retrain_config);
  return model;
}

}  // namespace csrec
