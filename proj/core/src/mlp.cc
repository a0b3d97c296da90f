// core/src/mlp.cc

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

#include "csrec/mlp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "csrec/rng.h"
#include "json-util.h"

namespace csrec {

namespace {

std::vector<double> Softmax(std::span<const double> logits) {
  double max_v = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_v);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

// Activations per layer; activations[0] is the input, the last entry the
// softmax output. Dropout masks, when given, multiply hidden activations.
struct ForwardCache {
  std::vector<std::vector<double>> activations;
};

void Forward(const MlpModel& model, std::span<const double> x,
             const std::vector<std::vector<double>>* dropout_masks,
             ForwardCache* cache) {
  const std::size_t n_layers = model.weights.size();
  cache->activations.assign(n_layers + 1, {});
  cache->activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = model.layer_sizes[l];
    const int out = model.layer_sizes[l + 1];
    const std::vector<double>& a = cache->activations[l];
    std::vector<double> z(out);
    for (int o = 0; o < out; ++o) {
      double acc = model.biases[l][o];
      const double* w = model.weights[l].data() + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc += w[i] * a[i];
      z[o] = acc;
    }
    if (l + 1 < n_layers) {
      for (double& v : z) v = std::max(0.0, v);
      if (dropout_masks != nullptr) {
        const std::vector<double>& mask = (*dropout_masks)[l];
        for (int o = 0; o < out; ++o) z[o] *= mask[o];
      }
      cache->activations[l + 1] = std::move(z);
    } else {
      cache->activations[l + 1] = Softmax(z);
    }
  }
}

std::size_t ParamCount(const MlpModel& model) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    n += model.weights[l].size() + model.biases[l].size();
  }
  return n;
}

// Accumulates the cross-entropy gradient of one sample into grad (flattened
// layout: per layer weights then biases). Returns the sample loss.
double BackwardAccumulate(const MlpModel& model, const ForwardCache& cache,
                          int target,
                          const std::vector<std::vector<double>>* dropout_masks,
                          std::vector<double>* grad) {
  const std::size_t n_layers = model.weights.size();
  const std::vector<double>& probs = cache.activations.back();
  double loss = -std::log(std::max(probs[target], 1e-300));

  // softmax + cross entropy: dz = p - onehot
  std::vector<double> dz = probs;
  dz[target] -= 1.0;

  std::size_t offset = ParamCount(model);
  for (std::size_t li = n_layers; li-- > 0;) {
    const int in = model.layer_sizes[li];
    const int out = model.layer_sizes[li + 1];
    offset -= model.weights[li].size() + model.biases[li].size();
    double* gw = grad->data() + offset;
    double* gb = gw + model.weights[li].size();
    const std::vector<double>& a = cache.activations[li];
    for (int o = 0; o < out; ++o) {
      gb[o] += dz[o];
      double* row = gw + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) row[i] += dz[o] * a[i];
    }
    if (li == 0) break;
    std::vector<double> da(in, 0.0);
    for (int o = 0; o < out; ++o) {
      const double* w =
          model.weights[li].data() + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) da[i] += w[i] * dz[o];
    }
    // Through dropout, then the rectifier (a > 0 iff the unit fired).
    if (dropout_masks != nullptr) {
      const std::vector<double>& mask = (*dropout_masks)[li - 1];
      for (int i = 0; i < in; ++i) da[i] *= mask[i];
    }
    for (int i = 0; i < in; ++i) {
      if (cache.activations[li][i] <= 0.0) da[i] = 0.0;
    }
    dz = std::move(da);
  }
  return loss;
}

}  // namespace

std::vector<double> MlpPosteriors(const MlpModel& model,
                                  std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.InputDim()) {
    throw ValidationError("MlpPosteriors: input dim mismatch");
  }
  ForwardCache cache;
  Forward(model, x, nullptr, &cache);
  return cache.activations.back();
}

double MlpCrossEntropy(const MlpModel& model,
                       const std::vector<std::vector<double>>& xs,
                       const std::vector<int>& ys) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw ValidationError("MlpCrossEntropy: bad inputs");
  }
  double total = 0.0;
  ForwardCache cache;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Forward(model, xs[i], nullptr, &cache);
    total += -std::log(std::max(cache.activations.back()[ys[i]], 1e-300));
  }
  return total / static_cast<double>(xs.size());
}

std::vector<double> MlpFlattenParams(const MlpModel& model) {
  std::vector<double> out;
  out.reserve(ParamCount(model));
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    out.insert(out.end(), model.weights[l].begin(), model.weights[l].end());
    out.insert(out.end(), model.biases[l].begin(), model.biases[l].end());
  }
  return out;
}

void MlpSetParams(MlpModel* model, std::span<const double> params) {
  std::size_t offset = 0;
  for (std::size_t l = 0; l < model->weights.size(); ++l) {
    std::copy_n(params.begin() + offset, model->weights[l].size(),
                model->weights[l].begin());
    offset += model->weights[l].size();
    std::copy_n(params.begin() + offset, model->biases[l].size(),
                model->biases[l].begin());
    offset += model->biases[l].size();
  }
  if (offset != params.size()) {
    throw ValidationError("MlpSetParams: parameter count mismatch");
  }
}

std::vector<double> MlpGradient(const MlpModel& model,
                                const std::vector<std::vector<double>>& xs,
                                const std::vector<int>& ys) {
  std::vector<double> grad(ParamCount(model), 0.0);
  ForwardCache cache;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Forward(model, xs[i], nullptr, &cache);
    BackwardAccumulate(model, cache, ys[i], nullptr, &grad);
  }
  for (double& g : grad) g /= static_cast<double>(xs.size());
  return grad;
}

MlpTrainResult TrainMlp(const std::vector<WindowSample>& samples,
                        const MlpTrainOptions& options) {
  if (samples.size() < 2) {
    throw ValidationError("TrainMlp: need at least 2 samples");
  }
  const int d_in = static_cast<int>(samples.front().features.size());
  std::map<std::string, int> label_index;
  for (const WindowSample& s : samples) {
    if (static_cast<int>(s.features.size()) != d_in) {
      throw ValidationError("TrainMlp: inconsistent feature dims");
    }
    label_index.emplace(s.label, 0);
  }
  if (label_index.size() < 2) {
    throw ValidationError("TrainMlp: degenerate single-class data");
  }

  MlpModel model;
  for (auto& [label, idx] : label_index) {
    idx = static_cast<int>(model.labels.size());
    model.labels.push_back(label);
  }
  model.layer_sizes.push_back(d_in);
  for (int h : options.hidden_sizes) {
    if (h < 1) throw ValidationError("TrainMlp: hidden size < 1");
    model.layer_sizes.push_back(h);
  }
  model.layer_sizes.push_back(static_cast<int>(model.labels.size()));

  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  for (const WindowSample& s : samples) {
    xs.push_back(s.features);
    ys.push_back(label_index.at(s.label));
  }

  // Glorot-uniform weights, zero biases.
  std::mt19937_64 init_rng = MakeRng(options.seed, "mlp.init");
  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    const int in = model.layer_sizes[l];
    const int out = model.layer_sizes[l + 1];
    double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> u(-limit, limit);
    std::vector<double> w(static_cast<std::size_t>(in) * out);
    for (double& v : w) v = u(init_rng);
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::vector<double>(out, 0.0));
  }

  // Group-free split: deterministic shuffle, tail fraction for validation.
  std::mt19937_64 rng = MakeRng(options.seed, "mlp.train");
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(
      options.validation_fraction * static_cast<double>(xs.size()));
  std::vector<std::size_t> train_idx(order.begin(), order.end() - n_val);
  std::vector<std::size_t> val_idx(order.end() - n_val, order.end());
  if (train_idx.empty()) {
    throw ValidationError("TrainMlp: validation fraction leaves no training data");
  }

  auto subset_loss = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::vector<double>> sx;
    std::vector<int> sy;
    sx.reserve(idx.size());
    for (std::size_t i : idx) {
      sx.push_back(xs[i]);
      sy.push_back(ys[i]);
    }
    return MlpCrossEntropy(model, sx, sy);
  };

  const std::size_t n_params = ParamCount(model);
  std::vector<double> ms(n_params, 0.0);  // RMSprop mean square
  std::vector<double> grad(n_params, 0.0);
  const bool use_dropout = options.dropout > 0.0 && options.dropout < 1.0;
  std::bernoulli_distribution keep(1.0 - options.dropout);

  MlpTrainResult result;
  std::vector<double> best_params = MlpFlattenParams(model);
  double best_monitor = std::numeric_limits<double>::infinity();
  int stall = 0;

  const std::size_t batch =
      options.batch_size <= 0
          ? train_idx.size()
          : std::min<std::size_t>(options.batch_size, train_idx.size());

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    for (std::size_t start = 0; start < train_idx.size(); start += batch) {
      const std::size_t stop = std::min(start + batch, train_idx.size());
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < stop; ++k) {
        std::vector<std::vector<double>> masks;
        if (use_dropout) {
          for (std::size_t l = 0; l + 2 < model.layer_sizes.size(); ++l) {
            std::vector<double> mask(model.layer_sizes[l + 1]);
            for (double& m : mask) {
              m = keep(rng) ? 1.0 / (1.0 - options.dropout) : 0.0;
            }
            masks.push_back(std::move(mask));
          }
        }
        ForwardCache cache;
        Forward(model, xs[train_idx[k]], use_dropout ? &masks : nullptr,
                &cache);
        BackwardAccumulate(model, cache, ys[train_idx[k]],
                           use_dropout ? &masks : nullptr, &grad);
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      std::vector<double> params = MlpFlattenParams(model);
      for (std::size_t p = 0; p < n_params; ++p) {
        double g = grad[p] * inv;
        ms[p] = options.rmsprop_rho * ms[p] +
                (1.0 - options.rmsprop_rho) * g * g;
        params[p] -= options.learning_rate * g /
                     (std::sqrt(ms[p]) + options.rmsprop_eps);
      }
      MlpSetParams(&model, params);
    }

    result.train_loss.push_back(subset_loss(train_idx));
    double monitor = val_idx.empty() ? result.train_loss.back()
                                     : subset_loss(val_idx);
    result.val_loss.push_back(monitor);
    if (monitor < best_monitor - 1e-12) {
      best_monitor = monitor;
      best_params = MlpFlattenParams(model);
      result.best_epoch = epoch;
      stall = 0;
    } else if (++stall >= options.patience) {
      break;
    }
  }
  MlpSetParams(&model, best_params);
  result.model = std::move(model);
  return result;
}

namespace {
constexpr int kMlpModelVersion = 1;
}  // namespace

MlpModel LoadMlpModel(const std::filesystem::path& path) {
  internal::Json doc = internal::ReadJsonFile(path);
  internal::RequireVersion(doc, kMlpModelVersion, "mlp model");
  internal::RequireKeys(
      doc, {"version", "layer_sizes", "weights", "biases", "labels"},
      "mlp model");
  MlpModel model;
  model.layer_sizes = doc.at("layer_sizes").get<std::vector<int>>();
  for (const internal::Json& w : doc.at("weights")) {
    model.weights.push_back(w.get<std::vector<double>>());
  }
  for (const internal::Json& b : doc.at("biases")) {
    model.biases.push_back(b.get<std::vector<double>>());
  }
  model.labels = doc.at("labels").get<std::vector<std::string>>();
  if (model.weights.size() + 1 != model.layer_sizes.size() ||
      model.biases.size() != model.weights.size()) {
    throw FormatError("mlp model: inconsistent layer shapes");
  }
  return model;
}

void SaveMlpModel(const MlpModel& model, const std::filesystem::path& path) {
  internal::Json doc;
  doc["version"] = kMlpModelVersion;
  doc["layer_sizes"] = model.layer_sizes;
  doc["weights"] = model.weights;
  doc["biases"] = model.biases;
  doc["labels"] = model.labels;
  internal::WriteJsonFile(path, doc);
}

}  // namespace csrec
