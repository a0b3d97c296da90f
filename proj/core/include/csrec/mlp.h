// core/include/csrec/mlp.h

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

#ifndef CSREC_MLP_H_
#define CSREC_MLP_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "csrec/classify.h"
#include "csrec/types.h"

namespace csrec {

// Small feed-forward network producing hand-position posterior features:
// rectifier hidden layers, softmax output.

struct MlpModel {
  std::vector<int> layer_sizes;  // [d_in, hidden..., n_out]
  // Per layer: out x in row-major weight matrix and out-sized bias.
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  std::vector<std::string> labels;  // output class order, sorted

  int InputDim() const { return layer_sizes.front(); }
  int OutputDim() const { return layer_sizes.back(); }
};

struct MlpTrainOptions {
  std::vector<int> hidden_sizes = {4, 4};
  double learning_rate = 0.001;
  int batch_size = 32;  // <= 0 means full batch
  double dropout = 0.25;
  int patience = 10;
  double validation_fraction = 0.2;
  int max_epochs = 500;
  double rmsprop_rho = 0.9;
  double rmsprop_eps = 1e-8;
  std::uint64_t seed = 1;
};

struct MlpTrainResult {
  MlpModel model;  // best-validation weights
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = 0;
};

// Mini-batch RMSprop on categorical cross-entropy, inverted dropout on the
// hidden layers, early stop when validation loss stalls for `patience`
// epochs. Deterministic in options.seed.
MlpTrainResult TrainMlp(const std::vector<WindowSample>& samples,
                        const MlpTrainOptions& options = MlpTrainOptions{});

// Inference posteriors (dropout off): strictly positive, sum to one.
std::vector<double> MlpPosteriors(const MlpModel& model,
                                  std::span<const double> x);

// Full-batch diagnostics used by training and numerical checks. ys holds
// class indices into model.labels.
double MlpCrossEntropy(const MlpModel& model,
                       const std::vector<std::vector<double>>& xs,
                       const std::vector<int>& ys);
std::vector<double> MlpFlattenParams(const MlpModel& model);
void MlpSetParams(MlpModel* model, std::span<const double> params);
// Gradient of the average cross-entropy in MlpFlattenParams order.
std::vector<double> MlpGradient(const MlpModel& model,
                                const std::vector<std::vector<double>>& xs,
                                const std::vector<int>& ys);

MlpModel LoadMlpModel(const std::filesystem::path& path);
void SaveMlpModel(const MlpModel& model, const std::filesystem::path& path);

}  // namespace csrec

#endif  // CSREC_MLP_H_
