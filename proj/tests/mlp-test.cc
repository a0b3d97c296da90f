// tests/mlp-test.cc

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

#include <cmath>
#include <random>

#include "csrec/mlp.h"
#include "doctest.h"
#include "test-util.h"

using namespace csrec;

namespace {

std::vector<WindowSample> SeparableBlobs(int per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.4);
  std::vector<WindowSample> samples;
  for (int i = 0; i < per_class; ++i) {
    samples.push_back(WindowSample{"a", {-2.0 + noise(rng), noise(rng)}});
    samples.push_back(WindowSample{"b", {2.0 + noise(rng), noise(rng)}});
  }
  return samples;
}

MlpModel RandomModel(std::vector<int> layers, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.7);
  MlpModel model;
  model.layer_sizes = layers;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    std::vector<double> w(static_cast<std::size_t>(layers[l]) *
                          layers[l + 1]);
    std::vector<double> b(layers[l + 1]);
    for (double& v : w) v = n(rng);
    for (double& v : b) v = 0.3 * n(rng);
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
  }
  for (int k = 0; k < layers.back(); ++k) {
    model.labels.push_back(std::string(1, static_cast<char>('a' + k)));
  }
  return model;
}

}  // namespace

TEST_CASE("backprop matches central finite differences") {
  MlpModel model = RandomModel({3, 4, 4, 3}, 17);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  for (int i = 0; i < 12; ++i) {
    xs.push_back({n(rng), n(rng), n(rng)});
    ys.push_back(i % 3);
  }

  std::vector<double> grad = MlpGradient(model, xs, ys);
  std::vector<double> params = MlpFlattenParams(model);
  REQUIRE(grad.size() == params.size());

  const double h = 1e-5;
  double max_rel = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    std::vector<double> bumped = params;
    bumped[p] += h;
    MlpSetParams(&model, bumped);
    double up = MlpCrossEntropy(model, xs, ys);
    bumped[p] = params[p] - h;
    MlpSetParams(&model, bumped);
    double down = MlpCrossEntropy(model, xs, ys);
    MlpSetParams(&model, params);
    double numeric = (up - down) / (2 * h);
    double denom = std::max({std::abs(numeric), std::abs(grad[p]), 1e-8});
    max_rel = std::max(max_rel, std::abs(numeric - grad[p]) / denom);
  }
  CHECK(max_rel < 1e-4);
}

TEST_CASE("separable data trains to high accuracy within 500 epochs") {
  std::vector<WindowSample> samples = SeparableBlobs(60, 9);
  MlpTrainOptions options;
  options.seed = 2;
  MlpTrainResult result = TrainMlp(samples, options);
  std::size_t hits = 0;
  for (const WindowSample& s : samples) {
    std::vector<double> p = MlpPosteriors(result.model, s.features);
    std::size_t best = p[0] > p[1] ? 0 : 1;
    if (result.model.labels[best] == s.label) ++hits;
  }
  CHECK(static_cast<double>(hits) / samples.size() >= 0.99);
}

TEST_CASE("training is deterministic in the seed") {
  std::vector<WindowSample> samples = SeparableBlobs(30, 5);
  MlpTrainOptions options;
  options.max_epochs = 40;
  options.seed = 11;
  MlpTrainResult a = TrainMlp(samples, options);
  MlpTrainResult b = TrainMlp(samples, options);
  CHECK(MlpFlattenParams(a.model) == MlpFlattenParams(b.model));
  CHECK(a.train_loss == b.train_loss);

  options.seed = 12;
  MlpTrainResult c = TrainMlp(samples, options);
  CHECK(MlpFlattenParams(a.model) != MlpFlattenParams(c.model));
}

TEST_CASE("full-batch training loss is non-increasing") {
  std::vector<WindowSample> samples = SeparableBlobs(40, 23);
  MlpTrainOptions options;
  options.batch_size = 0;  // full batch
  options.dropout = 0.0;
  options.validation_fraction = 0.0;
  options.max_epochs = 120;
  options.patience = 120;
  options.seed = 3;
  MlpTrainResult result = TrainMlp(samples, options);
  REQUIRE(result.train_loss.size() >= 10);
  for (std::size_t e = 1; e < result.train_loss.size(); ++e) {
    CHECK(result.train_loss[e] <= result.train_loss[e - 1] + 1e-9);
  }
}

TEST_CASE("posterior properties") {
  SUBCASE("zero weights give the uniform distribution") {
    MlpModel model = RandomModel({2, 4, 4, 5}, 1);
    for (auto& w : model.weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : model.biases) std::fill(b.begin(), b.end(), 0.0);
    std::vector<double> p = MlpPosteriors(model, std::vector<double>{3, -1});
    for (double v : p) CHECK(v == doctest::Approx(0.2));
  }

  SUBCASE("posteriors are a distribution") {
    MlpModel model = RandomModel({3, 4, 4, 4}, 8);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int i = 0; i < 50; ++i) {
      std::vector<double> x{n(rng), n(rng), n(rng)};
      std::vector<double> p = MlpPosteriors(model, x);
      double sum = 0.0;
      for (double v : p) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }

  SUBCASE("scaling the output layer preserves the argmax") {
    MlpModel model = RandomModel({2, 4, 4, 6}, 3);
    MlpModel hot = model;
    for (double& v : hot.weights.back()) v *= 2.5;
    for (double& v : hot.biases.back()) v *= 2.5;
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0.0, 1.5);
    for (int i = 0; i < 40; ++i) {
      std::vector<double> x{n(rng), n(rng)};
      std::vector<double> p = MlpPosteriors(model, x);
      std::vector<double> q = MlpPosteriors(hot, x);
      CHECK(std::distance(p.begin(), std::max_element(p.begin(), p.end())) ==
            std::distance(q.begin(), std::max_element(q.begin(), q.end())));
    }
  }
}

TEST_CASE("dropout is training-only, inference stays deterministic") {
  std::vector<WindowSample> samples = SeparableBlobs(30, 14);
  MlpTrainOptions options;
  options.dropout = 0.25;
  options.max_epochs = 30;
  options.seed = 4;
  MlpTrainResult result = TrainMlp(samples, options);
  std::vector<double> p1 =
      MlpPosteriors(result.model, samples[0].features);
  std::vector<double> p2 =
      MlpPosteriors(result.model, samples[0].features);
  CHECK(p1 == p2);
}

TEST_CASE("single-class data is refused") {
  std::vector<WindowSample> degenerate;
  for (int i = 0; i < 20; ++i) {
    degenerate.push_back(WindowSample{"only", {1.0 * i, 0.0}});
  }
  CHECK_THROWS_AS(TrainMlp(degenerate, MlpTrainOptions{}), ValidationError);
}

TEST_CASE("mlp model JSON round-trips") {
  test::TempDir tmp("mlp");
  MlpModel model = RandomModel({2, 4, 4, 6}, 19);
  SaveMlpModel(model, tmp.path() / "mlp.json");
  MlpModel loaded = LoadMlpModel(tmp.path() / "mlp.json");
  CHECK(loaded.layer_sizes == model.layer_sizes);
  CHECK(loaded.labels == model.labels);
  CHECK(MlpFlattenParams(loaded) == MlpFlattenParams(model));
}
