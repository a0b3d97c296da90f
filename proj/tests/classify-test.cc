// tests/classify-test.cc

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
#include <numbers>
#include <random>

#include "csrec/classify.h"
#include "csrec/io.h"
#include "doctest.h"
#include "test-util.h"

using namespace csrec;

namespace {

// Independent full-covariance log-density via plain Gauss-Jordan, long
// double arithmetic; shares nothing with the library path.
long double ReferenceLogDensity(const std::vector<double>& x,
                                const std::vector<double>& mean,
                                const std::vector<double>& cov, int dim) {
  std::vector<std::vector<long double>> a(
      dim, std::vector<long double>(2 * dim, 0.0L));
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a[i][j] = cov[i * dim + j];
    a[i][dim + i] = 1.0L;
  }
  long double det = 1.0L;
  for (int col = 0; col < dim; ++col) {
    int pivot = col;
    for (int r = col + 1; r < dim; ++r) {
      if (std::abs(static_cast<double>(a[r][col])) >
          std::abs(static_cast<double>(a[pivot][col]))) {
        pivot = r;
      }
    }
    if (pivot != col) {
      std::swap(a[pivot], a[col]);
      det = -det;
    }
    det *= a[col][col];
    long double inv = 1.0L / a[col][col];
    for (int j = 0; j < 2 * dim; ++j) a[col][j] *= inv;
    for (int r = 0; r < dim; ++r) {
      if (r == col) continue;
      long double f = a[r][col];
      for (int j = 0; j < 2 * dim; ++j) a[r][j] -= f * a[col][j];
    }
  }
  long double quad = 0.0L;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      quad += (x[i] - mean[i]) * a[i][dim + j] * (x[j] - mean[j]);
    }
  }
  return -0.5L * (dim * std::log(2.0L * std::numbers::pi_v<long double>) +
                  std::log(det) + quad);
}

std::vector<WindowSample> TwoBlobs(double separation, double sigma, int n,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<WindowSample> samples;
  for (int i = 0; i < n; ++i) {
    samples.push_back(
        WindowSample{"a", {-separation / 2 + noise(rng), noise(rng)}});
    samples.push_back(
        WindowSample{"b", {separation / 2 + noise(rng), noise(rng)}});
  }
  return samples;
}

}  // namespace

TEST_CASE("window extraction averages the frames around the midpoint") {
  // Frame i holds the value i at instant i * 20ms.
  FrameStream s;
  s.modality = Modality::kHandShape;
  s.period_ms = 20;
  s.dim = 1;
  for (int i = 0; i < 50; ++i) s.data.push_back(i);

  Segmentation seg;
  seg.intervals = {{80, 120, "x"}};  // midpoint 100

  SUBCASE("a 60 ms window at 50 fps averages three frames") {
    auto w = ExtractWindowFeatures(s, seg, 60.0);
    REQUIRE(w.samples.size() == 1);
    // Frames at 80, 100, 120 -> indices 4, 5, 6.
    CHECK(w.samples[0].features[0] == doctest::Approx(5.0));
    CHECK(w.samples[0].label == "x");
  }

  SUBCASE("a one-frame window returns that frame verbatim") {
    auto w = ExtractWindowFeatures(s, seg, 20.0);
    REQUIRE(w.samples.size() == 1);
    CHECK(w.samples[0].features[0] == 5.0);
  }

  SUBCASE("a constant stream yields the constant for any midpoint") {
    FrameStream flat = s;
    std::fill(flat.data.begin(), flat.data.end(), 3.25);
    Segmentation many;
    many.intervals = {{0, 100, "p"}, {200, 260, "q"}, {700, 980, "r"}};
    auto w = ExtractWindowFeatures(flat, many, 60.0);
    REQUIRE(w.samples.size() == 3);
    for (const WindowSample& sample : w.samples) {
      CHECK(sample.features[0] == 3.25);
    }
  }

  SUBCASE("intervals outside the stream are skipped and counted") {
    Segmentation outside;
    outside.intervals = {{5000, 5100, "x"}};
    auto w = ExtractWindowFeatures(s, outside, 60.0);
    CHECK(w.samples.empty());
    CHECK(w.skipped == 1);
  }
}

TEST_CASE("well-separated blobs classify perfectly") {
  std::vector<WindowSample> samples = TwoBlobs(10.0, 0.5, 60, 21);
  GmmTrainOptions options;
  MultiGaussianModel model = TrainMultiGaussian(samples, options);
  CHECK(MgAccuracy(model, samples) == doctest::Approx(1.0));

  SUBCASE("query at a class mean returns that class") {
    CHECK(ClassifyMg(model, std::vector<double>{-5.0, 0.0}) == "a");
    CHECK(ClassifyMg(model, std::vector<double>{5.0, 0.0}) == "b");
  }

  SUBCASE("equidistant queries break ties toward the first label") {
    // Equal covariances by construction symmetry are close enough that the
    // midpoint is a near-tie; force an exact tie with a handmade model.
    MultiGaussianModel tie;
    tie.dim = 1;
    tie.labels = {"a", "b"};
    for (double mu : {-1.0, 1.0}) {
      FullGaussian g;
      g.dim = 1;
      g.mean = {mu};
      g.cov = {1.0};
      g.Finalize();
      FullGmm gmm;
      gmm.dim = 1;
      gmm.weights = {1.0};
      gmm.components = {g};
      tie.classes.push_back(gmm);
    }
    CHECK(ClassifyMg(tie, std::vector<double>{0.0}) == "a");
  }

  SUBCASE("non-finite input is rejected") {
    CHECK_THROWS_AS(
        ClassifyMg(model,
                   std::vector<double>{std::nan(""), 0.0}),
        ValidationError);
  }
}

TEST_CASE("classification agrees with an independent density oracle") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 2.0);
  std::uniform_real_distribution<double> spread(0.5, 2.0);
  const int dim = 3;

  MultiGaussianModel model;
  model.dim = dim;
  for (int k = 0; k < 4; ++k) {
    FullGmm gmm;
    gmm.dim = dim;
    gmm.weights = {1.0};
    FullGaussian g;
    g.dim = dim;
    for (int d = 0; d < dim; ++d) g.mean.push_back(n(rng));
    // Random SPD covariance: A * A^T + eps I.
    std::vector<double> a(dim * dim);
    for (double& v : a) v = spread(rng) * n(rng) * 0.2;
    g.cov.assign(dim * dim, 0.0);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        for (int l = 0; l < dim; ++l) {
          g.cov[i * dim + j] += a[i * dim + l] * a[j * dim + l];
        }
      }
      g.cov[i * dim + i] += 0.5;
    }
    g.Finalize();
    gmm.components = {g};
    model.classes.push_back(gmm);
    model.labels.push_back("k" + std::to_string(k));
  }

  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(dim);
    for (double& v : x) v = n(rng);
    // Oracle argmax.
    int best = 0;
    long double best_ll = -1e30L;
    for (int k = 0; k < 4; ++k) {
      long double ll = ReferenceLogDensity(
          x, model.classes[k].components[0].mean,
          model.classes[k].components[0].cov, dim);
      CHECK(static_cast<double>(ll) ==
            doctest::Approx(model.classes[k].LogDensity(x)).epsilon(1e-9));
      if (ll > best_ll) {
        best_ll = ll;
        best = k;
      }
    }
    CHECK(ClassifyMg(model, x) == model.labels[best]);
  }
}

TEST_CASE("EM never decreases the data log-likelihood") {
  // Bimodal data, two components.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> data;
  for (int i = 0; i < 300; ++i) {
    data.push_back((i % 2 == 0 ? -4.0 : 4.0) + n(rng));
    data.push_back(n(rng));
  }
  GmmTrainOptions options;
  options.n_components = 2;
  std::vector<double> trace;
  FullGmm gmm = TrainFullGmm(data, 2, options, &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i] >= trace[i - 1] - 1e-6);
  }
  CHECK(gmm.components.size() == 2);
  CHECK(std::abs(gmm.components[0].mean[0]) == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("classification is invariant under a common translation") {
  std::vector<WindowSample> samples = TwoBlobs(6.0, 0.8, 50, 13);
  GmmTrainOptions options;
  MultiGaussianModel base = TrainMultiGaussian(samples, options);

  std::vector<WindowSample> moved = samples;
  for (WindowSample& s : moved) {
    s.features[0] += 123.0;
    s.features[1] -= 45.0;
  }
  MultiGaussianModel shifted = TrainMultiGaussian(moved, options);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 4.0);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x{n(rng), n(rng)};
    std::vector<double> y{x[0] + 123.0, x[1] - 45.0};
    CHECK(ClassifyMg(base, x) == ClassifyMg(shifted, y));
  }
}

TEST_CASE("training errors name the starved class") {
  std::vector<WindowSample> samples = TwoBlobs(6.0, 0.5, 40, 3);
  samples.push_back(WindowSample{"rare", {0.0, 0.0}});
  GmmTrainOptions options;
  CHECK_THROWS_WITH_AS(TrainMultiGaussian(samples, options),
                       doctest::Contains("rare"), ValidationError);
}

TEST_CASE("degenerate clusters stay positive definite by flooring") {
  // All points identical except a hair of noise in one dimension.
  std::vector<WindowSample> samples;
  for (int i = 0; i < 30; ++i) {
    samples.push_back(WindowSample{"a", {1.0, 2.0 + i * 1e-9}});
    samples.push_back(WindowSample{"b", {5.0, -1.0}});
  }
  GmmTrainOptions options;
  MultiGaussianModel model = TrainMultiGaussian(samples, options);
  CHECK(std::isfinite(model.classes[0].LogDensity(
      std::vector<double>{1.0, 2.0})));
  CHECK(MgAccuracy(model, samples) == doctest::Approx(1.0));
}

TEST_CASE("multi-gaussian model JSON round-trips") {
  test::TempDir tmp("mg");
  std::vector<WindowSample> samples = TwoBlobs(8.0, 1.0, 30, 2);
  GmmTrainOptions options;
  options.n_components = 2;
  MultiGaussianModel model = TrainMultiGaussian(samples, options);
  SaveMultiGaussianModel(model, tmp.path() / "mg.json");
  MultiGaussianModel loaded = LoadMultiGaussianModel(tmp.path() / "mg.json");
  CHECK(loaded.labels == model.labels);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int i = 0; i < 30; ++i) {
    std::vector<double> x{n(rng), n(rng)};
    CHECK(loaded.classes[0].LogDensity(x) ==
          doctest::Approx(model.classes[0].LogDensity(x)).epsilon(1e-12));
    CHECK(ClassifyMg(loaded, x) == ClassifyMg(model, x));
  }
}
