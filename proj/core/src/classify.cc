// core/src/classify.cc

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

#include "csrec/classify.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "json-util.h"

namespace csrec {

WindowExtraction ExtractWindowFeatures(const FrameStream& stream,
                                       const Segmentation& segmentation,
                                       double window_ms) {
  stream.Validate();
  if (window_ms <= 0) {
    throw ValidationError("ExtractWindowFeatures: window must be > 0");
  }
  WindowExtraction out;
  const std::size_t frames = stream.NumFrames();
  for (const Interval& iv : segmentation.intervals) {
    const double mid = static_cast<double>(iv.MidpointMs());
    const double lo = mid - window_ms / 2.0;
    const double hi = mid + window_ms / 2.0;
    std::vector<double> mean(stream.dim, 0.0);
    int count = 0;
    // Frame i carries the instant i * period; window is [lo, hi).
    std::size_t first = static_cast<std::size_t>(
        std::max(0.0, std::ceil(lo / stream.period_ms)));
    for (std::size_t i = first; i < frames; ++i) {
      double t = static_cast<double>(i) * stream.period_ms;
      if (t >= hi) break;
      if (t < lo) continue;
      auto f = stream.Frame(i);
      for (int d = 0; d < stream.dim; ++d) mean[d] += f[d];
      ++count;
    }
    if (count == 0) {
      ++out.skipped;
      continue;
    }
    for (double& v : mean) v /= count;
    out.samples.push_back(WindowSample{iv.label, std::move(mean)});
  }
  return out;
}

MultiGaussianModel TrainMultiGaussian(const std::vector<WindowSample>& samples,
                                      const GmmTrainOptions& options) {
  if (samples.empty()) {
    throw ValidationError("TrainMultiGaussian: no samples");
  }
  const int dim = static_cast<int>(samples.front().features.size());
  std::map<std::string, std::vector<double>> per_class;
  for (const WindowSample& s : samples) {
    if (static_cast<int>(s.features.size()) != dim) {
      throw ValidationError("TrainMultiGaussian: inconsistent feature dims");
    }
    auto& data = per_class[s.label];
    data.insert(data.end(), s.features.begin(), s.features.end());
  }

  MultiGaussianModel model;
  model.dim = dim;
  const std::size_t min_samples =
      static_cast<std::size_t>(options.n_components) * dim;
  for (auto& [label, data] : per_class) {
    const std::size_t n = data.size() / dim;
    if (n < min_samples) {
      throw ValidationError("TrainMultiGaussian: class '" + label +
                            "' has only " + std::to_string(n) +
                            " samples, needs " + std::to_string(min_samples));
    }
    model.labels.push_back(label);
    model.classes.push_back(TrainFullGmm(data, dim, options));
  }
  return model;
}

const std::string& ClassifyMg(const MultiGaussianModel& model,
                              std::span<const double> x) {
  if (model.labels.empty()) {
    throw ValidationError("ClassifyMg: empty model");
  }
  if (static_cast<int>(x.size()) != model.dim) {
    throw ValidationError("ClassifyMg: feature dim mismatch");
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw ValidationError("ClassifyMg: non-finite feature");
    }
  }
  std::size_t best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < model.classes.size(); ++k) {
    double ll = model.classes[k].LogDensity(x);
    if (ll > best_ll) {
      best_ll = ll;
      best = k;
    }
  }
  return model.labels[best];
}

double MgAccuracy(const MultiGaussianModel& model,
                  const std::vector<WindowSample>& samples) {
  if (samples.empty()) throw ValidationError("MgAccuracy: no samples");
  std::size_t hits = 0;
  for (const WindowSample& s : samples) {
    if (ClassifyMg(model, s.features) == s.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

namespace {
constexpr int kMgModelVersion = 1;
}  // namespace

MultiGaussianModel LoadMultiGaussianModel(const std::filesystem::path& path) {
  internal::Json doc = internal::ReadJsonFile(path);
  internal::RequireVersion(doc, kMgModelVersion, "multi-gaussian model");
  internal::RequireKeys(doc, {"version", "dim", "classes"},
                        "multi-gaussian model");
  MultiGaussianModel model;
  model.dim = doc.at("dim").get<int>();
  for (const internal::Json& c : doc.at("classes")) {
    internal::RequireKeys(c, {"label", "weights", "means", "covariances"},
                          "multi-gaussian class");
    model.labels.push_back(c.at("label").get<std::string>());
    FullGmm gmm;
    gmm.dim = model.dim;
    gmm.weights = c.at("weights").get<std::vector<double>>();
    const internal::Json& means = c.at("means");
    const internal::Json& covs = c.at("covariances");
    if (means.size() != gmm.weights.size() ||
        covs.size() != gmm.weights.size()) {
      throw FormatError("multi-gaussian model: component count mismatch");
    }
    for (std::size_t m = 0; m < gmm.weights.size(); ++m) {
      FullGaussian g;
      g.dim = model.dim;
      g.mean = means[m].get<std::vector<double>>();
      g.cov = covs[m].get<std::vector<double>>();
      g.Finalize();
      gmm.components.push_back(std::move(g));
    }
    model.classes.push_back(std::move(gmm));
  }
  return model;
}

void SaveMultiGaussianModel(const MultiGaussianModel& model,
                            const std::filesystem::path& path) {
  internal::Json classes = internal::Json::array();
  for (std::size_t k = 0; k < model.labels.size(); ++k) {
    internal::Json c;
    c["label"] = model.labels[k];
    c["weights"] = model.classes[k].weights;
    internal::Json means = internal::Json::array();
    internal::Json covs = internal::Json::array();
    for (const FullGaussian& g : model.classes[k].components) {
      means.push_back(g.mean);
      covs.push_back(g.cov);
    }
    c["means"] = std::move(means);
    c["covariances"] = std::move(covs);
    classes.push_back(std::move(c));
  }
  internal::Json doc;
  doc["version"] = kMgModelVersion;
  doc["dim"] = model.dim;
  doc["classes"] = std::move(classes);
  internal::WriteJsonFile(path, doc);
}

}  // namespace csrec
