// core/include/csrec/classify.h

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

#ifndef CSREC_CLASSIFY_H_
#define CSREC_CLASSIFY_H_

#include <filesystem>
#include <string>
#include <vector>

#include "csrec/gmm.h"
#include "csrec/types.h"

namespace csrec {

// Intermediate classifiers of the analysis experiments: per-class
// multi-Gaussian models over windowed features, evaluated under competing
// temporal segmentations.

struct WindowSample {
  std::string label;
  std::vector<double> features;
};

struct WindowExtraction {
  std::vector<WindowSample> samples;
  int skipped = 0;  // intervals whose window held no frame
};

// For every interval: mean of the frames within +/- window_ms/2 of the
// interval midpoint (half-open on the right), paired with the label.
// Intervals with empty windows are skipped and counted.
WindowExtraction ExtractWindowFeatures(const FrameStream& stream,
                                       const Segmentation& segmentation,
                                       double window_ms);

struct MultiGaussianModel {
  int dim = 0;
  // Sorted label order; also the deterministic argmax tie-break order.
  std::vector<std::string> labels;
  std::vector<FullGmm> classes;
};

// One full-covariance GMM per class, EM-fitted with a floored covariance.
// Requires at least n_components * dim samples per class.
MultiGaussianModel TrainMultiGaussian(
    const std::vector<WindowSample>& samples,
    const GmmTrainOptions& options = GmmTrainOptions{});

// Maximum class log-likelihood; first label in model order wins ties.
const std::string& ClassifyMg(const MultiGaussianModel& model,
                              std::span<const double> x);

double MgAccuracy(const MultiGaussianModel& model,
                  const std::vector<WindowSample>& samples);

MultiGaussianModel LoadMultiGaussianModel(const std::filesystem::path& path);
void SaveMultiGaussianModel(const MultiGaussianModel& model,
                            const std::filesystem::path& path);

}  // namespace csrec

#endif  // CSREC_CLASSIFY_H_
