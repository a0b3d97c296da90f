// core/include/csrec/gmm.h

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

#ifndef CSREC_GMM_H_
#define CSREC_GMM_H_

#include <span>
#include <vector>

#include "csrec/types.h"

namespace csrec {

double LogSumExp(std::span<const double> log_values);

// log N(x; mean, diag(var)).
double DiagGaussianLogDensity(std::span<const double> x,
                              std::span<const double> mean,
                              std::span<const double> var);

// Diagonal-covariance mixture, the emission building block of the decoder.
struct DiagGmm {
  int dim = 0;
  std::vector<double> weights;  // M
  std::vector<double> means;    // M x dim
  std::vector<double> vars;     // M x dim

  int NumComponents() const { return static_cast<int>(weights.size()); }
  std::span<const double> Mean(int m) const {
    return {means.data() + static_cast<std::size_t>(m) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> Var(int m) const {
    return {vars.data() + static_cast<std::size_t>(m) * dim,
            static_cast<std::size_t>(dim)};
  }
  double LogDensity(std::span<const double> x) const;
  double ComponentLogDensity(int m, std::span<const double> x) const;

  // Doubles the mixture: each component becomes two with means offset by
  // +/- perturbation * sigma and halved weights.
  void Split(double perturbation = 0.2);

  void Validate() const;
};

// Full-covariance Gaussian for the low-dimensional analysis classifiers.
struct FullGaussian {
  int dim = 0;
  std::vector<double> mean;  // dim
  std::vector<double> cov;   // dim x dim, symmetric

  // Factorizes the covariance; must be called after any change to cov.
  // Adds escalating diagonal jitter until the matrix is positive definite.
  void Finalize();
  double LogDensity(std::span<const double> x) const;

 private:
  std::vector<double> inv_cov_;
  double log_norm_ = 0.0;
};

struct FullGmm {
  int dim = 0;
  std::vector<double> weights;
  std::vector<FullGaussian> components;

  double LogDensity(std::span<const double> x) const;
};

struct GmmTrainOptions {
  int n_components = 1;
  int em_iters_per_stage = 60;
  // Diagonal floor as a fraction of the per-dimension data variance.
  double variance_floor_factor = 1e-4;
  double split_perturbation = 0.2;
  double min_rel_gain = 1e-6;
};

// Deterministic EM: single-Gaussian start, binary splits up to n_components,
// a fixed number of iterations per stage with early exit on small gains.
// ll_trace, when given, receives the per-iteration total log-likelihood of
// the final stage (non-decreasing under EM).
FullGmm TrainFullGmm(const std::vector<double>& data, int dim,
                     const GmmTrainOptions& options,
                     std::vector<double>* ll_trace = nullptr);

}  // namespace csrec

#endif  // CSREC_GMM_H_
