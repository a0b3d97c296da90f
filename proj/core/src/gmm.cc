// core/src/gmm.cc

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

#include "csrec/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

namespace csrec {

namespace {
constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)
}  // namespace

double LogSumExp(std::span<const double> log_values) {
  double max_v = -std::numeric_limits<double>::infinity();
  for (double v : log_values) max_v = std::max(max_v, v);
  if (!std::isfinite(max_v)) return max_v;
  double sum = 0.0;
  for (double v : log_values) sum += std::exp(v - max_v);
  return max_v + std::log(sum);
}

double DiagGaussianLogDensity(std::span<const double> x,
                              std::span<const double> mean,
                              std::span<const double> var) {
  double acc = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    double r = x[d] - mean[d];
    acc += std::log(var[d]) + r * r / var[d];
  }
  return -0.5 * (static_cast<double>(x.size()) * kLogTwoPi + acc);
}

double DiagGmm::LogDensity(std::span<const double> x) const {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(weights.size());
  for (std::size_t m = 0; m < weights.size(); ++m) {
    terms[m] = std::log(weights[m]) +
               ComponentLogDensity(static_cast<int>(m), x);
    best = std::max(best, terms[m]);
  }
  if (!std::isfinite(best)) return best;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - best);
  return best + std::log(sum);
}

double DiagGmm::ComponentLogDensity(int m, std::span<const double> x) const {
  return DiagGaussianLogDensity(x, Mean(m), Var(m));
}

void DiagGmm::Split(double perturbation) {
  const int m_old = NumComponents();
  std::vector<double> new_weights;
  std::vector<double> new_means;
  std::vector<double> new_vars;
  new_weights.reserve(2 * m_old);
  new_means.reserve(2 * m_old * dim);
  new_vars.reserve(2 * m_old * dim);
  for (int m = 0; m < m_old; ++m) {
    for (int sign : {-1, 1}) {
      new_weights.push_back(weights[m] / 2.0);
      for (int d = 0; d < dim; ++d) {
        double sigma = std::sqrt(vars[m * dim + d]);
        new_means.push_back(means[m * dim + d] +
                            sign * perturbation * sigma);
        new_vars.push_back(vars[m * dim + d]);
      }
    }
  }
  weights = std::move(new_weights);
  means = std::move(new_means);
  vars = std::move(new_vars);
}

void DiagGmm::Validate() const {
  if (dim < 1) throw ValidationError("DiagGmm: dim < 1");
  const std::size_t m = weights.size();
  if (means.size() != m * dim || vars.size() != m * dim) {
    throw ValidationError("DiagGmm: inconsistent sizes");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0) throw ValidationError("DiagGmm: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ValidationError("DiagGmm: weights do not sum to 1");
  }
  for (double v : vars) {
    if (!(v > 0)) throw ValidationError("DiagGmm: non-positive variance");
  }
}

void FullGaussian::Finalize() {
  if (dim < 1 || mean.size() != static_cast<std::size_t>(dim) ||
      cov.size() != static_cast<std::size_t>(dim) * dim) {
    throw ValidationError("FullGaussian: inconsistent sizes");
  }
  Eigen::MatrixXd c = Eigen::Map<const Eigen::MatrixXd>(cov.data(), dim, dim);
  c = (c + c.transpose()) / 2.0;

  double jitter = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int attempt = 0; attempt < 24; ++attempt) {
    Eigen::MatrixXd trial = c;
    if (jitter > 0) trial += jitter * Eigen::MatrixXd::Identity(dim, dim);
    llt.compute(trial);
    if (llt.info() == Eigen::Success) {
      c = trial;
      break;
    }
    jitter = jitter == 0.0
                 ? 1e-10 * std::max(1.0, c.diagonal().maxCoeff())
                 : jitter * 10.0;
  }
  if (llt.info() != Eigen::Success) {
    throw ValidationError("FullGaussian: covariance not positive definite");
  }
  Eigen::Map<Eigen::MatrixXd>(cov.data(), dim, dim) = c;

  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
  inv_cov_.assign(inv.data(), inv.data() + dim * dim);
  double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  log_norm_ = -0.5 * (dim * kLogTwoPi + log_det);
}

double FullGaussian::LogDensity(std::span<const double> x) const {
  if (inv_cov_.empty()) {
    throw ValidationError("FullGaussian: Finalize() not called");
  }
  double quad = 0.0;
  for (int i = 0; i < dim; ++i) {
    double ri = x[i] - mean[i];
    for (int j = 0; j < dim; ++j) {
      quad += ri * inv_cov_[i * dim + j] * (x[j] - mean[j]);
    }
  }
  return log_norm_ - 0.5 * quad;
}

double FullGmm::LogDensity(std::span<const double> x) const {
  std::vector<double> terms(components.size());
  for (std::size_t m = 0; m < components.size(); ++m) {
    terms[m] = std::log(weights[m]) + components[m].LogDensity(x);
  }
  return LogSumExp(terms);
}

namespace {

// Mean and covariance of (possibly soft-weighted) data, diagonal floored.
FullGaussian MomentGaussian(const std::vector<double>& data, int dim,
                            const std::vector<double>* resp,
                            const std::vector<double>& floor) {
  const std::size_t n = data.size() / dim;
  FullGaussian g;
  g.dim = dim;
  g.mean.assign(dim, 0.0);
  g.cov.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = resp != nullptr ? (*resp)[i] : 1.0;
    total += w;
    for (int d = 0; d < dim; ++d) g.mean[d] += w * data[i * dim + d];
  }
  if (total <= 0) throw ValidationError("MomentGaussian: zero total weight");
  for (int d = 0; d < dim; ++d) g.mean[d] /= total;
  for (std::size_t i = 0; i < n; ++i) {
    double w = resp != nullptr ? (*resp)[i] : 1.0;
    for (int a = 0; a < dim; ++a) {
      double ra = data[i * dim + a] - g.mean[a];
      for (int b = 0; b < dim; ++b) {
        g.cov[a * dim + b] += w * ra * (data[i * dim + b] - g.mean[b]);
      }
    }
  }
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) g.cov[a * dim + b] /= total;
    g.cov[a * dim + a] = std::max(g.cov[a * dim + a], floor[a]);
  }
  g.Finalize();
  return g;
}

}  // namespace

FullGmm TrainFullGmm(const std::vector<double>& data, int dim,
                     const GmmTrainOptions& options,
                     std::vector<double>* ll_trace) {
  if (dim < 1 || data.size() % dim != 0) {
    throw ValidationError("TrainFullGmm: bad data shape");
  }
  const std::size_t n = data.size() / dim;
  if (n < static_cast<std::size_t>(options.n_components)) {
    throw ValidationError("TrainFullGmm: fewer samples than components");
  }

  // Fixed per-dimension floor from the global data variance.
  std::vector<double> floor(dim, 0.0);
  {
    std::vector<double> mean(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (int d = 0; d < dim; ++d) mean[d] += data[i * dim + d];
    }
    for (int d = 0; d < dim; ++d) mean[d] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (int d = 0; d < dim; ++d) {
        double r = data[i * dim + d] - mean[d];
        floor[d] += r * r;
      }
    }
    for (int d = 0; d < dim; ++d) {
      floor[d] = std::max(options.variance_floor_factor * floor[d] /
                              static_cast<double>(n),
                           1e-12);
    }
  }

  FullGmm gmm;
  gmm.dim = dim;
  gmm.weights = {1.0};
  gmm.components = {MomentGaussian(data, dim, nullptr, floor)};

  auto run_em_stage = [&](std::vector<double>* trace) {
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < options.em_iters_per_stage; ++iter) {
      const int m = static_cast<int>(gmm.components.size());
      std::vector<std::vector<double>> resp(m, std::vector<double>(n, 0.0));
      std::vector<double> terms(m);
      double ll = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> x(data.data() + i * dim,
                                  static_cast<std::size_t>(dim));
        for (int k = 0; k < m; ++k) {
          terms[k] = std::log(gmm.weights[k]) +
                     gmm.components[k].LogDensity(x);
        }
        double lse = LogSumExp(terms);
        ll += lse;
        for (int k = 0; k < m; ++k) resp[k][i] = std::exp(terms[k] - lse);
      }
      if (trace != nullptr) trace->push_back(ll);

      // M-step; components that lose all mass are dropped.
      std::vector<double> occupancy(m, 0.0);
      for (int k = 0; k < m; ++k) {
        for (std::size_t i = 0; i < n; ++i) occupancy[k] += resp[k][i];
      }
      FullGmm updated;
      updated.dim = dim;
      for (int k = 0; k < m; ++k) {
        if (occupancy[k] < 1e-8) continue;
        updated.weights.push_back(occupancy[k] / static_cast<double>(n));
        updated.components.push_back(
            MomentGaussian(data, dim, &resp[k], floor));
      }
      double wsum = 0.0;
      for (double w : updated.weights) wsum += w;
      for (double& w : updated.weights) w /= wsum;
      gmm = std::move(updated);

      if (iter > 0 &&
          ll - prev_ll < options.min_rel_gain * std::abs(prev_ll)) {
        break;
      }
      prev_ll = ll;
    }
  };

  std::vector<double> final_trace;
  run_em_stage(static_cast<int>(gmm.components.size()) >=
                       options.n_components
                   ? &final_trace
                   : nullptr);
  while (static_cast<int>(gmm.components.size()) < options.n_components) {
    // Split the heaviest component (first index on ties).
    std::size_t heaviest = 0;
    for (std::size_t k = 1; k < gmm.weights.size(); ++k) {
      if (gmm.weights[k] > gmm.weights[heaviest]) heaviest = k;
    }
    FullGaussian lo = gmm.components[heaviest];
    FullGaussian hi = gmm.components[heaviest];
    for (int d = 0; d < dim; ++d) {
      double offset = options.split_perturbation *
                      std::sqrt(gmm.components[heaviest].cov[d * dim + d]);
      lo.mean[d] -= offset;
      hi.mean[d] += offset;
    }
    lo.Finalize();
    hi.Finalize();
    double w = gmm.weights[heaviest] / 2.0;
    gmm.components[heaviest] = std::move(lo);
    gmm.weights[heaviest] = w;
    gmm.components.push_back(std::move(hi));
    gmm.weights.push_back(w);
    if (static_cast<int>(gmm.components.size()) >= options.n_components) {
      final_trace.clear();
      run_em_stage(&final_trace);
    } else {
      run_em_stage(nullptr);
    }
  }
  if (ll_trace != nullptr) *ll_trace = std::move(final_trace);
  return gmm;
}

}  // namespace csrec
