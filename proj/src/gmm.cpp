// Copyright 2026 The procest Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "procest/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "procest/error.hpp"
#include "procest/objective.hpp"

namespace procest {

int PhaseGmm::kernel_of_phase(int phase) const {
  const int k = phase - schema.first_interior();
  return (k >= 0 && k < kernel_count()) ? k : -1;
}

double PhaseGmm::log_score(int k, double x) const {
  const auto ku = static_cast<std::size_t>(k);
  const double var = stds[ku] * stds[ku];
  const double d = x - means[ku];
  return std::log(weights[ku]) - 0.5 * std::log(2.0 * std::numbers::pi * var) -
         d * d / (2.0 * var);
}

void PhaseGmm::validate() const {
  const auto k = means.size();
  if (k == 0 || weights.size() != k || stds.size() != k) {
    throw DataError("phase mixture: inconsistent kernel arrays");
  }
  if (static_cast<int>(k) != schema.interior_count()) {
    throw DataError("phase mixture: kernel count does not match interior phases");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw DataError("phase mixture: weights must be positive");
    }
    if (!(stds[i] >= kMinStd) || !std::isfinite(stds[i])) {
      throw DataError("phase mixture: std below floor");
    }
    if (!std::isfinite(means[i]) || means[i] < 0.0 || means[i] > 1.0) {
      throw DataError("phase mixture: means must lie in [0, 1]");
    }
    if (i > 0 && !(means[i] > means[i - 1])) {
      throw DataError("phase mixture: means must be strictly increasing (nonlinear process?)");
    }
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw DataError("phase mixture: weights must sum to 1");
  if (!(eps0 >= 0.0 && eps1 >= 0.0 && eps0 < 1.0 && eps1 < 1.0)) {
    throw DataError("phase mixture: boundary thresholds must lie in [0, 1)");
  }
}

LabeledSequence labeled_sequence(const ProcessTrace& trace) {
  return {label_completeness(trace), trace.frame_phases()};
}

PhaseGmm fit_gmm(std::span<const LabeledSequence> data, const PhaseSchema& schema,
                 const GmmFitOptions& options) {
  schema.validate();
  const int first = schema.first_interior();
  const auto k = static_cast<std::size_t>(schema.interior_count());
  std::vector<double> count(k, 0.0), sum(k, 0.0);
  for (const auto& seq : data) {
    if (seq.labels.size() != seq.phases.size()) {
      throw DataError("fit_gmm: labels and phases differ in length");
    }
    for (std::size_t i = 0; i < seq.labels.size(); ++i) {
      const int kernel = seq.phases[i] - first;
      if (schema.is_boundary(seq.phases[i])) continue;
      if (kernel < 0 || kernel >= static_cast<int>(k)) throw DataError("fit_gmm: bad phase index");
      count[static_cast<std::size_t>(kernel)] += 1.0;
      sum[static_cast<std::size_t>(kernel)] += seq.labels[i];
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (count[i] == 0.0) {
      throw DataError("fit_gmm: phase '" +
                      schema.phases[i + static_cast<std::size_t>(first)] + "' never occurs");
    }
    total += count[i];
  }

  PhaseGmm gmm;
  gmm.schema = schema;
  gmm.eps0 = options.eps0;
  gmm.eps1 = options.eps1;
  gmm.weights.resize(k);
  gmm.means.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    gmm.weights[i] = options.equal_weights ? 1.0 / static_cast<double>(k) : count[i] / total;
    gmm.means[i] = sum[i] / count[i];
  }
  std::vector<double> sq(k, 0.0);
  for (const auto& seq : data) {
    for (std::size_t i = 0; i < seq.labels.size(); ++i) {
      if (schema.is_boundary(seq.phases[i])) continue;
      const auto kernel = static_cast<std::size_t>(seq.phases[i] - first);
      const double d = seq.labels[i] - gmm.means[kernel];
      sq[kernel] += d * d;
    }
  }
  gmm.stds.resize(k);
  if (options.variance == GmmVariance::kTied) {
    double pooled = 0.0;
    for (std::size_t i = 0; i < k; ++i) pooled += sq[i];
    std::fill(gmm.stds.begin(), gmm.stds.end(),
              std::max(std::sqrt(pooled / total), PhaseGmm::kMinStd));
  } else {
    for (std::size_t i = 0; i < k; ++i) {
      gmm.stds[i] = std::max(std::sqrt(sq[i] / count[i]), PhaseGmm::kMinStd);
    }
  }
  gmm.validate();
  return gmm;
}

PhaseGmm fit_gmm(std::span<const ProcessTrace> traces, const GmmFitOptions& options) {
  if (traces.empty()) throw DataError("fit_gmm: no traces");
  std::vector<LabeledSequence> data;
  data.reserve(traces.size());
  for (const auto& t : traces) {
    if (!(t.schema == traces.front().schema)) throw DataError("fit_gmm: traces disagree on schema");
    data.push_back(labeled_sequence(t));
  }
  return fit_gmm(data, traces.front().schema, options);
}

int predict_phase(const PhaseGmm& gmm, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw UsageError("predict_phase: completeness outside [0, 1]");
  if (gmm.schema.boundary_start && x < gmm.eps0) return 0;
  if (gmm.schema.boundary_end && x > 1.0 - gmm.eps1) return gmm.schema.size() - 1;
  int best = 0;
  double best_score = gmm.log_score(0, x);
  for (int k = 1; k < gmm.kernel_count(); ++k) {
    const double s = gmm.log_score(k, x);
    if (s > best_score) {
      best = k;
      best_score = s;
    }
  }
  return gmm.phase_of_kernel(best);
}

// ---- objective ------------------------------------------------------------

void LossWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(alpha + beta > 0.0)) {
    throw UsageError("loss weights need alpha, beta >= 0 and alpha + beta > 0");
  }
}

ScalarLoss conditional_loss(const PhaseGmm& gmm, double x, int true_phase) {
  const int kernel = gmm.kernel_of_phase(true_phase);
  if (kernel < 0) {
    throw UsageError("conditional_loss: phase " + std::to_string(true_phase) + " is not modeled");
  }
  if (predict_phase(gmm, x) == true_phase) return {};
  const double d = x - gmm.means[static_cast<std::size_t>(kernel)];
  return {std::abs(d), d > 0.0 ? 1.0 : d < 0.0 ? -1.0 : 0.0};
}

double combined_loss(double completeness_loss, double phase_loss, const LossWeights& w) {
  return w.alpha * completeness_loss + w.beta * phase_loss;
}

}  // namespace procest
