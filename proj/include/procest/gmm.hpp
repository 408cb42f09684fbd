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

#pragma once

#include <span>
#include <vector>

#include "procest/trace.hpp"

namespace procest {

/// One 1-D Gaussian kernel over completeness per interior (modeled) phase.
/// Boundary phases are recognised by thresholds: x < eps0 selects the
/// pre-start phase, x > 1 - eps1 the end phase (when the schema has them).
struct PhaseGmm {
  static constexpr double kMinStd = 1e-3;

  PhaseSchema schema;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stds;
  double eps0 = 0.005;
  double eps1 = 0.005;

  [[nodiscard]] int kernel_count() const { return static_cast<int>(means.size()); }
  /// Schema phase index of kernel k.
  [[nodiscard]] int phase_of_kernel(int k) const { return k + schema.first_interior(); }
  /// Kernel index of a schema phase, or -1 for boundary/out-of-range phases.
  [[nodiscard]] int kernel_of_phase(int phase) const;

  /// log w_k - 0.5 log(2 pi sigma_k^2) - (x - mu_k)^2 / (2 sigma_k^2)
  [[nodiscard]] double log_score(int k, double x) const;

  /// Throws DataError on broken invariants (weights, ordering, std floor).
  void validate() const;
};

enum class GmmVariance {
  kPerPhase,  // sigma_k from each phase's own labels
  kTied,      // pooled within-phase sigma shared by all kernels
};

struct GmmFitOptions {
  GmmVariance variance = GmmVariance::kPerPhase;
  double eps0 = 0.005;
  double eps1 = 0.005;
  bool equal_weights = false;  // uniform w_k instead of frame frequencies
};

/// Per-frame ground truth for fitting: completeness labels and phase indices.
struct LabeledSequence {
  std::vector<double> labels;
  std::vector<int> phases;
};

LabeledSequence labeled_sequence(const ProcessTrace& trace);

PhaseGmm fit_gmm(std::span<const LabeledSequence> data, const PhaseSchema& schema,
                 const GmmFitOptions& options = {});
PhaseGmm fit_gmm(std::span<const ProcessTrace> traces, const GmmFitOptions& options = {});

/// Schema phase index for completeness x in [0, 1]. Kernel ties resolve to
/// the lower index.
int predict_phase(const PhaseGmm& gmm, double x);

}  // namespace procest
