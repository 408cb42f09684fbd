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

#include "procest/gmm.hpp"

namespace procest {

/// Weights of the combined objective alpha * Loss_c + beta * Loss_p.
struct LossWeights {
  double alpha = 0.6;
  double beta = 0.4;

  void validate() const;  // throws UsageError
};

struct ScalarLoss {
  double value = 0.0;
  double grad = 0.0;  // d value / d x
};

/// Zero when the mixture already predicts `true_phase` at x, otherwise the
/// distance |x - mu_p| to that phase's kernel mean.
ScalarLoss conditional_loss(const PhaseGmm& gmm, double x, int true_phase);

double combined_loss(double completeness_loss, double phase_loss, const LossWeights& w);

}  // namespace procest
