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

#include <cmath>
#include <span>
#include <vector>

#include "procest/error.hpp"

namespace procest::nn {

template <typename Scalar>
struct LossWithGrad {
  Scalar value = Scalar(0);
  std::vector<Scalar> grad;  // d value / d prediction
};

/// Mean absolute error. Subgradient sign(pred - target) / n, zero at ties.
template <typename Scalar>
LossWithGrad<Scalar> mae_loss(std::span<const Scalar> pred, std::span<const Scalar> target) {
  if (pred.size() != target.size()) throw UsageError("mae_loss: length mismatch");
  if (pred.empty()) throw UsageError("mae_loss: empty input");
  const Scalar n = Scalar(pred.size());
  LossWithGrad<Scalar> out;
  out.grad.resize(pred.size());
  Scalar sum = Scalar(0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Scalar d = pred[i] - target[i];
    sum += std::abs(d);
    out.grad[i] = (d > Scalar(0) ? Scalar(1) : d < Scalar(0) ? Scalar(-1) : Scalar(0)) / n;
  }
  out.value = sum / n;
  return out;
}

}  // namespace procest::nn
