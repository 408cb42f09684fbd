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

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "procest/error.hpp"
#include "procest/nn/dense.hpp"

namespace procest::nn {

/// A named, contiguous block of scalars inside some parameter container.
template <typename Scalar>
struct ParamBlock {
  std::string name;
  Scalar* data = nullptr;
  Eigen::Index size = 0;

  [[nodiscard]] Eigen::Map<Vector<Scalar>> values() const { return {data, size}; }
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double decay = 1e-8;  // lr_t = lr / (1 + decay * t), t = updates already applied
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  AdamConfig config;
  std::vector<Vector<Scalar>> m;
  std::vector<Vector<Scalar>> v;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update of `params` from `grads` (matched by
/// position). Moment buffers are allocated on the first call. A non-finite
/// gradient raises NumericError before anything is modified.
template <typename Scalar>
void adam_update(std::span<const ParamBlock<Scalar>> params,
                 std::span<const ParamBlock<Scalar>> grads, AdamState<Scalar>& state) {
  if (params.size() != grads.size()) throw UsageError("adam_update: block count mismatch");
  if (state.m.empty() && state.step == 0) {
    for (const auto& p : params) {
      state.m.push_back(Vector<Scalar>::Zero(p.size));
      state.v.push_back(Vector<Scalar>::Zero(p.size));
    }
  }
  if (state.m.size() != params.size()) throw UsageError("adam_update: state/param mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].size != grads[k].size || state.m[k].size() != params[k].size) {
      throw UsageError("adam_update: shape mismatch in block '" + params[k].name + "'");
    }
    if (!grads[k].values().allFinite()) {
      throw NumericError("adam_update: non-finite gradient in block '" + params[k].name + "'");
    }
  }

  const auto& c = state.config;
  const Scalar lr = Scalar(c.learning_rate / (1.0 + c.decay * static_cast<double>(state.step)));
  ++state.step;
  const auto t = static_cast<double>(state.step);
  const Scalar bc1 = Scalar(1.0 - std::pow(c.beta1, t));
  const Scalar bc2 = Scalar(1.0 - std::pow(c.beta2, t));
  const Scalar b1 = Scalar(c.beta1), b2 = Scalar(c.beta2), eps = Scalar(c.epsilon);

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].values();
    const auto g = grads[k].values();
    auto& m = state.m[k];
    auto& v = state.v[k];
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseAbs2();
    p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
  }
}

}  // namespace procest::nn
