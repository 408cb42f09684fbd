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

#include <cstdint>
#include <random>

#include "procest/error.hpp"
#include "procest/nn/dense.hpp"

namespace procest::nn {

enum class Mode { kTrain, kEval };

inline void check_dropout_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw UsageError("dropout rate must lie in [0, 1)");
}

/// Inverted-dropout mask: 0 with probability `rate`, else 1/(1-rate).
template <typename Scalar, typename Rng>
Vector<Scalar> dropout_mask(Eigen::Index n, double rate, Rng& rng) {
  check_dropout_rate(rate);
  if (rate == 0.0) return Vector<Scalar>::Ones(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Scalar keep = Scalar(1.0 / (1.0 - rate));
  Vector<Scalar> mask(n);
  for (Eigen::Index i = 0; i < n; ++i) mask(i) = u(rng) < rate ? Scalar(0) : keep;
  return mask;
}

template <typename Derived>
auto dropout_apply(const Eigen::MatrixBase<Derived>& x, double rate, Mode mode,
                   std::uint64_t seed) {
  using Scalar = typename Derived::Scalar;
  check_dropout_rate(rate);
  Matrix<Scalar> out = x;
  if (mode == Mode::kEval || rate == 0.0) return out;
  std::mt19937_64 rng(seed);
  const Vector<Scalar> mask = dropout_mask<Scalar>(out.size(), rate, rng);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] *= mask(i);
  return out;
}

}  // namespace procest::nn
