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
#include <string>
#include <string_view>

#include "procest/error.hpp"

namespace procest::nn {

enum class Activation { kIdentity, kRelu, kRtanh, kSigmoid };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);  // throws UsageError

namespace detail {
template <typename Scalar>
void require_finite(Scalar x, const char* op) {
  if (!std::isfinite(x)) throw NumericError(std::string(op) + ": non-finite input");
}
}  // namespace detail

/// Rectified hyperbolic tangent, max(0, tanh(x)). Range [0, 1).
template <typename Scalar>
Scalar rtanh(Scalar x) {
  detail::require_finite(x, "rtanh");
  return x > Scalar(0) ? std::tanh(x) : Scalar(0);
}

/// d rtanh / dx. At the kink x == 0 the right limit (1) is used.
template <typename Scalar>
Scalar rtanh_grad(Scalar x) {
  detail::require_finite(x, "rtanh_grad");
  if (x < Scalar(0)) return Scalar(0);
  const Scalar t = std::tanh(x);
  return Scalar(1) - t * t;
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

template <typename Scalar>
Scalar sigmoid_grad(Scalar x) {
  const Scalar s = sigmoid(x);
  return s * (Scalar(1) - s);
}

/// Elementwise activation of a preactivation vector.
template <typename Derived>
auto activate(Activation a, const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const Scalar v = z(i);
    switch (a) {
      case Activation::kIdentity: out(i) = v; break;
      case Activation::kRelu: out(i) = v > Scalar(0) ? v : Scalar(0); break;
      case Activation::kRtanh: out(i) = rtanh(v); break;
      case Activation::kSigmoid: out(i) = sigmoid(v); break;
    }
  }
  return out;
}

/// Elementwise derivative of the activation, evaluated at the preactivation.
template <typename Derived>
auto activation_grad(Activation a, const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const Scalar v = z(i);
    switch (a) {
      case Activation::kIdentity: out(i) = Scalar(1); break;
      case Activation::kRelu: out(i) = v > Scalar(0) ? Scalar(1) : Scalar(0); break;
      case Activation::kRtanh: out(i) = rtanh_grad(v); break;
      case Activation::kSigmoid: out(i) = sigmoid_grad(v); break;
    }
  }
  return out;
}

}  // namespace procest::nn
