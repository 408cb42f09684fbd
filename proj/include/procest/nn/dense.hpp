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

#include <random>

#include "procest/error.hpp"
#include "procest/nn/activation.hpp"

namespace procest::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// y = f(W x + b). The same type doubles as its own gradient accumulator.
template <typename Scalar>
struct DenseLayer {
  Matrix<Scalar> W;
  Vector<Scalar> b;
  Activation activation = Activation::kIdentity;

  DenseLayer() = default;
  DenseLayer(Eigen::Index in, Eigen::Index out, Activation act)
      : W(Matrix<Scalar>::Zero(out, in)), b(Vector<Scalar>::Zero(out)), activation(act) {}

  [[nodiscard]] Eigen::Index inputs() const { return W.cols(); }
  [[nodiscard]] Eigen::Index outputs() const { return W.rows(); }

  template <typename Derived>
  Vector<Scalar> preactivate(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != inputs()) throw UsageError("dense layer: input size mismatch");
    return W * x + b;
  }

  template <typename Derived>
  Vector<Scalar> forward(const Eigen::MatrixBase<Derived>& x) const {
    return activate(activation, preactivate(x));
  }

  void set_zero() {
    W.setZero();
    b.setZero();
  }

  /// Glorot-uniform weights, zero bias.
  template <typename Rng>
  void init_glorot(Rng& rng) {
    const Scalar limit = std::sqrt(Scalar(6) / Scalar(inputs() + outputs()));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = limit * Scalar(u(rng));
    b.setZero();
  }
};

/// Backpropagates `dy` (gradient w.r.t. the layer output) through the layer
/// evaluated at input `x` with preactivation `z`. Accumulates parameter
/// gradients into `grad` and returns the gradient w.r.t. `x`.
template <typename Scalar, typename DX, typename DZ, typename DY>
Vector<Scalar> dense_backward(const DenseLayer<Scalar>& layer,
                              const Eigen::MatrixBase<DX>& x,
                              const Eigen::MatrixBase<DZ>& z,
                              const Eigen::MatrixBase<DY>& dy,
                              DenseLayer<Scalar>& grad) {
  const Vector<Scalar> dz = dy.cwiseProduct(activation_grad(layer.activation, z));
  grad.W.noalias() += dz * x.transpose();
  grad.b += dz;
  return layer.W.transpose() * dz;
}

}  // namespace procest::nn
