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
#include <random>

#include "procest/error.hpp"
#include "procest/nn/activation.hpp"
#include "procest/nn/dense.hpp"

namespace procest::nn {

/// Standard LSTM cell. Gate rows are stacked [input; forget; output; candidate],
/// each `hidden` rows tall:
///   a = Wx x + Wh h + b
///   i = sig(a_i), f = sig(a_f), o = sig(a_o), g = tanh(a_g)
///   c' = f*c + i*g,  h' = o*tanh(c')
template <typename Scalar>
struct LstmCell {
  Matrix<Scalar> Wx;  // 4H x In
  Matrix<Scalar> Wh;  // 4H x H
  Vector<Scalar> b;   // 4H

  LstmCell() = default;
  LstmCell(Eigen::Index in, Eigen::Index hidden)
      : Wx(Matrix<Scalar>::Zero(4 * hidden, in)),
        Wh(Matrix<Scalar>::Zero(4 * hidden, hidden)),
        b(Vector<Scalar>::Zero(4 * hidden)) {}

  [[nodiscard]] Eigen::Index hidden() const { return Wh.cols(); }
  [[nodiscard]] Eigen::Index inputs() const { return Wx.cols(); }

  void set_zero() {
    Wx.setZero();
    Wh.setZero();
    b.setZero();
  }

  /// Glorot-uniform weights; forget-gate bias set to `forget_bias`.
  template <typename Rng>
  void init_glorot(Rng& rng, Scalar forget_bias = Scalar(1)) {
    const Eigen::Index h = hidden();
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Scalar lx = std::sqrt(Scalar(6) / Scalar(inputs() + h));
    const Scalar lh = std::sqrt(Scalar(6) / Scalar(2 * h));
    for (Eigen::Index i = 0; i < Wx.size(); ++i) Wx.data()[i] = lx * Scalar(u(rng));
    for (Eigen::Index i = 0; i < Wh.size(); ++i) Wh.data()[i] = lh * Scalar(u(rng));
    b.setZero();
    b.segment(h, h).setConstant(forget_bias);
  }
};

template <typename Scalar>
struct LstmState {
  Vector<Scalar> h;
  Vector<Scalar> c;

  static LstmState zero(Eigen::Index hidden) {
    return {Vector<Scalar>::Zero(hidden), Vector<Scalar>::Zero(hidden)};
  }
};

/// Everything one step's backward pass needs.
template <typename Scalar>
struct LstmStepCache {
  Vector<Scalar> x, h_prev, c_prev;
  Vector<Scalar> i, f, o, g;
  Vector<Scalar> c, tanh_c;
};

template <typename Scalar, typename DX>
LstmState<Scalar> lstm_step(const LstmCell<Scalar>& cell, const Eigen::MatrixBase<DX>& x,
                            const LstmState<Scalar>& state,
                            LstmStepCache<Scalar>* cache = nullptr) {
  const Eigen::Index h = cell.hidden();
  if (x.size() != cell.inputs() || state.h.size() != h || state.c.size() != h) {
    throw UsageError("lstm_step: shape mismatch");
  }
  Vector<Scalar> a = cell.b;
  a.noalias() += cell.Wx * x;
  a.noalias() += cell.Wh * state.h;
  const auto sig = [](Scalar v) { return sigmoid(v); };
  const auto th = [](Scalar v) { return std::tanh(v); };
  Vector<Scalar> i = a.segment(0, h).unaryExpr(sig);
  Vector<Scalar> f = a.segment(h, h).unaryExpr(sig);
  Vector<Scalar> o = a.segment(2 * h, h).unaryExpr(sig);
  Vector<Scalar> g = a.segment(3 * h, h).unaryExpr(th);
  LstmState<Scalar> next;
  next.c = f.cwiseProduct(state.c) + i.cwiseProduct(g);
  Vector<Scalar> tanh_c = next.c.unaryExpr(th);
  next.h = o.cwiseProduct(tanh_c);
  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = state.h;
    cache->c_prev = state.c;
    cache->i = std::move(i);
    cache->f = std::move(f);
    cache->o = std::move(o);
    cache->g = std::move(g);
    cache->c = next.c;
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

template <typename Scalar>
struct LstmStepGrad {
  Vector<Scalar> dx;
  Vector<Scalar> dh_prev;
  Vector<Scalar> dc_prev;
};

/// Backward through one step given dL/dh' and dL/dc' (the latter carries the
/// gradient from the next step's cell state). Accumulates into `grad`.
template <typename Scalar, typename DH, typename DC>
LstmStepGrad<Scalar> lstm_step_backward(const LstmCell<Scalar>& cell,
                                        const LstmStepCache<Scalar>& cache,
                                        const Eigen::MatrixBase<DH>& dh,
                                        const Eigen::MatrixBase<DC>& dc_next,
                                        LstmCell<Scalar>& grad) {
  const Eigen::Index h = cell.hidden();
  const Vector<Scalar> dc =
      dc_next + dh.cwiseProduct(cache.o).cwiseProduct(
                    (Vector<Scalar>::Ones(h) - cache.tanh_c.cwiseAbs2()));
  Vector<Scalar> da(4 * h);
  da.segment(0, h) = dc.cwiseProduct(cache.g).cwiseProduct(
      cache.i.cwiseProduct(Vector<Scalar>::Ones(h) - cache.i));
  da.segment(h, h) = dc.cwiseProduct(cache.c_prev).cwiseProduct(
      cache.f.cwiseProduct(Vector<Scalar>::Ones(h) - cache.f));
  da.segment(2 * h, h) = dh.cwiseProduct(cache.tanh_c).cwiseProduct(
      cache.o.cwiseProduct(Vector<Scalar>::Ones(h) - cache.o));
  da.segment(3 * h, h) = dc.cwiseProduct(cache.i).cwiseProduct(
      Vector<Scalar>::Ones(h) - cache.g.cwiseAbs2());
  grad.Wx.noalias() += da * cache.x.transpose();
  grad.Wh.noalias() += da * cache.h_prev.transpose();
  grad.b += da;
  return {cell.Wx.transpose() * da, cell.Wh.transpose() * da, dc.cwiseProduct(cache.f)};
}

}  // namespace procest::nn
