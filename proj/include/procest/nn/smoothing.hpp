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

/// Causal truncated Gaussian filter:
///   out[i] = sum_{j=0..m} w_j^(m) in[i-j],  m = min(radius, i),
/// with w^(m) proportional to exp(-j^2 / 2 sigma^2) and normalized over the
/// m+1 available taps. Evaluated as in[i] + sum_{j>=1} w_j (in[i-j] - in[i])
/// so constant inputs pass through exactly.
template <typename Scalar>
class CausalGaussianSmoother {
 public:
  CausalGaussianSmoother(double sigma, int radius) : sigma_(sigma), radius_(radius) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw UsageError("smoothing sigma must be > 0");
    if (radius < 0) throw UsageError("smoothing radius must be >= 0");
    std::vector<double> raw(static_cast<std::size_t>(radius) + 1);
    for (int j = 0; j <= radius; ++j) raw[static_cast<std::size_t>(j)] = std::exp(-0.5 * j * j / (sigma * sigma));
    weights_.resize(raw.size());
    self_weight_.resize(raw.size());
    for (std::size_t m = 0; m < raw.size(); ++m) {
      double total = 0.0;
      for (std::size_t j = 0; j <= m; ++j) total += raw[j];
      auto& w = weights_[m];
      w.resize(m + 1);
      double others = 0.0;
      for (std::size_t j = 0; j <= m; ++j) {
        w[j] = Scalar(raw[j] / total);
        if (j > 0) others += raw[j] / total;
      }
      self_weight_[m] = Scalar(1.0 - others);
    }
  }

  [[nodiscard]] double sigma() const { return sigma_; }
  [[nodiscard]] int radius() const { return radius_; }

  /// Filter output for the newest element of `window` (window.back()).
  /// Only the last radius+1 entries are used.
  [[nodiscard]] Scalar apply(std::span<const Scalar> window) const {
    if (window.empty()) throw UsageError("smoothing window is empty");
    const std::size_t n = window.size();
    const std::size_t m = std::min<std::size_t>(n - 1, static_cast<std::size_t>(radius_));
    const Scalar newest = window[n - 1];
    Scalar acc = Scalar(0);
    const auto& w = weights_[m];
    for (std::size_t j = 1; j <= m; ++j) acc += w[j] * (window[n - 1 - j] - newest);
    return newest + acc;
  }

  [[nodiscard]] std::vector<Scalar> smooth(std::span<const Scalar> seq) const {
    if (seq.empty()) throw UsageError("cannot smooth an empty sequence");
    std::vector<Scalar> out(seq.size());
    const auto r = static_cast<std::size_t>(radius_);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const std::size_t first = i >= r ? i - r : 0;
      out[i] = apply(seq.subspan(first, i - first + 1));
    }
    return out;
  }

  /// Gradient w.r.t. the input given the gradient w.r.t. the output.
  [[nodiscard]] std::vector<Scalar> backward(std::span<const Scalar> grad_out) const {
    std::vector<Scalar> grad_in(grad_out.size(), Scalar(0));
    for (std::size_t i = 0; i < grad_out.size(); ++i) {
      const std::size_t m = std::min<std::size_t>(i, static_cast<std::size_t>(radius_));
      grad_in[i] += self_weight_[m] * grad_out[i];
      for (std::size_t j = 1; j <= m; ++j) grad_in[i - j] += weights_[m][j] * grad_out[i];
    }
    return grad_in;
  }

 private:
  double sigma_;
  int radius_;
  std::vector<std::vector<Scalar>> weights_;  // weights_[m]: m+1 normalized taps
  std::vector<Scalar> self_weight_;           // 1 - sum_{j>=1} weights_[m][j]
};

template <typename Scalar>
std::vector<Scalar> gaussian_smooth(std::span<const Scalar> seq, double sigma, int radius) {
  return CausalGaussianSmoother<Scalar>(sigma, radius).smooth(seq);
}

}  // namespace procest::nn
