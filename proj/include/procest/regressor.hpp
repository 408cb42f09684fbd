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
#include <span>
#include <vector>

#include "procest/gmm.hpp"
#include "procest/nn/activation.hpp"
#include "procest/nn/adam.hpp"
#include "procest/nn/dense.hpp"
#include "procest/nn/lstm.hpp"
#include "procest/nn/smoothing.hpp"
#include "procest/objective.hpp"
#include "procest/trace.hpp"

namespace procest {

struct RegressorConfig {
  Eigen::Index feature_dim = 16;
  Eigen::Index encoder_dim = 32;
  int encoder_layers = 1;  // 1 or 2 relu layers before the LSTM
  Eigen::Index lstm_hidden = 32;
  Eigen::Index fc1_dim = 32;
  Eigen::Index fc2_dim = 32;  // width of the representation fed to the output neuron
  nn::Activation output = nn::Activation::kRtanh;
  double smooth_sigma = 10.0;  // frames
  int smooth_radius = 30;
  double output_bias_init = 0.5;

  void validate() const;  // throws UsageError
};

/// Feature encoder -> LSTM -> fc1 -> fc2 -> single output neuron -> causal
/// Gaussian smoothing. Produces one completeness estimate per frame.
class ProgressRegressor {
 public:
  using LstmState = nn::LstmState<double>;

  ProgressRegressor() = default;
  ProgressRegressor(const RegressorConfig& config, std::uint64_t seed);

  /// Same architecture, every parameter zero.
  static ProgressRegressor zeros(const RegressorConfig& config);

  [[nodiscard]] const RegressorConfig& config() const { return config_; }
  [[nodiscard]] const nn::CausalGaussianSmoother<double>& smoother() const { return smoother_; }

  std::vector<nn::DenseLayer<double>> encoder;
  nn::LstmCell<double> lstm;
  nn::DenseLayer<double> fc1;
  nn::DenseLayer<double> fc2;
  nn::DenseLayer<double> out;

  /// Named views of every parameter block, in a fixed order.
  std::vector<nn::ParamBlock<double>> parameters();
  [[nodiscard]] std::size_t parameter_count() const;
  void set_zero();

  [[nodiscard]] LstmState initial_state() const { return LstmState::zero(config_.lstm_hidden); }

  /// Unsmoothed output for one frame; advances `state`. Inference mode.
  double raw_step(const Eigen::Ref<const Eigen::VectorXd>& x, LstmState& state) const;

  /// Unsmoothed per-frame outputs over a whole trace.
  [[nodiscard]] std::vector<double> forward_raw(const Eigen::MatrixXd& features) const;
  /// Smoothed per-frame completeness estimates (inference mode).
  [[nodiscard]] std::vector<double> forward(const Eigen::MatrixXd& features) const;
  [[nodiscard]] std::vector<double> forward(const ProcessTrace& trace) const;

  /// Reconfigures the smoothing stage (used when loading models).
  void set_smoothing(double sigma, int radius);

 private:
  RegressorConfig config_;
  nn::CausalGaussianSmoother<double> smoother_{2.0, 6};
};

/// Per-frame targets of one training trace.
struct TraceTargets {
  const Eigen::MatrixXd* features = nullptr;
  std::span<const double> labels;
  std::span<const int> phases;
};

struct TraceLoss {
  double completeness = 0.0;  // Loss_c, mean |s_i - p_i|
  double phase = 0.0;         // Loss_p, mean conditional loss (boundary frames add 0)
  double total = 0.0;         // alpha * Loss_c + beta * Loss_p
  std::vector<double> estimates;
};

struct GradientOptions {
  double dropout_rate = 0.0;
  std::uint64_t dropout_seed = 0;
  int bptt_window = 0;  // 0: backpropagate through the whole trace
};

/// Combined loss of one trace and its gradient, accumulated into `grad`
/// (same architecture as `model`). Gradients flow through smoothing, the
/// output neuron, the fc layers, the LSTM through time, and the encoder.
TraceLoss trace_loss_and_gradient(const ProgressRegressor& model, const TraceTargets& targets,
                                  const PhaseGmm& gmm, const LossWeights& weights,
                                  const GradientOptions& options, ProgressRegressor* grad);

}  // namespace procest
