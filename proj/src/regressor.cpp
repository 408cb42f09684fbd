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

#include "procest/regressor.hpp"

#include <cmath>
#include <random>
#include <string>

#include "procest/error.hpp"
#include "procest/nn/dropout.hpp"
#include "procest/nn/loss.hpp"

namespace procest {

using Eigen::Index;
using Eigen::VectorXd;

void RegressorConfig::validate() const {
  if (feature_dim < 1 || encoder_dim < 1 || lstm_hidden < 1 || fc1_dim < 1 || fc2_dim < 1) {
    throw UsageError("regressor dimensions must be >= 1");
  }
  if (encoder_layers < 1 || encoder_layers > 2) throw UsageError("encoder_layers must be 1 or 2");
  if (output != nn::Activation::kRtanh && output != nn::Activation::kSigmoid) {
    throw UsageError("output activation must be rtanh or sigmoid");
  }
  if (!(smooth_sigma > 0.0) || smooth_radius < 0) {
    throw UsageError("smoothing needs sigma > 0 and radius >= 0");
  }
  if (!std::isfinite(output_bias_init)) throw UsageError("output_bias_init must be finite");
}

namespace {

void build(const RegressorConfig& c, ProgressRegressor& m) {
  m.encoder.clear();
  Index in = c.feature_dim;
  for (int l = 0; l < c.encoder_layers; ++l) {
    m.encoder.emplace_back(in, c.encoder_dim, nn::Activation::kRelu);
    in = c.encoder_dim;
  }
  m.lstm = nn::LstmCell<double>(c.encoder_dim, c.lstm_hidden);
  m.fc1 = nn::DenseLayer<double>(c.lstm_hidden, c.fc1_dim, nn::Activation::kRelu);
  m.fc2 = nn::DenseLayer<double>(c.fc1_dim, c.fc2_dim, nn::Activation::kRelu);
  m.out = nn::DenseLayer<double>(c.fc2_dim, 1, c.output);
}

}  // namespace

ProgressRegressor::ProgressRegressor(const RegressorConfig& config, std::uint64_t seed)
    : config_(config), smoother_(config.smooth_sigma, config.smooth_radius) {
  config.validate();
  build(config, *this);
  std::mt19937_64 rng(seed);
  for (auto& layer : encoder) layer.init_glorot(rng);
  lstm.init_glorot(rng, 1.0);
  fc1.init_glorot(rng);
  fc2.init_glorot(rng);
  out.init_glorot(rng);
  out.b.setConstant(config.output_bias_init);
}

ProgressRegressor ProgressRegressor::zeros(const RegressorConfig& config) {
  ProgressRegressor m(config, 0);
  m.set_zero();
  return m;
}

std::vector<nn::ParamBlock<double>> ProgressRegressor::parameters() {
  std::vector<nn::ParamBlock<double>> blocks;
  const auto add = [&blocks](std::string name, auto& m) {
    blocks.push_back({std::move(name), m.data(), m.size()});
  };
  for (std::size_t l = 0; l < encoder.size(); ++l) {
    add("encoder." + std::to_string(l) + ".W", encoder[l].W);
    add("encoder." + std::to_string(l) + ".b", encoder[l].b);
  }
  add("lstm.Wx", lstm.Wx);
  add("lstm.Wh", lstm.Wh);
  add("lstm.b", lstm.b);
  add("fc1.W", fc1.W);
  add("fc1.b", fc1.b);
  add("fc2.W", fc2.W);
  add("fc2.b", fc2.b);
  add("out.W", out.W);
  add("out.b", out.b);
  return blocks;
}

std::size_t ProgressRegressor::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : encoder) n += static_cast<std::size_t>(l.W.size() + l.b.size());
  n += static_cast<std::size_t>(lstm.Wx.size() + lstm.Wh.size() + lstm.b.size());
  for (const auto* l : {&fc1, &fc2, &out}) n += static_cast<std::size_t>(l->W.size() + l->b.size());
  return n;
}

void ProgressRegressor::set_zero() {
  for (auto& l : encoder) l.set_zero();
  lstm.set_zero();
  fc1.set_zero();
  fc2.set_zero();
  out.set_zero();
}

void ProgressRegressor::set_smoothing(double sigma, int radius) {
  config_.smooth_sigma = sigma;
  config_.smooth_radius = radius;
  smoother_ = nn::CausalGaussianSmoother<double>(sigma, radius);
}

double ProgressRegressor::raw_step(const Eigen::Ref<const VectorXd>& x, LstmState& state) const {
  if (x.size() != config_.feature_dim) throw UsageError("regressor: feature dimension mismatch");
  VectorXd e = encoder.front().forward(x);
  for (std::size_t l = 1; l < encoder.size(); ++l) e = encoder[l].forward(e);
  state = nn::lstm_step(lstm, e, state);
  const VectorXd a1 = fc1.forward(state.h);
  const VectorXd a2 = fc2.forward(a1);
  return out.forward(a2)(0);
}

std::vector<double> ProgressRegressor::forward_raw(const Eigen::MatrixXd& features) const {
  if (features.rows() != config_.feature_dim) {
    throw UsageError("regressor: trace has feature dimension " + std::to_string(features.rows()) +
                     ", model expects " + std::to_string(config_.feature_dim));
  }
  std::vector<double> y(static_cast<std::size_t>(features.cols()));
  LstmState state = initial_state();
  for (Index i = 0; i < features.cols(); ++i) {
    y[static_cast<std::size_t>(i)] = raw_step(features.col(i), state);
  }
  return y;
}

std::vector<double> ProgressRegressor::forward(const Eigen::MatrixXd& features) const {
  const std::vector<double> y = forward_raw(features);
  return smoother_.smooth(y);
}

std::vector<double> ProgressRegressor::forward(const ProcessTrace& trace) const {
  return forward(trace.features);
}

// ---- training pass ----------------------------------------------------------

namespace {

struct FrameCache {
  std::vector<VectorXd> enc_in, enc_z;
  VectorXd enc_mask;
  VectorXd lstm_in;
  nn::LstmStepCache<double> lstm;
  VectorXd h;
  VectorXd z1, a1_mask, a1d;
  VectorXd z2, a2_mask, a2d;
  VectorXd z_out;
};

}  // namespace

TraceLoss trace_loss_and_gradient(const ProgressRegressor& model, const TraceTargets& targets,
                                  const PhaseGmm& gmm, const LossWeights& weights,
                                  const GradientOptions& options, ProgressRegressor* grad) {
  const Eigen::MatrixXd& x = *targets.features;
  const auto n = static_cast<std::size_t>(x.cols());
  if (x.rows() != model.config().feature_dim) throw UsageError("trace feature dimension mismatch");
  if (targets.labels.size() != n || targets.phases.size() != n || n == 0) {
    throw UsageError("trace targets must have one label and phase per frame");
  }
  nn::check_dropout_rate(options.dropout_rate);
  const bool use_dropout = options.dropout_rate > 0.0;
  std::mt19937_64 rng(options.dropout_seed);

  // Forward with caches.
  std::vector<FrameCache> cache(n);
  std::vector<double> y(n);
  auto state = model.initial_state();
  for (std::size_t i = 0; i < n; ++i) {
    FrameCache& fc = cache[i];
    VectorXd e = x.col(static_cast<Index>(i));
    for (const auto& layer : model.encoder) {
      fc.enc_in.push_back(e);
      fc.enc_z.push_back(layer.preactivate(e));
      e = nn::activate(layer.activation, fc.enc_z.back());
    }
    if (use_dropout) {
      fc.enc_mask = nn::dropout_mask<double>(e.size(), options.dropout_rate, rng);
      e = e.cwiseProduct(fc.enc_mask);
    }
    fc.lstm_in = e;
    state = nn::lstm_step(model.lstm, fc.lstm_in, state, &fc.lstm);
    fc.h = state.h;

    fc.z1 = model.fc1.preactivate(state.h);
    fc.a1d = nn::activate(model.fc1.activation, fc.z1);
    if (use_dropout) {
      fc.a1_mask = nn::dropout_mask<double>(fc.a1d.size(), options.dropout_rate, rng);
      fc.a1d = fc.a1d.cwiseProduct(fc.a1_mask);
    }
    fc.z2 = model.fc2.preactivate(fc.a1d);
    fc.a2d = nn::activate(model.fc2.activation, fc.z2);
    if (use_dropout) {
      fc.a2_mask = nn::dropout_mask<double>(fc.a2d.size(), options.dropout_rate, rng);
      fc.a2d = fc.a2d.cwiseProduct(fc.a2_mask);
    }
    fc.z_out = model.out.preactivate(fc.a2d);
    y[i] = nn::activate(model.out.activation, fc.z_out)(0);
  }

  TraceLoss result;
  result.estimates = model.smoother().smooth(y);
  const auto& s = result.estimates;
  const auto mae = nn::mae_loss<double>(s, targets.labels);
  std::vector<double> ds(n);
  double phase_sum = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double phase_grad = 0.0;
    if (gmm.kernel_of_phase(targets.phases[i]) >= 0) {
      const ScalarLoss lp = conditional_loss(gmm, s[i], targets.phases[i]);
      phase_sum += lp.value;
      phase_grad = lp.grad * inv_n;
    }
    ds[i] = weights.alpha * mae.grad[i] + weights.beta * phase_grad;
  }
  result.completeness = mae.value;
  result.phase = phase_sum * inv_n;
  result.total = combined_loss(result.completeness, result.phase, weights);
  if (!std::isfinite(result.total)) throw NumericError("trace loss is not finite");
  if (grad == nullptr) return result;

  // Backward: smoothing, head per frame, then LSTM through time.
  const std::vector<double> dy = model.smoother().backward(ds);
  const Index h = model.config().lstm_hidden;
  VectorXd dh_next = VectorXd::Zero(h);
  VectorXd dc_next = VectorXd::Zero(h);
  const auto window = static_cast<std::size_t>(options.bptt_window);
  for (std::size_t ii = n; ii-- > 0;) {
    const FrameCache& fc = cache[ii];
    const VectorXd dy_vec = VectorXd::Constant(1, dy[ii]);
    VectorXd da2 = nn::dense_backward(model.out, fc.a2d, fc.z_out, dy_vec, grad->out);
    if (use_dropout) da2 = da2.cwiseProduct(fc.a2_mask);
    VectorXd da1 = nn::dense_backward(model.fc2, fc.a1d, fc.z2, da2, grad->fc2);
    if (use_dropout) da1 = da1.cwiseProduct(fc.a1_mask);
    const VectorXd dh = nn::dense_backward(model.fc1, fc.h, fc.z1, da1, grad->fc1) + dh_next;
    auto step = nn::lstm_step_backward(model.lstm, fc.lstm, dh, dc_next, grad->lstm);
    if (window > 0 && ii % window == 0) {
      dh_next.setZero();
      dc_next.setZero();
    } else {
      dh_next = std::move(step.dh_prev);
      dc_next = std::move(step.dc_prev);
    }
    VectorXd de = std::move(step.dx);
    if (use_dropout) de = de.cwiseProduct(fc.enc_mask);
    for (std::size_t l = model.encoder.size(); l-- > 0;) {
      de = nn::dense_backward(model.encoder[l], fc.enc_in[l], fc.enc_z[l], de, grad->encoder[l]);
    }
  }
  return result;
}

}  // namespace procest
