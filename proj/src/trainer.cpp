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

#include "procest/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "procest/error.hpp"
#include "procest/nn/adam.hpp"

namespace procest {

void TrainConfig::validate() const {
  if (curriculum_start_cases < 1) throw UsageError("curriculum_start_cases must be >= 1");
  if (!(curriculum_loss_threshold > 0.0)) throw UsageError("curriculum threshold must be > 0");
  if (early_stop_patience < 1) throw UsageError("early_stop_patience must be >= 1");
  if (!(early_stop_delta > 0.0)) throw UsageError("early_stop_delta must be > 0");
  if (max_epochs < 1) throw UsageError("max_epochs must be >= 1");
  if (bptt_window < 0) throw UsageError("bptt_window must be >= 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw UsageError("dropout rate must lie in [0, 1)");
  if (!(adam.learning_rate >= 0.0) || !(adam.decay >= 0.0)) {
    throw UsageError("learning rate and decay must be non-negative");
  }
  weights.validate();
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

struct PreparedTrace {
  const Eigen::MatrixXd* features;
  std::vector<double> labels;
  std::vector<int> phases;
};

}  // namespace

TrainResult train(ProgressRegressor model, const std::vector<ProcessTrace>& dataset,
                  const PhaseGmm& gmm, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (dataset.empty()) throw UsageError("train: empty training set");
  std::vector<PreparedTrace> prepared;
  prepared.reserve(dataset.size());
  for (const auto& t : dataset) {
    if (t.feature_dim() != model.config().feature_dim) {
      throw UsageError("train: trace '" + t.id + "' feature dimension does not match the model");
    }
    prepared.push_back({&t.features, label_completeness(t), t.frame_phases()});
  }

  const int total_cases = static_cast<int>(prepared.size());
  int active = std::min(config.curriculum_start_cases, total_cases);
  nn::AdamState<double> adam;
  adam.config = config.adam;
  ProgressRegressor grad = ProgressRegressor::zeros(model.config());
  auto params = model.parameters();
  const auto grad_blocks = grad.parameters();

  TrainResult result;
  int stagnant = 0;
  bool prev_full = false;
  double prev_total = 0.0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<int> order(static_cast<std::size_t>(active));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(mix(config.seed, 0x5u, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochLog entry;
    entry.epoch = epoch;
    entry.active_cases = active;
    try {
      for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const auto& p = prepared[static_cast<std::size_t>(order[pos])];
        GradientOptions options;
        options.dropout_rate = config.dropout_rate;
        options.dropout_seed = mix(config.seed, static_cast<std::uint64_t>(epoch), pos);
        options.bptt_window = config.bptt_window;
        grad.set_zero();
        const TraceLoss loss = trace_loss_and_gradient(model, {p.features, p.labels, p.phases},
                                                       gmm, config.weights, options, &grad);
        nn::adam_update<double>(params, grad_blocks, adam);
        entry.completeness_loss += loss.completeness;
        entry.phase_loss += loss.phase;
        entry.total_loss += loss.total;
      }
    } catch (const NumericError& e) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    entry.completeness_loss /= active;
    entry.phase_loss /= active;
    entry.total_loss /= active;
    if (!std::isfinite(entry.total_loss)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch));
    }
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry, model);

    const bool full = active == total_cases;
    if (full && prev_full && std::abs(entry.total_loss - prev_total) < config.early_stop_delta) {
      ++stagnant;
    } else {
      stagnant = 0;
    }
    prev_full = full;
    prev_total = entry.total_loss;
    if (stagnant >= config.early_stop_patience) {
      result.early_stopped = true;
      break;
    }
    if (!full && entry.total_loss < config.curriculum_loss_threshold) ++active;
  }
  result.model = std::move(model);
  return result;
}

int epochs_to_convergence(const std::vector<double>& series, double tolerance, int window) {
  if (window < 1) throw UsageError("convergence window must be >= 1");
  const auto n = static_cast<int>(series.size());
  if (n == 0) return 0;
  const int w = std::min(window, n);
  double settled = 0.0;
  for (int e = n - w; e < n; ++e) settled += series[static_cast<std::size_t>(e)];
  settled /= w;
  int run = 0;
  for (int e = 0; e < n; ++e) {
    run = std::abs(series[static_cast<std::size_t>(e)] - settled) <= tolerance ? run + 1 : 0;
    if (run >= w) return e - w + 2;
  }
  return n;
}

namespace {

ActivationRun run_activation(const std::vector<ProcessTrace>& train_set,
                             const std::vector<ProcessTrace>& eval_set, const PhaseGmm& gmm,
                             const RegressorConfig& model_config, const TrainConfig& config,
                             std::uint64_t init_seed, double tolerance) {
  ActivationRun run;
  const auto evaluate = [&](const ProgressRegressor& m) {
    double err = 0.0, count = 0.0;
    for (const auto& t : eval_set) {
      const auto est = m.forward(t);
      const auto labels = label_completeness(t);
      for (std::size_t i = 0; i < est.size(); ++i) err += std::abs(est[i] - labels[i]);
      count += static_cast<double>(est.size());
    }
    return err / count;
  };
  TrainResult trained = train(ProgressRegressor(model_config, init_seed), train_set, gmm, config,
                              [&](const EpochLog&, const ProgressRegressor& m) {
                                run.mae_by_epoch.push_back(evaluate(m));
                              });
  run.epochs_trained = static_cast<int>(trained.log.size());
  run.convergence_epoch = epochs_to_convergence(run.mae_by_epoch, tolerance);
  run.final_mae = run.mae_by_epoch.back();
  double pre = 0.0, pre_count = 0.0;
  for (const auto& t : eval_set) {
    if (!t.schema.boundary_start) continue;
    const auto est = trained.model.forward(t);
    const auto phases = t.frame_phases();
    for (std::size_t i = 0; i < est.size(); ++i) {
      if (phases[i] == 0) {
        pre += est[i];
        pre_count += 1.0;
      }
    }
  }
  run.prestart_mean = pre_count > 0.0 ? pre / pre_count : 0.0;
  return run;
}

}  // namespace

ActivationComparison compare_activations(const std::vector<ProcessTrace>& train_set,
                                         const std::vector<ProcessTrace>& eval_set,
                                         const PhaseGmm& gmm, RegressorConfig model_config,
                                         const TrainConfig& config, std::uint64_t init_seed,
                                         double convergence_tolerance) {
  if (eval_set.empty()) throw UsageError("compare_activations: empty evaluation set");
  ActivationComparison cmp;
  model_config.output = nn::Activation::kRtanh;
  cmp.rtanh = run_activation(train_set, eval_set, gmm, model_config, config, init_seed,
                             convergence_tolerance);
  model_config.output = nn::Activation::kSigmoid;
  cmp.sigmoid = run_activation(train_set, eval_set, gmm, model_config, config, init_seed,
                               convergence_tolerance);
  return cmp;
}

}  // namespace procest
