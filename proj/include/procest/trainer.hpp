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

#include <cstdint>
#include <functional>
#include <vector>

#include "procest/gmm.hpp"
#include "procest/nn/adam.hpp"
#include "procest/objective.hpp"
#include "procest/regressor.hpp"
#include "procest/trace.hpp"

namespace procest {

struct TrainConfig {
  int curriculum_start_cases = 2;
  double curriculum_loss_threshold = 0.05;
  int early_stop_patience = 3;
  double early_stop_delta = 1e-4;
  int max_epochs = 150;
  int bptt_window = 0;  // 0: full trace
  double dropout_rate = 0.1;
  std::uint64_t seed = 7;
  nn::AdamConfig adam;
  LossWeights weights;

  void validate() const;  // throws UsageError
};

struct EpochLog {
  int epoch = 0;  // 1-based
  int active_cases = 0;
  double completeness_loss = 0.0;
  double phase_loss = 0.0;
  double total_loss = 0.0;

  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

struct TrainResult {
  ProgressRegressor model;
  std::vector<EpochLog> log;
  bool early_stopped = false;
};

using EpochCallback = std::function<void(const EpochLog&, const ProgressRegressor&)>;

/// Trains with one Adam update per trace. The active set starts with the
/// first `curriculum_start_cases` traces and grows by one whenever an
/// epoch's mean combined loss drops below the curriculum threshold. Once all
/// traces are active, training stops after `early_stop_patience` consecutive
/// epochs whose loss changed by less than `early_stop_delta`.
TrainResult train(ProgressRegressor model, const std::vector<ProcessTrace>& dataset,
                  const PhaseGmm& gmm, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// First epoch (1-based) opening a run of `window` epochs that all lie within
/// `tolerance` of the settled value, the mean of the last `window` entries.
/// A transient plateau above the final level does not count.
int epochs_to_convergence(const std::vector<double>& series, double tolerance, int window = 3);

struct ActivationRun {
  int convergence_epoch = 0;
  int epochs_trained = 0;
  double final_mae = 0.0;           // held-out completeness MAE
  double prestart_mean = 0.0;       // mean estimate over pre-start frames
  std::vector<double> mae_by_epoch;
};

struct ActivationComparison {
  ActivationRun rtanh;
  ActivationRun sigmoid;
};

/// Trains twice from identical initial parameters, differing only in the
/// output activation, and tracks held-out MAE after every epoch.
ActivationComparison compare_activations(const std::vector<ProcessTrace>& train_set,
                                         const std::vector<ProcessTrace>& eval_set,
                                         const PhaseGmm& gmm, RegressorConfig model_config,
                                         const TrainConfig& config, std::uint64_t init_seed,
                                         double convergence_tolerance);

}  // namespace procest
