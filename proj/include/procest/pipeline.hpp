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
#include <string>
#include <vector>

#include "json.hpp"
#include "procest/gmm.hpp"
#include "procest/metrics.hpp"
#include "procest/regressor.hpp"
#include "procest/trace.hpp"
#include "procest/trainer.hpp"

namespace procest {

struct TraceSummary {
  std::string id;
  std::int64_t frames = 0;
  double completeness_mae = 0.0;
  double accuracy = 0.0;
  std::int64_t non_adjacent_jumps = 0;
  std::int64_t backward_transitions = 0;
};

struct EvaluationReport {
  PhaseSchema schema;
  ConfusionMatrix confusion;
  ClassificationReport classification;
  SegmentErrorReport two_set;
  CompletenessErrorReport completeness;
  RemainingTimeErrorReport remaining_time;
  std::int64_t non_adjacent_jumps = 0;
  std::vector<TraceSummary> traces;  // dataset order
};

/// Explicit > 0 wins, then PROCEST_THREADS, then the hardware count.
int resolve_threads(int requested);

/// Runs the online estimator over every trace (possibly on several threads)
/// and merges the per-trace results in dataset order. Throws DataError when a
/// trace's schema or feature width does not match the model.
EvaluationReport evaluate_dataset(const ProgressRegressor& model, const PhaseGmm& gmm,
                                  const std::vector<ProcessTrace>& traces,
                                  double rho_min = kDefaultMinCompleteness, int threads = 0);

/// Scores already-computed per-frame reports, one vector per trace.
EvaluationReport evaluate_reports(const PhaseSchema& schema, const std::vector<ProcessTrace>& traces,
                                  const std::vector<std::vector<ProgressReport>>& reports);

nlohmann::json to_json(const EvaluationReport& report);
std::string format_report_table(const EvaluationReport& report);

struct SweepRow {
  double alpha = 0.0;
  double beta = 0.0;
  double completeness_mae = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  int epochs = 0;
};

/// alpha in {0, 0.2, ..., 1}, beta = 1 - alpha. Every row trains from the
/// same initialization.
std::vector<SweepRow> sweep_alpha_beta(const std::vector<ProcessTrace>& train_set,
                                       const std::vector<ProcessTrace>& eval_set,
                                       const PhaseGmm& gmm, const RegressorConfig& model_config,
                                       std::uint64_t init_seed, TrainConfig train_config,
                                       double rho_min = kDefaultMinCompleteness,
                                       int threads = 0);

nlohmann::json to_json(const std::vector<SweepRow>& rows);
std::string format_sweep_table(const std::vector<SweepRow>& rows);

}  // namespace procest
