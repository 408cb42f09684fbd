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

#include <optional>
#include <string>
#include <vector>

#include "procest/gmm.hpp"
#include "procest/regressor.hpp"
#include "procest/trace.hpp"

namespace procest {

inline constexpr double kDefaultMinCompleteness = 0.01;

/// Rate-based estimate (tau / rho) * (1 - rho): elapsed time per unit of
/// progress times the unfinished fraction. Empty below `rho_min`.
std::optional<double> remaining_time(double rho, double tau,
                                     double rho_min = kDefaultMinCompleteness);

struct ProgressReport {
  double timestamp = 0.0;
  double completeness = 0.0;
  int phase = 0;
  std::string phase_name;
  std::optional<double> remaining_s;  // empty: unknown

  friend bool operator==(const ProgressReport&, const ProgressReport&) = default;
};

/// {"t":..,"completeness":..,"phase":"name","remaining_s":..|null}
std::string format_report_line(const ProgressReport& report);

/// Frame-by-frame estimator for one enactment at a time. Holds references to
/// the model and mixture, which must outlive it. Memory is bounded by the
/// smoothing radius.
class OnlineEstimator {
 public:
  OnlineEstimator(const ProgressRegressor& model, const PhaseGmm& gmm,
                  double rho_min = kDefaultMinCompleteness);

  /// Throws DataError when the timestamp does not advance.
  ProgressReport step(const FeatureFrame& frame);

  /// Clears recurrent state, elapsed time and the smoothing window.
  void reset();

  [[nodiscard]] double elapsed() const { return elapsed_; }
  [[nodiscard]] double completeness() const { return completeness_; }
  [[nodiscard]] std::size_t frames_seen() const { return frames_; }

 private:
  const ProgressRegressor* model_;
  const PhaseGmm* gmm_;
  double rho_min_;
  ProgressRegressor::LstmState state_;
  std::vector<double> window_;  // newest last, at most radius + 1 raw outputs
  std::optional<double> first_timestamp_;
  double last_timestamp_ = 0.0;
  double elapsed_ = 0.0;
  double completeness_ = 0.0;
  std::size_t frames_ = 0;
};

/// Runs a whole trace through a fresh estimator.
std::vector<ProgressReport> run_online(const ProgressRegressor& model, const PhaseGmm& gmm,
                                       const ProcessTrace& trace,
                                       double rho_min = kDefaultMinCompleteness);

}  // namespace procest
